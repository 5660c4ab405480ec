#pragma once

#include <Eigen/Core>

namespace radcal {

using Point2 = Eigen::Vector2d;  // pixel (u, v) or normalized (x, y)
using Point3 = Eigen::Vector3d;  // world point; Z = 0 on the planar target
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Depths at or below this are treated as behind / on the camera plane.
inline constexpr double kMinDepth = 1e-12;

// The five-parameter pinhole matrix
//   [ alpha  gamma  u0 ]
//   [   0    beta   v0 ]
//   [   0     0      1 ]
struct CameraIntrinsics {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;
  double u0 = 0.0;
  double v0 = 0.0;

  Mat3 matrix() const;
  Mat3 inverse() const;
  // alpha, beta positive and every field finite.
  bool valid() const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

Mat3 axis_angle_to_matrix(const Vec3& w);
// Inverse of axis_angle_to_matrix; the returned angle lies in [0, pi].
Vec3 matrix_to_axis_angle(const Mat3& rotation);

// Nearest rotation (Frobenius norm) to an arbitrary 3x3 matrix.
Mat3 nearest_rotation(const Mat3& m);

struct PoseRT {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static PoseRT from_axis_angle(const Vec3& w, const Vec3& t);
  Vec3 axis_angle() const { return matrix_to_axis_angle(rotation); }
  Vec3 to_camera(const Point3& pw) const { return rotation * pw + translation; }
};

// Distortion-free pixel of a world point. Throws NonPositiveDepth when the
// camera-frame depth is <= kMinDepth.
Point2 project(const CameraIntrinsics& intr, const PoseRT& pose, const Point3& pw);

// Camera-frame point to normalized image coordinates (x, y) = (X/Z, Y/Z).
Point2 project_normalized(const PoseRT& pose, const Point3& pw);

Point2 pixel_to_normalized(const CameraIntrinsics& intr, const Point2& p);
Point2 normalized_to_pixel(const CameraIntrinsics& intr, const Point2& p);

}  // namespace radcal
