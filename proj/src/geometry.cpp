#include "radcal/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "radcal/error.hpp"

namespace radcal {

Mat3 CameraIntrinsics::matrix() const {
  Mat3 a;
  a << alpha, gamma, u0,  //
      0.0, beta, v0,      //
      0.0, 0.0, 1.0;
  return a;
}

Mat3 CameraIntrinsics::inverse() const {
  // Closed-form inverse of the upper-triangular matrix.
  Mat3 inv;
  inv << 1.0 / alpha, -gamma / (alpha * beta), (gamma * v0 - beta * u0) / (alpha * beta),  //
      0.0, 1.0 / beta, -v0 / beta,                                                         //
      0.0, 0.0, 1.0;
  return inv;
}

bool CameraIntrinsics::valid() const {
  return std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma) && std::isfinite(u0) &&
         std::isfinite(v0) && alpha > 0.0 && beta > 0.0;
}

Mat3 axis_angle_to_matrix(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  Mat3 k;
  k << 0.0, -w.z(), w.y(),  //
      w.z(), 0.0, -w.x(),   //
      -w.y(), w.x(), 0.0;
  double a, b;
  if (theta2 < 1e-8) {
    // Taylor series of sin(t)/t and (1 - cos(t))/t^2; exact to double precision here.
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 matrix_to_axis_angle(const Mat3& rotation) {
  // Through the unit quaternion: stable near both 0 and pi.
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-300) return Vec3::Zero();
  const double theta = 2.0 * std::atan2(s, q.w());
  return v * (theta / s);
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

PoseRT PoseRT::from_axis_angle(const Vec3& w, const Vec3& t) { return PoseRT{axis_angle_to_matrix(w), t}; }

Point2 project_normalized(const PoseRT& pose, const Point3& pw) {
  const Vec3 pc = pose.to_camera(pw);
  if (!(pc.z() > kMinDepth)) {
    std::ostringstream msg;
    msg << "camera-frame depth " << pc.z() << " is not positive";
    throw Error(ErrorCode::NonPositiveDepth, msg.str());
  }
  return {pc.x() / pc.z(), pc.y() / pc.z()};
}

Point2 project(const CameraIntrinsics& intr, const PoseRT& pose, const Point3& pw) {
  return normalized_to_pixel(intr, project_normalized(pose, pw));
}

Point2 pixel_to_normalized(const CameraIntrinsics& intr, const Point2& p) {
  const double y = (p.y() - intr.v0) / intr.beta;
  const double x = (p.x() - intr.u0 - intr.gamma * y) / intr.alpha;
  return {x, y};
}

Point2 normalized_to_pixel(const CameraIntrinsics& intr, const Point2& p) {
  return {intr.alpha * p.x() + intr.gamma * p.y() + intr.u0, intr.beta * p.y() + intr.v0};
}

}  // namespace radcal
