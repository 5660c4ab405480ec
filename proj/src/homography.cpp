// Closed-form planar calibration: homographies, intrinsics from the image of
// the absolute conic, and per-view extrinsics.

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "radcal/calibration.hpp"
#include "radcal/error.hpp"

namespace radcal {

namespace {

// Translate to the centroid and scale the mean distance to sqrt(2).
Mat3 hartley_normalization(std::span<const Point2> pts) {
  Point2 centroid = Point2::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  double mean_dist = 0.0;
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Point2 d = p - centroid;
    mean_dist += d.norm();
    scatter += d * d.transpose();
  }
  mean_dist /= static_cast<double>(pts.size());

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(scatter);
  const double largest = eig.eigenvalues()(1);
  if (!(largest > 0.0) || eig.eigenvalues()(0) <= 1e-12 * largest) {
    throw Error(ErrorCode::DegenerateConfiguration, "points are collinear or coincident");
  }

  const double s = std::sqrt(2.0) / mean_dist;
  Mat3 t;
  t << s, 0.0, -s * centroid.x(),  //
      0.0, s, -s * centroid.y(),   //
      0.0, 0.0, 1.0;
  return t;
}

Point2 apply(const Mat3& t, const Point2& p) {
  const Vec3 q = t * p.homogeneous();
  return q.hnormalized();
}

// Row of the constraint matrix: v_ij built from columns i and j of H.
Eigen::Matrix<double, 1, 6> conic_row(const Mat3& h, int i, int j) {
  Eigen::Matrix<double, 1, 6> v;
  v << h(0, i) * h(0, j),                          //
      h(0, i) * h(1, j) + h(1, i) * h(0, j),       //
      h(1, i) * h(1, j),                           //
      h(2, i) * h(0, j) + h(0, i) * h(2, j),       //
      h(2, i) * h(1, j) + h(1, i) * h(2, j),       //
      h(2, i) * h(2, j);
  return v;
}

}  // namespace

Mat3 estimate_homography(std::span<const Point2> world, std::span<const Point2> pixels) {
  if (world.size() != pixels.size()) {
    throw Error(ErrorCode::InvalidArgument, "world and pixel point counts differ");
  }
  if (world.size() < 4) {
    std::ostringstream msg;
    msg << "a homography needs at least 4 correspondences, got " << world.size();
    throw Error(ErrorCode::DegenerateConfiguration, msg.str());
  }

  const Mat3 tw = hartley_normalization(world);
  const Mat3 tp = hartley_normalization(pixels);

  const auto n = static_cast<Eigen::Index>(world.size());
  MatX design(2 * n, 9);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Point2 w = apply(tw, world[k]);
    const Point2 p = apply(tp, pixels[k]);
    design.row(2 * k) << -w.x(), -w.y(), -1.0, 0.0, 0.0, 0.0, p.x() * w.x(), p.x() * w.y(), p.x();
    design.row(2 * k + 1) << 0.0, 0.0, 0.0, -w.x(), -w.y(), -1.0, p.y() * w.x(), p.y() * w.y(), p.y();
  }

  const Eigen::JacobiSVD<MatX> svd(design, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Eight independent constraints are needed; a second null direction means
  // the correspondences do not pin down H.
  if (sv.size() < 8 || sv(7) <= 1e-10 * sv(0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "correspondences do not determine a unique homography");
  }
  const VecX h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2),  //
      h(3), h(4), h(5),    //
      h(6), h(7), h(8);

  Mat3 out = tp.inverse() * hn * tw;
  out /= out.norm();
  if ((out * world[0].homogeneous()).z() < 0.0) out = -out;
  return out;
}

CameraIntrinsics estimate_intrinsics(std::span<const Mat3> homographies) {
  if (homographies.size() < 3) {
    std::ostringstream msg;
    msg << "at least 3 views are required to estimate all five intrinsics, got " << homographies.size();
    throw Error(ErrorCode::InsufficientViews, msg.str());
  }

  MatX v(2 * homographies.size(), 6);
  for (std::size_t i = 0; i < homographies.size(); ++i) {
    const Mat3 h = homographies[i] / homographies[i].norm();
    const auto r = static_cast<Eigen::Index>(2 * i);
    v.row(r) = conic_row(h, 0, 1);
    v.row(r + 1) = conic_row(h, 0, 0) - conic_row(h, 1, 1);
  }

  const Eigen::JacobiSVD<MatX> svd(v, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // The conic must be the only (near) null direction.
  if (sv(4) <= 1e-8 * sv(0)) {
    throw Error(ErrorCode::IllConditioned, "view orientations do not constrain the intrinsics (near-parallel planes)");
  }

  VecX b = svd.matrixV().col(5);
  if (b(0) < 0.0) b = -b;
  const double b11 = b(0), b12 = b(1), b22 = b(2), b13 = b(3), b23 = b(4), b33 = b(5);

  const double den = b11 * b22 - b12 * b12;
  if (!(b11 > 0.0) || !(den > 0.0)) {
    throw Error(ErrorCode::IllConditioned, "estimated absolute conic is not positive definite");
  }
  const double v0 = (b12 * b13 - b11 * b23) / den;
  const double lambda = b33 - (b13 * b13 + v0 * (b12 * b13 - b11 * b23)) / b11;
  if (!(lambda / b11 > 0.0)) {
    throw Error(ErrorCode::IllConditioned, "estimated absolute conic is not positive definite");
  }

  CameraIntrinsics intr;
  intr.alpha = std::sqrt(lambda / b11);
  intr.beta = std::sqrt(lambda * b11 / den);
  intr.gamma = -b12 * intr.alpha * intr.alpha * intr.beta / lambda;
  intr.u0 = intr.gamma * v0 / intr.beta - b13 * intr.alpha * intr.alpha / lambda;
  intr.v0 = v0;
  if (!intr.valid()) throw Error(ErrorCode::IllConditioned, "intrinsics extraction produced non-finite values");
  return intr;
}

PoseRT estimate_extrinsics(const CameraIntrinsics& intr, const Mat3& homography) {
  const Mat3 ainv = intr.inverse();
  const Vec3 a1 = ainv * homography.col(0);
  const Vec3 a2 = ainv * homography.col(1);
  const Vec3 a3 = ainv * homography.col(2);
  const double n1 = a1.norm();
  if (!(n1 > 0.0) || !std::isfinite(n1)) throw Error(ErrorCode::DegenerateConfiguration, "singular homography");

  double lambda = 1.0 / n1;
  // Sign choice puts the target origin in front of the camera.
  if (lambda * a3.z() < 0.0) lambda = -lambda;
  const Vec3 t = lambda * a3;
  if (!(t.z() > kMinDepth)) {
    throw Error(ErrorCode::BehindCamera, "no sign of the homography places the target in front of the camera");
  }

  const Vec3 r1 = lambda * a1;
  const Vec3 r2 = lambda * a2;
  Mat3 r;
  r.col(0) = r1;
  r.col(1) = r2;
  r.col(2) = r1.cross(r2);
  return PoseRT{nearest_rotation(r), t};
}

}  // namespace radcal
