#include "radcal/calibration.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "radcal/error.hpp"

namespace radcal {

namespace {

constexpr std::size_t kIntrinsicCount = 5;
constexpr std::size_t kPoseParams = 6;

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

// Observed corners of one view, split into target (X, Y) and pixel lists.
void observed_pairs(const CalibrationDataset& dataset, const CalibrationView& view, std::vector<Point2>& world,
                    std::vector<Point2>& pixels) {
  world.clear();
  pixels.clear();
  for (std::size_t j = 0; j < view.corners.size(); ++j) {
    if (!view.corners[j]) continue;
    world.emplace_back(dataset.target_points[j].x(), dataset.target_points[j].y());
    pixels.push_back(*view.corners[j]);
  }
}

void check_pose_count(std::span<const PoseRT> poses, const CalibrationDataset& dataset) {
  if (poses.size() != dataset.views.size()) {
    std::ostringstream msg;
    msg << poses.size() << " poses for " << dataset.views.size() << " views";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

// Predicted distorted pixel of target point j in view i.
Point2 predict(const CameraIntrinsics& intr, const DistortionModel& distortion, const PoseRT& pose,
               const Point3& pw, std::size_t view, std::size_t point) {
  try {
    return distort_pixel(distortion, intr, project(intr, pose, pw));
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << e.detail() << " (view " << view << ", point " << point << ")";
    throw Error(e.code(), msg.str());
  }
}

}  // namespace

std::size_t CalibrationView::observed_count() const {
  std::size_t n = 0;
  for (const auto& c : corners) n += c.has_value() ? 1 : 0;
  return n;
}

std::size_t CalibrationDataset::observation_count() const {
  std::size_t n = 0;
  for (const auto& v : views) n += v.observed_count();
  return n;
}

void CalibrationDataset::validate() const {
  if (target_points.size() < 4) {
    throw Error(ErrorCode::SchemaError, "target needs at least 4 points");
  }
  for (std::size_t j = 0; j < target_points.size(); ++j) {
    const auto& p = target_points[j];
    if (!p.allFinite() || p.z() != 0.0) {
      std::ostringstream msg;
      msg << "target point " << j << " is not a finite point on the Z = 0 plane";
      throw Error(ErrorCode::SchemaError, msg.str());
    }
  }
  if (views.size() < 3) {
    std::ostringstream msg;
    msg << "at least 3 views are required to estimate intrinsics and extrinsics, got " << views.size();
    throw Error(ErrorCode::InsufficientViews, msg.str());
  }
  for (const auto& view : views) {
    if (view.corners.size() != target_points.size()) {
      std::ostringstream msg;
      msg << "view '" << view.name << "' has " << view.corners.size() << " corners, expected "
          << target_points.size();
      throw Error(ErrorCode::CountMismatch, msg.str());
    }
    if (view.observed_count() < 4) {
      std::ostringstream msg;
      msg << "view '" << view.name << "' has " << view.observed_count() << " observed corners, need at least 4";
      throw Error(ErrorCode::DegenerateConfiguration, msg.str());
    }
    for (const auto& c : view.corners) {
      if (c && !c->allFinite()) {
        throw Error(ErrorCode::SchemaError, "view '" + view.name + "' has a non-finite corner");
      }
    }
  }
}

DistortionModel estimate_distortion_linear(const CameraIntrinsics& intr, std::span<const PoseRT> poses,
                                           const CalibrationDataset& dataset, ModelKind kind) {
  if (kind == ModelKind::DistortedToUndistorted) {
    throw Error(ErrorCode::InvalidArgument, "the D-U form is not fitted by the linear distortion step");
  }
  check_pose_count(poses, dataset);
  const int ncoef = coefficient_count(kind);

  const auto rows = static_cast<Eigen::Index>(2 * dataset.observation_count());
  MatX design(rows, ncoef);
  VecX rhs(rows);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < dataset.views.size(); ++i) {
    const auto& view = dataset.views[i];
    for (std::size_t j = 0; j < view.corners.size(); ++j) {
      if (!view.corners[j]) continue;
      Point2 xn;
      try {
        xn = project_normalized(poses[i], dataset.target_points[j]);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << e.detail() << " (view " << i << ", point " << j << ")";
        throw Error(e.code(), msg.str());
      }
      const Point2 ideal = normalized_to_pixel(intr, xn);
      const double r = xn.norm();
      double phi[2];
      switch (kind) {
        case ModelKind::EvenPoly2: phi[0] = r * r; phi[1] = r * r * r * r; break;
        case ModelKind::EvenPoly1: phi[0] = r * r; phi[1] = 0.0; break;
        default: phi[0] = r; phi[1] = r * r; break;
      }
      const Point2 offset(ideal.x() - intr.u0, ideal.y() - intr.v0);
      const Point2 shift = *view.corners[j] - ideal;
      for (int axis = 0; axis < 2; ++axis) {
        for (int c = 0; c < ncoef; ++c) design(row, c) = offset[axis] * phi[c];
        rhs(row) = shift[axis];
        ++row;
      }
    }
  }

  const Eigen::JacobiSVD<MatX> svd(design);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    throw Error(ErrorCode::RankDeficient, "radii do not spread enough to separate the distortion coefficients");
  }
  const VecX k = design.colPivHouseholderQr().solve(rhs);
  return make_model(kind, std::span<const double>(k.data(), static_cast<std::size_t>(k.size())));
}

VecX reprojection_residuals(const CameraIntrinsics& intr, const DistortionModel& distortion,
                            std::span<const PoseRT> poses, const CalibrationDataset& dataset) {
  check_pose_count(poses, dataset);
  VecX out(static_cast<Eigen::Index>(2 * dataset.observation_count()));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < dataset.views.size(); ++i) {
    const auto& view = dataset.views[i];
    for (std::size_t j = 0; j < view.corners.size(); ++j) {
      if (!view.corners[j]) continue;
      const Point2 d = *view.corners[j] - predict(intr, distortion, poses[i], dataset.target_points[j], i, j);
      out(row++) = d.x();
      out(row++) = d.y();
    }
  }
  return out;
}

double objective_j(const CameraIntrinsics& intr, const DistortionModel& distortion, std::span<const PoseRT> poses,
                   const CalibrationDataset& dataset) {
  return reprojection_residuals(intr, distortion, poses, dataset).squaredNorm();
}

std::vector<double> per_view_rms(const CameraIntrinsics& intr, const DistortionModel& distortion,
                                 std::span<const PoseRT> poses, const CalibrationDataset& dataset) {
  check_pose_count(poses, dataset);
  std::vector<double> out;
  out.reserve(dataset.views.size());
  for (std::size_t i = 0; i < dataset.views.size(); ++i) {
    const auto& view = dataset.views[i];
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < view.corners.size(); ++j) {
      if (!view.corners[j]) continue;
      sum += (*view.corners[j] - predict(intr, distortion, poses[i], dataset.target_points[j], i, j)).squaredNorm();
      ++count;
    }
    out.push_back(count > 0 ? std::sqrt(sum / static_cast<double>(count)) : 0.0);
  }
  return out;
}

VecX pack_parameters(const CameraIntrinsics& intr, const DistortionModel& distortion, std::span<const PoseRT> poses) {
  const auto k = coefficients(distortion);
  VecX x(static_cast<Eigen::Index>(kIntrinsicCount + k.size() + kPoseParams * poses.size()));
  Eigen::Index i = 0;
  x(i++) = intr.alpha;
  x(i++) = intr.beta;
  x(i++) = intr.gamma;
  x(i++) = intr.u0;
  x(i++) = intr.v0;
  for (double c : k) x(i++) = c;
  for (const auto& pose : poses) {
    x.segment<3>(i) = pose.axis_angle();
    x.segment<3>(i + 3) = pose.translation;
    i += 6;
  }
  return x;
}

void unpack_parameters(const VecX& x, CameraIntrinsics& intr, DistortionModel& distortion,
                       std::vector<PoseRT>& poses) {
  const auto ncoef = static_cast<std::size_t>(coefficient_count(kind_of(distortion)));
  const auto expected = static_cast<Eigen::Index>(kIntrinsicCount + ncoef + kPoseParams * poses.size());
  if (x.size() != expected) throw Error(ErrorCode::InvalidArgument, "parameter vector has the wrong length");
  Eigen::Index i = 0;
  intr.alpha = x(i++);
  intr.beta = x(i++);
  intr.gamma = x(i++);
  intr.u0 = x(i++);
  intr.v0 = x(i++);
  distortion = make_model(kind_of(distortion), std::span<const double>(x.data() + i, ncoef));
  i += static_cast<Eigen::Index>(ncoef);
  for (auto& pose : poses) {
    pose = PoseRT::from_axis_angle(x.segment<3>(i), x.segment<3>(i + 3));
    i += 6;
  }
}

CalibrationResult evaluate(CameraIntrinsics intr, DistortionModel distortion, std::vector<PoseRT> poses,
                           const CalibrationDataset& dataset) {
  CalibrationResult out;
  out.final_j = objective_j(intr, distortion, poses, dataset);
  out.per_view_rms = per_view_rms(intr, distortion, poses, dataset);
  out.intrinsics = intr;
  out.distortion = std::move(distortion);
  out.poses = std::move(poses);
  out.initial_j = out.final_j;
  return out;
}

CalibrationResult refine_all(const CalibrationResult& initial, const CalibrationDataset& dataset,
                             const LmOptions& opts) {
  const double initial_j = objective_j(initial.intrinsics, initial.distortion, initial.poses, dataset);

  const ResidualFn residuals = [&](const VecX& x) -> VecX {
    CameraIntrinsics intr;
    DistortionModel distortion = initial.distortion;
    std::vector<PoseRT> poses(initial.poses.size());
    unpack_parameters(x, intr, distortion, poses);
    if (!intr.valid()) {
      return VecX::Constant(static_cast<Eigen::Index>(2 * dataset.observation_count()),
                            std::numeric_limits<double>::quiet_NaN());
    }
    try {
      return reprojection_residuals(intr, distortion, poses, dataset);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonPositiveDepth && e.code() != ErrorCode::OutOfRange) throw;
      return VecX::Constant(static_cast<Eigen::Index>(2 * dataset.observation_count()),
                            std::numeric_limits<double>::quiet_NaN());
    }
  };

  const VecX x0 = pack_parameters(initial.intrinsics, initial.distortion, initial.poses);
  const LmResult lm = minimize(residuals, x0, opts);

  CameraIntrinsics intr;
  DistortionModel distortion = initial.distortion;
  std::vector<PoseRT> poses(initial.poses.size());
  if (lm.iterations == 0) {
    // Nothing accepted: hand back the input exactly.
    intr = initial.intrinsics;
    poses = initial.poses;
  } else {
    unpack_parameters(lm.x, intr, distortion, poses);
  }

  CalibrationResult out = evaluate(intr, std::move(distortion), std::move(poses), dataset);
  // Packing rotations as axis-angle can move J by rounding; never hand back
  // something worse than the input.
  int iterations = lm.iterations;
  if (std::isfinite(out.final_j) && out.final_j > initial_j &&
      out.final_j <= initial_j + 1e-12 * std::max(1.0, initial_j)) {
    out = evaluate(initial.intrinsics, initial.distortion, initial.poses, dataset);
    iterations = 0;
  }
  if (!std::isfinite(out.final_j) || out.final_j > initial_j) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "objective went from " << initial_j << " to " << out.final_j;
    throw Error(ErrorCode::OptimizerDiverged, msg.str());
  }
  out.iterations = iterations;
  out.initial_j = initial_j;
  out.cost_history = lm.cost_history;
  out.termination = lm.termination;
  return out;
}

Initialization initialize(const CalibrationDataset& dataset) {
  in_stage("dataset", [&] { dataset.validate(); });

  Initialization init;
  std::vector<Point2> world, pixels;
  for (std::size_t i = 0; i < dataset.views.size(); ++i) {
    observed_pairs(dataset, dataset.views[i], world, pixels);
    init.homographies.push_back(in_stage("homography", [&] {
      try {
        return estimate_homography(world, pixels);
      } catch (const Error& e) {
        throw Error(e.code(), e.detail() + " (view '" + dataset.views[i].name + "')");
      }
    }));
  }
  init.intrinsics = in_stage("intrinsics", [&] { return estimate_intrinsics(init.homographies); });
  for (const auto& h : init.homographies) {
    init.poses.push_back(in_stage("extrinsics", [&] { return estimate_extrinsics(init.intrinsics, h); }));
  }
  return init;
}

CalibrationResult calibrate_from(const Initialization& init, const CalibrationDataset& dataset, ModelKind kind,
                                 const LmOptions& opts) {
  const DistortionModel k0 =
      in_stage("distortion", [&] { return estimate_distortion_linear(init.intrinsics, init.poses, dataset, kind); });
  const CalibrationResult start = in_stage("distortion", [&] { return evaluate(init.intrinsics, k0, init.poses, dataset); });
  return in_stage("refinement", [&] { return refine_all(start, dataset, opts); });
}

CalibrationResult calibrate(const CalibrationDataset& dataset, ModelKind kind, const LmOptions& opts) {
  return calibrate_from(initialize(dataset), dataset, kind, opts);
}

}  // namespace radcal
