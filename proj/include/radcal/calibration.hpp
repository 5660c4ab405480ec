#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radcal/distortion.hpp"
#include "radcal/geometry.hpp"
#include "radcal/optimizer.hpp"

namespace radcal {

// One image of the planar target. corners[j] is the observed (distorted)
// pixel of target point j, or empty when the corner was not extracted.
struct CalibrationView {
  std::string name;
  std::vector<std::optional<Point2>> corners;

  std::size_t observed_count() const;
};

struct CalibrationDataset {
  std::vector<Point3> target_points;  // Z = 0
  std::vector<CalibrationView> views;

  // Throws SchemaError / CountMismatch / InsufficientViews /
  // DegenerateConfiguration when the dataset cannot be calibrated.
  void validate() const;
  std::size_t observation_count() const;
};

struct CalibrationResult {
  CameraIntrinsics intrinsics;
  DistortionModel distortion;
  std::vector<PoseRT> poses;
  double final_j = 0.0;
  std::vector<double> per_view_rms;
  int iterations = 0;

  // Optimizer trace; empty for results that were not refined.
  double initial_j = 0.0;
  std::vector<double> cost_history;
  std::optional<Termination> termination;
};

// Closed-form initial values shared by every distortion model.
struct Initialization {
  std::vector<Mat3> homographies;
  CameraIntrinsics intrinsics;
  std::vector<PoseRT> poses;
};

// Normalized DLT from target-plane (X, Y) to pixels. The result has unit
// Frobenius norm and maps the first target point to a positive third
// coordinate.
Mat3 estimate_homography(std::span<const Point2> world, std::span<const Point2> pixels);

// Closed-form intrinsics (including skew) from >= 3 plane homographies.
CameraIntrinsics estimate_intrinsics(std::span<const Mat3> homographies);

PoseRT estimate_extrinsics(const CameraIntrinsics& intr, const Mat3& homography);

// Linear least squares for the distortion coefficients given intrinsics and
// poses. `kind` must be one of the three U-D models.
DistortionModel estimate_distortion_linear(const CameraIntrinsics& intr, std::span<const PoseRT> poses,
                                           const CalibrationDataset& dataset, ModelKind kind);

// Observed minus predicted pixel, (du, dv) per observed corner, view-major.
VecX reprojection_residuals(const CameraIntrinsics& intr, const DistortionModel& distortion,
                            std::span<const PoseRT> poses, const CalibrationDataset& dataset);

// Sum of squared reprojection errors over every observed corner.
double objective_j(const CameraIntrinsics& intr, const DistortionModel& distortion, std::span<const PoseRT> poses,
                   const CalibrationDataset& dataset);

std::vector<double> per_view_rms(const CameraIntrinsics& intr, const DistortionModel& distortion,
                                 std::span<const PoseRT> poses, const CalibrationDataset& dataset);

// Flat parameter vector: alpha, beta, gamma, u0, v0, k..., then per view
// axis-angle (3) and translation (3). unpack_parameters takes the model kind
// and view count from `distortion` and `poses`.
VecX pack_parameters(const CameraIntrinsics& intr, const DistortionModel& distortion, std::span<const PoseRT> poses);
void unpack_parameters(const VecX& x, CameraIntrinsics& intr, DistortionModel& distortion, std::vector<PoseRT>& poses);

// Fills final_j and per_view_rms from the stored parameters.
CalibrationResult evaluate(CameraIntrinsics intr, DistortionModel distortion, std::vector<PoseRT> poses,
                           const CalibrationDataset& dataset);

CalibrationResult refine_all(const CalibrationResult& initial, const CalibrationDataset& dataset,
                             const LmOptions& opts = {});

Initialization initialize(const CalibrationDataset& dataset);

// Steps 3 and 4 on top of a shared initialization.
CalibrationResult calibrate_from(const Initialization& init, const CalibrationDataset& dataset, ModelKind kind,
                                 const LmOptions& opts = {});

// Homographies, intrinsics, extrinsics, linear distortion, joint refinement.
// Errors carry the name of the failing stage.
CalibrationResult calibrate(const CalibrationDataset& dataset, ModelKind kind, const LmOptions& opts = {});

}  // namespace radcal
