#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "radcal/calibration.hpp"

namespace radcal {

// Random pose recipe: the target centre sits near the optical axis at a depth
// of depth_min..depth_max target widths, tilted by up to max_tilt_deg.
struct PoseRecipe {
  int views = 5;
  double max_tilt_deg = 30.0;
  double depth_min = 3.0;  // in target widths
  double depth_max = 5.0;
  double max_roll_deg = 15.0;
  double max_offset = 0.1;  // lateral offset of the target centre, fraction of depth
};

struct SynthSpec {
  int grid_rows = 8;
  int grid_cols = 8;
  double square_size = 30.0;
  CameraIntrinsics intrinsics{832.5, 832.5, 0.2, 304.0, 206.5};
  DistortionModel distortion = QuadCubic{-0.12, -0.14};
  std::vector<PoseRT> poses;  // used as given when non-empty
  PoseRecipe recipe;
  double noise_sigma = 0.0;  // pixels
  std::uint64_t rng_seed = 1;
};

// Row-major grid (i s, j s, 0) for i < rows, j < cols.
std::vector<Point3> make_target(int rows, int cols, double square_size);

std::vector<PoseRT> sample_poses(const PoseRecipe& recipe, double target_width, const Point3& target_centre,
                                 std::uint64_t seed);

// Projects, distorts and perturbs the target in every pose. The returned
// ground truth holds the exact parameters and J at those parameters.
// Throws RadiusOutOfRange when a corner falls outside the invertible region.
std::pair<CalibrationDataset, CalibrationResult> synth_views(const SynthSpec& spec);

}  // namespace radcal
