#include "radcal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "radcal/error.hpp"

namespace radcal {

namespace {

enum class Stream : std::uint32_t { Poses = 1, Noise = 2 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), index};
  return std::mt19937_64(seq);
}

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

std::vector<Point3> make_target(int rows, int cols, double square_size) {
  if (rows < 2 || cols < 2) throw Error(ErrorCode::InvalidArgument, "target grid must be at least 2x2");
  if (!(square_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "square size must be positive");
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(rows * cols));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) pts.emplace_back(i * square_size, j * square_size, 0.0);
  }
  return pts;
}

std::vector<PoseRT> sample_poses(const PoseRecipe& recipe, double target_width, const Point3& target_centre,
                                 std::uint64_t seed) {
  if (recipe.views < 1 || !(recipe.depth_min > 0.0) || recipe.depth_max < recipe.depth_min) {
    throw Error(ErrorCode::InvalidArgument, "invalid pose recipe");
  }
  auto rng = make_rng(seed, Stream::Poses, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);

  std::vector<PoseRT> poses;
  for (int v = 0; v < recipe.views; ++v) {
    // Tilt about a random in-plane axis; at least 30% of the maximum so that
    // no view is close to fronto-parallel.
    const double axis_angle = 2.0 * std::numbers::pi * unit(rng);
    const double tilt = deg2rad(recipe.max_tilt_deg) * (0.3 + 0.7 * unit(rng));
    const double roll = deg2rad(recipe.max_roll_deg) * sym(rng);
    const Mat3 r = axis_angle_to_matrix(Vec3(0.0, 0.0, roll)) *
                   axis_angle_to_matrix(tilt * Vec3(std::cos(axis_angle), std::sin(axis_angle), 0.0));

    const double depth = target_width * (recipe.depth_min + (recipe.depth_max - recipe.depth_min) * unit(rng));
    const Vec3 centre_cam(recipe.max_offset * depth * sym(rng), recipe.max_offset * depth * sym(rng), depth);
    poses.push_back(PoseRT{r, centre_cam - r * target_centre});
  }
  return poses;
}

std::pair<CalibrationDataset, CalibrationResult> synth_views(const SynthSpec& spec) {
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
  if (!spec.intrinsics.valid()) throw Error(ErrorCode::InvalidArgument, "invalid intrinsics");

  CalibrationDataset dataset;
  dataset.target_points = make_target(spec.grid_rows, spec.grid_cols, spec.square_size);

  std::vector<PoseRT> poses = spec.poses;
  if (poses.empty()) {
    const double width = spec.square_size * (std::max(spec.grid_rows, spec.grid_cols) - 1);
    const Point3 centre(0.5 * spec.square_size * (spec.grid_rows - 1), 0.5 * spec.square_size * (spec.grid_cols - 1),
                        0.0);
    poses = sample_poses(spec.recipe, width, centre, spec.rng_seed);
  }

  const double r_max = valid_radius_range(spec.distortion).r_max;
  for (std::size_t v = 0; v < poses.size(); ++v) {
    auto rng = make_rng(spec.rng_seed, Stream::Noise, static_cast<std::uint32_t>(v));
    std::normal_distribution<double> noise(0.0, 1.0);

    CalibrationView view;
    view.name = "view" + std::to_string(v + 1);
    for (std::size_t j = 0; j < dataset.target_points.size(); ++j) {
      const Point2 xn = project_normalized(poses[v], dataset.target_points[j]);
      if (!(xn.norm() < r_max)) {
        std::ostringstream msg;
        msg << "pose " << v << " puts point " << j << " at normalized radius " << xn.norm()
            << " beyond the invertible limit " << r_max;
        throw Error(ErrorCode::RadiusOutOfRange, msg.str());
      }
      // Same evaluation path as the objective, so noiseless data has J = 0 exactly.
      const Point2 ideal = project(spec.intrinsics, poses[v], dataset.target_points[j]);
      Point2 pd = distort_pixel(spec.distortion, spec.intrinsics, ideal);
      if (spec.noise_sigma > 0.0) {
        const double du = noise(rng);
        const double dv = noise(rng);
        pd += spec.noise_sigma * Point2(du, dv);
      }
      view.corners.emplace_back(pd);
    }
    dataset.views.push_back(std::move(view));
  }

  CalibrationResult truth = evaluate(spec.intrinsics, spec.distortion, poses, dataset);
  return {std::move(dataset), std::move(truth)};
}

}  // namespace radcal
