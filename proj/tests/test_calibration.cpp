#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>

#include "oracles.hpp"
#include "radcal/calibration.hpp"
#include "radcal/error.hpp"
#include "radcal/synth.hpp"

using namespace radcal;

namespace {

std::vector<Point2> plane_xy(const std::vector<Point3>& pts) {
  std::vector<Point2> out;
  for (const auto& p : pts) out.emplace_back(p.x(), p.y());
  return out;
}

std::vector<Point2> observed(const CalibrationView& v) {
  std::vector<Point2> out;
  for (const auto& c : v.corners) out.push_back(*c);
  return out;
}

// Ideal pinhole data without distortion.
std::pair<CalibrationDataset, CalibrationResult> undistorted_data(double sigma = 0.0, std::uint64_t seed = 3) {
  SynthSpec s;
  s.distortion = EvenPoly1{0.0};
  s.noise_sigma = sigma;
  s.rng_seed = seed;
  return synth_views(s);
}

Mat3 normalized_h(const Mat3& h) {
  Mat3 out = h / h.norm();
  if (out(2, 2) < 0.0) out = -out;
  return out;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("estimate_homography") {
  SUBCASE("identity") {
    const std::vector<Point2> pts{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.3}};
    const Mat3 h = estimate_homography(pts, pts);
    CHECK((normalized_h(h) - Mat3::Identity() / std::sqrt(3.0)).norm() < 1e-12);
    CHECK(h.norm() == doctest::Approx(1.0));
  }
  SUBCASE("recovers a random homography") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      Mat3 truth;
      truth << 800 + 50 * u(rng), 10 * u(rng), 300 + 20 * u(rng), 10 * u(rng), 800 + 50 * u(rng), 200 + 20 * u(rng),
          1e-3 * u(rng), 1e-3 * u(rng), 1.0;
      std::vector<Point2> world, pix;
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
          const Vec3 w(0.1 * i, 0.1 * j, 1.0);
          const Vec3 m = truth * w;
          world.emplace_back(w.x(), w.y());
          pix.emplace_back(m.x() / m.z(), m.y() / m.z());
        }
      }
      const Mat3 h = estimate_homography(world, pix);
      CHECK((normalized_h(h) - normalized_h(truth)).norm() < 1e-9);
      CHECK((h * Vec3(world[0].x(), world[0].y(), 1.0)).z() > 0.0);
    }
  }
  SUBCASE("degenerate inputs") {
    const std::vector<Point2> three{{0, 0}, {1, 0}, {0, 1}};
    CHECK(code_of([&] { estimate_homography(three, three); }) == ErrorCode::DegenerateConfiguration);
    const std::vector<Point2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}};
    CHECK(code_of([&] { estimate_homography(line, line); }) == ErrorCode::DegenerateConfiguration);
  }
}

TEST_CASE("estimate_intrinsics") {
  auto [data, truth] = undistorted_data();
  std::vector<Mat3> hs;
  const auto world = plane_xy(data.target_points);
  for (const auto& v : data.views) hs.push_back(estimate_homography(world, observed(v)));

  const CameraIntrinsics a = estimate_intrinsics(hs);
  const CameraIntrinsics& t = truth.intrinsics;
  CHECK(rel(a.alpha, t.alpha) < 1e-6);
  CHECK(rel(a.beta, t.beta) < 1e-6);
  CHECK(rel(a.u0, t.u0) < 1e-6);
  CHECK(rel(a.v0, t.v0) < 1e-6);
  CHECK(std::abs(a.gamma - t.gamma) < 1e-4);

  SUBCASE("zero skew") {
    SynthSpec s;
    s.distortion = EvenPoly1{0.0};
    s.intrinsics.gamma = 0.0;
    auto [d0, t0] = synth_views(s);
    std::vector<Mat3> h0;
    for (const auto& v : d0.views) h0.push_back(estimate_homography(world, observed(v)));
    CHECK(std::abs(estimate_intrinsics(h0).gamma) < 1e-4);
  }
  SUBCASE("too few views") {
    CHECK(code_of([&] { estimate_intrinsics(std::span(hs).first(2)); }) == ErrorCode::InsufficientViews);
  }
  SUBCASE("identical orientations") {
    const std::vector<Mat3> same{hs[0], hs[0], hs[0]};
    CHECK(code_of([&] { estimate_intrinsics(same); }) == ErrorCode::IllConditioned);
  }
}

TEST_CASE("estimate_extrinsics") {
  auto [data, truth] = undistorted_data();
  const auto world = plane_xy(data.target_points);
  for (std::size_t i = 0; i < data.views.size(); ++i) {
    const Mat3 h = estimate_homography(world, observed(data.views[i]));
    const PoseRT p = estimate_extrinsics(truth.intrinsics, h);
    CHECK((p.rotation - truth.poses[i].rotation).norm() < 1e-8);
    CHECK((p.translation - truth.poses[i].translation).norm() < 1e-8 * truth.poses[i].translation.norm());
    CHECK((p.rotation.transpose() * p.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(p.translation.z() > 0.0);
    // The sign of H does not matter.
    const PoseRT q = estimate_extrinsics(truth.intrinsics, -h);
    CHECK((q.rotation - p.rotation).norm() < 1e-12);
  }
}

TEST_CASE("estimate_distortion_linear") {
  SUBCASE("zero distortion") {
    auto [data, truth] = undistorted_data();
    const auto k = coefficients(estimate_distortion_linear(truth.intrinsics, truth.poses, data, ModelKind::QuadCubic));
    CHECK(std::abs(k[0]) < 1e-9);
    CHECK(std::abs(k[1]) < 1e-9);
  }
  SUBCASE("exact recovery with true intrinsics and poses") {
    SynthSpec s;
    auto [data, truth] = synth_views(s);
    const auto m = estimate_distortion_linear(truth.intrinsics, truth.poses, data, ModelKind::QuadCubic);
    CHECK(std::abs(std::get<QuadCubic>(m).k1 + 0.12) < 1e-6);
    CHECK(std::abs(std::get<QuadCubic>(m).k2 + 0.14) < 1e-6);
  }
  SUBCASE("nested models") {
    SynthSpec s;
    s.distortion = EvenPoly2{-0.2286, 0.1905};
    auto [data, truth] = synth_views(s);
    const auto full = estimate_distortion_linear(truth.intrinsics, truth.poses, data, ModelKind::EvenPoly2);
    const auto one = estimate_distortion_linear(truth.intrinsics, truth.poses, data, ModelKind::EvenPoly1);
    const double j_full = objective_j(truth.intrinsics, full, truth.poses, data);
    const double j_one = objective_j(truth.intrinsics, one, truth.poses, data);
    CHECK(j_full < 1e-12);
    CHECK(j_one > 1e-3);
    CHECK(j_one > j_full);
  }
  SUBCASE("rank deficient") {
    // Every corner at the same normalized radius makes the columns proportional.
    CalibrationDataset ring;
    ring.target_points = {{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}};
    const std::vector<PoseRT> poses(3, PoseRT{Mat3::Identity(), Vec3(0.0, 0.0, 5.0)});
    const CameraIntrinsics a{800.0, 800.0, 0.0, 320.0, 240.0};
    for (int i = 0; i < 3; ++i) {
      CalibrationView v;
      for (const auto& p : ring.target_points) v.corners.emplace_back(project(a, poses[0], p) * 1.01);
      ring.views.push_back(v);
    }
    CHECK(code_of([&] { estimate_distortion_linear(a, poses, ring, ModelKind::QuadCubic); }) ==
          ErrorCode::RankDeficient);
    CHECK_NOTHROW(estimate_distortion_linear(a, poses, ring, ModelKind::EvenPoly1));
  }
}

TEST_CASE("objective_j") {
  auto [data, truth] = synth_views(SynthSpec{});
  CHECK(objective_j(truth.intrinsics, truth.distortion, truth.poses, data) <= 1e-16 * 1e6);

  SUBCASE("matches an independent double loop") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      CameraIntrinsics a = truth.intrinsics;
      a.alpha *= 1.0 + 0.01 * u(rng);
      a.gamma += u(rng);
      a.u0 += 5.0 * u(rng);
      const DistortionModel m = QuadCubic{-0.12 + 0.02 * u(rng), -0.14 + 0.02 * u(rng)};
      std::vector<PoseRT> poses = truth.poses;
      for (auto& p : poses) p.translation += Vec3(u(rng), u(rng), u(rng));
      const double lib = objective_j(a, m, poses, data);
      const double ref = oracle::objective_double_loop(a, m, poses, data);
      CHECK(lib == doctest::Approx(ref).epsilon(1e-12));
    }
  }
  SUBCASE("principal point shift on undistorted data") {
    auto [flat, ft] = undistorted_data();
    CameraIntrinsics a = ft.intrinsics;
    a.u0 += 1.0;
    // With zero distortion every predicted u moves by exactly one pixel.
    const double n = static_cast<double>(flat.observation_count());
    CHECK(objective_j(a, ft.distortion, ft.poses, flat) == doctest::Approx(n).epsilon(1e-9));
    CHECK(objective_j(a, truth.distortion, truth.poses, data) ==
          doctest::Approx(oracle::objective_double_loop(a, truth.distortion, truth.poses, data)).epsilon(1e-12));
  }
  SUBCASE("invariant under point permutation") {
    SynthSpec s;
    s.noise_sigma = 0.5;
    auto [noisy, nt] = synth_views(s);
    CalibrationDataset shuffled = noisy;
    std::vector<std::size_t> order(noisy.target_points.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(5));
    for (std::size_t j = 0; j < order.size(); ++j) {
      shuffled.target_points[j] = noisy.target_points[order[j]];
      for (std::size_t i = 0; i < noisy.views.size(); ++i) shuffled.views[i].corners[j] = noisy.views[i].corners[order[j]];
    }
    const double a = objective_j(nt.intrinsics, nt.distortion, nt.poses, noisy);
    const double b = objective_j(nt.intrinsics, nt.distortion, nt.poses, shuffled);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  SUBCASE("missing corners are skipped") {
    CalibrationDataset partial = data;
    partial.views[1].corners[7].reset();
    CHECK(reprojection_residuals(truth.intrinsics, truth.distortion, truth.poses, partial).size() ==
          2 * static_cast<Eigen::Index>(data.observation_count() - 1));
  }
  SUBCASE("point behind the camera") {
    std::vector<PoseRT> poses = truth.poses;
    poses[2].translation.z() = -poses[2].translation.z();
    try {
      objective_j(truth.intrinsics, truth.distortion, poses, data);
      FAIL("expected NonPositiveDepth");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonPositiveDepth);
      CHECK(std::string(e.what()).find("view 2") != std::string::npos);
    }
  }
}

TEST_CASE("pack and unpack") {
  auto [data, truth] = synth_views(SynthSpec{});
  const VecX x = pack_parameters(truth.intrinsics, truth.distortion, truth.poses);
  CHECK(x.size() == 5 + 2 + 6 * static_cast<Eigen::Index>(truth.poses.size()));
  CameraIntrinsics a;
  DistortionModel m = QuadCubic{};
  std::vector<PoseRT> poses(truth.poses.size());
  unpack_parameters(x, a, m, poses);
  CHECK(a == truth.intrinsics);
  CHECK(std::get<QuadCubic>(m).k1 == std::get<QuadCubic>(truth.distortion).k1);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK((poses[i].rotation - truth.poses[i].rotation).norm() < 1e-14);
    CHECK(poses[i].translation == truth.poses[i].translation);
  }
}

TEST_CASE("refine_all") {
  auto [data, truth] = synth_views(SynthSpec{});

  SUBCASE("starting at the truth") {
    const CalibrationResult out = refine_all(truth, data);
    CHECK(out.final_j <= truth.final_j);
    CHECK(out.intrinsics == truth.intrinsics);
    CHECK(out.iterations == 0);
  }
  SUBCASE("one percent perturbation") {
    CalibrationResult start = truth;
    start.intrinsics.alpha *= 1.01;
    start.intrinsics.beta *= 0.99;
    start.intrinsics.u0 *= 1.01;
    start.intrinsics.v0 *= 0.99;
    start.distortion = QuadCubic{-0.12 * 1.01, -0.14 * 0.99};
    for (auto& p : start.poses) p.translation *= 1.01;
    start = evaluate(start.intrinsics, start.distortion, start.poses, data);
    const CalibrationResult out = refine_all(start, data);
    CHECK(out.final_j <= 1e-12);
    CHECK(rel(out.intrinsics.alpha, truth.intrinsics.alpha) < 1e-6);
    CHECK(rel(out.intrinsics.v0, truth.intrinsics.v0) < 1e-6);
    CHECK(rel(out.intrinsics.gamma, truth.intrinsics.gamma) < 1e-6);
    CHECK(rel(std::get<QuadCubic>(out.distortion).k2, -0.14) < 1e-6);
    CHECK(out.initial_j == doctest::Approx(start.final_j));
    CHECK(out.termination.has_value());
  }
  SUBCASE("noisy data strictly descends") {
    SynthSpec s;
    s.noise_sigma = 0.5;
    auto [noisy, nt] = synth_views(s);
    const Initialization init = initialize(noisy);
    const CalibrationResult start = evaluate(
        init.intrinsics, estimate_distortion_linear(init.intrinsics, init.poses, noisy, ModelKind::QuadCubic),
        init.poses, noisy);
    const CalibrationResult out = refine_all(start, noisy);
    CHECK(out.final_j < start.final_j);
    CHECK(out.final_j == doctest::Approx(objective_j(out.intrinsics, out.distortion, out.poses, noisy)).epsilon(1e-12));
    for (std::size_t i = 1; i < out.cost_history.size(); ++i) CHECK(out.cost_history[i] <= out.cost_history[i - 1]);
  }
}

TEST_CASE("calibrate") {
  SUBCASE("noiseless recovery for every model") {
    const std::vector<std::pair<ModelKind, DistortionModel>> cases{
        {ModelKind::EvenPoly2, EvenPoly2{-0.2286, 0.1905}},
        {ModelKind::EvenPoly1, EvenPoly1{-0.2}},
        {ModelKind::QuadCubic, QuadCubic{-0.0215, -0.1566}},
    };
    for (const auto& [kind, model] : cases) {
      SynthSpec s;
      s.distortion = model;
      auto [data, truth] = synth_views(s);
      const CalibrationResult out = calibrate(data, kind);
      CHECK(out.final_j <= 1e-10);
      CHECK(rel(out.intrinsics.alpha, truth.intrinsics.alpha) < 1e-6);
      CHECK(rel(out.intrinsics.gamma, truth.intrinsics.gamma) < 1e-6);
      const auto k = coefficients(out.distortion);
      const auto kt = coefficients(truth.distortion);
      for (std::size_t i = 0; i < k.size(); ++i) CHECK(rel(k[i], kt[i]) < 1e-6);
    }
  }
  SUBCASE("two views") {
    auto [data, truth] = synth_views(SynthSpec{});
    data.views.resize(2);
    try {
      calibrate(data, ModelKind::QuadCubic);
      FAIL("expected InsufficientViews");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientViews);
    }
  }
  SUBCASE("poly2 on undistorted data") {
    auto [data, truth] = undistorted_data(0.3, 9);
    const CalibrationResult out = calibrate(data, ModelKind::EvenPoly1);
    CHECK(std::abs(std::get<EvenPoly1>(out.distortion).k1) < 5e-3);
    const double n = static_cast<double>(data.observation_count());
    CHECK(out.final_j < 1.3 * 2.0 * n * 0.09);
    CHECK(out.final_j <= truth.final_j);
  }
  SUBCASE("shared initialization is identical across models") {
    SynthSpec s;
    s.noise_sigma = 0.3;
    auto [data, truth] = synth_views(s);
    const Initialization a = initialize(data);
    const Initialization b = initialize(data);
    CHECK(std::memcmp(&a.intrinsics, &b.intrinsics, sizeof(CameraIntrinsics)) == 0);
    for (std::size_t i = 0; i < a.poses.size(); ++i) {
      CHECK(a.poses[i].rotation == b.poses[i].rotation);
      CHECK(a.poses[i].translation == b.poses[i].translation);
    }
    // calibrate and calibrate_from give the same answer on the same input.
    const CalibrationResult x = calibrate(data, ModelKind::EvenPoly2);
    const CalibrationResult y = calibrate_from(a, data, ModelKind::EvenPoly2);
    CHECK(x.final_j == y.final_j);
  }
  SUBCASE("stage labels") {
    auto [data, truth] = synth_views(SynthSpec{});
    for (auto& v : data.views) v.corners = data.views[0].corners;
    try {
      calibrate(data, ModelKind::QuadCubic);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.stage() == "intrinsics");
    }
  }
}

TEST_CASE("dataset validation") {
  auto [data, truth] = synth_views(SynthSpec{});
  CHECK_NOTHROW(data.validate());

  CalibrationDataset short_view = data;
  short_view.views[1].corners.pop_back();
  CHECK(code_of([&] { short_view.validate(); }) == ErrorCode::CountMismatch);

  CalibrationDataset sparse = data;
  for (std::size_t j = 3; j < sparse.target_points.size(); ++j) sparse.views[0].corners[j].reset();
  CHECK(code_of([&] { sparse.validate(); }) == ErrorCode::DegenerateConfiguration);

  CalibrationDataset raised = data;
  raised.target_points[0].z() = 1.0;
  CHECK(code_of([&] { raised.validate(); }) == ErrorCode::SchemaError);
}
