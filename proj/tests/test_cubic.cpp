#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "radcal/cubic.hpp"

using radcal::CubicRoots;
using radcal::solve_monic_cubic;

namespace {

// Coefficients of (t - r1)(t - r2)(t - r3).
struct Monic {
  double a, b, c;
};

Monic from_roots(double r1, double r2, double r3) {
  return {-(r1 + r2 + r3), r1 * r2 + r1 * r3 + r2 * r3, -r1 * r2 * r3};
}

}  // namespace

TEST_CASE("three distinct real roots") {
  const auto m = from_roots(1.0, 2.0, 3.0);
  const CubicRoots r = solve_monic_cubic(m.a, m.b, m.c);
  REQUIRE(r.count == 3);
  CHECK(r.branch == CubicRoots::Branch::ThreeReal);
  CHECK(r.discriminant < 0.0);
  CHECK(r.roots[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.roots[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.roots[2] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("single real root") {
  // (t - 2)(t^2 + 1)
  const CubicRoots r = solve_monic_cubic(-2.0, 1.0, -2.0);
  REQUIRE(r.count == 1);
  CHECK(r.branch == CubicRoots::Branch::OneReal);
  CHECK(r.discriminant > 0.0);
  CHECK(r.roots[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("repeated roots take the limit branch") {
  SUBCASE("double root") {
    const auto m = from_roots(1.0, 1.0, -2.0);
    const CubicRoots r = solve_monic_cubic(m.a, m.b, m.c);
    CHECK(r.branch == CubicRoots::Branch::Repeated);
    REQUIRE(r.count == 3);
    CHECK(r.roots[0] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(r.roots[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.roots[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("triple root") {
    const auto m = from_roots(0.5, 0.5, 0.5);
    const CubicRoots r = solve_monic_cubic(m.a, m.b, m.c);
    CHECK(r.branch == CubicRoots::Branch::Repeated);
    for (int i = 0; i < 3; ++i) CHECK(r.roots[i] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("zero constant term keeps an exact zero root") {
  const auto m = from_roots(0.0, -3.0, 7.0);
  const CubicRoots r = solve_monic_cubic(m.a, m.b, m.c);
  REQUIRE(r.count == 3);
  CHECK(std::abs(r.roots[1]) < 1e-15);
}

TEST_CASE("small root beside a huge root keeps relative accuracy") {
  // Mimics k2 -> 0: roots near r_d, -1/k1 and -k1/k2.
  const auto m = from_roots(0.45, -8.0, 3.0e9);
  const CubicRoots r = solve_monic_cubic(m.a, m.b, m.c);
  REQUIRE(r.count == 3);
  CHECK(r.roots[1] == doctest::Approx(0.45).epsilon(1e-13));
  CHECK(r.roots[0] == doctest::Approx(-8.0).epsilon(1e-13));
  CHECK(r.roots[2] == doctest::Approx(3.0e9).epsilon(1e-13));
}

TEST_CASE("small real root beside a dominant complex pair") {
  // (t - 0.3)(t^2 + 1e10)
  const double s = 1e10;
  const CubicRoots r = solve_monic_cubic(-0.3, s, -0.3 * s);
  REQUIRE(r.count == 1);
  CHECK(r.roots[0] == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("random cubics built from known roots") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 5000; ++i) {
    std::array<double, 3> roots{u(rng), u(rng), u(rng)};
    std::sort(roots.begin(), roots.end());
    const auto m = from_roots(roots[0], roots[1], roots[2]);
    const CubicRoots r = solve_monic_cubic(m.a, m.b, m.c);
    // Near-coincident roots may be reported as a single real one.
    if (r.count != 3) continue;
    for (int k = 0; k < 3; ++k) {
      // Root conditioning degrades with clustering; scale the bound by the gap.
      const double gap = std::min(k > 0 ? roots[k] - roots[k - 1] : 1e9, k < 2 ? roots[k + 1] - roots[k] : 1e9);
      CHECK(std::abs(r.roots[k] - roots[k]) <= 1e-12 * 100.0 / std::max(gap, 1e-3) + 1e-12);
    }
  }
}
