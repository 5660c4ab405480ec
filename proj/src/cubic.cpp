#include "radcal/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace radcal {

namespace {

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Roots of t^2 - s t + f = 0 without cancellation.
std::array<double, 2> stable_quadratic(double s, double f) {
  const double disc = std::max(0.0, s * s - 4.0 * f);
  const double q = 0.5 * (s + sign_of(s) * std::sqrt(disc));
  if (q == 0.0) return {0.0, 0.0};
  return {q, f / q};
}

}  // namespace

CubicRoots solve_monic_cubic(double a, double b, double c) {
  CubicRoots out;

  const double shift = a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double half_q = q / 2.0;
  const double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;
  out.discriminant = disc;

  const double tau = 1e-12 * std::max({1.0, q * q, std::abs(p * p * p)});

  if (std::abs(disc) < tau) {
    // Repeated roots: s = 2u, -u, -u with u = cbrt(-q/2).
    out.branch = CubicRoots::Branch::Repeated;
    const double u = std::cbrt(-half_q);
    out.roots = {2.0 * u - shift, -u - shift, -u - shift};
    out.count = 3;
  } else if (disc > 0.0) {
    out.branch = CubicRoots::Branch::OneReal;
    // Pick the radical sign that avoids cancellation, then B = -p / (3A).
    const double big = -sign_of(q) * std::cbrt(std::abs(half_q) + std::sqrt(disc));
    const double small = big != 0.0 ? -third_p / big : 0.0;
    double t = big + small - shift;
    // The complex pair z, conj(z) satisfies |z|^2 = b + a t + t^2 and t |z|^2 = -c.
    // When the pair dominates, t = -c / |z|^2 recovers the real root without the
    // cancellation in big + small - shift.
    const double modulus2 = b + a * t + t * t;
    if (modulus2 > t * t && modulus2 > 0.0) t = -c / modulus2;
    out.roots = {t, 0.0, 0.0};
    out.count = 1;
  } else {
    out.branch = CubicRoots::Branch::ThreeReal;
    const double m = std::sqrt(-third_p);
    const double cos_arg = std::clamp(-half_q / (m * m * m), -1.0, 1.0);
    const double phi = std::acos(cos_arg) / 3.0;
    constexpr double kTwoThirdsPi = 2.0 * std::numbers::pi / 3.0;
    for (int k = 0; k < 3; ++k) out.roots[k] = 2.0 * m * std::cos(phi - kTwoThirdsPi * k) - shift;
    out.count = 3;
  }

  if (out.count == 3) {
    // Keep the dominant root and rebuild the other two from
    // r2 r3 = -c / r1 and r2 + r3 = (b - r2 r3) / r1.
    auto& r = out.roots;
    const auto dom = static_cast<std::size_t>(
        std::max_element(r.begin(), r.end(), [](double x, double y) { return std::abs(x) < std::abs(y); }) -
        r.begin());
    const double r1 = r[dom];
    if (r1 != 0.0) {
      const double prod = -c / r1;
      const double sum = (b - prod) / r1;
      const auto [t2, t3] = stable_quadratic(sum, prod);
      r = {r1, t2, t3};
    }
  }
  std::sort(out.roots.begin(), out.roots.begin() + out.count);
  return out;
}

}  // namespace radcal
