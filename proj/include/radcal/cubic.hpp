#pragma once

#include <array>

namespace radcal {

// Real roots of the monic cubic t^3 + a t^2 + b t + c = 0.
//
// The cubic is depressed with t = s - a/3 into s^3 + p s + q = 0 and classified
// by D = (q/2)^2 + (p/3)^3:
//   D > 0   one real root (Cardano radicals),
//   D < 0   three real roots (trigonometric form),
//   D ~ 0   repeated roots (limit of the trigonometric form).
// "D ~ 0" means |D| < 1e-12 * max(1, q^2, |p|^3).
//
// The non-dominant roots are then rebuilt from Vieta's relations so that a
// small root next to a very large one keeps full relative accuracy.
struct CubicRoots {
  enum class Branch { OneReal, ThreeReal, Repeated };

  std::array<double, 3> roots{};  // ascending; only the first `count` are used
  int count = 0;
  Branch branch = Branch::OneReal;
  double discriminant = 0.0;
};

CubicRoots solve_monic_cubic(double a, double b, double c);

}  // namespace radcal
