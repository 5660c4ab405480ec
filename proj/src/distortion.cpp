#include "radcal/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "radcal/cubic.hpp"
#include "radcal/error.hpp"

namespace radcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDegenerateK2 = 1e-12;
// Slack on the r_d <= rd_max test so the turning point itself is accepted.
constexpr double kRangeSlack = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_nonnegative(double r, const char* what) {
  if (!(r >= 0.0)) {
    std::ostringstream msg;
    msg << what << " = " << r;
    throw Error(ErrorCode::NegativeRadius, msg.str());
  }
}

// Smallest positive root of A x^2 + B x + 1 = 0, +inf if there is none.
double smallest_positive_root(double a, double b) {
  if (a == 0.0) return b < 0.0 ? -1.0 / b : kInf;
  const double disc = b * b - 4.0 * a;
  if (disc < 0.0) return kInf;
  const double q = -0.5 * (b + (b < 0.0 ? -1.0 : 1.0) * std::sqrt(disc));
  double best = kInf;
  for (double x : {q / a, q != 0.0 ? 1.0 / q : kInf}) {
    if (x > 0.0 && x < best) best = x;
  }
  return best;
}

// Turning point of s -> s (1 + k1 s + k2 s^2): 3 k2 s^2 + 2 k1 s + 1 = 0.
double quadcubic_turning_point(double k1, double k2) { return smallest_positive_root(3.0 * k2, 2.0 * k1); }

double quadcubic_map(double k1, double k2, double s) { return s * (1.0 + k1 * s + k2 * s * s); }

void require_in_range(double rd, double rd_max) {
  if (rd > rd_max * (1.0 + kRangeSlack)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "distorted radius " << rd << " exceeds the invertible limit " << rd_max;
    throw Error(ErrorCode::OutOfRange, msg.str());
  }
}

// r f(r) and its derivative for the U-D models.
struct RadialValue {
  double value;
  double slope;
};

RadialValue radial_map(const DistortionModel& m, double r) {
  return std::visit(
      overloaded{
          [r](const EvenPoly2& e) {
            const double r2 = r * r;
            return RadialValue{r * (1.0 + e.k1 * r2 + e.k2 * r2 * r2), 1.0 + 3.0 * e.k1 * r2 + 5.0 * e.k2 * r2 * r2};
          },
          [r](const EvenPoly1& e) {
            const double r2 = r * r;
            return RadialValue{r * (1.0 + e.k1 * r2), 1.0 + 3.0 * e.k1 * r2};
          },
          [r](const QuadCubic& q) {
            return RadialValue{quadcubic_map(q.k1, q.k2, r), 1.0 + 2.0 * q.k1 * r + 3.0 * q.k2 * r * r};
          },
          [&m, r](const DistortedToUndistorted& d) {
            const double rd = distort_radius(m, r);
            const double dh = 1.0 + 2.0 * d.k1 * rd + 3.0 * d.k2 * rd * rd;
            return RadialValue{rd, 1.0 / dh};
          },
      },
      m);
}

}  // namespace

ModelKind kind_of(const DistortionModel& m) { return static_cast<ModelKind>(m.index()); }

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::EvenPoly2: return "poly24";
    case ModelKind::EvenPoly1: return "poly2";
    case ModelKind::QuadCubic: return "quadcubic";
    case ModelKind::DistortedToUndistorted: return "du";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (auto kind : {ModelKind::EvenPoly2, ModelKind::EvenPoly1, ModelKind::QuadCubic,
                    ModelKind::DistortedToUndistorted}) {
    if (model_name(kind) == name) return kind;
  }
  return std::nullopt;
}

int coefficient_count(ModelKind kind) { return kind == ModelKind::EvenPoly1 ? 1 : 2; }

std::vector<double> coefficients(const DistortionModel& m) {
  return std::visit(overloaded{
                        [](const EvenPoly1& e) { return std::vector<double>{e.k1}; },
                        [](const auto& e) { return std::vector<double>{e.k1, e.k2}; },
                    },
                    m);
}

DistortionModel make_model(ModelKind kind, std::span<const double> k) {
  const double k1 = k.size() > 0 ? k[0] : 0.0;
  const double k2 = k.size() > 1 ? k[1] : 0.0;
  switch (kind) {
    case ModelKind::EvenPoly2: return EvenPoly2{k1, k2};
    case ModelKind::EvenPoly1: return EvenPoly1{k1};
    case ModelKind::QuadCubic: return QuadCubic{k1, k2};
    case ModelKind::DistortedToUndistorted: return DistortedToUndistorted{k1, k2};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model kind");
}

ValidRadiusRange valid_radius_range(const DistortionModel& m) {
  return std::visit(
      overloaded{
          [&m](const EvenPoly2& e) {
            // 1 + 3 k1 r^2 + 5 k2 r^4 = 0 is a quadratic in s = r^2.
            const double s = smallest_positive_root(5.0 * e.k2, 3.0 * e.k1);
            const double r_max = std::sqrt(s);
            return ValidRadiusRange{r_max, std::isinf(r_max) ? kInf : radial_map(m, r_max).value};
          },
          [&m](const EvenPoly1& e) {
            const double r_max = e.k1 < 0.0 ? std::sqrt(-1.0 / (3.0 * e.k1)) : kInf;
            return ValidRadiusRange{r_max, std::isinf(r_max) ? kInf : radial_map(m, r_max).value};
          },
          [](const QuadCubic& q) {
            const double r_max = quadcubic_turning_point(q.k1, q.k2);
            return ValidRadiusRange{r_max, std::isinf(r_max) ? kInf : quadcubic_map(q.k1, q.k2, r_max)};
          },
          [](const DistortedToUndistorted& d) {
            // The turning point lives on the distorted side here.
            const double rd_max = quadcubic_turning_point(d.k1, d.k2);
            return ValidRadiusRange{std::isinf(rd_max) ? kInf : quadcubic_map(d.k1, d.k2, rd_max), rd_max};
          },
      },
      m);
}

double distort_radius(const DistortionModel& m, double r) {
  require_nonnegative(r, "radius");
  if (const auto* du = std::get_if<DistortedToUndistorted>(&m)) {
    // Forward direction of the D-U form is the cubic inverse with the roles
    // of r and r_d exchanged.
    return undistort_radius_analytic(QuadCubic{du->k1, du->k2}, r);
  }
  return radial_map(m, r).value;
}

Point2 distort_point(const DistortionModel& m, const Point2& p) {
  const double r = std::sqrt(p.x() * p.x() + p.y() * p.y());
  const double factor = std::visit(overloaded{
                                       [r](const EvenPoly2& e) { return 1.0 + e.k1 * r * r + e.k2 * r * r * r * r; },
                                       [r](const EvenPoly1& e) { return 1.0 + e.k1 * r * r; },
                                       [r](const QuadCubic& q) { return 1.0 + q.k1 * r + q.k2 * r * r; },
                                       [&m, r](const DistortedToUndistorted&) {
                                         return r > 0.0 ? distort_radius(m, r) / r : 1.0;
                                       },
                                   },
                                   m);
  return p * factor;
}

Point2 distort_pixel(const DistortionModel& m, const CameraIntrinsics& intr, const Point2& p) {
  return normalized_to_pixel(intr, distort_point(m, pixel_to_normalized(intr, p)));
}

double undistort_radius_analytic(const QuadCubic& m, double rd) {
  require_nonnegative(rd, "distorted radius");
  const double k1 = m.k1;
  const double k2 = m.k2;

  if (std::abs(k2) < kDegenerateK2) {
    if (k1 == 0.0) return rd;
    // k1 r^2 + r - r_d = 0, root on the increasing branch.
    if (k1 < 0.0) require_in_range(rd, -0.25 / k1);
    return 2.0 * rd / (1.0 + std::sqrt(std::max(0.0, 1.0 + 4.0 * k1 * rd)));
  }

  const ValidRadiusRange range = valid_radius_range(m);
  require_in_range(rd, range.rd_max);
  if (rd == 0.0) return 0.0;

  // r^3 + a r^2 + b r + c = 0
  const double a = k1 / k2;
  const double b = 1.0 / k2;
  const double c = -rd / k2;
  const CubicRoots roots = solve_monic_cubic(a, b, c);

  // Among the roots in [0, r_max], the one nearest r_d. Near the identity
  // model this is the root that stays continuous with r = r_d.
  const double lo = -1e-12 * std::max(1.0, rd);
  const double hi = std::isinf(range.r_max) ? kInf : range.r_max * (1.0 + 1e-9);
  double best = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < roots.count; ++i) {
    const double r = roots.roots[i];
    if (r < lo || r > hi) continue;
    if (std::isnan(best) || std::abs(r - rd) < std::abs(best - rd)) best = r;
  }
  if (std::isnan(best)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "no cubic root in [0, " << range.r_max << "] for r_d = " << rd;
    throw Error(ErrorCode::OutOfRange, msg.str());
  }
  return std::max(0.0, best);
}

double undistort_radius_numeric(const DistortionModel& m, double rd) {
  require_nonnegative(rd, "distorted radius");
  if (const auto* du = std::get_if<DistortedToUndistorted>(&m)) return du_undistort_radius(*du, rd);

  const ValidRadiusRange range = valid_radius_range(m);
  require_in_range(rd, range.rd_max);
  if (rd == 0.0) return 0.0;

  double lo = 0.0;
  double hi = range.r_max;
  if (std::isinf(hi)) {
    hi = std::max(rd, 1.0);
    for (int i = 0; i < 2000 && radial_map(m, hi).value < rd; ++i) hi *= 2.0;
  }

  const double tol = 1e-14 * std::max(1.0, rd);
  double r = std::clamp(rd, lo, hi);
  for (int iter = 0; iter < 100; ++iter) {
    const auto [g, slope] = radial_map(m, r);
    const double residual = g - rd;
    if (std::abs(residual) < tol) return r;
    if (residual < 0.0) {
      lo = r;
    } else {
      hi = r;
    }
    double next = r - residual / slope;
    if (!(slope > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == r || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return next;
    r = next;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "Newton iteration did not converge for r_d = " << rd;
  throw Error(ErrorCode::NoConvergence, msg.str());
}

double approx_inverse_evenpoly2(const EvenPoly2& m, double rd) {
  const double rd2 = rd * rd;
  return rd * (1.0 - m.k1 * rd2 - m.k2 * rd2 * rd2);
}

double du_undistort_radius(const DistortedToUndistorted& m, double rd) {
  require_nonnegative(rd, "distorted radius");
  return quadcubic_map(m.k1, m.k2, rd);
}

double undistort_radius(const DistortionModel& m, double rd) {
  if (const auto* q = std::get_if<QuadCubic>(&m)) return undistort_radius_analytic(*q, rd);
  if (const auto* d = std::get_if<DistortedToUndistorted>(&m)) return du_undistort_radius(*d, rd);
  return undistort_radius_numeric(m, rd);
}

Point2 undistort_point(const DistortionModel& m, const Point2& pd) {
  const double rd = std::sqrt(pd.x() * pd.x() + pd.y() * pd.y());
  if (rd == 0.0) return pd;
  return pd * (undistort_radius(m, rd) / rd);
}

Point2 undistort_pixel(const DistortionModel& m, const CameraIntrinsics& intr, const Point2& pd) {
  const Point2 xd = pixel_to_normalized(intr, pd);
  if (xd.x() == 0.0 && xd.y() == 0.0) return pd;
  return normalized_to_pixel(intr, undistort_point(m, xd));
}

}  // namespace radcal
