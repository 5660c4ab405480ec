#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "radcal/geometry.hpp"

namespace radcal {

// Radial distortion about the principal point. The undistorted normalized
// radius r and the distorted radius r_d are related by r_d = r f(r) for the
// three undistorted-to-distorted (U-D) models:

// f(r) = 1 + k1 r^2 + k2 r^4
struct EvenPoly2 {
  double k1 = 0.0;
  double k2 = 0.0;
};

// f(r) = 1 + k1 r^2
struct EvenPoly1 {
  double k1 = 0.0;
};

// f(r) = 1 + k1 r + k2 r^2. The inverse is the root of a cubic and has a
// closed form, see undistort_radius_analytic.
struct QuadCubic {
  double k1 = 0.0;
  double k2 = 0.0;
};

// Distorted-to-undistorted form of QuadCubic: r = r_d (1 + k1 r_d + k2 r_d^2).
// Undistortion is a direct evaluation; distortion needs the cubic.
struct DistortedToUndistorted {
  double k1 = 0.0;
  double k2 = 0.0;
};

using DistortionModel = std::variant<EvenPoly2, EvenPoly1, QuadCubic, DistortedToUndistorted>;

enum class ModelKind { EvenPoly2, EvenPoly1, QuadCubic, DistortedToUndistorted };

ModelKind kind_of(const DistortionModel& m);
// CLI spelling: poly24, poly2, quadcubic, du.
std::string_view model_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);
int coefficient_count(ModelKind kind);
std::vector<double> coefficients(const DistortionModel& m);
// Missing trailing coefficients default to zero.
DistortionModel make_model(ModelKind kind, std::span<const double> k);

// Interval on which r -> r f(r) is strictly increasing (and so invertible).
struct ValidRadiusRange {
  double r_max;   // undistorted radius at the turning point, +inf if none
  double rd_max;  // distorted radius at the turning point
};

ValidRadiusRange valid_radius_range(const DistortionModel& m);

// r f(r). For DistortedToUndistorted this inverts the cubic (throws
// OutOfRange beyond the turning point). Throws NegativeRadius for r < 0.
double distort_radius(const DistortionModel& m, double r);

// (x, y) f(r) in normalized coordinates.
Point2 distort_point(const DistortionModel& m, const Point2& p);

// The same displacement expressed in pixels: u_d - u0 = (u - u0) f(r),
// v_d - v0 = (v - v0) f(r), with r the normalized radius of p.
Point2 distort_pixel(const DistortionModel& m, const CameraIntrinsics& intr, const Point2& p);

// Exact inverse of the QuadCubic map on [0, rd_max]: the root of
// k2 r^3 + k1 r^2 + r - r_d = 0 that lies in [0, r_max), closest to r_d.
// |k2| < 1e-12 falls back to the quadratic (or identity) model.
double undistort_radius_analytic(const QuadCubic& m, double rd);

// Safeguarded Newton iteration on r f(r) - r_d, bracketed on [0, r_max].
double undistort_radius_numeric(const DistortionModel& m, double rd);

// Non-iterative approximation r ~ r_d (1 - k1 r_d^2 - k2 r_d^4). Not exact.
double approx_inverse_evenpoly2(const EvenPoly2& m, double rd);

double du_undistort_radius(const DistortedToUndistorted& m, double rd);

// Dispatches to the cheapest exact inverse for the model.
double undistort_radius(const DistortionModel& m, double rd);

Point2 undistort_point(const DistortionModel& m, const Point2& pd);
Point2 undistort_pixel(const DistortionModel& m, const CameraIntrinsics& intr, const Point2& pd);

}  // namespace radcal
