#pragma once

#include <vector>

#include "dsrn/spacetime.hpp"

namespace dsrn {

enum class Side { minus, plus };

/// A point of the exterior together with its distances to both horizons.
/// The gaps are carried separately so that quantities vanishing at a
/// horizon keep full relative accuracy there.
struct ChartPoint {
  double r = 0.0;
  double gap_minus = 0.0;  // r - r_minus
  double gap_plus = 0.0;   // r_plus - r
};

/// Truncated inversion series r = r_side + sum_{l=1}^{N} c_l z^l, z = exp(2 kappa_side x).
struct InversionSeries {
  Side side = Side::plus;
  std::vector<double> coeffs;  // coeffs[l-1] = c_l
  double growth_bound = 0.0;   // K-tilde of the factorial majorant
  double convergence_x = 0.0;  // |x| beyond which K-tilde |z| < 1
  double threshold = 0.0;      // |x| beyond which the series replaces Newton
};

struct PotentialSample {
  double W0 = 0.0;       // F / r^2
  double W1 = 0.0;       // F F' / r + m^2 F
  double V = 0.0;        // 1 / r
  double V_tilde = 0.0;  // 1/r - 1/r_plus
  double V_minus_shifted = 0.0;
};

struct ChartOptions {
  int series_order = 12;
  double series_tail_tol = 1e-13;  // relative to r_side
  int table_size = 257;
  double table_extent = 30.0;
  int max_newton = 100;
};

/// Regge-Wheeler coordinate x(r) with dx/dr = 1/F, anchored at x(photon
/// sphere) = 0, and its inverse.
class RWChart {
 public:
  RWChart(const SpacetimeParams& params, const Horizons& horizons,
          const ChartOptions& options = {});

  const SpacetimeParams& params() const { return params_; }
  const Horizons& horizons() const { return horizons_; }
  const ChartOptions& options() const { return options_; }

  /// Throws ValidationError("OutOfExterior") unless r_minus < r < r_plus.
  double x_of_r(double r) const;
  /// Same map evaluated from exact horizon gaps.
  double x_of_point(const ChartPoint& pt) const;

  /// Unique exterior point with x(r) = x. Throws NumericalError("ConvergenceFailure").
  ChartPoint point_of_x(double x) const;
  double r_of_x(double x) const { return point_of_x(x).r; }
  /// Inverse by safeguarded Newton only (no series branch).
  ChartPoint point_of_x_newton(double x) const;

  const InversionSeries& series(Side side) const {
    return side == Side::plus ? series_plus_ : series_minus_;
  }
  /// Evaluates the series branch at x (valid for large |x| on that side).
  ChartPoint point_from_series(Side side, double x) const;

  PotentialSample potentials_at(double x) const;
  PotentialSample potentials_at_point(const ChartPoint& pt) const;

  /// F evaluated from the product of horizon gaps.
  double metric_at(const ChartPoint& pt) const;

  /// Offsets C_pm with x ~ ln|r - r_pm| / (2 kappa_pm) + C_pm near each horizon.
  double asymptotic_offset(Side side) const {
    return side == Side::plus ? offset_plus_ : offset_minus_;
  }

 private:
  double log_sum(const ChartPoint& pt, int skip) const;

  SpacetimeParams params_;
  Horizons horizons_;
  ChartOptions options_;
  std::array<double, 4> weight_{};    // -(3/Lambda) A_alpha r_alpha^2
  std::array<double, 4> anchor_log_{};  // ln|photon_sphere - r_alpha|
  double offset_minus_ = 0.0, offset_plus_ = 0.0;
  InversionSeries series_minus_, series_plus_;
  std::vector<double> table_x_, table_r_;
};

/// Coefficients of the inversion series on one side, order N >= 1.
/// Throws ValidationError("BadOrder") for N < 1 and
/// NumericalError("TruncationUnstable") when the coefficient ratios diverge.
InversionSeries lagrange_coefficients(const SpacetimeParams& params,
                                      const Horizons& horizons, Side side, int order,
                                      double tail_tol = 1e-13);

/// dW0/dx = 2F(3Mr - 2Q^2 - r^2)/r^5.
double w0_slope(const SpacetimeParams& params, const RWChart& chart, double x);

}  // namespace dsrn
