#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "dsrn/ode.hpp"
#include "dsrn/regge_wheeler.hpp"

namespace dsrn {

using cplx = std::complex<double>;

struct ModeOptions {
  double ode_tol = 1e-11;
  double strip_margin = 0.05;      // fraction of kappa kept away from Im z = -kappa
  double asymptotic_cut = 1e-10;   // multiplied by max(1, l(l+1))
  double x_cap = 200.0;
  bool wkb_seed = true;            // first-order tail correction of the plane-wave seed
  std::optional<double> charge_product;  // overrides params.s when set
};

/// One angular mode of the charged Klein-Gordon pencil
///   p_l(z, s) = -d_x^2 + l(l+1) W0 + W1 - (z - s V~)^2
/// on the Regge-Wheeler line, with V~ = 1/r - 1/r_plus.
class ModeProblem {
 public:
  ModeProblem(std::shared_ptr<const RWChart> chart, int ell, const ModeOptions& opts = {});

  /// Harness with W~ = 0 and s = 0; Jost seeds imposed at |x| = cutoff.
  static ModeProblem free_field(double cutoff = 20.0, double ode_tol = 1e-11);

  int ell() const { return ell_; }
  double charge_product() const { return s_; }
  double x_inf_minus() const { return x_minus_; }
  double x_inf_plus() const { return x_plus_; }
  double kappa() const;
  /// Lower edge of the admissible strip, -kappa + margin.
  double strip_floor() const;
  double v_minus_shifted() const { return v_minus_; }
  const ModeOptions& options() const { return opts_; }
  bool is_free() const { return !chart_; }
  const RWChart& chart() const { return *chart_; }
  std::shared_ptr<const RWChart> chart_ptr() const { return chart_; }

  /// l(l+1) W0(x) + W1(x).
  double effective_potential(double x) const;
  /// V~(x) = 1/r - 1/r_plus (zero for the free harness).
  double v_tilde(double x) const;
  /// Effective potential and V~ at a point given by its horizon gaps.
  void coefficients(const ChartPoint& pt, double& w_eff, double& v_tilde) const;
  /// |W~(x)| + |s| |V~(x) - V~(+-inf)|.
  double tail_size(double x) const;

 private:
  ModeProblem() = default;

  std::shared_ptr<const RWChart> chart_;
  int ell_ = 0;
  double s_ = 0.0;
  double x_minus_ = 20.0, x_plus_ = 20.0;
  double v_minus_ = 0.0;
  ModeOptions opts_;
};

struct JostSample {
  double x = 0.0;
  cplx value, derivative;        // normalized by exp(log_scale)
  cplx dz_value, dz_derivative;  // z-derivatives, same normalization
};

/// Jost solution e_plus ~ exp(i z x) at +inf, or e_minus ~ exp(-i w x) at
/// -inf with w = z - s V~(-inf). Samples are stored normalized: the true
/// solution is exp(log_scale) times the stored values. log_scale is
/// analytic in z with derivative dz_log_scale.
struct JostSolution {
  Side side = Side::plus;
  cplx z;
  cplx asymptotic_frequency;
  cplx log_scale;
  cplx dz_log_scale;
  int rescalings = 0;  // OverflowRescaled events absorbed into log_scale
  std::vector<JostSample> samples;  // ordered as the requested points

  const JostSample& at(double x) const;
  cplx value(double x) const;
  cplx derivative(double x) const;
};

/// Integrates the Jost solution inward from the asymptotic cutoff and
/// samples it at `points`. Throws ValidationError("StripViolation") when
/// Im z <= strip_floor() and NumericalError("IntegratorFailure").
JostSolution jost(const ModeProblem& problem, cplx z, Side side,
                  const std::vector<double>& points);

struct WronskianResult {
  cplx value;            // W(z) at x = 0
  cplx log_value;        // some branch of log W(z), finite even when W overflows
  cplx log_derivative;   // W'(z) / W(z)
  double x_spread = 0.0; // relative spread of W over x in {-5, 0, 5}
  cplx derivative() const { return value * log_derivative; }
};

/// W(z) = e_plus e_minus' - e_plus' e_minus. With `diagnostics` the value is
/// also formed at x = -5 and x = 5.
WronskianResult wronskian(const ModeProblem& problem, cplx z, bool diagnostics = true);

/// Kernel of p_l(z, s)^{-1}:
///   K(z; x, y) = e_plus(max(x,y)) e_minus(min(x,y)) / W(z).
/// Throws NumericalError("AtResonance") when z is (numerically) a zero of W.
cplx resolvent_kernel(const ModeProblem& problem, cplx z, double x, double y);

/// Samples of W over a rectangular grid: rows (re z, im z, W).
struct WronskianGridRow {
  cplx z, w;
};
std::vector<WronskianGridRow> wronskian_grid(const ModeProblem& problem, cplx lower_left,
                                             cplx upper_right, int n_re, int n_im);

}  // namespace dsrn
