#pragma once

#include <vector>

#include "dsrn/pencil.hpp"

namespace dsrn {

struct GridOptions {
  double half_width = 100.0;   // L: grid covers [-L, L]
  double dx = 0.1;
  double resolve_factor = 0.2;
  double cfl = 0.5;
  double potential_offset = 0.0;  // evolve with V~ + offset (gauge checks)
};

struct FieldState {
  std::vector<cplx> u, ut;
  double t = 0.0;
  int ell = 0;
};

/// Bump chi(x) = exp(1 - 1/(1 - y^2)), y = (2x - lo - hi)/(hi - lo), with
/// trapezoid weights on the grid.
struct EnergyWindow {
  double lo = 0.0, hi = 0.0;
  std::vector<double> chi;
  std::vector<double> weights;
};

/// Method of lines for (d_t - i s V~)^2 u + P_l u = 0 on a uniform grid:
/// fourth-order centred differences inside, second order next to the ends,
/// outgoing closure (d_t +- d_x - i s V~(+-L)) u = 0 on the end nodes,
/// classical RK4 in time.
class Evolver {
 public:
  /// Throws ValidationError("Underresolved") if dx violates the resolution bound.
  Evolver(const ModeProblem& problem, const GridOptions& grid = {});

  const std::vector<double>& x() const { return x_; }
  double dx() const { return dx_; }
  double max_step() const { return grid_.cfl * dx_; }
  int ell() const { return ell_; }
  double charge_product() const { return s_; }
  const std::vector<double>& potential() const { return w_; }
  const std::vector<double>& gauge_potential() const { return v_; }
  std::size_t index_of(double x) const;

  /// u = amplitude exp(-(x - c)^2 / w^2) exp(i k x), ut = 0 or, with
  /// `outgoing`, ut = -u_x (a right-moving pulse). Throws
  /// ValidationError("SupportTooWide") unless |x - c| <= 6w lies in [-L + 5, L - 5].
  FieldState init_gaussian(double center, double width, double momentum,
                           double amplitude = 1.0, bool outgoing = false) const;

  /// One RK4 step. Throws ValidationError("CflViolation") and NumericalError("NaNDetected").
  void step(FieldState& state, double dt) const;

  /// -u_xx + W~ u with the scheme's differences (end rows left at zero).
  std::vector<cplx> apply_operator(const std::vector<cplx>& u) const;

  /// ||u_t||^2 + <P_l u, u> by the grid sum; conserved for s = 0.
  double energy(const FieldState& state) const;

  EnergyWindow window(double lo, double hi) const;
  /// int chi^2 (|u_x|^2 + W~ |u|^2 + |u_t|^2) dx.
  double local_energy(const FieldState& state, const EnergyWindow& window) const;

 private:
  void rhs(const std::vector<cplx>& u, const std::vector<cplx>& ut, std::vector<cplx>& du,
           std::vector<cplx>& dut) const;

  GridOptions grid_;
  int ell_ = 0;
  double s_ = 0.0;
  double dx_ = 0.0;
  std::vector<double> x_, w_, v_;
};

}  // namespace dsrn
