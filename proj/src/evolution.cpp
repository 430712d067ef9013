#include "dsrn/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsrn/errors.hpp"

namespace dsrn {

namespace {
constexpr cplx I(0.0, 1.0);
}

Evolver::Evolver(const ModeProblem& problem, const GridOptions& grid)
    : grid_(grid), ell_(problem.ell()), s_(problem.charge_product()) {
  if (!(grid.half_width > 10.0) || !(grid.dx > 0.0) || !(grid.cfl > 0.0))
    throw ValidationError("BadGrid", "need half_width > 10, dx > 0, cfl > 0");
  const long n = std::lround(2.0 * grid.half_width / grid.dx) + 1;
  dx_ = 2.0 * grid.half_width / double(n - 1);
  if (!problem.is_free() && ell_ > 0) {
    const double w0_max = problem.chart().potentials_at(0.0).W0;
    const double bound = grid.resolve_factor / std::sqrt(double(ell_) * (ell_ + 1) * w0_max);
    if (dx_ > bound)
      throw ValidationError("Underresolved", "dx = " + std::to_string(dx_) +
                                                 " exceeds the resolution bound " +
                                                 std::to_string(bound));
  }
  x_.resize(n);
  w_.resize(n);
  v_.resize(n);
  for (long i = 0; i < n; ++i) {
    x_[i] = -grid.half_width + dx_ * double(i);
    w_[i] = problem.effective_potential(x_[i]);
    v_[i] = problem.v_tilde(x_[i]) + grid.potential_offset;
  }
}

std::size_t Evolver::index_of(double x) const {
  const double k = std::round((x - x_.front()) / dx_);
  return static_cast<std::size_t>(std::clamp(k, 0.0, double(x_.size() - 1)));
}

FieldState Evolver::init_gaussian(double center, double width, double momentum,
                                  double amplitude, bool outgoing) const {
  const double L = grid_.half_width;
  if (!(width > 0.0) || center - 6.0 * width < -L + 5.0 || center + 6.0 * width > L - 5.0)
    throw ValidationError("SupportTooWide", "Gaussian support must lie in [-L + 5, L - 5]");
  FieldState st;
  st.ell = ell_;
  st.u.resize(x_.size());
  st.ut.assign(x_.size(), 0.0);
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double y = (x_[i] - center) / width;
    st.u[i] = amplitude * std::exp(-y * y) * std::exp(I * momentum * x_[i]);
    if (outgoing) {
      const cplx ux = st.u[i] * (-2.0 * y / width + I * momentum);
      st.ut[i] = -ux;
    }
  }
  return st;
}

std::vector<cplx> Evolver::apply_operator(const std::vector<cplx>& u) const {
  const std::size_t n = u.size();
  std::vector<cplx> out(n, 0.0);
  const double c2 = 1.0 / (dx_ * dx_), c4 = 1.0 / (12.0 * dx_ * dx_);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    cplx uxx;
    if (i >= 2 && i + 2 < n)
      uxx = c4 * (-u[i - 2] + 16.0 * u[i - 1] - 30.0 * u[i] + 16.0 * u[i + 1] - u[i + 2]);
    else
      uxx = c2 * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
    out[i] = -uxx + w_[i] * u[i];
  }
  return out;
}

void Evolver::rhs(const std::vector<cplx>& u, const std::vector<cplx>& ut, std::vector<cplx>& du,
                  std::vector<cplx>& dut) const {
  const std::size_t n = u.size();
  const std::vector<cplx> pu = apply_operator(u);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double sv = s_ * v_[i];
    du[i] = ut[i];
    dut[i] = 2.0 * I * sv * ut[i] + sv * sv * u[i] - pu[i];
  }
  const double h2 = 2.0 * dx_;
  // Left end: (d_t - d_x - i s V) u = 0; right end: (d_t + d_x - i s V) u = 0.
  auto left_dx = [&](const std::vector<cplx>& f) {
    return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / h2;
  };
  auto right_dx = [&](const std::vector<cplx>& f) {
    return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / h2;
  };
  du[0] = left_dx(u) + I * s_ * v_[0] * u[0];
  dut[0] = left_dx(ut) + I * s_ * v_[0] * ut[0];
  du[n - 1] = -right_dx(u) + I * s_ * v_[n - 1] * u[n - 1];
  dut[n - 1] = -right_dx(ut) + I * s_ * v_[n - 1] * ut[n - 1];
}

void Evolver::step(FieldState& st, double dt) const {
  if (std::abs(dt) > grid_.cfl * dx_ * (1.0 + 1e-12))
    throw ValidationError("CflViolation", "|dt| = " + std::to_string(std::abs(dt)) +
                                              " exceeds cfl * dx = " +
                                              std::to_string(grid_.cfl * dx_));
  const std::size_t n = st.u.size();
  std::vector<cplx> k1u(n), k1v(n), k2u(n), k2v(n), k3u(n), k3v(n), k4u(n), k4v(n), tu(n), tv(n);
  rhs(st.u, st.ut, k1u, k1v);
  for (std::size_t i = 0; i < n; ++i) {
    tu[i] = st.u[i] + 0.5 * dt * k1u[i];
    tv[i] = st.ut[i] + 0.5 * dt * k1v[i];
  }
  rhs(tu, tv, k2u, k2v);
  for (std::size_t i = 0; i < n; ++i) {
    tu[i] = st.u[i] + 0.5 * dt * k2u[i];
    tv[i] = st.ut[i] + 0.5 * dt * k2v[i];
  }
  rhs(tu, tv, k3u, k3v);
  for (std::size_t i = 0; i < n; ++i) {
    tu[i] = st.u[i] + dt * k3u[i];
    tv[i] = st.ut[i] + dt * k3v[i];
  }
  rhs(tu, tv, k4u, k4v);
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    st.u[i] += dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
    st.ut[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    finite = finite && std::isfinite(st.u[i].real()) && std::isfinite(st.u[i].imag());
  }
  st.t += dt;
  if (!finite)
    throw NumericalError("NaNDetected", "field blew up at t = " + std::to_string(st.t));
}

double Evolver::energy(const FieldState& st) const {
  const std::vector<cplx> pu = apply_operator(st.u);
  double e = 0.0;
  for (std::size_t i = 1; i + 1 < st.u.size(); ++i)
    e += std::norm(st.ut[i]) + (std::conj(st.u[i]) * pu[i]).real();
  return e * dx_;
}

EnergyWindow Evolver::window(double lo, double hi) const {
  if (!(lo < hi) || lo <= x_.front() + 2.0 * dx_ || hi >= x_.back() - 2.0 * dx_)
    throw ValidationError("BadWindow", "energy window must lie strictly inside the grid");
  EnergyWindow win;
  win.lo = lo;
  win.hi = hi;
  win.chi.assign(x_.size(), 0.0);
  win.weights.assign(x_.size(), 0.0);
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double y = (2.0 * x_[i] - lo - hi) / (hi - lo);
    if (std::abs(y) < 1.0) {
      win.chi[i] = std::exp(1.0 - 1.0 / (1.0 - y * y));
      win.weights[i] = dx_;  // chi vanishes to all orders at the ends
    }
  }
  return win;
}

double Evolver::local_energy(const FieldState& st, const EnergyWindow& win) const {
  const std::size_t n = st.u.size();
  double e = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    if (win.weights[i] == 0.0) continue;
    const cplx ux = (st.u[i - 2] - 8.0 * st.u[i - 1] + 8.0 * st.u[i + 1] - st.u[i + 2]) /
                    (12.0 * dx_);
    const double c2 = win.chi[i] * win.chi[i];
    e += win.weights[i] * c2 * (std::norm(ux) + w_[i] * std::norm(st.u[i]) + std::norm(st.ut[i]));
  }
  return e;
}

}  // namespace dsrn
