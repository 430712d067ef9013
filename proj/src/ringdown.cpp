#include "dsrn/ringdown.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsrn/errors.hpp"

namespace dsrn {

namespace {
constexpr cplx I(0.0, 1.0);

cplx dominant_of(const std::vector<RingdownMode>& modes, double t_end) {
  // Mirror pairs from real data tie; prefer the positive real part then.
  double best = -1.0;
  cplx out;
  for (const auto& m : modes) {
    const double size = std::abs(m.amplitude * std::exp(-I * m.omega * t_end));
    const bool tie = std::abs(size - best) <= 1e-6 * best;
    if ((size > best && !tie) || (tie && m.omega.real() > out.real())) {
      best = std::max(best, size);
      out = m.omega;
    }
  }
  return out;
}
}  // namespace

std::vector<RingdownMode> ringdown_fit(const std::vector<double>& t, const std::vector<cplx>& y,
                                       const FitOptions& opts) {
  if (t.size() != y.size()) throw ValidationError("BadSeries", "t and y differ in length");
  const int n = static_cast<int>(t.size());
  if (n < 8) throw NumericalError("IllConditioned", "need at least 8 samples");
  const double dt = (t.back() - t.front()) / (n - 1);
  if (!(dt > 0.0)) throw ValidationError("NonUniformSampling", "times must increase");
  for (int k = 1; k < n; ++k)
    if (std::abs(t[k] - t[k - 1] - dt) > 1e-6 * dt)
      throw ValidationError("NonUniformSampling", "sample spacing is not uniform");

  double peak = 0.0;
  for (const auto& v : y) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return {};

  const int L = std::clamp(static_cast<int>(n * opts.pencil_fraction), 2, n - 2);
  const int rows = n - L;
  Eigen::MatrixXcd Y(rows, L + 1);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c <= L; ++c) Y(r, c) = y[r + c] / peak;

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(Y, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int order = 0;
  while (order < sv.size() && sv(order) > opts.sv_threshold * sv(0)) ++order;
  if (order >= std::min<int>(rows, L))
    throw NumericalError("IllConditioned", "no singular-value gap: window too short or over-modeled");

  const Eigen::MatrixXcd V = svd.matrixV().leftCols(order);
  const Eigen::MatrixXcd V1h = V.topRows(L).adjoint();
  const Eigen::MatrixXcd V2h = V.bottomRows(L).adjoint();
  const Eigen::MatrixXcd G =
      V2h * V1h.completeOrthogonalDecomposition().pseudoInverse();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(G);
  if (eig.info() != Eigen::Success) throw NumericalError("IllConditioned", "eigensolver failed");

  std::vector<cplx> z(order);
  for (int i = 0; i < order; ++i) z[i] = eig.eigenvalues()(i);

  Eigen::MatrixXcd Vand(n, order);
  Eigen::VectorXcd rhs(n);
  for (int k = 0; k < n; ++k) {
    rhs(k) = y[k];
    for (int i = 0; i < order; ++i) Vand(k, i) = std::pow(z[i], k);
  }
  const Eigen::VectorXcd a = Vand.colPivHouseholderQr().solve(rhs);

  std::vector<RingdownMode> modes;
  for (int i = 0; i < order; ++i) {
    if (z[i] == 0.0) continue;
    const cplx omega = I * std::log(z[i]) / dt;
    modes.push_back({omega, a(i) * std::exp(I * omega * t.front())});
  }
  std::sort(modes.begin(), modes.end(), [](const RingdownMode& p, const RingdownMode& q) {
    const double a = std::abs(p.omega.imag()), b = std::abs(q.omega.imag());
    if (a != b) return a < b;
    return p.omega.real() < q.omega.real();
  });
  return modes;
}

RingdownEstimate ringdown_estimate(const std::vector<double>& t, const std::vector<cplx>& y,
                                   const FitOptions& opts) {
  RingdownEstimate est;
  est.modes = ringdown_fit(t, y, opts);
  if (est.modes.empty()) throw NumericalError("IllConditioned", "signal is identically zero");
  const cplx dom = dominant_of(est.modes, t.back());
  for (const auto& m : est.modes)
    if (m.omega == dom) est.dominant = m;

  const std::size_t n = t.size(), part = (2 * n) / 3, mid = n / 6;
  for (std::size_t start : {std::size_t(0), mid, n - part}) {
    const std::vector<double> ts(t.begin() + start, t.begin() + start + part);
    const std::vector<cplx> ys(y.begin() + start, y.begin() + start + part);
    const auto sub = ringdown_fit(ts, ys, opts);
    double best = std::numeric_limits<double>::infinity();
    cplx near;
    for (const auto& m : sub)
      if (std::abs(m.omega - dom) < best) {
        best = std::abs(m.omega - dom);
        near = m.omega;
      }
    if (sub.empty()) throw NumericalError("IllConditioned", "empty sub-window fit");
    est.ci_re = std::max(est.ci_re, std::abs(near.real() - dom.real()));
    est.ci_im = std::max(est.ci_im, std::abs(near.imag() - dom.imag()));
  }
  return est;
}

double log_slope(const std::vector<double>& t, const std::vector<double>& values, double t0,
                 double t1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < t.size() && i < values.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (!(values[i] > 0.0)) throw NumericalError("NonPositive", "log of a non-positive value");
    const double ly = std::log(values[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    ++count;
  }
  if (count < 2) throw ValidationError("BadWindow", "fewer than two samples in the slope window");
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

std::pair<double, double> default_fit_window(const RingdownRunOptions& opts) {
  const double L = opts.grid.half_width;
  const double t_direct = std::abs(opts.probe - opts.center);
  const double t_return = 2.0 * L - std::abs(opts.center) - std::abs(opts.probe);
  double lo = opts.fit_start >= 0.0 ? opts.fit_start : t_direct + L;
  double hi = opts.fit_end >= 0.0 ? opts.fit_end : t_direct + 0.8 * t_return;
  if (!(hi > lo)) throw ValidationError("BadWindow", "fit window is empty");
  return {lo, hi};
}

RingdownRun run_ringdown(const ModeProblem& problem, const RingdownRunOptions& opts) {
  if (opts.sample_every < 1) throw ValidationError("BadCadence", "sample_every must be >= 1");
  if (opts.snapshot_every < 0) throw ValidationError("BadCadence", "snapshot_every must be >= 0");
  const Evolver ev(problem, opts.grid);
  const EnergyWindow win = ev.window(opts.window_lo, opts.window_hi);
  FieldState st = ev.init_gaussian(opts.center, opts.width, opts.momentum);
  const double dt = opts.dt > 0.0 ? opts.dt : ev.max_step();
  const auto [lo, hi] = default_fit_window(opts);
  const std::size_t probe = ev.index_of(opts.probe);

  RingdownRun run;
  run.fit_start = lo;
  run.fit_end = hi;
  if (opts.snapshot_every > 0) run.x = ev.x();
  const long steps = std::lround(std::ceil(hi / dt));
  for (long k = 0; k <= steps; ++k) {
    if (opts.snapshot_every > 0 && k % opts.snapshot_every == 0)
      run.snapshots.emplace_back(st.t, st.u);
    if (k % opts.sample_every == 0) {
      run.t.push_back(st.t);
      run.probe.push_back(st.u[probe]);
      run.local_energy.push_back(ev.local_energy(st, win));
    }
    if (k < steps) ev.step(st, dt);
  }
  std::vector<double> ts;
  std::vector<cplx> ys;
  for (std::size_t i = 0; i < run.t.size(); ++i)
    if (run.t[i] >= lo && run.t[i] <= hi) {
      ts.push_back(run.t[i]);
      ys.push_back(run.probe[i]);
    }
  run.fit = ringdown_estimate(ts, ys, opts.fit);
  run.energy_slope = log_slope(run.t, run.local_energy, lo, hi);
  return run;
}

}  // namespace dsrn
