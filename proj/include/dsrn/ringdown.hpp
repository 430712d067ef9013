#pragma once

#include <vector>

#include "dsrn/evolution.hpp"
#include "dsrn/pencil.hpp"

namespace dsrn {

struct RingdownMode {
  cplx omega;      // sample ~ amplitude * exp(-i omega t)
  cplx amplitude;  // referred to t = 0
};

struct FitOptions {
  double sv_threshold = 1e-8;     // singular values below this fraction of the largest are noise
  double pencil_fraction = 1.0 / 3.0;
};

/// Matrix-pencil fit of uniformly sampled data by sum_j a_j exp(-i omega_j t).
/// Modes are sorted by |Im omega|. An all-zero signal gives no modes.
/// Throws ValidationError("NonUniformSampling") and
/// NumericalError("IllConditioned") for short windows or when no
/// singular-value gap separates signal from noise.
std::vector<RingdownMode> ringdown_fit(const std::vector<double>& t, const std::vector<cplx>& y,
                                       const FitOptions& opts = {});

struct RingdownEstimate {
  RingdownMode dominant;  // largest |a exp(-i omega t_end)|
  std::vector<RingdownMode> modes;
  double ci_re = 0.0;     // spread of the dominant frequency over sub-windows
  double ci_im = 0.0;
  double ci() const { return std::abs(cplx(ci_re, ci_im)); }
};

/// Full-window fit plus refits on the first, middle and last two thirds.
RingdownEstimate ringdown_estimate(const std::vector<double>& t, const std::vector<cplx>& y,
                                   const FitOptions& opts = {});

/// Least-squares slope of log(values) against t over entries with t in [t0, t1].
double log_slope(const std::vector<double>& t, const std::vector<double>& values, double t0,
                 double t1);

struct RingdownRunOptions {
  GridOptions grid;
  double center = 0.0;     // Gaussian centre, width and momentum
  double width = 3.0;
  double momentum = 0.0;
  double probe = 10.0;     // probe position x_p
  double dt = 0.0;         // 0 means cfl * dx
  int sample_every = 10;   // steps between recorded samples
  int snapshot_every = 0;  // steps between full-field snapshots, 0 disables
  double window_lo = -10.0, window_hi = 10.0;  // local-energy window
  double fit_start = -1.0, fit_end = -1.0;     // negative means the default window
  FitOptions fit;
};

struct RingdownRun {
  std::vector<double> t;
  std::vector<cplx> probe;
  std::vector<double> local_energy;
  double fit_start = 0.0, fit_end = 0.0;
  RingdownEstimate fit;
  double energy_slope = 0.0;  // d/dt log local energy over the fit window
  std::vector<double> x;      // grid, filled when snapshots are taken
  std::vector<std::pair<double, std::vector<cplx>>> snapshots;
};

/// Default fit window [t_d + L, t_d + 0.8 t_r] with t_d = |x_p - c| and
/// t_r = 2L - |c| - |x_p| the earliest return of a boundary reflection.
std::pair<double, double> default_fit_window(const RingdownRunOptions& opts);

/// Evolves a Gaussian, records the probe and the local energy, and fits the
/// post-burst window.
RingdownRun run_ringdown(const ModeProblem& problem, const RingdownRunOptions& opts);

}  // namespace dsrn
