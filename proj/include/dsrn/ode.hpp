#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "dsrn/errors.hpp"

namespace dsrn {

struct OdeOptions {
  double rtol = 1e-11;
  double atol = 1e-14;
  double initial_step = 0.01;
  double min_step = 1e-12;
  double max_step = 1.0;
  long max_steps = 2'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

/// Dormand-Prince 5(4) with PI step control on a fixed-size real state.
///
/// Integrates from x0 towards x1 (either direction) and lands exactly on
/// every point of `stops` that lies between them, in the order of travel.
/// `observer(x, y)` is called at x0 and at each stop. `post_step(y)` runs
/// after each accepted step and may renormalize the state.
template <std::size_t D>
class Dopri5 {
 public:
  using State = std::array<double, D>;

  explicit Dopri5(OdeOptions opts = {}) : opts_(opts) {
    for (std::size_t i = 0; i < D; ++i) group_[i] = static_cast<int>(i);
  }

  /// Components sharing a group id are error-scaled by the Euclidean norm
  /// of the whole group (e.g. real and imaginary parts of one solution).
  void set_groups(const std::array<int, D>& group) { group_ = group; }

  const OdeStats& stats() const { return stats_; }

  template <class Rhs, class Observer, class PostStep>
  State integrate(Rhs&& rhs, double x0, State y, double x1, std::span<const double> stops,
                  Observer&& observer, PostStep&& post_step) {
    const double dir = x1 >= x0 ? 1.0 : -1.0;
    double x = x0;
    double h = dir * std::min(opts_.initial_step, std::abs(x1 - x0));
    observer(x, y);
    if (x0 == x1) return y;

    std::size_t next_stop = 0;
    while (next_stop < stops.size() && dir * (stops[next_stop] - x0) <= 0.0) ++next_stop;

    State k1, k2, k3, k4, k5, k6, k7, tmp, y5;
    rhs(x, y, k1);
    double err_prev = 1e-4;

    while (dir * (x1 - x) > 0.0) {
      if (stats_.accepted + stats_.rejected > opts_.max_steps)
        throw NumericalError("IntegratorFailure", "maximum number of steps exceeded");
      double target = x1;
      if (next_stop < stops.size() && dir * (stops[next_stop] - x1) < 0.0)
        target = stops[next_stop];
      bool hits_target = false;
      if (dir * (x + h - target) >= 0.0) {
        h = target - x;
        hits_target = true;
      }

      for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * (a21 * k1[i]);
      rhs(x + c2 * h, tmp, k2);
      for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      rhs(x + c3 * h, tmp, k3);
      for (std::size_t i = 0; i < D; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      rhs(x + c4 * h, tmp, k4);
      for (std::size_t i = 0; i < D; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      rhs(x + c5 * h, tmp, k5);
      for (std::size_t i = 0; i < D; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                             a65 * k5[i]);
      rhs(x + h, tmp, k6);
      for (std::size_t i = 0; i < D; ++i)
        y5[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                            a76 * k6[i]);
      rhs(x + h, y5, k7);

      std::array<double, D> mag_old{}, mag_new{};
      for (std::size_t i = 0; i < D; ++i) {
        mag_old[group_[i]] += y[i] * y[i];
        mag_new[group_[i]] += y5[i] * y5[i];
      }
      double err = 0.0;
      for (std::size_t i = 0; i < D; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                               e6 * k6[i] + e7 * k7[i]);
        const double sc = opts_.atol + opts_.rtol * std::sqrt(std::max(mag_old[group_[i]],
                                                                        mag_new[group_[i]]));
        err = std::max(err, std::abs(e) / sc);
      }
      if (!std::isfinite(err))
        throw NumericalError("IntegratorFailure", "non-finite state during integration");

      if (err <= 1.0) {
        ++stats_.accepted;
        x = hits_target ? target : x + h;
        y = y5;
        post_step(y);
        if (hits_target && next_stop < stops.size() && target == stops[next_stop]) {
          observer(x, y);
          ++next_stop;
        }
        rhs(x, y, k1);  // post_step may have rescaled, so no FSAL reuse
        // PI controller.
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                     std::pow(err_prev, 0.4 / 5.0);
        fac = std::clamp(fac, 0.2, 5.0);
        err_prev = std::max(err, 1e-4);
        double h_new = std::abs(h) * fac;
        h_new = std::min(h_new, opts_.max_step);
        h = dir * h_new;
      } else {
        ++stats_.rejected;
        const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
        h *= fac;
        if (std::abs(h) < opts_.min_step)
          throw NumericalError("IntegratorFailure", "step size underflow");
      }
    }
    return y;
  }

 private:
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  // 5th minus 4th order weights.
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeOptions opts_;
  OdeStats stats_;
  std::array<int, D> group_{};
};

}  // namespace dsrn
