#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "dsrn/errors.hpp"
#include "dsrn/regge_wheeler.hpp"

using namespace dsrn;

namespace {

struct Fixture {
  SpacetimeParams p;
  Horizons h;
  RWChart chart;
  explicit Fixture(double Q = 0.0, double m = 1.0)
      : p(params(Q, m)), h(horizon_roots(p)), chart(p, h) {}
  static SpacetimeParams params(double Q, double m) {
    RawParams raw;
    raw.bh_charge = Q;
    raw.field_mass = m;
    return validate_params(raw);
  }
};

// Least-squares slope of ys against xs.
double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_SUITE("regge_wheeler") {
  TEST_CASE("anchor, derivative and monotonicity") {
    for (double Q : {0.0, 0.3}) {
      CAPTURE(Q);
      const Fixture f(Q);
      CHECK(f.chart.x_of_r(f.h.photon_sphere) == 0.0);
      CHECK(f.chart.r_of_x(0.0) == doctest::Approx(f.h.photon_sphere).epsilon(1e-14));

      for (int i = 1; i <= 20; ++i) {
        const double r = f.h.r_minus() + (f.h.r_plus() - f.h.r_minus()) * i / 21.0;
        const double hs = 1e-5;
        const double d = (f.chart.x_of_r(r + hs) - f.chart.x_of_r(r - hs)) / (2 * hs);
        const double inv = 1 / metric_function(f.p, r);
        CHECK(std::abs(d - inv) < 1e-6 * std::abs(inv));
      }

      double prev = -1e300;
      bool increasing = true;
      for (int i = 1; i < 10000; ++i) {
        const double x = f.chart.x_of_r(f.h.r_minus() + (f.h.r_plus() - f.h.r_minus()) * i / 1e4);
        if (!(x > prev)) increasing = false;
        prev = x;
      }
      CHECK(increasing);

      CHECK_THROWS_AS(f.chart.x_of_r(f.h.r_plus() + 0.1), ValidationError);
      CHECK_THROWS_AS(f.chart.x_of_r(f.h.r_minus()), ValidationError);
    }
  }

  TEST_CASE("log asymptotics near the cosmological horizon") {
    const Fixture f;
    std::vector<double> d;
    for (double gap : {1e-3, 1e-5, 1e-7, 1e-9}) {
      const double r = f.h.r_plus() - gap;
      d.push_back(f.chart.x_of_r(r) - std::log(gap) / (2 * f.h.kappa_plus));
    }
    CHECK(std::abs(d[3] - d[2]) < std::abs(d[1] - d[0]));
    CHECK(std::abs(d[3] - f.chart.asymptotic_offset(Side::plus)) < 1e-6);
  }

  TEST_CASE("round trip on random radii") {
    for (double Q : {0.0, 0.3}) {
      const Fixture f(Q);
      std::mt19937_64 rng(5);
      std::uniform_real_distribution<double> U(0.0, 1.0);
      double worst = 0.0;
      for (int i = 0; i < 100; ++i) {
        const double r = f.h.r_minus() + 1e-6 + (f.h.r_plus() - f.h.r_minus() - 2e-6) * U(rng);
        worst = std::max(worst, std::abs(f.chart.r_of_x(f.chart.x_of_r(r)) - r));
      }
      CHECK(worst < 1e-9);
    }
  }

  TEST_CASE("exponential approach to the horizons") {
    const Fixture f;
    for (Side side : {Side::plus, Side::minus}) {
      const double sign = side == Side::plus ? 1.0 : -1.0;
      const double k = side == Side::plus ? f.h.kappa_plus : f.h.kappa_minus;
      const double rh = side == Side::plus ? f.h.r_plus() : f.h.r_minus();
      std::vector<double> xs, ys;
      for (double a : {30.0, 40.0, 50.0, 60.0, 70.0}) {
        const ChartPoint pt = f.chart.point_of_x(sign * a);
        xs.push_back(sign * a);
        ys.push_back(std::log(side == Side::plus ? pt.gap_plus : pt.gap_minus));
      }
      CHECK(std::abs(slope(xs, ys) - 2 * k) < 0.01 * std::abs(2 * k));

      // Leading coefficient against the fit intercept.
      const auto& ser = f.chart.series(side);
      const double x = sign * 100.0;
      const ChartPoint pt = f.chart.point_of_x(x);
      const double gap = side == Side::plus ? pt.gap_plus : pt.gap_minus;
      CHECK(std::log(gap) - 2 * k * x ==
            doctest::Approx(std::log(std::abs(ser.coeffs[0]))).epsilon(1e-5));

      // z = 0 gives the horizon itself.
      const ChartPoint far = f.chart.point_from_series(side, sign * 1e4);
      CHECK(far.r == rh);
    }
  }

  TEST_CASE("series against Newton in the overlap band") {
    for (double Q : {0.0, 0.3}) {
      const Fixture f(Q);
      for (Side side : {Side::plus, Side::minus}) {
        const double sign = side == Side::plus ? 1.0 : -1.0;
        const double a = f.chart.series(side).threshold;
        CHECK(a > 0.0);
        double worst = 0.0;
        for (int i = 0; i <= 50; ++i) {
          const double x = sign * (a + 10.0 * i / 50);
          const ChartPoint s = f.chart.point_from_series(side, x);
          const ChartPoint n = f.chart.point_of_x_newton(x);
          worst = std::max(worst, std::abs(s.r - n.r));
        }
        CHECK(worst < 1e-9);
      }
    }
    const Fixture f;
    CHECK_THROWS_AS(lagrange_coefficients(f.p, f.h, Side::plus, 0), ValidationError);
  }

  TEST_CASE("potentials") {
    const Fixture f;
    const double w00 = f.chart.potentials_at(0.0).W0;
    for (int i = 1; i <= 200; ++i) {
      const double x = 0.05 * i;
      CHECK(f.chart.potentials_at(x).W0 < w00);
      CHECK(f.chart.potentials_at(-x).W0 < w00);
    }

    const PotentialSample far_p = f.chart.potentials_at(150.0);
    const PotentialSample far_m = f.chart.potentials_at(-150.0);
    CHECK(std::abs(far_p.V_tilde) < 1e-9);
    const double vm = 1 / f.h.r_minus() - 1 / f.h.r_plus();
    CHECK(std::abs(far_m.V_tilde - vm) < 1e-9);
    CHECK(far_m.V_minus_shifted == doctest::Approx(vm).epsilon(1e-14));

    // Exponential decay of the tails.
    for (Side side : {Side::plus, Side::minus}) {
      const double sign = side == Side::plus ? 1.0 : -1.0;
      const double k = side == Side::plus ? f.h.kappa_plus : f.h.kappa_minus;
      const double v_inf = side == Side::plus ? 0.0 : vm;
      std::vector<double> xs, ys;
      for (double a : {20.0, 30.0, 40.0, 50.0}) {
        const PotentialSample s = f.chart.potentials_at(sign * a);
        xs.push_back(sign * a);
        ys.push_back(std::log(std::abs(s.W0) + std::abs(s.W1) + std::abs(s.V_tilde - v_inf)));
      }
      CHECK(std::abs(slope(xs, ys) - 2 * k) < 0.02 * std::abs(2 * k));
    }

    // Massless field: W1 = F F' / r.
    SpacetimeParams pm = f.p;
    pm.m = 0.0;
    const RWChart cm(pm, f.h);
    for (double x : {-7.0, 0.0, 4.5}) {
      const double r = cm.r_of_x(x);
      const PotentialSample s = cm.potentials_at(x);
      CHECK(s.W1 == doctest::Approx(metric_function(pm, r) * metric_derivative(pm, r) / r)
                         .epsilon(1e-12));
    }
  }

  TEST_CASE("slope of W0 against differences") {
    for (double Q : {0.0, 0.3}) {
      const Fixture f(Q);
      for (double x : {-12.0, -3.0, -0.5, 0.7, 5.0, 14.0}) {
        const double h = 1e-3;
        const double fd =
            (-f.chart.potentials_at(x + 2 * h).W0 + 8 * f.chart.potentials_at(x + h).W0 -
             8 * f.chart.potentials_at(x - h).W0 + f.chart.potentials_at(x - 2 * h).W0) /
            (12 * h);
        CHECK(std::abs(fd - w0_slope(f.p, f.chart, x)) < 1e-6);
      }
      CHECK(std::abs(w0_slope(f.p, f.chart, 0.0)) < 1e-12);
    }
  }
}
