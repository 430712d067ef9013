#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "dsrn/errors.hpp"
#include "dsrn/pencil.hpp"

using namespace dsrn;

namespace {

std::shared_ptr<const RWChart> chart_for(double Q, double s, double m = 1.0) {
  RawParams raw;
  raw.bh_charge = Q;
  raw.field_mass = m;
  raw.field_charge = Q == 0.0 ? 0.0 : s / Q;
  const SpacetimeParams p = validate_params(raw);
  return std::make_shared<const RWChart>(p, horizon_roots(p));
}

ModeProblem problem(int ell, double Q = 0.0, double s = 0.0, double m = 1.0) {
  return ModeProblem(chart_for(Q, s, m), ell);
}

}  // namespace

TEST_SUITE("pencil") {
  TEST_CASE("effective potential") {
    const ModeProblem p0 = problem(0);
    for (double x : {-10.0, -1.0, 0.0, 3.0, 12.0})
      CHECK(p0.effective_potential(x) == p0.chart().potentials_at(x).W1);

    const ModeProblem p40 = problem(40);
    const double approx = 40.0 * 41.0 * metric_function(p40.chart().params(), 3.0) / 9.0;
    CHECK(std::abs(p40.effective_potential(0.0) - approx) < 1e-2 * approx);

    // Weighted integral of |W~| converges for alpha below 2 kappa.
    const ModeProblem p2 = problem(2);
    const double alpha = p2.kappa();
    auto integral = [&](double X) {
      const int n = static_cast<int>(X * 20);
      double sum = 0.0;
      for (int i = -n; i <= n; ++i) {
        const double x = X * i / n;
        const double w = (i == -n || i == n) ? 0.5 : 1.0;
        sum += w * std::exp(alpha * std::abs(x)) * std::abs(p2.effective_potential(x));
      }
      return sum * X / n;
    };
    const double i80 = integral(80), i160 = integral(160);
    CHECK(std::abs(i160 - i80) < 1e-2 * i80);
  }

  TEST_CASE("free harness") {
    const ModeProblem f = ModeProblem::free_field();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> re(-3.0, 3.0), im(-0.5, 0.5);
    double worst = 0.0, spread = 0.0;
    for (int i = 0; i < 50; ++i) {
      const cplx z(re(rng), im(rng));
      const WronskianResult w = wronskian(f, z);
      worst = std::max(worst, std::abs(w.value - cplx(0, -2) * z));
      spread = std::max(spread, w.x_spread);
    }
    CHECK(worst < 1e-8);
    CHECK(spread < 1e-8);

    const cplx z(0.8, 0.1);
    const std::vector<double> pts{-3.0, 0.0, 2.5};
    const JostSolution ep = jost(f, z, Side::plus, pts);
    for (double x : pts) CHECK(std::abs(ep.value(x) - std::exp(cplx(0, 1) * z * x)) < 1e-9);
  }

  TEST_CASE("x-independence and the zero frequency") {
    for (int ell : {0, 1, 2}) {
      CAPTURE(ell);
      const ModeProblem p = problem(ell);
      const WronskianResult w0 = wronskian(p, cplx(0.0, 0.0));
      CHECK(std::abs(w0.value) > 1e-3);
      for (cplx z : {cplx(0.3, 0.02), cplx(0.7, -0.03), cplx(-1.1, -0.06)})
        CHECK(wronskian(p, z).x_spread < 1e-8);
    }
  }

  TEST_CASE("conjugation oracle for real potentials") {
    const ModeProblem p = problem(3);
    for (cplx z : {cplx(0.4, 0.01), cplx(0.9, -0.05), cplx(1.5, 0.0)}) {
      const cplx a = wronskian(p, z).value;
      const cplx b = wronskian(p, -std::conj(z)).value;
      CHECK(std::abs(b - std::conj(a)) < 1e-8 * std::abs(a));
    }
    // Two independent solutions at real z: e_plus(z) and conj(e_plus(z)).
    const cplx z(0.9, 0.0);
    const JostSolution e = jost(p, z, Side::plus, {0.0});
    const cplx u = e.value(0.0), du = e.derivative(0.0);
    const cplx wr = u * std::conj(du) - du * std::conj(u);
    CHECK(std::abs(wr) > 1e-6);
    CHECK(std::abs(wr - cplx(0, -2) * z.real()) < 1e-8);
  }

  TEST_CASE("charge mirror symmetry of the Wronskian") {
    const double Q = 0.1;
    for (double s : {0.02, 0.05}) {
      const ModeProblem a = problem(4, Q, s);
      const ModeProblem b = problem(4, Q, -s);
      for (cplx z : {cplx(0.5, 0.01), cplx(1.1, -0.04)}) {
        const cplx wa = wronskian(a, z).value;
        const cplx wb = wronskian(b, -std::conj(z)).value;
        CHECK(std::abs(wb - std::conj(wa)) < 1e-8 * std::abs(wa));
      }
    }
  }

  TEST_CASE("ODE defect of the Jost solutions") {
    for (double s : {0.0, 0.03}) {
      const ModeProblem p = problem(2, 0.1, s);
      const double ss = p.charge_product();
      const cplx z(0.6, -0.03);
      const double h = 2e-3;
      std::vector<double> pts;
      std::vector<double> centers;
      for (int i = 0; i < 50; ++i) {
        const double c = -15.0 + 30.0 * i / 49;
        centers.push_back(c);
        for (int k = -2; k <= 2; ++k) pts.push_back(c + k * h);
      }
      std::sort(pts.begin(), pts.end());
      for (Side side : {Side::plus, Side::minus}) {
        const JostSolution e = jost(p, z, side, pts);
        double worst = 0.0;
        for (double c : centers) {
          const cplx d2 = (-e.at(c + 2 * h).derivative + 8.0 * e.at(c + h).derivative -
                           8.0 * e.at(c - h).derivative + e.at(c - 2 * h).derivative) /
                          (12 * h);
          const double v = p.v_tilde(c);
          const cplx rhs =
              (p.effective_potential(c) - (z - ss * v) * (z - ss * v)) * e.at(c).value;
          worst = std::max(worst, std::abs(d2 - rhs) /
                                      (std::abs(e.at(c).value) + std::abs(e.at(c).derivative)));
        }
        CHECK(worst < 1e-9);
      }
    }
  }

  TEST_CASE("analyticity of the Wronskian") {
    const ModeProblem p = problem(2);
    for (cplx z : {cplx(0.5, 0.02), cplx(0.8, -0.04)}) {
      const WronskianResult w = wronskian(p, z);
      const double h = 1e-5;
      const cplx dr = (wronskian(p, z + h).value - wronskian(p, z - h).value) / (2 * h);
      const cplx di = (wronskian(p, z + cplx(0, h)).value - wronskian(p, z - cplx(0, h)).value) /
                      cplx(0, 2 * h);
      CHECK(std::abs(dr - di) < 1e-6 * std::abs(dr));
      CHECK(std::abs(w.derivative() - dr) < 1e-6 * std::abs(dr));
    }
  }

  TEST_CASE("rescaled Wronskian against a tighter run") {
    ModeOptions loose, tight;
    tight.ode_tol = 1e-13;
    const auto chart = chart_for(0.0, 0.0);
    const ModeProblem a(chart, 20, loose), b(chart, 20, tight);
    for (cplx z : {cplx(0.2, -0.07), cplx(1.0, -0.03), cplx(4.0, -0.06), cplx(5.0, 0.05)}) {
      const WronskianResult wa = wronskian(a, z), wb = wronskian(b, z);
      CHECK(std::abs(std::exp(wa.log_value - wb.log_value) - 1.0) < 1e-8);
    }
  }

  TEST_CASE("strip and seeds") {
    const ModeProblem p = problem(2);
    CHECK(p.strip_floor() == doctest::Approx(-0.95 * p.kappa()));
    CHECK_THROWS_AS(wronskian(p, cplx(0.5, -p.kappa())), ValidationError);
    try {
      wronskian(p, cplx(0.5, -0.079));
      FAIL("expected StripViolation");
    } catch (const ValidationError& e) {
      CHECK(e.kind() == "StripViolation");
    }
    CHECK(p.tail_size(p.x_inf_plus()) < 1e-10 * 6 * 1.0001);
    CHECK(p.tail_size(-p.x_inf_minus()) < 1e-10 * 6 * 1.0001);
    CHECK(p.x_inf_plus() <= 200.0);
  }

  TEST_CASE("resolvent kernel") {
    const ModeProblem f = ModeProblem::free_field();
    const cplx z(0.7, 0.2);
    for (auto [x, y] : {std::pair{0.3, -1.2}, std::pair{2.0, 2.5}, std::pair{-1.0, -4.0}}) {
      const cplx k = resolvent_kernel(f, z, x, y);
      CHECK(std::abs(k - cplx(0, 1) / (2.0 * z) * std::exp(cplx(0, 1) * z * std::abs(x - y))) <
            1e-8);
      CHECK(std::abs(k - resolvent_kernel(f, z, y, x)) < 1e-14 * std::abs(k));
    }
    CHECK_THROWS_AS(resolvent_kernel(f, cplx(0.0, 0.0), 0.0, 1.0), NumericalError);

    const ModeProblem p = problem(2, 0.1, 0.02);
    const double s = p.charge_product();
    const cplx w(0.5, 0.03);
    const double x = 1.0, h = 1e-2;
    for (double y : {-4.0, -1.5, 3.0, 6.0}) {
      cplx k[5];
      for (int j = -2; j <= 2; ++j) k[j + 2] = resolvent_kernel(p, w, x, y + j * h);
      const cplx d2 = (-k[0] + 16.0 * k[1] - 30.0 * k[2] + 16.0 * k[3] - k[4]) / (12 * h * h);
      const double v = p.v_tilde(y);
      const cplx defect = -d2 + (p.effective_potential(y) - (w - s * v) * (w - s * v)) * k[2];
      CHECK(std::abs(defect) < 1e-6 * std::max(1.0, std::abs(k[2])));
    }
  }

  TEST_CASE("Wronskian sampling grid") {
    const ModeProblem f = ModeProblem::free_field();
    const auto rows = wronskian_grid(f, cplx(-1, -0.5), cplx(1, 0.5), 5, 3);
    REQUIRE(rows.size() == 15);
    for (const auto& r : rows) CHECK(std::abs(r.w - cplx(0, -2) * r.z) < 1e-8);
  }
}
