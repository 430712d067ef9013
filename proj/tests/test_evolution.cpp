#include <cmath>
#include <memory>

#include "doctest.h"
#include "dsrn/errors.hpp"
#include "dsrn/evolution.hpp"

using namespace dsrn;

namespace {

ModeProblem problem(int ell, double Q = 0.0, double s = 0.0) {
  RawParams raw;
  raw.bh_charge = Q;
  raw.field_charge = Q == 0.0 ? 0.0 : s / Q;
  const SpacetimeParams p = validate_params(raw);
  return ModeProblem(std::make_shared<const RWChart>(p, horizon_roots(p)), ell);
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (cplx c : v) m = std::max(m, std::abs(c));
  return m;
}

std::string kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("initial data") {
    const ModeProblem p = problem(2);
    GridOptions g;
    g.half_width = 40;
    const Evolver ev(p, g);
    CHECK(ev.x()[ev.index_of(0.0)] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.chart().r_of_x(0.0) == doctest::Approx(3.0).epsilon(1e-14));

    const double w = 2.0;
    FieldState st = ev.init_gaussian(0.0, w, 0.7);
    double norm = 0.0;
    for (cplx u : st.u) norm += std::norm(u) * ev.dx();
    CHECK(norm == doctest::Approx(w * std::sqrt(M_PI / 2)).epsilon(1e-10));
    CHECK(max_abs(st.ut) == 0.0);

    FieldState zero = ev.init_gaussian(0.0, w, 0.0, 0.0);
    for (int i = 0; i < 200; ++i) ev.step(zero, ev.max_step());
    CHECK(max_abs(zero.u) == 0.0);
    CHECK(max_abs(zero.ut) == 0.0);

    CHECK(kind_of([&] { ev.init_gaussian(30.0, 2.0, 0.0); }) == "SupportTooWide");
    CHECK(kind_of([&] { ev.step(st, 2 * ev.max_step()); }) == "CflViolation");
    GridOptions coarse;
    coarse.dx = 0.5;
    CHECK(kind_of([&] { Evolver bad(problem(10), coarse); }) == "Underresolved");
  }

  TEST_CASE("free transport") {
    const ModeProblem f = ModeProblem::free_field();
    GridOptions g;
    g.half_width = 40;
    g.dx = 0.02;
    const Evolver ev(f, g);
    const double w = 1.0, c = -20.0;
    FieldState st = ev.init_gaussian(c, w, 0.0, 1.0, true);
    const double dt = ev.max_step();
    const int steps = static_cast<int>(std::lround(20.0 * w / dt));
    for (int i = 0; i < steps; ++i) ev.step(st, dt);
    double err = 0.0;
    for (std::size_t i = 0; i < ev.x().size(); ++i) {
      const double y = ev.x()[i] - c - st.t;
      err = std::max(err, std::abs(st.u[i] - std::exp(-y * y / (w * w))));
    }
    CHECK(err < 1e-3);
  }

  TEST_CASE("fourth-order spatial defect") {
    const ModeProblem p = problem(2);
    double prev = 0.0;
    std::vector<double> ratios;
    for (double dx : {0.2, 0.1, 0.05}) {
      GridOptions g;
      g.half_width = 30;
      g.dx = dx;
      const Evolver ev(p, g);
      std::vector<cplx> u(ev.x().size()), exact(ev.x().size());
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = ev.x()[i], a = 0.3;
        const double e = std::exp(-a * x * x);
        u[i] = cplx(e * std::cos(x), e * std::sin(0.5 * x));
        const cplx d2(e * ((4 * a * a * x * x - 2 * a - 1) * std::cos(x) +
                           4 * a * x * std::sin(x)),
                      e * ((4 * a * a * x * x - 2 * a - 0.25) * std::sin(0.5 * x) -
                           2 * a * x * std::cos(0.5 * x)));
        exact[i] = -d2 + ev.potential()[i] * u[i];
      }
      const auto pu = ev.apply_operator(u);
      double defect = 0.0;
      for (std::size_t i = 2; i + 2 < u.size(); ++i)
        defect = std::max(defect, std::abs(pu[i] - exact[i]));
      if (prev > 0) ratios.push_back(prev / defect);
      prev = defect;
    }
    for (double r : ratios) CHECK(std::abs(r - 16.0) < 3.0);
  }

  TEST_CASE("energy conservation and reversal") {
    const ModeProblem p = problem(2);
    GridOptions g;
    g.half_width = 60;
    const Evolver ev(p, g);
    FieldState st = ev.init_gaussian(0.0, 3.0, 0.0);
    const double e0 = ev.energy(st);
    const double dt = ev.max_step();
    double drift = 0.0;
    // The pulse front needs t ~ 60 - 18 to reach the ends.
    while (st.t < 35.0) {
      ev.step(st, dt);
      drift = std::max(drift, std::abs(ev.energy(st) - e0) / e0);
    }
    CHECK(drift < 1e-6);

    // RK4 is not exactly reversible; its round-trip error is O(dt^4 t).
    const FieldState start = ev.init_gaussian(0.0, 3.0, 0.0);
    FieldState rt = start;
    const double h = 0.5 * dt;
    for (int i = 0; i < 400; ++i) ev.step(rt, h);
    for (int i = 0; i < 400; ++i) ev.step(rt, -h);
    double err = 0.0;
    for (std::size_t i = 0; i < rt.u.size(); ++i)
      err = std::max(err, std::abs(rt.u[i] - start.u[i]) + std::abs(rt.ut[i] - start.ut[i]));
    CHECK(err < 1e-8);
  }

  TEST_CASE("local energy") {
    const ModeProblem p = problem(2);
    GridOptions g;
    g.half_width = 40;
    const Evolver ev(p, g);
    const EnergyWindow win = ev.window(-10, 10);
    for (double c : win.chi) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
    FieldState zero = ev.init_gaussian(0.0, 2.0, 0.0, 0.0);
    CHECK(ev.local_energy(zero, win) == 0.0);
    FieldState one = ev.init_gaussian(0.0, 2.0, 0.3, 1.0);
    FieldState two = ev.init_gaussian(0.0, 2.0, 0.3, 2.0);
    CHECK(ev.local_energy(two, win) ==
          doctest::Approx(4 * ev.local_energy(one, win)).epsilon(1e-13));
    CHECK(kind_of([&] { ev.window(-50, 10); }) == "BadWindow");
    CHECK(kind_of([&] { ev.window(5, -5); }) == "BadWindow");
  }

  TEST_CASE("gauge consistency") {
    const double Q = 0.1, s = 0.05;
    const ModeProblem p = problem(2, Q, s);
    const double v_plus = 1 / p.chart().horizons().r_plus();
    GridOptions g;
    g.half_width = 40;
    GridOptions shifted = g;
    shifted.potential_offset = v_plus;
    const Evolver a(p, g), b(p, shifted);
    FieldState ua = a.init_gaussian(0.0, 2.0, 0.5);
    FieldState ub = b.init_gaussian(0.0, 2.0, 0.5);
    // Gauge-equivalent data: w = exp(i s V_+ t) u has w_t = u_t + i s V_+ u.
    for (std::size_t i = 0; i < ub.u.size(); ++i) ub.ut[i] = cplx(0, s * v_plus) * ub.u[i];
    // Half the CFL step keeps the two schemes' time errors below the check.
    const double dt = 0.5 * a.max_step();
    for (int i = 0; i < 600; ++i) {
      a.step(ua, dt);
      b.step(ub, dt);
    }
    double err = 0.0;
    for (std::size_t i = 0; i < ua.u.size(); ++i)
      err = std::max(err, std::abs(std::abs(ua.u[i]) - std::abs(ub.u[i])));
    CHECK(err < 1e-8);
    const std::size_t k = a.index_of(1.0);
    const cplx phase = ub.u[k] * std::exp(cplx(0, -s * v_plus * ua.t)) / ua.u[k];
    CHECK(std::abs(phase - 1.0) < 1e-8);
  }
}
