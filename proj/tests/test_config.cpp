#include <cstdlib>

#include "doctest.h"
#include "dsrn/config.hpp"
#include "dsrn/errors.hpp"

using namespace dsrn;

namespace {

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults and parsing") {
    const RunConfig d = parse_config("{}");
    CHECK(d.params.lambda == 0.04);
    CHECK(d.resonances.ells == std::vector<int>{5, 10, 20});
    CHECK_NOTHROW(validate_config(d));

    const RunConfig c = parse_config(R"({
      "mass": 1.0, "bh_charge": 0.1, "lambda": 0.05, "field_charge": 0.2, "field_mass": 0.5,
      "threads": 3, "output_dir": "runs/a",
      "geometry": {"chart_points": 11},
      "resonances": {"ell": [2, 4], "re_min": 0.1, "re_max": 1.0, "im_min": -0.05, "im_max": 0.1},
      "pseudopoles": {"n_max": 12},
      "ringdown": {"ell": 3, "dx": 0.05, "fit_start": 120}
    })");
    CHECK(c.params.bh_charge == 0.1);
    CHECK(c.params.field_mass == 0.5);
    CHECK(c.threads == 3);
    CHECK(c.output_dir == "runs/a");
    CHECK(c.geometry.chart_points == 11);
    CHECK(c.resonances.ells == std::vector<int>{2, 4});
    CHECK(*c.resonances.im_min == -0.05);
    CHECK(c.lattice.n_max == 12);
    CHECK(c.ringdown.ell == 3);
    CHECK(c.ringdown.fit_start == 120.0);
    CHECK_NOTHROW(validate_config(c));

    CHECK(parse_config(R"({"resonances": {"ell": "1, 3,7"}})").resonances.ells ==
          std::vector<int>{1, 3, 7});
  }

  TEST_CASE("errors name the field") {
    CHECK(message_of([] { parse_config(R"({"lamda": 0.04})"); }).find("lamda") !=
          std::string::npos);
    CHECK(message_of([] { parse_config(R"({"ringdown": {"dt": 0.1}})"); })
              .find("ringdown.dt") != std::string::npos);
    CHECK(message_of([] { parse_config(R"({"mass": "heavy"})"); }).find("mass") !=
          std::string::npos);
    CHECK(message_of([] { parse_config("[1, 2]"); }).find("BadConfig") != std::string::npos);
    CHECK(message_of([] { load_config("/nonexistent/cfg.json"); }).find("MissingConfig") !=
          std::string::npos);

    RunConfig c;
    c.ringdown.dx = -1;
    CHECK(message_of([&] { validate_config(c); }).find("ringdown.dx") != std::string::npos);
    c = {};
    c.resonances.re_min = 0.1;
    CHECK(message_of([&] { validate_config(c); }).find("re_min") != std::string::npos);
    c = {};
    c.params.lambda = 0.2;
    CHECK(message_of([&] { validate_config(c); }).find("NariaiViolation") != std::string::npos);
    c = {};
    c.lattice.k_min = 4;
    c.lattice.k_max = 2;
    CHECK(message_of([&] { validate_config(c); }).find("pseudopoles.k_min") != std::string::npos);
  }

  TEST_CASE("environment overrides") {
    ::setenv("DSRN_LAMBDA", "0.05", 1);
    ::setenv("DSRN_RINGDOWN_DX", "0.025", 1);
    ::setenv("DSRN_RESONANCES_ELL", "[3]", 1);
    ::setenv("DSRN_OUTPUT_DIR", "elsewhere", 1);
    RunConfig c = parse_config("{}");
    apply_env_overrides(c);
    CHECK(c.params.lambda == 0.05);
    CHECK(c.ringdown.dx == 0.025);
    CHECK(c.resonances.ells == std::vector<int>{3});
    CHECK(c.output_dir == "elsewhere");
    ::setenv("DSRN_THREADS", "many", 1);
    CHECK(message_of([&] { apply_env_overrides(c); }).find("DSRN_THREADS") != std::string::npos);
    for (const char* v :
         {"DSRN_LAMBDA", "DSRN_RINGDOWN_DX", "DSRN_RESONANCES_ELL", "DSRN_OUTPUT_DIR", "DSRN_THREADS"})
      ::unsetenv(v);
  }

  TEST_CASE("ell lists and the charge product") {
    CHECK(parse_ell_list("5,10,20") == std::vector<int>{5, 10, 20});
    CHECK_THROWS_AS(parse_ell_list("5,x"), ValidationError);
    CHECK_THROWS_AS(parse_ell_list(" , "), ValidationError);
    CHECK_THROWS_AS(parse_ell_list("-1"), ValidationError);

    RawParams p;
    p.bh_charge = 0.1;
    set_charge_product(p, 0.02);
    CHECK(p.field_charge * p.bh_charge == doctest::Approx(0.02).epsilon(1e-15));
    RawParams q0;
    CHECK(message_of([&] { set_charge_product(q0, 0.02); }).find("ChargeProductWithoutCharge") !=
          std::string::npos);
    CHECK_NOTHROW(set_charge_product(q0, 0.0));
  }
}
