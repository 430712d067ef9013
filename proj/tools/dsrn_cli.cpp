#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsrn/config.hpp"
#include "dsrn/errors.hpp"
#include "dsrn/evolution.hpp"
#include "dsrn/io.hpp"
#include "dsrn/pencil.hpp"
#include "dsrn/resonance.hpp"
#include "dsrn/ringdown.hpp"
#include "dsrn/spacetime.hpp"
#include "json.hpp"

using namespace dsrn;
using ojson = nlohmann::ordered_json;

namespace {

struct Flags {
  std::string config;
  std::string out;
  int threads = 0;
  std::string ell;
  std::optional<double> charge_product;
  int chart_points = 0;
  int sample_every = 0;
  int snapshot_every = -1;
};

RunConfig assemble(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  apply_env_overrides(cfg);
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.threads != 0) cfg.threads = f.threads;
  if (!f.ell.empty()) {
    cfg.resonances.ells = parse_ell_list(f.ell);
    cfg.ringdown.ell = cfg.resonances.ells.front();
  }
  if (f.charge_product) set_charge_product(cfg.params, *f.charge_product);
  if (f.chart_points != 0) cfg.geometry.chart_points = f.chart_points;
  if (f.sample_every != 0) cfg.ringdown.sample_every = f.sample_every;
  if (f.snapshot_every >= 0) cfg.ringdown.snapshot_every = f.snapshot_every;
  validate_config(cfg);
  return cfg;
}

std::string path_in(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

struct Setup {
  SpacetimeParams params;
  Horizons horizons;
  std::shared_ptr<const RWChart> chart;
};

Setup setup(const RunConfig& cfg) {
  Setup s;
  s.params = validate_params(cfg.params);
  s.horizons = horizon_roots(s.params);
  s.chart = std::make_shared<const RWChart>(s.params, s.horizons);
  return s;
}

ojson complex_json(cplx z) { return ojson{{"re", z.real()}, {"im", z.imag()}}; }

void cmd_geometry(const RunConfig& cfg) {
  const Setup s = setup(cfg);
  write_text(path_in(cfg, "horizons.json"), horizons_json(s.params, s.horizons));
  write_text(path_in(cfg, "chart.csv"),
             chart_csv(*s.chart, cfg.geometry.chart_points, cfg.geometry.chart_extent));
  std::printf("r_minus = %.15g, r_plus = %.15g, kappa = %.15g\n", s.horizons.r_minus(),
              s.horizons.r_plus(), s.horizons.kappa);
}

// Least-damped entry, preferring Re z >= 0 among equally damped mirror pairs.
const Resonance* pick_dominant(const std::vector<Resonance>& list) {
  const Resonance* best = nullptr;
  for (const auto& r : list) {
    if (!best) {
      best = &r;
      continue;
    }
    const double d = r.z.imag() - best->z.imag();
    if (d > 1e-6 * (1 + std::abs(r.z)) ||
        (std::abs(d) <= 1e-6 * (1 + std::abs(r.z)) && r.z.real() > best->z.real()))
      best = &r;
  }
  return best;
}

void cmd_resonances(const RunConfig& cfg) {
  const Setup s = setup(cfg);
  const auto& rc = cfg.resonances;
  ModeOptions mo;
  mo.strip_margin = rc.strip_margin;
  SolverOptions so;
  so.threads = cfg.threads;
  const cplx offset(s.params.s / s.horizons.r_plus(), 0.0);

  ojson summary;
  summary["charge_product"] = s.params.s;
  summary["modes"] = ojson::array();
  std::ostringstream trend;
  trend << "ell,re_z,im_z,lattice_re,lattice_im,drift,relative_drift\n";

  for (int ell : rc.ells) {
    const ModeProblem problem(s.chart, ell, mo);
    const int n_max = std::max(cfg.lattice.n_max, ell + rc.n_extra + 1);
    const PseudoPoleLattice lattice =
        pseudo_poles(s.params, 1, n_max, cfg.lattice.k_min, cfg.lattice.k_max);
    const std::vector<cplx> points = lattice.points();

    std::vector<Rectangle> boxes;
    if (rc.re_min)
      boxes.push_back({cplx(*rc.re_min, *rc.im_min), cplx(*rc.re_max, *rc.im_max)});
    else
      boxes = default_search_boxes(problem, lattice.prefactor, rc.n_extra);

    std::vector<Resonance> found;
    ojson box_log = ojson::array();
    for (const auto& box : boxes) {
      std::vector<cplx> seeds;
      for (cplx p : points)
        if (box.contains(p - offset)) seeds.push_back(p - offset);
      const int count = count_zeros(problem, box, so);
      std::vector<Resonance> here;
      if (count > 0) here = find_resonances(problem, box, rc.seeds_per_axis, so, seeds);
      int total = 0;
      for (const auto& r : here) total += r.multiplicity;
      box_log.push_back({{"re_min", box.lower_left.real()},
                         {"re_max", box.upper_right.real()},
                         {"im_min", box.lower_left.imag()},
                         {"im_max", box.upper_right.imag()},
                         {"winding", count},
                         {"multiplicity_sum", total}});
      found.insert(found.end(), here.begin(), here.end());
    }
    std::sort(found.begin(), found.end(), [](const Resonance& a, const Resonance& b) {
      return a.z.real() != b.z.real() ? a.z.real() < b.z.real() : a.z.imag() < b.z.imag();
    });

    std::vector<ResonanceRow> rows(found.size());
    for (std::size_t i = 0; i < found.size(); ++i) rows[i].res = found[i];
    if (!found.empty()) {
      std::vector<cplx> zs;
      for (const auto& r : found) zs.push_back(r.z);
      const MatchReport rep = match_to_lattice(zs, points, offset);
      for (const auto& p : rep.pairs) {
        rows[p.resonance].matched = true;
        rows[p.resonance].lattice = p.mu;
        rows[p.resonance].drift = p.drift;
      }
    }
    const std::string stem = "resonances_l" + std::to_string(ell);
    write_text(path_in(cfg, stem + ".csv"), resonance_csv(rows));
    write_text(path_in(cfg, stem + ".json"), resonance_json(rows));

    if (rc.grid_re > 0 && !boxes.empty()) {
      const auto grid = wronskian_grid(problem, boxes.front().lower_left,
                                       boxes.front().upper_right, rc.grid_re, rc.grid_im);
      write_text(path_in(cfg, "wronskian_grid_l" + std::to_string(ell) + ".csv"),
                 wronskian_grid_csv(grid));
    }

    ojson mode{{"ell", ell}, {"boxes", box_log}, {"found", found.size()}};
    if (const Resonance* dom = pick_dominant(found)) {
      const auto it = std::find_if(rows.begin(), rows.end(),
                                   [&](const ResonanceRow& r) { return r.res.z == dom->z; });
      trend << ell << ',' << fmt_double(dom->z.real()) << ',' << fmt_double(dom->z.imag()) << ',';
      if (it->matched)
        trend << fmt_double(it->lattice.real()) << ',' << fmt_double(it->lattice.imag()) << ','
              << fmt_double(it->drift) << ',' << fmt_double(it->drift / std::abs(it->lattice));
      else
        trend << ",,,";
      trend << '\n';
      mode["least_damped"] = complex_json(dom->z);
    } else {
      mode["least_damped"] = nullptr;
    }
    summary["modes"].push_back(mode);
    std::printf("l = %d: %zu resonances in %zu boxes\n", ell, found.size(), boxes.size());
  }
  write_text(path_in(cfg, "drift_trend.csv"), trend.str());
  write_text(path_in(cfg, "resonance_summary.json"), summary.dump(2) + "\n");
}

void cmd_pseudopoles(const RunConfig& cfg) {
  const Setup s = setup(cfg);
  const auto& lc = cfg.lattice;
  const PseudoPoleLattice lattice = pseudo_poles(s.params, lc.n_min, lc.n_max, lc.k_min, lc.k_max);
  write_text(path_in(cfg, "pseudopoles.csv"), pseudo_pole_csv(lattice));

  const double M = s.params.M, L = s.params.Lambda;
  ojson j;
  j["prefactor"] = lattice.prefactor;
  j["charge_shift"] = lattice.charge_shift;
  j["damping_step"] = lattice.damping_step;
  j["min_damping"] = lattice.min_damping();
  if (s.horizons.uncharged_limit)
    j["min_damping_closed_form"] = std::sqrt(1 - 9 * L * M * M) / (12 * std::sqrt(3.0) * M);
  j["w0_curvature"] = w0_curvature(*s.chart);
  write_text(path_in(cfg, "pseudopoles.json"), j.dump(2) + "\n");

  std::ostringstream os;
  os << "ell,k,re,im\n";
  for (int ell : cfg.resonances.ells) {
    if (ell < 1) continue;
    const auto g = gamma0(*s.chart, ell, lc.k_min, lc.k_max);
    for (std::size_t k = 0; k < g.size(); ++k)
      os << ell << ',' << lc.k_min + static_cast<int>(k) << ',' << fmt_double(g[k].real()) << ','
         << fmt_double(g[k].imag()) << '\n';
  }
  write_text(path_in(cfg, "gamma0.csv"), os.str());
  std::printf("%zu lattice entries, min |Im| = %.15g\n", lattice.entries.size(),
              lattice.min_damping());
}

void cmd_ringdown(const RunConfig& cfg) {
  const Setup s = setup(cfg);
  const auto& rd = cfg.ringdown;
  ModeOptions mo;
  mo.strip_margin = cfg.resonances.strip_margin;
  const ModeProblem problem(s.chart, rd.ell, mo);

  RingdownRunOptions ro;
  ro.grid.half_width = rd.half_width;
  ro.grid.dx = rd.dx;
  ro.grid.cfl = rd.cfl;
  ro.center = rd.center;
  ro.width = rd.width;
  ro.momentum = rd.momentum;
  ro.probe = rd.probe;
  ro.sample_every = rd.sample_every;
  ro.snapshot_every = rd.snapshot_every;
  ro.window_lo = rd.window_lo;
  ro.window_hi = rd.window_hi;
  ro.fit_start = rd.fit_start;
  ro.fit_end = rd.fit_end;
  const RingdownRun run = run_ringdown(problem, ro);

  const std::string stem = "ringdown_l" + std::to_string(rd.ell);
  write_text(path_in(cfg, stem + "_timeseries.csv"), time_series_csv(run));
  write_text(path_in(cfg, stem + "_modes.csv"), modes_csv(run.fit.modes));
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshots_l%d/snap_%05zu.csv", rd.ell, i);
    write_text(path_in(cfg, name), snapshot_csv(run.x, run.snapshots[i].second));
  }
  if (!run.snapshots.empty()) {
    std::ostringstream idx;
    idx << "index,t\n";
    for (std::size_t i = 0; i < run.snapshots.size(); ++i)
      idx << i << ',' << fmt_double(run.snapshots[i].first) << '\n';
    write_text(path_in(cfg, "snapshots_l" + std::to_string(rd.ell) + "/index.csv"), idx.str());
  }

  const cplx w = run.fit.dominant.omega;
  ojson j;
  j["ell"] = rd.ell;
  j["charge_product"] = s.params.s;
  j["fit_start"] = run.fit_start;
  j["fit_end"] = run.fit_end;
  j["dominant"] = complex_json(w);
  j["ci_re"] = run.fit.ci_re;
  j["ci_im"] = run.fit.ci_im;
  j["energy_slope"] = run.energy_slope;
  j["mode_count"] = run.fit.modes.size();
  write_text(path_in(cfg, stem + "_fit.json"), j.dump(2) + "\n");
  std::printf("dominant omega = %.12g %+.12gi, energy slope = %.6g\n", w.real(), w.imag(),
              run.energy_slope);

  const std::string table = path_in(cfg, "resonances_l" + std::to_string(rd.ell) + ".csv");
  std::ifstream in(table);
  if (!in) {
    std::printf("warning: %s not found; fit-only output\n", table.c_str());
    return;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  const auto entries = read_resonance_csv(ss.str());
  // A sample exp(-i w t) of the (l, s) field belongs to Res(l, -s) = -conj(Res(l, s)).
  std::vector<cplx> cand;
  for (const auto& [l, z] : entries)
    if (l == rd.ell) cand.push_back(-std::conj(z));
  if (cand.empty()) {
    std::printf("warning: %s has no entries for l = %d; fit-only output\n", table.c_str(), rd.ell);
    return;
  }
  double top = -1e300;
  for (cplx c : cand) top = std::max(top, c.imag());
  cplx ref = 0.0;
  double best = 1e300;
  for (cplx c : cand)
    if (c.imag() >= top - 1e-9 * (1 + std::abs(c)) && std::abs(c - w) < best) {
      best = std::abs(c - w);
      ref = c;
    }
  std::ostringstream os;
  os << "ell,re_fit,im_fit,re_res,im_res,rel_err_re,rel_err_im,energy_slope,two_im_res,"
        "rel_err_slope\n";
  const double slope_ref = 2 * ref.imag();
  os << rd.ell << ',' << fmt_double(w.real()) << ',' << fmt_double(w.imag()) << ','
     << fmt_double(ref.real()) << ',' << fmt_double(ref.imag()) << ','
     << fmt_double(std::abs(w.real() - ref.real()) / std::abs(ref.real())) << ','
     << fmt_double(std::abs(w.imag() - ref.imag()) / std::abs(ref.imag())) << ','
     << fmt_double(run.energy_slope) << ',' << fmt_double(slope_ref) << ','
     << fmt_double(std::abs(run.energy_slope - slope_ref) / std::abs(slope_ref)) << '\n';
  write_text(path_in(cfg, stem + "_comparison.csv"), os.str());
}

// Quick internal checks on the configured geometry.
int cmd_selftest(const RunConfig& cfg) {
  int failures = 0;
  auto report = [&](bool ok, const std::string& what) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
  };
  const Setup s = setup(cfg);
  double res = 0.0;
  for (double r : s.horizons.r)
    if (r != 0.0) res = std::max(res, std::abs(metric_function(s.params, r)));
  report(res < 1e-12, "horizon residuals");

  double trip = 0.0;
  for (int i = 1; i < 20; ++i) {
    const double r = s.horizons.r_minus() + (s.horizons.r_plus() - s.horizons.r_minus()) * i / 20;
    trip = std::max(trip, std::abs(s.chart->r_of_x(s.chart->x_of_r(r)) - r));
  }
  report(trip < 1e-9, "chart round trip");

  const ModeProblem free = ModeProblem::free_field();
  double werr = 0.0;
  for (cplx z : {cplx(0.7, 0.1), cplx(-1.3, -0.2), cplx(2.1, 0.0)})
    werr = std::max(werr, std::abs(wronskian(free, z).value + cplx(0, 2) * z) / std::abs(z));
  report(werr < 1e-8, "free Wronskian");

  const PseudoPoleLattice lat = pseudo_poles(s.params, 1, 5, 0, 1);
  report(lat.min_damping() > 0 && std::isfinite(lat.min_damping()), "lattice damping");
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonances and ringdown of charged fields on De Sitter-Reissner-Nordstrom"};
  app.fallthrough();
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output directory");
  app.add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--ell", f.ell, "comma-separated angular indices");
  app.add_option("--charge-product", f.charge_product, "s = q Q (requires bh_charge != 0)");

  auto* geo = app.add_subcommand("geometry", "horizons JSON and chart CSV");
  geo->add_option("--chart-points", f.chart_points, "chart CSV resolution");
  auto* res = app.add_subcommand("resonances", "certified resonances and lattice drift");
  auto* pp = app.add_subcommand("pseudopoles", "pseudo-pole lattice and semiclassical energies");
  auto* rd = app.add_subcommand("ringdown", "time-domain evolution and ringdown fit");
  rd->add_option("--sample-every", f.sample_every, "steps between probe samples");
  rd->add_option("--snapshot-every", f.snapshot_every, "steps between snapshots (0 disables)");
  auto* st = app.add_subcommand("selftest", "quick internal checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = assemble(f);
    if (geo->parsed()) cmd_geometry(cfg);
    if (res->parsed()) cmd_resonances(cfg);
    if (pp->parsed()) cmd_pseudopoles(cfg);
    if (rd->parsed()) cmd_ringdown(cfg);
    if (st->parsed()) return cmd_selftest(cfg);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
