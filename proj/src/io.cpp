#include "dsrn/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsrn/errors.hpp"
#include "json.hpp"

namespace dsrn {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("OutputError", "cannot write " + path);
  out << text;
  if (!out) throw ValidationError("OutputError", "write failed for " + path);
}

std::string horizons_json(const SpacetimeParams& p, const Horizons& h) {
  nlohmann::ordered_json j;
  j["params"] = {{"mass", p.M}, {"bh_charge", p.Q}, {"lambda", p.Lambda},
                 {"field_charge", p.q}, {"field_mass", p.m}, {"charge_product", p.s}};
  j["r_n"] = h.r_n();
  j["r_c"] = h.r_c();
  j["r_minus"] = h.r_minus();
  j["r_plus"] = h.r_plus();
  j["A"] = {h.A[0], h.A[1], h.A[2], h.A[3]};
  j["kappa_minus"] = h.kappa_minus;
  j["kappa_plus"] = h.kappa_plus;
  j["kappa"] = h.kappa;
  j["photon_sphere"] = h.photon_sphere;
  j["uncharged_limit"] = h.uncharged_limit;
  j["degenerate_case"] = h.uncharged_limit ? "r_c = 0 (Q = 0)" : "none";
  return j.dump(2) + "\n";
}

std::string chart_csv(const RWChart& chart, int n, double extent) {
  std::ostringstream os;
  os << "x,r,W0,W1,V_tilde\n";
  for (int i = 0; i < n; ++i) {
    const double x = n == 1 ? 0.0 : -extent + 2.0 * extent * i / (n - 1);
    const ChartPoint pt = chart.point_of_x(x);
    const PotentialSample s = chart.potentials_at_point(pt);
    os << fmt_double(x) << ',' << fmt_double(pt.r) << ',' << fmt_double(s.W0) << ','
       << fmt_double(s.W1) << ',' << fmt_double(s.V_tilde) << '\n';
  }
  return os.str();
}

std::string resonance_csv(const std::vector<ResonanceRow>& rows) {
  std::ostringstream os;
  os << "ell,re_z,im_z,multiplicity,residual,matched_lattice_re,matched_lattice_im,drift\n";
  for (const auto& r : rows) {
    os << r.res.ell << ',' << fmt_double(r.res.z.real()) << ',' << fmt_double(r.res.z.imag())
       << ',' << r.res.multiplicity << ',' << fmt_double(r.res.residual) << ',';
    if (r.matched)
      os << fmt_double(r.lattice.real()) << ',' << fmt_double(r.lattice.imag()) << ','
         << fmt_double(r.drift);
    else
      os << ",,";
    os << '\n';
  }
  return os.str();
}

std::string resonance_json(const std::vector<ResonanceRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["ell"] = r.res.ell;
    j["re_z"] = r.res.z.real();
    j["im_z"] = r.res.z.imag();
    j["multiplicity"] = r.res.multiplicity;
    j["winding_certificate"] = r.res.winding_certificate;
    j["residual"] = r.res.residual;
    if (r.matched) {
      j["matched_lattice_re"] = r.lattice.real();
      j["matched_lattice_im"] = r.lattice.imag();
      j["drift"] = r.drift;
    } else {
      j["matched_lattice_re"] = nullptr;
      j["matched_lattice_im"] = nullptr;
      j["drift"] = nullptr;
    }
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::vector<std::pair<int, cplx>> read_resonance_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ell,re_z,im_z", 0) != 0)
    throw ValidationError("BadTable", "resonance table header not recognised");
  std::vector<std::pair<int, cplx>> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string ell, re, im;
    if (!std::getline(row, ell, ',') || !std::getline(row, re, ',') || !std::getline(row, im, ','))
      throw ValidationError("BadTable", "short row in resonance table");
    try {
      out.emplace_back(std::stoi(ell), cplx(std::stod(re), std::stod(im)));
    } catch (const std::exception&) {
      throw ValidationError("BadTable", "unparsable row in resonance table: " + line);
    }
  }
  return out;
}

std::string wronskian_grid_csv(const std::vector<WronskianGridRow>& rows) {
  std::ostringstream os;
  os << "re_z,im_z,re_W,im_W,abs_W\n";
  for (const auto& r : rows)
    os << fmt_double(r.z.real()) << ',' << fmt_double(r.z.imag()) << ',' << fmt_double(r.w.real())
       << ',' << fmt_double(r.w.imag()) << ',' << fmt_double(std::abs(r.w)) << '\n';
  return os.str();
}

std::string pseudo_pole_csv(const PseudoPoleLattice& lattice) {
  std::ostringstream os;
  os << "sign_n,sign_half,sign_charge,n,k,re,im\n";
  for (const auto& e : lattice.entries)
    os << e.sign_n << ',' << e.sign_half << ',' << e.sign_charge << ',' << e.n << ',' << e.k << ','
       << fmt_double(e.value.real()) << ',' << fmt_double(e.value.imag()) << '\n';
  return os.str();
}

std::string time_series_csv(const RingdownRun& run) {
  std::ostringstream os;
  os << "t,re_u,im_u,local_energy\n";
  for (std::size_t i = 0; i < run.t.size(); ++i)
    os << fmt_double(run.t[i]) << ',' << fmt_double(run.probe[i].real()) << ','
       << fmt_double(run.probe[i].imag()) << ',' << fmt_double(run.local_energy[i]) << '\n';
  return os.str();
}

std::string snapshot_csv(const std::vector<double>& x, const std::vector<cplx>& u) {
  std::ostringstream os;
  os << "x,re_u,im_u\n";
  for (std::size_t i = 0; i < x.size() && i < u.size(); ++i)
    os << fmt_double(x[i]) << ',' << fmt_double(u[i].real()) << ',' << fmt_double(u[i].imag())
       << '\n';
  return os.str();
}

std::string modes_csv(const std::vector<RingdownMode>& modes) {
  std::ostringstream os;
  os << "re_omega,im_omega,re_amplitude,im_amplitude\n";
  for (const auto& m : modes)
    os << fmt_double(m.omega.real()) << ',' << fmt_double(m.omega.imag()) << ','
       << fmt_double(m.amplitude.real()) << ',' << fmt_double(m.amplitude.imag()) << '\n';
  return os.str();
}

}  // namespace dsrn
