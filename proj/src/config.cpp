#include "dsrn/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dsrn/errors.hpp"
#include "json.hpp"

namespace dsrn {

namespace {

using json = nlohmann::json;

struct Binding {
  std::function<void(const json&, const std::string&)> from_json;
};

std::string qualified(const std::string& block, const std::string& key) {
  return block.empty() ? key : block + "." + key;
}

double as_double(const json& v, const std::string& name) {
  if (!v.is_number()) throw ValidationError("BadField", name + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& name) {
  if (!v.is_number_integer()) throw ValidationError("BadField", name + " must be an integer");
  return v.get<int>();
}

// Keys of one block mapped to setters.
using Table = std::map<std::string, Binding>;

Binding num(double& target) {
  return {[&target](const json& v, const std::string& n) { target = as_double(v, n); }};
}
Binding integer(int& target) {
  return {[&target](const json& v, const std::string& n) { target = as_int(v, n); }};
}
Binding opt_num(std::optional<double>& target) {
  return {[&target](const json& v, const std::string& n) {
    if (v.is_null())
      target.reset();
    else
      target = as_double(v, n);
  }};
}

std::map<std::string, Table> bindings(RunConfig& c) {
  std::map<std::string, Table> t;
  t[""] = {
      {"mass", num(c.params.mass)},
      {"bh_charge", num(c.params.bh_charge)},
      {"lambda", num(c.params.lambda)},
      {"field_charge", num(c.params.field_charge)},
      {"field_mass", num(c.params.field_mass)},
      {"threads", integer(c.threads)},
      {"output_dir",
       {[&c](const json& v, const std::string& n) {
         if (!v.is_string()) throw ValidationError("BadField", n + " must be a string");
         c.output_dir = v.get<std::string>();
       }}},
  };
  t["geometry"] = {
      {"chart_points", integer(c.geometry.chart_points)},
      {"chart_extent", num(c.geometry.chart_extent)},
  };
  t["resonances"] = {
      {"ell",
       {[&c](const json& v, const std::string& n) {
         if (v.is_string()) {
           c.resonances.ells = parse_ell_list(v.get<std::string>());
           return;
         }
         if (!v.is_array()) throw ValidationError("BadField", n + " must be a list of integers");
         c.resonances.ells.clear();
         for (const auto& e : v) c.resonances.ells.push_back(as_int(e, n));
       }}},
      {"seeds_per_axis", integer(c.resonances.seeds_per_axis)},
      {"n_extra", integer(c.resonances.n_extra)},
      {"strip_margin", num(c.resonances.strip_margin)},
      {"grid_re", integer(c.resonances.grid_re)},
      {"grid_im", integer(c.resonances.grid_im)},
      {"re_min", opt_num(c.resonances.re_min)},
      {"re_max", opt_num(c.resonances.re_max)},
      {"im_min", opt_num(c.resonances.im_min)},
      {"im_max", opt_num(c.resonances.im_max)},
  };
  t["pseudopoles"] = {
      {"n_min", integer(c.lattice.n_min)},
      {"n_max", integer(c.lattice.n_max)},
      {"k_min", integer(c.lattice.k_min)},
      {"k_max", integer(c.lattice.k_max)},
  };
  auto& r = c.ringdown;
  t["ringdown"] = {
      {"ell", integer(r.ell)},
      {"half_width", num(r.half_width)},
      {"dx", num(r.dx)},
      {"cfl", num(r.cfl)},
      {"center", num(r.center)},
      {"width", num(r.width)},
      {"momentum", num(r.momentum)},
      {"probe", num(r.probe)},
      {"sample_every", integer(r.sample_every)},
      {"snapshot_every", integer(r.snapshot_every)},
      {"window_lo", num(r.window_lo)},
      {"window_hi", num(r.window_hi)},
      {"fit_start", num(r.fit_start)},
      {"fit_end", num(r.fit_end)},
  };
  return t;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::toupper(ch); });
  return s;
}

// Environment strings are read as JSON when possible, else as plain strings.
json env_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw ValidationError("BadConfig", "config must be a JSON object");
  RunConfig cfg;
  auto table = bindings(cfg);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (table.count(key) && key != "") {
      if (!it->is_object()) throw ValidationError("BadField", key + " must be an object");
      const Table& block = table.at(key);
      for (auto jt = it->begin(); jt != it->end(); ++jt) {
        const auto b = block.find(jt.key());
        if (b == block.end())
          throw ValidationError("UnknownKey", "unknown config key " + qualified(key, jt.key()));
        b->second.from_json(*jt, qualified(key, jt.key()));
      }
      continue;
    }
    const auto b = table.at("").find(key);
    if (b == table.at("").end()) throw ValidationError("UnknownKey", "unknown config key " + key);
    b->second.from_json(*it, key);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("MissingConfig", "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_env_overrides(RunConfig& cfg) {
  auto table = bindings(cfg);
  for (const auto& [block, keys] : table)
    for (const auto& [key, binding] : keys) {
      const std::string var =
          std::string(kEnvPrefix) + (block.empty() ? "" : upper(block) + "_") + upper(key);
      if (const char* value = std::getenv(var.c_str()))
        binding.from_json(env_value(value), var);
    }
}

void validate_config(const RunConfig& cfg) {
  validate_params(cfg.params);
  auto need = [](bool ok, const std::string& field, const std::string& rule) {
    if (!ok) throw ValidationError("BadField", field + " " + rule);
  };
  need(cfg.threads >= 1, "threads", "must be >= 1");
  need(!cfg.output_dir.empty(), "output_dir", "must not be empty");
  const auto& g = cfg.geometry;
  need(g.chart_points >= 2, "geometry.chart_points", "must be >= 2");
  need(std::isfinite(g.chart_extent) && g.chart_extent > 0, "geometry.chart_extent",
       "must be positive");
  const auto& r = cfg.resonances;
  need(!r.ells.empty(), "resonances.ell", "must not be empty");
  for (int l : r.ells) need(l >= 0, "resonances.ell", "entries must be >= 0");
  need(r.seeds_per_axis >= 1, "resonances.seeds_per_axis", "must be >= 1");
  need(r.n_extra >= 0, "resonances.n_extra", "must be >= 0");
  need(r.grid_re >= 0 && r.grid_im >= 0, "resonances.grid_re/grid_im", "must be >= 0");
  need((r.grid_re == 0) == (r.grid_im == 0), "resonances.grid_re/grid_im",
       "must be both zero or both positive");
  need(r.strip_margin > 0 && r.strip_margin < 1, "resonances.strip_margin", "must be in (0, 1)");
  const int set = r.re_min.has_value() + r.re_max.has_value() + r.im_min.has_value() +
                  r.im_max.has_value();
  need(set == 0 || set == 4, "resonances.re_min/re_max/im_min/im_max", "must be given together");
  if (set == 4) {
    need(*r.re_min < *r.re_max, "resonances.re_max", "must exceed re_min");
    need(*r.im_min < *r.im_max, "resonances.im_max", "must exceed im_min");
  }
  const auto& l = cfg.lattice;
  need(l.n_min >= 1 && l.n_max >= l.n_min, "pseudopoles.n_min/n_max", "need 1 <= n_min <= n_max");
  need(l.k_min >= 0 && l.k_max >= l.k_min, "pseudopoles.k_min/k_max", "need 0 <= k_min <= k_max");
  const auto& d = cfg.ringdown;
  need(d.ell >= 0, "ringdown.ell", "must be >= 0");
  need(d.half_width > 10, "ringdown.half_width", "must exceed 10");
  need(d.dx > 0, "ringdown.dx", "must be positive");
  need(d.cfl > 0 && d.cfl <= 1, "ringdown.cfl", "must be in (0, 1]");
  need(d.width > 0, "ringdown.width", "must be positive");
  need(std::abs(d.probe) < d.half_width, "ringdown.probe", "must lie inside the grid");
  need(d.sample_every >= 1, "ringdown.sample_every", "must be >= 1");
  need(d.snapshot_every >= 0, "ringdown.snapshot_every", "must be >= 0");
  need(d.window_lo < d.window_hi, "ringdown.window_hi", "must exceed window_lo");
}

std::vector<int> parse_ell_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char ch) {
                 return std::isspace(ch);
               }),
               item.end());
    if (item.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (*end != '\0' || v < 0 || v > 10000)
      throw ValidationError("BadField", "ell list entry '" + item + "' is not a valid index");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ValidationError("BadField", "ell list is empty");
  return out;
}

void set_charge_product(RawParams& params, double s) {
  if (!std::isfinite(s)) throw ValidationError("NonFinite", "charge product must be finite");
  if (params.bh_charge == 0.0) {
    if (s != 0.0)
      throw ValidationError("ChargeProductWithoutCharge",
                            "s = qQ cannot be nonzero when bh_charge = 0");
    params.field_charge = 0.0;
    return;
  }
  params.field_charge = s / params.bh_charge;
}

}  // namespace dsrn
