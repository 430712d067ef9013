#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsrn/spacetime.hpp"

namespace dsrn {

struct GeometryConfig {
  int chart_points = 401;
  double chart_extent = 60.0;  // chart CSV covers x in [-extent, extent]
};

struct ResonanceConfig {
  std::vector<int> ells{5, 10, 20};
  int seeds_per_axis = 3;
  int n_extra = 3;            // search Re z up to prefactor (l + n_extra + 1/2)
  double strip_margin = 0.05;
  int grid_re = 0, grid_im = 0;  // Wronskian sampling grid over the first box; 0 disables
  // Explicit search box; when all four are set it replaces the default
  // pair of mirrored boxes.
  std::optional<double> re_min, re_max, im_min, im_max;
};

struct LatticeConfig {
  int n_min = 1, n_max = 30;
  int k_min = 0, k_max = 3;
};

struct RingdownConfig {
  int ell = 2;
  double half_width = 100.0;
  double dx = 0.1;
  double cfl = 0.5;
  double center = 0.0;
  double width = 3.0;
  double momentum = 0.0;
  double probe = 10.0;
  int sample_every = 10;
  int snapshot_every = 0;  // steps between snapshot dumps, 0 disables
  double window_lo = -10.0, window_hi = 10.0;
  double fit_start = -1.0, fit_end = -1.0;
};

struct RunConfig {
  RawParams params;
  GeometryConfig geometry;
  ResonanceConfig resonances;
  LatticeConfig lattice;
  RingdownConfig ringdown;
  std::string output_dir = "out";
  int threads = 1;
};

/// Environment variables DSRN_<KEY> (top level) and DSRN_<BLOCK>_<KEY>
/// override file values, e.g. DSRN_LAMBDA=0.05, DSRN_RINGDOWN_DX=0.05.
inline constexpr const char* kEnvPrefix = "DSRN_";

/// Parses a JSON document. Unknown keys and ill-typed values raise
/// ValidationError naming the field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
void apply_env_overrides(RunConfig& cfg);

/// Checks every numeric field against the owning module's preconditions;
/// throws ValidationError naming the offending field.
void validate_config(const RunConfig& cfg);

/// Comma-separated list of nonnegative integers.
std::vector<int> parse_ell_list(const std::string& text);

/// Sets the field charge so that q Q = s. Throws
/// ValidationError("ChargeProductWithoutCharge") when Q = 0 and s != 0.
void set_charge_product(RawParams& params, double s);

}  // namespace dsrn
