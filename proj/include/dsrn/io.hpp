#pragma once

#include <string>
#include <vector>

#include "dsrn/pencil.hpp"
#include "dsrn/resonance.hpp"
#include "dsrn/ringdown.hpp"

namespace dsrn {

/// Shortest round-trip decimal form of a double ("%.17g").
std::string fmt_double(double v);

/// Writes text to path, creating parent directories. Throws
/// ValidationError("OutputError") when the file cannot be written.
void write_text(const std::string& path, const std::string& text);

std::string horizons_json(const SpacetimeParams& params, const Horizons& horizons);

/// Columns x, r, W0, W1, V_tilde on n points of [-extent, extent].
std::string chart_csv(const RWChart& chart, int n, double extent);

struct ResonanceRow {
  Resonance res;
  bool matched = false;
  cplx lattice;
  double drift = 0.0;
};

/// Columns ell, re_z, im_z, multiplicity, residual, matched_lattice_re,
/// matched_lattice_im, drift.
std::string resonance_csv(const std::vector<ResonanceRow>& rows);
std::string resonance_json(const std::vector<ResonanceRow>& rows);
/// Reads back resonance_csv output (ell, z) pairs; throws ValidationError("BadTable").
std::vector<std::pair<int, cplx>> read_resonance_csv(const std::string& text);

/// Columns re_z, im_z, re_W, im_W, abs_W.
std::string wronskian_grid_csv(const std::vector<WronskianGridRow>& rows);

std::string pseudo_pole_csv(const PseudoPoleLattice& lattice);

/// Columns t, re_u, im_u, local_energy.
std::string time_series_csv(const RingdownRun& run);
/// Columns x, re_u, im_u.
std::string snapshot_csv(const std::vector<double>& x, const std::vector<cplx>& u);
/// Columns re_omega, im_omega, re_amplitude, im_amplitude.
std::string modes_csv(const std::vector<RingdownMode>& modes);

}  // namespace dsrn
