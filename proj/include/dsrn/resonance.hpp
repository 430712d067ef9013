#pragma once

#include <complex>
#include <vector>

#include "dsrn/pencil.hpp"

namespace dsrn {

struct Rectangle {
  cplx lower_left;
  cplx upper_right;

  double width() const { return upper_right.real() - lower_left.real(); }
  double height() const { return upper_right.imag() - lower_left.imag(); }
  bool contains(cplx z) const {
    return z.real() >= lower_left.real() && z.real() <= upper_right.real() &&
           z.imag() >= lower_left.imag() && z.imag() <= upper_right.imag();
  }
};

struct Resonance {
  cplx z;
  int ell = 0;
  int multiplicity = 1;
  double residual = 0.0;  // |W / W'| at the returned point
  int winding_certificate = 0;
};

struct SolverOptions {
  double newton_tol = 1e-8;     // on |W/W'|, relative to 1 + |z|; W carries ~1e-9 noise
  int max_newton = 40;
  double cluster_scale = 1e-6;  // cluster radius = cluster_scale (1 + |z|)
  double cert_factor = 10.0;    // cert radius = cert_factor * cluster radius
  int max_depth = 4;
  int edge_segments = 12;       // initial contour samples per rectangle edge
  double phase_tol = 0.05;      // accepted mismatch between sampled and integrated log W
  double boundary_floor = 1e-9; // |W/W'| below this times (1 + |z|) on a contour is a zero
  int threads = 1;
};

/// Winding number of W around the positively oriented boundary of `rect`.
/// Throws NumericalError("BoundaryZero") or NumericalError("NonIntegerWinding").
int count_zeros(const ModeProblem& problem, const Rectangle& rect, const SolverOptions& opts = {});

/// Same count on the circle |z - center| = radius.
int count_zeros_circle(const ModeProblem& problem, cplx center, double radius,
                       const SolverOptions& opts = {});

/// Zeros of W in `rect`, each certified by a winding number; the total
/// multiplicity equals count_zeros(rect). Newton starts come from a
/// seeds_per_axis^2 grid plus `extra_seeds`. Sorted by (Re z, Im z).
/// Throws NumericalError("CountMismatch") when subdivision cannot close
/// the count.
std::vector<Resonance> find_resonances(const ModeProblem& problem, const Rectangle& rect,
                                       int seeds_per_axis, const SolverOptions& opts = {},
                                       const std::vector<cplx>& extra_seeds = {});

struct PseudoPole {
  cplx value;
  int sign_n = 1, sign_half = 1, sign_charge = 1;
  int n = 1;
  int k = 0;
};

struct PseudoPoleLattice {
  double prefactor = 0.0;     // sqrt(F(r_ph)) / r_ph
  double charge_shift = 0.0;  // s / sqrt(F(r_ph))
  double damping_step = 0.0;  // sqrt|3 - 12M/r_ph + 10Q^2/r_ph^2| / 2
  std::vector<PseudoPole> entries;

  /// Distinct lattice values (sign combinations may coincide).
  std::vector<cplx> points() const;
  /// Smallest |Im| over the entries.
  double min_damping() const;
};

/// Lattice prefactor (+-n +- 1/2 +- charge_shift - i damping_step (k + 1/2))
/// for n in [n_min, n_max] (n >= 1) and k in [k_min, k_max] (k >= 0).
PseudoPoleLattice pseudo_poles(const SpacetimeParams& params, int n_min, int n_max, int k_min,
                               int k_max);

/// Second x-derivative of W0 at the photon sphere by Richardson-extrapolated
/// central differences on the chart. Throws NumericalError("DegenerateMaximum")
/// unless the value is negative.
double w0_curvature(const RWChart& chart);

/// Semiclassical energies
///   W0(0) + h (2 sqrt(W0(0)) s V(0) - i sqrt(|W0''(0)|/2) (k + 1/2)),
/// h = (l(l+1))^{-1/2}, for k in [k_min, k_max]. Requires l >= 1.
std::vector<cplx> gamma0(const RWChart& chart, int ell, int k_min, int k_max);

struct LatticePair {
  int resonance = -1;  // index into the resonance list
  int lattice = -1;    // index into the lattice point list
  cplx z, mu;
  double drift = 0.0;
};

struct MatchReport {
  std::vector<LatticePair> pairs;
  double max_drift = 0.0;
  double mean_drift = 0.0;
  std::vector<int> unmatched_resonances;
  std::vector<int> unmatched_lattice;
};

/// Greedy nearest-neighbour pairing of z_j + offset with lattice points.
/// Throws ValidationError("EmptyInput") when either list is empty.
MatchReport match_to_lattice(const std::vector<cplx>& resonances, const std::vector<cplx>& lattice,
                             cplx offset = 0.0);

/// Default search region for one mode: Re z in prefactor [1/2, l + n_extra + 1]
/// and its mirror image under z -> -conj(z), Im z from just above the strip
/// floor up to kappa.
std::vector<Rectangle> default_search_boxes(const ModeProblem& problem, double prefactor,
                                            int n_extra);

/// Resonance with the largest imaginary part; throws ValidationError("EmptyInput").
const Resonance& least_damped(const std::vector<Resonance>& list);

}  // namespace dsrn
