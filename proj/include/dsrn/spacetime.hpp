#pragma once

#include <array>
#include <string>

namespace dsrn {

/// Raw, unvalidated physical inputs.
struct RawParams {
  double mass = 1.0;          // M
  double bh_charge = 0.0;     // Q
  double lambda = 0.04;       // cosmological constant
  double field_charge = 0.0;  // q
  double field_mass = 1.0;    // m
};

/// Validated parameters of the black hole and the charged field.
///
/// Construct through validate_params(); the constraints
///   4 Lambda Q^2 < 1,  M_1 < M < M_2,  9 Lambda M^2 < 1
/// then hold, so the metric function has four distinct real zeros
/// r_n < 0 <= r_c < r_minus < r_plus and is positive between the horizons.
struct SpacetimeParams {
  double M = 0.0;
  double Q = 0.0;
  double Lambda = 0.0;
  double q = 0.0;
  double m = 0.0;
  double s = 0.0;  // q * Q

  // Window data for the mass inequality.
  double Delta = 0.0;
  double m1 = 0.0, m2 = 0.0;
  double M1 = 0.0, M2 = 0.0;
};

/// Throws ValidationError with kind NonPositive, NonFinite, DeltaViolation,
/// NariaiViolation or MassWindowViolation.
SpacetimeParams validate_params(const RawParams& raw);

/// F(r) = 1 - 2M/r + Q^2/r^2 - Lambda r^2 / 3.
double metric_function(const SpacetimeParams& p, double r);
/// dF/dr.
double metric_derivative(const SpacetimeParams& p, double r);

struct Tolerances {
  double root_residual = 1e-13;
  double identity = 1e-10;
  double degenerate_gap = 1e-8;
};

/// Root labels in increasing order.
enum class Root : int { n = 0, c = 1, minus = 2, plus = 3 };
const char* root_name(Root a);

struct Horizons {
  std::array<double, 4> r{};  // indexed by Root
  std::array<double, 4> A{};  // A_alpha = prod_{beta != alpha} 1/(r_alpha - r_beta)
  double kappa_minus = 0.0;   // > 0
  double kappa_plus = 0.0;    // < 0
  double kappa = 0.0;         // min(kappa_minus, |kappa_plus|)
  double photon_sphere = 0.0;
  bool uncharged_limit = false;  // Q == 0: r_c is exactly 0

  double r_n() const { return r[0]; }
  double r_c() const { return r[1]; }
  double r_minus() const { return r[2]; }
  double r_plus() const { return r[3]; }
  double root(Root a) const { return r[static_cast<int>(a)]; }
  double coeff(Root a) const { return A[static_cast<int>(a)]; }
};

/// Roots of r^2 F(r), partial-fraction coefficients, surface gravities and
/// the photon sphere. Throws NumericalError("DegenerateRoots") when two
/// roots coincide (outside the Q = 0 case).
Horizons horizon_roots(const SpacetimeParams& p, const Tolerances& tol = {});

/// Photon-sphere radius (3M + sqrt(9M^2 - 8Q^2)) / 2.
double photon_sphere_radius(const SpacetimeParams& p);

/// Q = 0 closed form for the two horizons, polished by Newton.
/// Returns {r_minus, r_plus}.
std::array<double, 2> uncharged_horizons_closed_form(double M, double Lambda);

/// Product form (Lambda/3)(r-r_n)(r-r_c)(r-r_-)(r_+-r)/r^2; accurate near the
/// horizons when the gaps are supplied exactly.
double metric_from_gaps(const SpacetimeParams& p, const Horizons& h, double r,
                        double gap_minus, double gap_plus);

/// Largest relative deviation of 1/F from its partial-fraction expansion
/// over the supplied radii.
double partial_fraction_defect(const SpacetimeParams& p, const Horizons& h,
                               const double* radii, std::size_t count);

}  // namespace dsrn
