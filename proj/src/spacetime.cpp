#include "dsrn/spacetime.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <vector>

#include "dsrn/errors.hpp"

namespace dsrn {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Newton polish on a real polynomial (coefficients high to low) in long double.
double polish_root(const std::vector<long double>& coeffs, double x0,
                   double residual_tol) {
  long double x = x0;
  for (int it = 0; it < 50; ++it) {
    long double p = 0.0L, dp = 0.0L;
    for (long double c : coeffs) {
      dp = dp * x + p;
      p = p * x + c;
    }
    if (dp == 0.0L) break;
    const long double step = p / dp;
    x -= step;
    if (std::fabs(static_cast<double>(step)) <=
            4 * std::numeric_limits<double>::epsilon() * std::fabs(x) &&
        std::fabs(static_cast<double>(p)) < residual_tol)
      break;
  }
  return static_cast<double>(x);
}

}  // namespace

SpacetimeParams validate_params(const RawParams& raw) {
  const double vals[] = {raw.mass, raw.bh_charge, raw.lambda, raw.field_charge,
                         raw.field_mass};
  for (double v : vals)
    if (!std::isfinite(v))
      throw ValidationError("NonFinite", "all parameters must be finite");
  if (raw.mass <= 0.0)
    throw ValidationError("NonPositive", "mass must be positive, got " + fmt(raw.mass));
  if (raw.lambda <= 0.0)
    throw ValidationError("NonPositive", "lambda must be positive, got " + fmt(raw.lambda));
  if (raw.field_mass <= 0.0)
    throw ValidationError("NonPositive",
                          "field_mass must be positive, got " + fmt(raw.field_mass));

  SpacetimeParams p;
  p.M = raw.mass;
  p.Q = raw.bh_charge;
  p.Lambda = raw.lambda;
  p.q = raw.field_charge;
  p.m = raw.field_mass;
  p.s = raw.field_charge * raw.bh_charge;

  const double four_lq2 = 4.0 * p.Lambda * p.Q * p.Q;
  if (four_lq2 >= 1.0)
    throw ValidationError("DeltaViolation",
                          "4*lambda*Q^2 = " + fmt(four_lq2) + " must be < 1");
  p.Delta = 1.0 - four_lq2;

  const double nariai = 9.0 * p.Lambda * p.M * p.M;
  if (nariai >= 1.0)
    throw ValidationError("NariaiViolation",
                          "9*lambda*M^2 = " + fmt(nariai) + " must be < 1");

  const double sd = std::sqrt(p.Delta);
  p.m1 = std::sqrt(std::max(0.0, (1.0 - sd) / (2.0 * p.Lambda)));
  p.m2 = std::sqrt((1.0 + sd) / (2.0 * p.Lambda));
  p.M1 = p.m1 - (2.0 / 3.0) * p.Lambda * p.m1 * p.m1 * p.m1;
  p.M2 = p.m2 - (2.0 / 3.0) * p.Lambda * p.m2 * p.m2 * p.m2;
  // The Q = 0 lower edge M_1 = 0 is excluded by M > 0 already.
  if (!(p.M > p.M1 && p.M < p.M2))
    throw ValidationError("MassWindowViolation", "M = " + fmt(p.M) + " not in (" +
                                                     fmt(p.M1) + ", " + fmt(p.M2) + ")");
  return p;
}

double metric_function(const SpacetimeParams& p, double r) {
  return 1.0 - 2.0 * p.M / r + p.Q * p.Q / (r * r) - p.Lambda * r * r / 3.0;
}

double metric_derivative(const SpacetimeParams& p, double r) {
  return 2.0 * p.M / (r * r) - 2.0 * p.Q * p.Q / (r * r * r) - 2.0 * p.Lambda * r / 3.0;
}

double photon_sphere_radius(const SpacetimeParams& p) {
  return 0.5 * (3.0 * p.M + std::sqrt(9.0 * p.M * p.M - 8.0 * p.Q * p.Q));
}

const char* root_name(Root a) {
  switch (a) {
    case Root::n: return "n";
    case Root::c: return "c";
    case Root::minus: return "minus";
    case Root::plus: return "plus";
  }
  return "?";
}

std::array<double, 2> uncharged_horizons_closed_form(double M, double Lambda) {
  // Trigonometric solution of r^3 - (3/Lambda) r + 6M/Lambda = 0. The two
  // positive roots are (2/sqrt(Lambda)) Im((-+sqrt(1-a^2) + i a)^(1/3)),
  // a = 3 sqrt(Lambda) M.
  const double a = 3.0 * std::sqrt(Lambda) * M;
  const double b = std::sqrt(1.0 - a * a);
  const double scale = 2.0 / std::sqrt(Lambda);
  const double r_minus = scale * std::pow(std::complex<double>(b, a), 1.0 / 3.0).imag();
  const double r_plus = scale * std::pow(std::complex<double>(-b, a), 1.0 / 3.0).imag();
  const std::vector<long double> cubic = {1.0L, 0.0L, -3.0L / Lambda, 6.0L * M / Lambda};
  return {polish_root(cubic, r_minus, 0.0), polish_root(cubic, r_plus, 0.0)};
}

Horizons horizon_roots(const SpacetimeParams& p, const Tolerances& tol) {
  Horizons h;
  // Monic quartic: r^4 - (3/L) r^2 + (6M/L) r - 3Q^2/L.
  const long double L = p.Lambda;
  const std::vector<long double> quartic = {1.0L, 0.0L, -3.0L / L, 6.0L * p.M / L,
                                            -3.0L * p.Q * p.Q / L};
  if (p.Q == 0.0) {
    h.uncharged_limit = true;
    const auto [rm, rp] = uncharged_horizons_closed_form(p.M, p.Lambda);
    const std::vector<long double> cubic = {1.0L, 0.0L, -3.0L / L, 6.0L * p.M / L};
    h.r = {polish_root(cubic, -(rm + rp), 0.0), 0.0, rm, rp};
  } else {
    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    for (int i = 1; i < 4; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < 4; ++i)
      companion(i, 3) = -static_cast<double>(quartic[4 - i]);
    const Eigen::Vector4cd ev = companion.eigenvalues();
    std::array<double, 4> roots{};
    for (int i = 0; i < 4; ++i) {
      if (std::abs(ev[i].imag()) > 1e-6 * (1.0 + std::abs(ev[i])))
        throw NumericalError("DegenerateRoots", "metric function has complex roots");
      roots[i] = ev[i].real();
    }
    std::sort(roots.begin(), roots.end());
    for (auto& r : roots) r = polish_root(quartic, r, 0.0);
    std::sort(roots.begin(), roots.end());
    h.r = roots;
  }

  const double scale = h.r[3] - h.r[0];
  for (int i = 0; i < 3; ++i)
    if (h.r[i + 1] - h.r[i] < tol.degenerate_gap * scale)
      throw NumericalError("DegenerateRoots", "roots " + std::to_string(i) + " and " +
                                                  std::to_string(i + 1) + " coincide");
  if (!(h.r[0] < 0.0 && h.r[1] >= 0.0))
    throw NumericalError("DegenerateRoots", "unexpected root configuration");

  for (int a = 0; a < 4; ++a) {
    if (a == 1 && h.uncharged_limit) continue;
    const double res = std::abs(metric_function(p, h.r[a]));
    if (!(res < std::max(tol.root_residual, 1e3 * std::numeric_limits<double>::epsilon())))
      throw NumericalError("DegenerateRoots",
                           std::string("root ") + root_name(static_cast<Root>(a)) +
                               " residual " + fmt(res));
  }

  for (int a = 0; a < 4; ++a) {
    double prod = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) prod *= h.r[a] - h.r[b];
    h.A[a] = 1.0 / prod;
  }

  h.kappa_minus = 0.5 * metric_derivative(p, h.r_minus());
  h.kappa_plus = 0.5 * metric_derivative(p, h.r_plus());
  h.kappa = std::min(h.kappa_minus, std::abs(h.kappa_plus));
  h.photon_sphere = photon_sphere_radius(p);

  if (!(h.kappa_minus > 0.0 && h.kappa_plus < 0.0))
    throw NumericalError("DegenerateRoots", "surface gravity signs are inconsistent");
  for (int i = 1; i < 64; ++i) {
    const double r = h.r_minus() + (h.r_plus() - h.r_minus()) * i / 64.0;
    if (!(metric_function(p, r) > 0.0))
      throw NumericalError("DegenerateRoots", "F is not positive between the horizons");
  }
  return h;
}

double metric_from_gaps(const SpacetimeParams& p, const Horizons& h, double r,
                        double gap_minus, double gap_plus) {
  return (p.Lambda / 3.0) * (r - h.r_n()) * (r - h.r_c()) * gap_minus * gap_plus / (r * r);
}

double partial_fraction_defect(const SpacetimeParams& p, const Horizons& h,
                               const double* radii, std::size_t count) {
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = radii[i];
    const double inv_f = 1.0 / metric_function(p, r);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a) sum += h.A[a] / (r - h.r[a]);
    const double expansion = -(3.0 * r * r / p.Lambda) * sum;
    worst = std::max(worst, std::abs(inv_f - expansion) / std::abs(inv_f));
  }
  return worst;
}

}  // namespace dsrn
