#include "dsrn/regge_wheeler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsrn/errors.hpp"

namespace dsrn {

namespace {

constexpr int kMinus = static_cast<int>(Root::minus);
constexpr int kPlus = static_cast<int>(Root::plus);

int side_index(Side side) { return side == Side::plus ? kPlus : kMinus; }

// Coefficients of exp(f(t)) given the Taylor coefficients of f (f[0] == 0).
std::vector<double> series_exp(const std::vector<double>& f, int terms) {
  std::vector<double> e(terms, 0.0);
  e[0] = 1.0;
  for (int n = 1; n < terms; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= n && k < static_cast<int>(f.size()); ++k)
      acc += k * f[k] * e[n - k];
    e[n] = acc / n;
  }
  return e;
}

}  // namespace

InversionSeries lagrange_coefficients(const SpacetimeParams& params,
                                      const Horizons& h, Side side, int order,
                                      double tail_tol) {
  if (order < 1)
    throw ValidationError("BadOrder", "series order must be >= 1, got " +
                                          std::to_string(order));
  const int i = side_index(side);
  const double ri = h.r[i];
  const double anchor = h.photon_sphere;
  const double kappa_i = std::abs(i == kPlus ? h.kappa_plus : h.kappa_minus);
  (void)params;

  // h(t) = (r - r_i)/g_i(r) at r = r_i + t, written as sigma * exp(L0 + f(t)).
  std::vector<double> w(4), d(4);
  double log_lead = std::log(std::abs(anchor - ri));
  for (int a = 0; a < 4; ++a) {
    if (a == i) continue;
    w[a] = h.A[a] * h.r[a] * h.r[a] / (h.A[i] * ri * ri);
    d[a] = ri - h.r[a];
    if (w[a] != 0.0)
      log_lead -= w[a] * (std::log(std::abs(d[a])) - std::log(std::abs(anchor - h.r[a])));
  }
  std::vector<double> f(order + 1, 0.0);
  for (int k = 1; k <= order; ++k) {
    double ak = 0.0;
    for (int a = 0; a < 4; ++a) {
      if (a == i || w[a] == 0.0) continue;
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      ak += -w[a] * sign / (k * std::pow(d[a], k));
    }
    f[k] = ak;
  }
  const double sigma = (side == Side::plus) ? -1.0 : 1.0;
  const double lead = sigma * std::exp(log_lead);

  InversionSeries out;
  out.side = side;
  out.coeffs.resize(order);
  for (int l = 1; l <= order; ++l) {
    std::vector<double> fl(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) fl[k] = l * f[k];
    const auto e = series_exp(fl, l);
    out.coeffs[l - 1] = std::pow(lead, l) * e[l - 1] / l;
  }

  for (std::size_t k = 0; k < out.coeffs.size(); ++k)
    if (!std::isfinite(out.coeffs[k]))
      throw NumericalError("TruncationUnstable", "non-finite inversion coefficient");
  // Root-test radius estimates |c_l|^{-1/l} must not collapse before order N.
  if (order >= 3) {
    auto radius = [&](int l) {
      const double c = std::abs(out.coeffs[l - 1]);
      return c == 0.0 ? std::numeric_limits<double>::infinity() : std::pow(c, -1.0 / l);
    };
    const double first = radius(1);
    const double last = radius(order);
    if (last < 1e-3 * first)
      throw NumericalError("TruncationUnstable",
                           "inversion coefficients grow too fast for order " +
                               std::to_string(order));
  }

  // Factorial majorant |term_l| <= (K |z| l)^l / l!.
  double b_max = 0.0, k_prod = std::abs(anchor - ri), inv_sum = 0.0, far_prod = 1.0;
  for (int a = 0; a < 4; ++a) {
    if (a == i) continue;
    b_max = std::max(b_max, std::abs(w[a]));
    k_prod *= std::pow(std::abs(anchor - h.r[a]), w[a]);
    far_prod *= std::pow(std::abs(ri - h.r[a]), -w[a]);
    inv_sum += 1.0 / std::abs(ri - h.r[a]);
  }
  out.growth_bound = k_prod * (b_max + 1.0) * far_prod * inv_sum;
  out.convergence_x = std::max(0.0, std::log(out.growth_bound) / (2.0 * kappa_i));

  const double c_last = std::abs(out.coeffs.back());
  double trunc_x = 0.0;
  if (c_last > 0.0) {
    const double z_t = std::pow(tail_tol * ri / c_last, 1.0 / order);
    trunc_x = std::max(0.0, -std::log(z_t) / (2.0 * kappa_i));
  }
  out.threshold = std::max(out.convergence_x, trunc_x);
  return out;
}

RWChart::RWChart(const SpacetimeParams& params, const Horizons& horizons,
                 const ChartOptions& options)
    : params_(params), horizons_(horizons), options_(options) {
  const auto& h = horizons_;
  for (int a = 0; a < 4; ++a) {
    weight_[a] = -(3.0 / params_.Lambda) * h.A[a] * h.r[a] * h.r[a];
    anchor_log_[a] = (weight_[a] == 0.0)
                         ? 0.0
                         : std::log(std::abs(h.photon_sphere - h.r[a]));
  }
  const double span = h.r_plus() - h.r_minus();
  auto offset = [&](int side) {
    double c = -weight_[side] * anchor_log_[side];
    const double r_side = h.r[side];
    for (int a = 0; a < 4; ++a) {
      if (a == side || weight_[a] == 0.0) continue;
      const double dist = (a == kMinus || a == kPlus) ? span : std::abs(r_side - h.r[a]);
      c += weight_[a] * (std::log(dist) - anchor_log_[a]);
    }
    return c;
  };
  offset_minus_ = offset(kMinus);
  offset_plus_ = offset(kPlus);

  series_minus_ = lagrange_coefficients(params_, h, Side::minus, options_.series_order,
                                        options_.series_tail_tol);
  series_plus_ = lagrange_coefficients(params_, h, Side::plus, options_.series_order,
                                       options_.series_tail_tol);

  // Seed cache for the Newton inverse; filled before it is consulted.
  const int n = std::max(options_.table_size, 3);
  std::vector<double> tx(n), tr(n);
  for (int k = 0; k < n; ++k) {
    tx[k] = -options_.table_extent + 2.0 * options_.table_extent * k / (n - 1);
    tr[k] = point_of_x_newton(tx[k]).r;
  }
  table_x_ = std::move(tx);
  table_r_ = std::move(tr);
}

double RWChart::log_sum(const ChartPoint& pt, int skip) const {
  const auto& h = horizons_;
  double x = 0.0;
  for (int a = 0; a < 4; ++a) {
    if (a == skip || weight_[a] == 0.0) continue;
    double dist;
    if (a == kMinus)
      dist = pt.gap_minus;
    else if (a == kPlus)
      dist = pt.gap_plus;
    else
      dist = pt.r - h.r[a];
    x += weight_[a] * (std::log(dist) - anchor_log_[a]);
  }
  return x;
}

double RWChart::x_of_point(const ChartPoint& pt) const { return log_sum(pt, -1); }

double RWChart::x_of_r(double r) const {
  const auto& h = horizons_;
  if (!(r > h.r_minus() && r < h.r_plus()))
    throw ValidationError("OutOfExterior", "r = " + std::to_string(r) +
                                               " outside (r_minus, r_plus)");
  return x_of_point({r, r - h.r_minus(), h.r_plus() - r});
}

double RWChart::metric_at(const ChartPoint& pt) const {
  return metric_from_gaps(params_, horizons_, pt.r, pt.gap_minus, pt.gap_plus);
}

ChartPoint RWChart::point_of_x_newton(double x) const {
  if (!std::isfinite(x)) throw ValidationError("NonFinite", "x must be finite");
  const auto& h = horizons_;
  const double span = h.r_plus() - h.r_minus();
  const bool right = x >= 0.0;
  const int side = right ? kPlus : kMinus;

  // Unknown u = ln(gap to the nearer horizon); x is monotone in u.
  auto point = [&](double u) {
    const double gap = std::exp(u);
    ChartPoint pt;
    if (right) {
      pt.gap_plus = gap;
      pt.gap_minus = span - gap;
      pt.r = h.r_plus() - gap;
    } else {
      pt.gap_minus = gap;
      pt.gap_plus = span - gap;
      pt.r = h.r_minus() + gap;
    }
    return pt;
  };
  auto x_of_u = [&](double u) { return x_of_point(point(u)); };
  // x decreases with u on the right side and increases on the left.
  const double dir = right ? -1.0 : 1.0;

  const double u_anchor = std::log(right ? h.r_plus() - h.photon_sphere
                                         : h.photon_sphere - h.r_minus());
  // Initial guess from the asymptotic law, refined with the cache table.
  double u = (x - (right ? offset_plus_ : offset_minus_)) / weight_[side];
  if (std::abs(x) <= options_.table_extent && table_x_.size() > 2) {
    const auto it = std::lower_bound(table_x_.begin(), table_x_.end(), x);
    const std::size_t k = std::clamp<std::size_t>(it - table_x_.begin(), 1, table_x_.size() - 1);
    const double t = (x - table_x_[k - 1]) / (table_x_[k] - table_x_[k - 1]);
    const double r_guess = table_r_[k - 1] + t * (table_r_[k] - table_r_[k - 1]);
    const double gap = right ? h.r_plus() - r_guess : r_guess - h.r_minus();
    if (gap > 0.0) u = std::log(gap);
  }
  u = std::min(u, u_anchor);
  // Bracket [u_far, u_anchor] with the target between x(u_far) and 0.
  double u_far = std::min(u, u_anchor) - 1.0;
  // f(u) = dir * (x(u) - x) is increasing in u, positive at the anchor.
  for (int k = 0; k < 200 && dir * (x_of_u(u_far) - x) > 0.0; ++k)
    u_far = u_anchor - 2.0 * (u_anchor - u_far);
  double lo = u_far, hi = u_anchor;
  if (x == 0.0) return point(u_anchor);

  const double tol = 1e-14 * std::max(1.0, std::abs(x));
  for (int it = 0; it < options_.max_newton; ++it) {
    const ChartPoint pt = point(u);
    const double residual = x_of_point(pt) - x;
    if (std::abs(residual) <= tol) return pt;
    if (dir * residual > 0.0)
      hi = u;
    else
      lo = u;
    if (hi - lo <= 4e-16 * std::max(1.0, std::abs(u))) return pt;
    // dx/du = (1/F) dr/du, dr/du = -+gap.
    const double F = metric_at(pt);
    const double gap = right ? pt.gap_plus : pt.gap_minus;
    const double dxdu = (right ? -gap : gap) / F;
    double next = u - residual / dxdu;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (next == u) return pt;
    u = next;
  }
  throw NumericalError("ConvergenceFailure",
                       "r_of_x did not converge at x = " + std::to_string(x));
}

ChartPoint RWChart::point_from_series(Side side, double x) const {
  const auto& h = horizons_;
  const auto& ser = series(side);
  const double kappa = side == Side::plus ? h.kappa_plus : h.kappa_minus;
  const double z = std::exp(2.0 * kappa * x);
  double acc = 0.0;
  for (auto it = ser.coeffs.rbegin(); it != ser.coeffs.rend(); ++it) acc = (acc + *it) * z;
  const double span = h.r_plus() - h.r_minus();
  ChartPoint pt;
  if (side == Side::plus) {
    pt.gap_plus = -acc;
    pt.gap_minus = span - pt.gap_plus;
    pt.r = h.r_plus() + acc;
  } else {
    pt.gap_minus = acc;
    pt.gap_plus = span - acc;
    pt.r = h.r_minus() + acc;
  }
  return pt;
}

ChartPoint RWChart::point_of_x(double x) const {
  if (!std::isfinite(x)) throw ValidationError("NonFinite", "x must be finite");
  if (x > series_plus_.threshold) return point_from_series(Side::plus, x);
  if (-x > series_minus_.threshold) return point_from_series(Side::minus, x);
  return point_of_x_newton(x);
}

PotentialSample RWChart::potentials_at_point(const ChartPoint& pt) const {
  const double F = metric_at(pt);
  const double dF = metric_derivative(params_, pt.r);
  PotentialSample s;
  s.W0 = F / (pt.r * pt.r);
  s.W1 = F * dF / pt.r + params_.m * params_.m * F;
  s.V = 1.0 / pt.r;
  s.V_tilde = pt.gap_plus / (pt.r * horizons_.r_plus());
  s.V_minus_shifted = 1.0 / horizons_.r_minus() - 1.0 / horizons_.r_plus();
  return s;
}

PotentialSample RWChart::potentials_at(double x) const {
  return potentials_at_point(point_of_x(x));
}

double w0_slope(const SpacetimeParams& p, const RWChart& chart, double x) {
  const ChartPoint pt = chart.point_of_x(x);
  const double F = chart.metric_at(pt);
  const double r = pt.r;
  return 2.0 * F * (3.0 * p.M * r - 2.0 * p.Q * p.Q - r * r) / std::pow(r, 5);
}

}  // namespace dsrn
