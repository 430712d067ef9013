#include "dsrn/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dsrn/errors.hpp"

namespace dsrn {

namespace {

constexpr cplx I(0.0, 1.0);
constexpr double kRescaleHigh = 1e100;
constexpr double kRescaleLow = 1e-100;

// Packed state: gap, e, e', dz e, dz e'.
using JostState = std::array<double, 9>;

cplx get(const JostState& y, int k) { return {y[1 + 2 * k], y[2 + 2 * k]}; }
void put(JostState& y, int k, cplx v) {
  y[1 + 2 * k] = v.real();
  y[2 + 2 * k] = v.imag();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double find_cutoff(const ModeProblem& p, double dir, double cut, double cap) {
  double last_fail = 0.0;
  for (double x = 1.0; x <= cap; x += 1.0)
    if (p.tail_size(dir * x) >= cut) last_fail = x;
  if (last_fail >= cap) return cap;
  double lo = last_fail, hi = std::min(last_fail + 1.0, cap);
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (p.tail_size(dir * mid) >= cut)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace

ModeProblem::ModeProblem(std::shared_ptr<const RWChart> chart, int ell,
                         const ModeOptions& opts)
    : chart_(std::move(chart)), ell_(ell), opts_(opts) {
  if (!chart_) throw ValidationError("MissingChart", "mode problem needs a chart");
  if (ell < 0) throw ValidationError("BadEll", "ell must be nonnegative");
  if (!(opts.ode_tol > 0.0)) throw ValidationError("BadTolerance", "ode_tol must be positive");
  s_ = opts.charge_product.value_or(chart_->params().s);
  const auto& h = chart_->horizons();
  v_minus_ = 1.0 / h.r_minus() - 1.0 / h.r_plus();
  const double cut = opts.asymptotic_cut * std::max(1.0, double(ell) * (ell + 1));
  x_plus_ = find_cutoff(*this, +1.0, cut, opts.x_cap);
  x_minus_ = find_cutoff(*this, -1.0, cut, opts.x_cap);
}

ModeProblem ModeProblem::free_field(double cutoff, double ode_tol) {
  ModeProblem p;
  p.x_minus_ = p.x_plus_ = cutoff;
  p.opts_.ode_tol = ode_tol;
  return p;
}

double ModeProblem::kappa() const {
  return chart_ ? chart_->horizons().kappa : std::numeric_limits<double>::infinity();
}

double ModeProblem::strip_floor() const {
  if (!chart_) return -std::numeric_limits<double>::infinity();
  return -kappa() * (1.0 - opts_.strip_margin);
}

void ModeProblem::coefficients(const ChartPoint& pt, double& w_eff, double& v_tilde) const {
  if (!chart_) {
    w_eff = 0.0;
    v_tilde = 0.0;
    return;
  }
  const auto& params = chart_->params();
  const double F = chart_->metric_at(pt);
  const double dF = metric_derivative(params, pt.r);
  const double w0 = F / (pt.r * pt.r);
  const double w1 = F * dF / pt.r + params.m * params.m * F;
  w_eff = double(ell_) * (ell_ + 1) * w0 + w1;
  v_tilde = pt.gap_plus / (pt.r * chart_->horizons().r_plus());
}

double ModeProblem::effective_potential(double x) const {
  if (!chart_) return 0.0;
  double w, v;
  coefficients(chart_->point_of_x(x), w, v);
  return w;
}

double ModeProblem::v_tilde(double x) const {
  if (!chart_) return 0.0;
  double w, v;
  coefficients(chart_->point_of_x(x), w, v);
  return v;
}

double ModeProblem::tail_size(double x) const {
  if (!chart_) return 0.0;
  double w, v;
  coefficients(chart_->point_of_x(x), w, v);
  const double v_inf = x >= 0.0 ? 0.0 : v_minus_;
  return std::abs(w) + std::abs(s_) * std::abs(v - v_inf);
}

const JostSample& JostSolution::at(double x) const {
  for (const auto& s : samples)
    if (s.x == x) return s;
  throw ValidationError("NotSampled", "Jost solution was not sampled at x = " + fmt(x));
}

cplx JostSolution::value(double x) const { return std::exp(log_scale) * at(x).value; }
cplx JostSolution::derivative(double x) const {
  return std::exp(log_scale) * at(x).derivative;
}

JostSolution jost(const ModeProblem& problem, cplx z, Side side,
                  const std::vector<double>& points) {
  if (!problem.is_free() && !(z.imag() > problem.strip_floor()))
    throw ValidationError("StripViolation", "Im z = " + fmt(z.imag()) +
                                                " is below the admissible strip edge " +
                                                fmt(problem.strip_floor()));
  const bool plus = side == Side::plus;
  const double s = problem.charge_product();
  const cplx omega = plus ? z : z - s * problem.v_minus_shifted();

  double x0 = plus ? problem.x_inf_plus() : -problem.x_inf_minus();
  for (double p : points) x0 = plus ? std::max(x0, p) : std::min(x0, p);

  JostSolution sol;
  sol.side = side;
  sol.z = z;
  sol.asymptotic_frequency = omega;
  // e(x0) = exp(+-i omega x0) is carried as exp(log_scale) * 1.
  sol.log_scale = plus ? I * omega * x0 : -I * omega * x0;
  sol.dz_log_scale = plus ? I * x0 : -I * x0;

  const RWChart* chart = problem.is_free() ? nullptr : &problem.chart();
  double span = 0.0, r_side = 0.0;
  JostState y{};
  if (chart) {
    const auto& h = chart->horizons();
    span = h.r_plus() - h.r_minus();
    r_side = plus ? h.r_plus() : h.r_minus();
    const ChartPoint pt0 = chart->point_of_x(x0);
    y[0] = plus ? pt0.gap_plus : pt0.gap_minus;
  }
  auto point_of_gap = [&](double g) {
    ChartPoint pt;
    if (plus) {
      pt.gap_plus = g;
      pt.gap_minus = span - g;
      pt.r = r_side - g;
    } else {
      pt.gap_minus = g;
      pt.gap_plus = span - g;
      pt.r = r_side + g;
    }
    return pt;
  };

  const cplx ik = plus ? I * omega : -I * omega;
  const cplx dik = plus ? I : -I;
  cplx e0 = 1.0, de0 = ik, ez0 = 0.0, dez0 = dik;
  if (chart && problem.options().wkb_seed) {
    // First Born correction e = exp(ikx)(1 + phi) for a tail ~ exp(beta x).
    const auto& h = chart->horizons();
    const double beta = 2.0 * (plus ? h.kappa_plus : h.kappa_minus);
    double w, v;
    problem.coefficients(point_of_gap(y[0]), w, v);
    const cplx shift = z - s * v;
    const cplx tail = w - (shift * shift - omega * omega);
    const cplx denom = beta * (beta + 2.0 * ik);
    const cplx phi = tail / denom;
    const cplx dphi = -2.0 * (shift - omega) / denom - phi * (2.0 * beta * dik) / denom;
    e0 = 1.0 + phi;
    de0 = ik * (1.0 + phi) + beta * phi;
    ez0 = dphi;
    dez0 = dik * (1.0 + phi) + ik * dphi + beta * dphi;
  }
  put(y, 0, e0);
  put(y, 1, de0);
  put(y, 2, ez0);
  put(y, 3, dez0);

  auto rhs = [&](double, const JostState& u, JostState& du) {
    double w = 0.0, v = 0.0, F = 0.0;
    if (chart) {
      const ChartPoint pt = point_of_gap(u[0]);
      problem.coefficients(pt, w, v);
      F = chart->metric_at(pt);
    }
    du[0] = plus ? -F : F;
    const cplx shift = z - s * v;
    const cplx q = w - shift * shift;
    const cplx e = get(u, 0), ez = get(u, 2);
    put(du, 0, get(u, 1));
    put(du, 1, q * e);
    put(du, 2, get(u, 3));
    put(du, 3, q * ez - 2.0 * shift * e);
  };

  std::vector<double> stops(points);
  std::sort(stops.begin(), stops.end());
  if (plus) std::reverse(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  std::vector<JostSample> recorded;
  std::vector<double> recorded_scale;
  double extra_log = 0.0;
  auto observer = [&](double x, const JostState& u) {
    if (std::find(stops.begin(), stops.end(), x) == stops.end()) return;
    JostSample smp;
    smp.x = x;
    smp.value = get(u, 0);
    smp.derivative = get(u, 1);
    smp.dz_value = get(u, 2);
    smp.dz_derivative = get(u, 3);
    recorded.push_back(smp);
    recorded_scale.push_back(extra_log);
  };
  auto post_step = [&](JostState& u) {
    const double mag = std::max(std::abs(get(u, 0)), std::abs(get(u, 1)));
    if (mag > kRescaleHigh || (mag < kRescaleLow && mag > 0.0)) {
      for (std::size_t k = 1; k < u.size(); ++k) u[k] /= mag;
      extra_log += std::log(mag);
      ++sol.rescalings;
    }
  };

  OdeOptions oo;
  oo.rtol = problem.options().ode_tol;
  oo.atol = 1e-6 * problem.options().ode_tol;
  oo.initial_step = 1e-2;
  oo.max_step = 0.5;
  Dopri5<9> integrator(oo);
  integrator.set_groups({0, 1, 1, 1, 1, 2, 2, 2, 2});
  const double x_end = stops.empty() ? x0 : stops.back();
  integrator.integrate(rhs, x0, y, x_end, stops, observer, post_step);

  sol.log_scale += extra_log;
  for (std::size_t k = 0; k < recorded.size(); ++k) {
    const double rel = recorded_scale[k] - extra_log;
    if (rel != 0.0) {
      const double f = std::exp(rel);
      recorded[k].value *= f;
      recorded[k].derivative *= f;
      recorded[k].dz_value *= f;
      recorded[k].dz_derivative *= f;
    }
  }
  // Report in request order.
  sol.samples.reserve(points.size());
  for (double p : points)
    for (const auto& r : recorded)
      if (r.x == p) {
        sol.samples.push_back(r);
        break;
      }
  return sol;
}

WronskianResult wronskian(const ModeProblem& problem, cplx z, bool diagnostics) {
  const std::vector<double> pts = diagnostics ? std::vector<double>{-5.0, 0.0, 5.0}
                                              : std::vector<double>{0.0};
  const JostSolution ep = jost(problem, z, Side::plus, pts);
  const JostSolution em = jost(problem, z, Side::minus, pts);

  auto normalized_w = [&](double x) {
    const auto& a = ep.at(x);
    const auto& b = em.at(x);
    return a.value * b.derivative - a.derivative * b.value;
  };
  const auto& a = ep.at(0.0);
  const auto& b = em.at(0.0);
  const cplx w0 = a.value * b.derivative - a.derivative * b.value;
  const cplx w0_z = a.dz_value * b.derivative + a.value * b.dz_derivative -
                    a.dz_derivative * b.value - a.derivative * b.dz_value;

  WronskianResult out;
  out.log_value = ep.log_scale + em.log_scale + std::log(w0);
  out.value = std::exp(out.log_value);
  out.log_derivative = ep.dz_log_scale + em.dz_log_scale + w0_z / w0;
  if (diagnostics) {
    double spread = 0.0;
    for (double x : {-5.0, 5.0})
      spread = std::max(spread, std::abs(normalized_w(x) - w0) / std::abs(w0));
    out.x_spread = spread;
  }
  return out;
}

cplx resolvent_kernel(const ModeProblem& problem, cplx z, double x, double y) {
  const double hi = std::max(x, y), lo = std::min(x, y);
  const JostSolution ep = jost(problem, z, Side::plus, {hi, 0.0});
  const JostSolution em = jost(problem, z, Side::minus, {lo, 0.0});
  const auto& a = ep.at(0.0);
  const auto& b = em.at(0.0);
  const cplx w0 = a.value * b.derivative - a.derivative * b.value;
  const cplx w0_z = a.dz_value * b.derivative + a.value * b.dz_derivative -
                    a.dz_derivative * b.value - a.derivative * b.dz_value;
  const cplx log_der = ep.dz_log_scale + em.dz_log_scale + w0_z / w0;
  if (w0 == 0.0 || std::abs(1.0 / log_der) < 1e-10 * (1.0 + std::abs(z)))
    throw NumericalError("AtResonance", "Wronskian vanishes at z");
  // exp(log_scale) factors of e_plus, e_minus and W cancel.
  return ep.at(hi).value * em.at(lo).value / w0;
}

std::vector<WronskianGridRow> wronskian_grid(const ModeProblem& problem, cplx lower_left,
                                             cplx upper_right, int n_re, int n_im) {
  if (n_re < 1 || n_im < 1) throw ValidationError("BadGrid", "grid needs >= 1 point per axis");
  std::vector<WronskianGridRow> rows;
  rows.reserve(std::size_t(n_re) * n_im);
  for (int i = 0; i < n_im; ++i) {
    const double im = n_im == 1 ? lower_left.imag()
                                : lower_left.imag() + (upper_right.imag() - lower_left.imag()) * i / (n_im - 1);
    for (int j = 0; j < n_re; ++j) {
      const double re = n_re == 1 ? lower_left.real()
                                  : lower_left.real() + (upper_right.real() - lower_left.real()) * j / (n_re - 1);
      const cplx z(re, im);
      rows.push_back({z, wronskian(problem, z, false).value});
    }
  }
  return rows;
}

}  // namespace dsrn
