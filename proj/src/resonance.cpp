#include "dsrn/resonance.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>

#include "dsrn/errors.hpp"

namespace dsrn {

namespace {

constexpr double kPi = std::numbers::pi;

struct ContourSample {
  cplx z;
  cplx log_w;
  cplx log_der;
};

ContourSample sample(const ModeProblem& problem, cplx z, const SolverOptions& opts) {
  const WronskianResult w = wronskian(problem, z, false);
  if (std::abs(1.0 / w.log_derivative) < opts.boundary_floor * (1.0 + std::abs(z)))
    throw NumericalError("BoundaryZero", "W vanishes on the contour near z = " +
                                             std::to_string(z.real()) + " + " +
                                             std::to_string(z.imag()) + "i");
  return {z, w.log_value, w.log_derivative};
}

// Change of arg W along the straight segment a -> b, refined until the
// sampled change of log W agrees with the trapezoidal integral of W'/W.
double phase_change(const ModeProblem& problem, const ContourSample& a, const ContourSample& b,
                    const SolverOptions& opts, int depth) {
  const cplx predicted = 0.5 * (b.z - a.z) * (a.log_der + b.log_der);
  cplx measured = b.log_w - a.log_w;
  const double wraps = std::round((measured.imag() - predicted.imag()) / (2.0 * kPi));
  measured -= cplx(0.0, 2.0 * kPi * wraps);
  if (std::abs(measured - predicted) <= opts.phase_tol && std::abs(measured.imag()) < 1.0)
    return measured.imag();
  if (depth > 40 || std::abs(b.z - a.z) < 1e-12 * (1.0 + std::abs(a.z)))
    throw NumericalError("BoundaryZero", "contour refinement stalled near z = " +
                                             std::to_string(a.z.real()) + " + " +
                                             std::to_string(a.z.imag()) + "i");
  const ContourSample mid = sample(problem, 0.5 * (a.z + b.z), opts);
  return phase_change(problem, a, mid, opts, depth + 1) +
         phase_change(problem, mid, b, opts, depth + 1);
}

int winding_of_polygon(const ModeProblem& problem, const std::vector<cplx>& vertices,
                       const SolverOptions& opts) {
  std::vector<ContourSample> pts;
  pts.reserve(vertices.size());
  for (cplx v : vertices) {
    if (v.imag() <= problem.strip_floor())
      throw ValidationError("StripViolation", "contour leaves the admissible strip");
    pts.push_back(sample(problem, v, opts));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    total += phase_change(problem, pts[i], pts[(i + 1) % pts.size()], opts, 0);
  const double turns = total / (2.0 * kPi);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 0.25)
    throw NumericalError("NonIntegerWinding", "winding " + std::to_string(turns));
  return static_cast<int>(rounded);
}

double cluster_radius(cplx z, const SolverOptions& opts) {
  return opts.cluster_scale * (1.0 + std::abs(z));
}

// Newton on W with step W/W'; returns nothing when the iterate leaves
// the (slightly enlarged) rectangle or fails to converge.
std::optional<std::pair<cplx, double>> newton(const ModeProblem& problem, cplx z,
                                              const Rectangle& rect,
                                              const SolverOptions& opts) {
  const double pad_re = 0.25 * rect.width(), pad_im = 0.25 * rect.height();
  const double floor = problem.strip_floor();
  for (int it = 0; it < opts.max_newton; ++it) {
    const WronskianResult w = wronskian(problem, z, false);
    const cplx step = 1.0 / w.log_derivative;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return std::nullopt;
    const double size = std::abs(step);
    z -= step;
    if (z.real() < rect.lower_left.real() - pad_re || z.real() > rect.upper_right.real() + pad_re ||
        z.imag() < rect.lower_left.imag() - pad_im || z.imag() > rect.upper_right.imag() + pad_im ||
        z.imag() <= floor)
      return std::nullopt;
    if (size <= opts.newton_tol * (1.0 + std::abs(z))) {
      const WronskianResult fin = wronskian(problem, z, false);
      return std::make_pair(z, std::abs(1.0 / fin.log_derivative));
    }
  }
  return std::nullopt;
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<Resonance> solve(const ModeProblem& problem, const Rectangle& rect,
                             int seeds_per_axis, const SolverOptions& opts,
                             const std::vector<cplx>& extra, int depth) {
  const int expected = count_zeros(problem, rect, opts);
  if (expected == 0) return {};

  // Seeds placed symmetrically about the centre line, so that a box and its
  // mirror under z -> -conj(z) get exactly mirrored seeds.
  const int n = seeds_per_axis;
  const double c_re = 0.5 * (rect.lower_left.real() + rect.upper_right.real());
  const double half_re = 0.5 * (rect.upper_right.real() - rect.lower_left.real());
  std::vector<cplx> seeds;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      seeds.emplace_back(c_re + half_re * (2.0 * i + 1 - n) / n,
                         rect.lower_left.imag() + rect.height() * (j + 0.5) / n);
  for (cplx e : extra)
    if (rect.contains(e)) seeds.push_back(e);

  std::vector<std::optional<std::pair<cplx, double>>> found(seeds.size());
  parallel_for(seeds.size(), opts.threads,
               [&](std::size_t i) { found[i] = newton(problem, seeds[i], rect, opts); });

  // Best residual first, so the kept representative of a cluster does not
  // depend on the seed order.
  std::vector<std::pair<cplx, double>> converged;
  for (const auto& f : found)
    if (f && rect.contains(f->first)) converged.push_back(*f);
  std::sort(converged.begin(), converged.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    if (std::abs(a.first.real()) != std::abs(b.first.real()))
      return std::abs(a.first.real()) < std::abs(b.first.real());
    return a.first.imag() < b.first.imag();
  });

  std::vector<Resonance> roots;
  for (const auto& f : converged) {
    const bool dup = std::any_of(roots.begin(), roots.end(), [&](const Resonance& r) {
      return std::abs(r.z - f.first) <= cluster_radius(r.z, opts);
    });
    if (dup) continue;
    Resonance r;
    r.z = f.first;
    r.ell = problem.ell();
    r.residual = f.second;
    roots.push_back(r);
  }

  std::vector<int> certificates(roots.size(), 0);
  parallel_for(roots.size(), opts.threads, [&](std::size_t i) {
    const double radius = opts.cert_factor * cluster_radius(roots[i].z, opts);
    certificates[i] = count_zeros_circle(problem, roots[i].z, radius, opts);
  });
  int total = 0;
  std::vector<Resonance> certified;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (certificates[i] <= 0) continue;
    roots[i].winding_certificate = certificates[i];
    roots[i].multiplicity = certificates[i];
    total += certificates[i];
    certified.push_back(roots[i]);
  }
  if (total == expected) return certified;
  if (depth >= opts.max_depth)
    throw NumericalError("CountMismatch", "found multiplicity " + std::to_string(total) +
                                              " but the rectangle winds " +
                                              std::to_string(expected) + " times");

  // Split across the longer side, off-centre to avoid symmetric zeros on the cut.
  std::vector<cplx> carry = extra;
  for (const auto& r : certified) carry.push_back(r.z);
  for (double frac : {0.5 + 1.0 / 97.0, 0.5 - 1.0 / 53.0, 0.5 + 1.0 / 7.0}) {
    Rectangle a = rect, b = rect;
    if (rect.width() >= rect.height()) {
      // Offset away from the centre on the side facing outward, which keeps
      // the cuts of mirrored boxes mirrored.
      const double c = 0.5 * (rect.lower_left.real() + rect.upper_right.real());
      const double cut = c + (c < 0.0 ? -1.0 : 1.0) * (frac - 0.5) * rect.width();
      a.upper_right.real(cut);
      b.lower_left.real(cut);
    } else {
      const double cut = rect.lower_left.imag() + frac * rect.height();
      a.upper_right.imag(cut);
      b.lower_left.imag(cut);
    }
    try {
      auto left = solve(problem, a, seeds_per_axis, opts, carry, depth + 1);
      auto right = solve(problem, b, seeds_per_axis, opts, carry, depth + 1);
      left.insert(left.end(), right.begin(), right.end());
      return left;
    } catch (const NumericalError& e) {
      if (e.kind() != "BoundaryZero") throw;
    }
  }
  throw NumericalError("CountMismatch", "subdivision kept cutting through a zero");
}

}  // namespace

int count_zeros(const ModeProblem& problem, const Rectangle& rect, const SolverOptions& opts) {
  if (!(rect.width() > 0.0 && rect.height() > 0.0))
    throw ValidationError("BadRectangle", "rectangle must have positive width and height");
  if (rect.lower_left.imag() <= problem.strip_floor())
    throw ValidationError("StripViolation", "rectangle reaches below Im z = " +
                                                std::to_string(problem.strip_floor()));
  const int n = std::max(1, opts.edge_segments);
  const cplx ll = rect.lower_left, ur = rect.upper_right;
  const cplx lr(ur.real(), ll.imag()), ul(ll.real(), ur.imag());
  std::vector<cplx> vertices;
  for (auto [from, to] : {std::pair{ll, lr}, std::pair{lr, ur}, std::pair{ur, ul},
                          std::pair{ul, ll}})
    for (int i = 0; i < n; ++i) vertices.push_back(from + (to - from) * (double(i) / n));
  return winding_of_polygon(problem, vertices, opts);
}

int count_zeros_circle(const ModeProblem& problem, cplx center, double radius,
                       const SolverOptions& opts) {
  if (!(radius > 0.0)) throw ValidationError("BadRadius", "radius must be positive");
  std::vector<cplx> vertices;
  const int n = 16;
  for (int i = 0; i < n; ++i) vertices.push_back(center + std::polar(radius, 2.0 * kPi * i / n));
  return winding_of_polygon(problem, vertices, opts);
}

std::vector<Resonance> find_resonances(const ModeProblem& problem, const Rectangle& rect,
                                       int seeds_per_axis, const SolverOptions& opts,
                                       const std::vector<cplx>& extra_seeds) {
  if (seeds_per_axis < 1) throw ValidationError("BadSeeds", "seeds_per_axis must be >= 1");
  auto out = solve(problem, rect, seeds_per_axis, opts, extra_seeds, 0);
  std::sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
  return out;
}

std::vector<cplx> PseudoPoleLattice::points() const {
  std::vector<cplx> out;
  for (const auto& e : entries) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](cplx p) {
      return std::abs(p - e.value) <= 1e-13 * (1.0 + std::abs(p));
    });
    if (!seen) out.push_back(e.value);
  }
  return out;
}

double PseudoPoleLattice::min_damping() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) best = std::min(best, std::abs(e.value.imag()));
  return best;
}

PseudoPoleLattice pseudo_poles(const SpacetimeParams& p, int n_min, int n_max, int k_min,
                               int k_max) {
  if (n_min < 1 || n_max < n_min || k_min < 0 || k_max < k_min)
    throw ValidationError("BadRange", "need 1 <= n_min <= n_max and 0 <= k_min <= k_max");
  const double rp = photon_sphere_radius(p);
  const double F = metric_function(p, rp);
  PseudoPoleLattice lat;
  lat.prefactor = std::sqrt(F) / rp;
  lat.charge_shift = p.s / std::sqrt(F);
  lat.damping_step =
      0.5 * std::sqrt(std::abs(3.0 - 12.0 * p.M / rp + 10.0 * p.Q * p.Q / (rp * rp)));
  for (int sn : {1, -1})
    for (int sh : {1, -1})
      for (int sc : {1, -1})
        for (int n = n_min; n <= n_max; ++n)
          for (int k = k_min; k <= k_max; ++k) {
            PseudoPole e;
            e.sign_n = sn;
            e.sign_half = sh;
            e.sign_charge = sc;
            e.n = n;
            e.k = k;
            e.value = lat.prefactor * cplx(sn * n + 0.5 * sh + sc * lat.charge_shift,
                                           -lat.damping_step * (k + 0.5));
            lat.entries.push_back(e);
          }
  return lat;
}

double w0_curvature(const RWChart& chart) {
  auto w0 = [&](double x) { return chart.potentials_at(x).W0; };
  const double c = w0(0.0);
  // Central second differences at h, h/2, h/4, h/8 and a Richardson table.
  double h = 0.4;
  std::array<std::array<double, 4>, 4> t{};
  for (int i = 0; i < 4; ++i, h *= 0.5) t[i][0] = (w0(h) - 2.0 * c + w0(-h)) / (h * h);
  for (int j = 1; j < 4; ++j) {
    const double f = std::pow(4.0, j);
    for (int i = j; i < 4; ++i) t[i][j] = (f * t[i][j - 1] - t[i - 1][j - 1]) / (f - 1.0);
  }
  const double value = t[3][3];
  if (!(value < 0.0))
    throw NumericalError("DegenerateMaximum", "W0'' at the photon sphere is not negative");
  return value;
}

std::vector<cplx> gamma0(const RWChart& chart, int ell, int k_min, int k_max) {
  if (ell < 1) throw ValidationError("BadEll", "gamma0 needs l >= 1");
  if (k_min < 0 || k_max < k_min) throw ValidationError("BadRange", "need 0 <= k_min <= k_max");
  const double h = 1.0 / std::sqrt(double(ell) * (ell + 1));
  const PotentialSample ps = chart.potentials_at(0.0);
  const double curv = std::abs(w0_curvature(chart));
  const double s = chart.params().s;
  std::vector<cplx> out;
  for (int k = k_min; k <= k_max; ++k)
    out.push_back(ps.W0 + h * cplx(2.0 * std::sqrt(ps.W0) * s * ps.V,
                                   -std::sqrt(curv / 2.0) * (k + 0.5)));
  return out;
}

MatchReport match_to_lattice(const std::vector<cplx>& resonances, const std::vector<cplx>& lattice,
                             cplx offset) {
  if (resonances.empty() || lattice.empty())
    throw ValidationError("EmptyInput", "match_to_lattice needs nonempty inputs");
  struct Cand {
    double d;
    int i, j;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < int(resonances.size()); ++i)
    for (int j = 0; j < int(lattice.size()); ++j)
      cands.push_back({std::abs(resonances[i] + offset - lattice[j]), i, j});
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.d < b.d;
  });
  std::vector<char> used_r(resonances.size(), 0), used_l(lattice.size(), 0);
  MatchReport rep;
  for (const auto& c : cands) {
    if (used_r[c.i] || used_l[c.j]) continue;
    used_r[c.i] = used_l[c.j] = 1;
    rep.pairs.push_back({c.i, c.j, resonances[c.i], lattice[c.j], c.d});
  }
  std::sort(rep.pairs.begin(), rep.pairs.end(),
            [](const LatticePair& a, const LatticePair& b) { return a.resonance < b.resonance; });
  for (const auto& p : rep.pairs) {
    rep.max_drift = std::max(rep.max_drift, p.drift);
    rep.mean_drift += p.drift;
  }
  if (!rep.pairs.empty()) rep.mean_drift /= double(rep.pairs.size());
  for (int i = 0; i < int(resonances.size()); ++i)
    if (!used_r[i]) rep.unmatched_resonances.push_back(i);
  for (int j = 0; j < int(lattice.size()); ++j)
    if (!used_l[j]) rep.unmatched_lattice.push_back(j);
  return rep;
}

const Resonance& least_damped(const std::vector<Resonance>& list) {
  if (list.empty()) throw ValidationError("EmptyInput", "no resonances");
  return *std::max_element(list.begin(), list.end(), [](const Resonance& a, const Resonance& b) {
    return a.z.imag() < b.z.imag();
  });
}

std::vector<Rectangle> default_search_boxes(const ModeProblem& problem, double prefactor,
                                            int n_extra) {
  if (!(prefactor > 0.0) || n_extra < 0)
    throw ValidationError("BadRange", "need prefactor > 0 and n_extra >= 0");
  const double k = problem.kappa();
  const double lo = problem.strip_floor() + 1e-3 * k;
  const double re_lo = 0.5 * prefactor, re_hi = prefactor * (problem.ell() + n_extra + 1);
  return {Rectangle{cplx(re_lo, lo), cplx(re_hi, k)}, Rectangle{cplx(-re_hi, lo), cplx(-re_lo, k)}};
}

}  // namespace dsrn
