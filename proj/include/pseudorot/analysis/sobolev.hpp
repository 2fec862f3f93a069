#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pseudorot/core/csv.hpp"
#include "pseudorot/core/errors.hpp"
#include "pseudorot/core/parallel.hpp"

namespace pseudorot {

enum class SobolevDomain { plane, half_plane, cylinder, half_cylinder };

inline std::string to_string(SobolevDomain d) {
  switch (d) {
    case SobolevDomain::plane: return "plane";
    case SobolevDomain::half_plane: return "half-plane";
    case SobolevDomain::cylinder: return "cylinder";
    case SobolevDomain::half_cylinder: return "half-cylinder";
  }
  return "?";
}

inline SobolevDomain sobolev_domain_from_string(const std::string& s) {
  if (s == "plane") return SobolevDomain::plane;
  if (s == "half-plane") return SobolevDomain::half_plane;
  if (s == "cylinder") return SobolevDomain::cylinder;
  if (s == "half-cylinder") return SobolevDomain::half_cylinder;
  throw InvalidArgument("unknown Sobolev domain '" + s + "'");
}

inline bool is_half(SobolevDomain d) {
  return d == SobolevDomain::half_plane || d == SobolevDomain::half_cylinder;
}
inline bool is_periodic(SobolevDomain d) {
  return d == SobolevDomain::cylinder || d == SobolevDomain::half_cylinder;
}

// √12, the planar constant, and 6√12 for cylinders of any period n >= 1.
inline const double kPlanarSobolevBound = std::sqrt(12.0);
inline const double kCylinderSobolevBound = 6 * std::sqrt(12.0);

struct ModulationMode {
  int m = 1;            // t-frequency m/period
  double amplitude = 0;
  double phase = 0;
};

// One-dimensional factor of a separable probe.
//   spline:             (1 − u²)³ for |u| < 1, u = (x − center)/width
//   truncated_gaussian: e^{−u²/2} − e^{−R²/2} for |u| < R
//   periodic_bump:      cos^{2K}(π(x − center)/period) · (1 + Σ aⱼ cos(2πmⱼ(x − center)/period + φⱼ))
struct Profile1D {
  enum class Kind { spline, truncated_gaussian, periodic_bump };
  Kind kind = Kind::spline;
  double center = 0;
  double width = 1;
  double radius = 3;        // truncated_gaussian cut in units of width
  double period = 1;
  int K = 1;
  std::vector<ModulationMode> modulation;
  double cutoff = -std::numeric_limits<double>::infinity();   // domain is x >= cutoff

  static Profile1D spline(double center, double width) {
    Profile1D p;
    p.center = center;
    p.width = width;
    return p;
  }
  static Profile1D truncated_gaussian(double center, double width, double radius) {
    Profile1D p;
    p.kind = Kind::truncated_gaussian;
    p.center = center;
    p.width = width;
    p.radius = radius;
    return p;
  }
  // K chosen so the bump has standard deviation about sigma.
  static Profile1D periodic_bump(double center, double sigma, double period) {
    Profile1D p;
    p.kind = Kind::periodic_bump;
    p.center = center;
    p.period = period;
    const double k = std::pow(period / (std::numbers::pi * sigma), 2) / 2;
    p.K = std::max(1, static_cast<int>(std::lround(k)));
    p.width = period / (std::numbers::pi * std::sqrt(2.0 * p.K));
    return p;
  }

  bool periodic() const { return kind == Kind::periodic_bump; }

  // Sampling interval; the support for compact kinds, one period for periodic ones.
  double lo() const {
    if (periodic()) return center - period / 2;
    const double r = kind == Kind::spline ? width : radius * width;
    return std::max(center - r, cutoff);
  }
  double hi() const {
    if (periodic()) return center + period / 2;
    return center + (kind == Kind::spline ? width : radius * width);
  }

  // (value, derivative) at x.
  std::pair<double, double> eval(double x) const {
    switch (kind) {
      case Kind::spline: {
        const double u = (x - center) / width;
        if (std::fabs(u) >= 1 || x < cutoff) return {0, 0};
        const double w = 1 - u * u;
        return {w * w * w, -6 * u * w * w / width};
      }
      case Kind::truncated_gaussian: {
        const double u = (x - center) / width;
        if (std::fabs(u) >= radius || x < cutoff) return {0, 0};
        const double g = std::exp(-u * u / 2);
        return {g - std::exp(-radius * radius / 2), -u * g / width};
      }
      case Kind::periodic_bump:
        return eval_offset(x - center);
    }
    return {0, 0};
  }

  // Periodic bump at τ = x − center.
  std::pair<double, double> eval_offset(double tau) const {
    const double pi = std::numbers::pi;
    const double phi = pi * tau / period;
    const double c = std::cos(phi), s = std::sin(phi);
    const double b = std::pow(c, 2 * K);
    const double db = -2.0 * K * std::pow(c, 2 * K - 1) * s * pi / period;
    double m = 1, dm = 0;
    for (const auto& mode : modulation) {
      const double om = 2 * pi * mode.m / period;
      m += mode.amplitude * std::cos(om * tau + mode.phase);
      dm -= mode.amplitude * om * std::sin(om * tau + mode.phase);
    }
    return {b * m, db * m + b * dm};
  }

  // Length scale that the sampling step resolves.
  double scale() const {
    double s = width;
    for (const auto& mode : modulation)
      if (mode.m > 0) s = std::min(s, period / (2 * std::numbers::pi * mode.m));
    return s;
  }
};

// f(x, y) = amplitude · p(x) · q(y); x is the s-direction, y the t-direction.
struct SobolevProbe {
  SobolevDomain domain = SobolevDomain::plane;
  long n = 1;
  double amplitude = 1;
  Profile1D p;
  Profile1D q;

  double value(double x, double y) const { return amplitude * p.eval(x).first * q.eval(y).first; }

  void validate() const {
    if (is_periodic(domain)) {
      if (n < 1) throw InvalidArgument("cylinder period must be >= 1");
      if (!q.periodic() || q.period != static_cast<double>(n))
        throw InvalidArgument("cylinder probe needs a t-profile of period n");
    } else if (q.periodic()) {
      throw InvalidArgument("planar probe needs a compactly supported t-profile");
    }
    if (p.periodic()) throw InvalidArgument("s-profile must be compactly supported");
    if (is_half(domain) && p.cutoff != 0) throw InvalidArgument("half-domain probe must be cut at s = 0");
  }
};

struct SobolevNorms {
  double linf = 0;
  double l2 = 0;
  double dinf = 0;          // sup |Df|, Euclidean gradient norm
  double w1inf() const { return linf + dinf; }
};

struct SobolevRatio {
  SobolevNorms norms;
  double ratio = 0;              // ‖f‖²_∞ / (‖f‖_{L²} ‖f‖_{W^{1,∞}})
  double gradient_ratio = 0;     // ‖f‖²_∞ / (‖f‖_{L²} ‖Df‖_∞), the planar form
  double refinement_change = 0;  // max relative change of the three norms under halving the step
  int samples_per_width = 0;
};

namespace sobolev_detail {

struct Samples {
  std::vector<double> v, dv;
  double h = 0;
};

// Uniform samples with step scale/ppw. Compact profiles include both support ends
// (trapezoid weights); periodic ones cover one period (rectangle rule).
inline Samples sample(const Profile1D& prof, int ppw) {
  Samples s;
  const double lo = prof.lo(), hi = prof.hi();
  const double target = prof.scale() / ppw;
  const long m = std::max<long>(8, static_cast<long>(std::ceil((hi - lo) / target)));
  s.h = (hi - lo) / static_cast<double>(m);
  const long count = prof.periodic() ? m : m + 1;
  s.v.resize(static_cast<std::size_t>(count));
  s.dv.resize(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    auto [a, b] = prof.periodic() ? prof.eval_offset((static_cast<double>(i) - static_cast<double>(m) / 2) * s.h)
                                  : prof.eval(lo + static_cast<double>(i) * s.h);
    s.v[static_cast<std::size_t>(i)] = a;
    s.dv[static_cast<std::size_t>(i)] = b;
  }
  return s;
}

inline double l2(const Samples& s, bool periodic) {
  double acc = 0;
  for (std::size_t i = 0; i < s.v.size(); ++i) {
    const double w = (!periodic && (i == 0 || i + 1 == s.v.size())) ? 0.5 : 1.0;
    acc += w * s.v[i] * s.v[i];
  }
  return std::sqrt(acc * s.h);
}

inline double sup_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// max over (i, k) of a_i c_k + b_i d_k with a, b, c, d >= 0. The inner max over k is
// attained on the upper-right convex hull of {(c_k, d_k)}.
inline double max_bilinear(const std::vector<double>& a, const std::vector<double>& b,
                           const std::vector<double>& c, const std::vector<double>& d) {
  std::vector<std::pair<double, double>> pts(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) pts[k] = {c[k], d[k]};
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> hull;
  auto cross = [](const auto& o, const auto& p, const auto& q) {
    return (p.first - o.first) * (q.second - o.second) - (p.second - o.second) * (q.first - o.first);
  };
  for (const auto& pt : pts) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), pt) >= 0) hull.pop_back();
    hull.push_back(pt);
  }
  double best = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (const auto& h : hull) best = std::max(best, a[i] * h.first + b[i] * h.second);
  return best;
}

inline std::vector<double> squared(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * v[i];
  return out;
}

inline SobolevNorms norms(const SobolevProbe& f, int ppw, int oversample) {
  const Samples ps = sample(f.p, ppw), qs = sample(f.q, ppw);
  const Samples pf = sample(f.p, ppw * oversample), qf = sample(f.q, ppw * oversample);
  const double A = std::fabs(f.amplitude);
  SobolevNorms r;
  r.l2 = A * l2(ps, false) * l2(qs, f.q.periodic());
  r.linf = A * sup_abs(pf.v) * sup_abs(qf.v);
  r.dinf = A * std::sqrt(max_bilinear(squared(pf.dv), squared(pf.v), squared(qf.v), squared(qf.dv)));
  return r;
}

inline double rel_change(double a, double b) { return b != 0 ? std::fabs(a / b - 1) : 0.0; }

}  // namespace sobolev_detail

struct SobolevConfig {
  int samples_per_width = 40;
  int oversample = 4;           // sup norms on a grid this many times finer
  double refinement_tol = 0.01;
};

inline SobolevRatio sobolev_ratio(const SobolevProbe& f, const SobolevConfig& cfg = {}) {
  f.validate();
  if (f.amplitude == 0 || !std::isfinite(f.amplitude)) throw InvalidArgument("degenerate probe: f is identically zero");
  using namespace sobolev_detail;
  SobolevRatio r;
  int ppw = cfg.samples_per_width;
  SobolevNorms coarse = norms(f, ppw, cfg.oversample);
  SobolevNorms fine = norms(f, 2 * ppw, cfg.oversample);
  auto change = [&] {
    return std::max({rel_change(coarse.l2, fine.l2), rel_change(coarse.linf, fine.linf),
                     rel_change(coarse.dinf, fine.dinf)});
  };
  while (change() >= cfg.refinement_tol && ppw < 64 * cfg.samples_per_width) {
    ppw *= 2;
    coarse = fine;
    fine = norms(f, 2 * ppw, cfg.oversample);
  }
  if (!(fine.linf > 0) || !(fine.l2 > 0)) throw InvalidArgument("degenerate probe: f is identically zero");
  r.norms = fine;
  r.refinement_change = change();
  r.samples_per_width = 2 * ppw;
  r.ratio = fine.linf * fine.linf / (fine.l2 * fine.w1inf());
  r.gradient_ratio = fine.dinf > 0 ? fine.linf * fine.linf / (fine.l2 * fine.dinf) : 0.0;
  return r;
}

inline SobolevProbe scaled(SobolevProbe f, double lambda) {
  f.amplitude *= lambda;
  return f;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ProbeDistribution {
  double min_width = 0.05;
  double max_width = 0.5;
  int max_modes = 2;
  double max_frequency = 2;      // modulation frequency bound in cycles per unit t
  double max_modulation = 0.3;
};

// Random separable probe: spline in s, spline or periodic bump in t, widths log-uniform,
// random sign and magnitude, up to max_modes band-limited t-modulations.
inline SobolevProbe random_probe(SobolevDomain domain, long n, std::mt19937_64& rng,
                                 const ProbeDistribution& dist = {}) {
  auto uni = [&](double a, double b) { return a + (b - a) * unit_uniform(rng); };
  auto logw = [&] { return std::exp(uni(std::log(dist.min_width), std::log(dist.max_width))); };
  SobolevProbe f;
  f.domain = domain;
  f.n = n;
  f.amplitude = (unit_uniform(rng) < 0.5 ? -1 : 1) * std::exp(uni(std::log(0.5), std::log(2.0)));
  const double ws = logw();
  f.p = Profile1D::spline(is_half(domain) ? uni(-0.5 * ws, 1.5 * ws) : 0.0, ws);
  if (is_half(domain)) f.p.cutoff = 0;
  const double wt = logw();
  if (is_periodic(domain)) {
    const double period = static_cast<double>(n);
    f.q = Profile1D::periodic_bump(uni(0, period), wt / 2.6, period);
    const int modes = static_cast<int>(unit_uniform(rng) * (dist.max_modes + 1));
    for (int j = 0; j < modes; ++j) {
      ModulationMode m;
      m.m = static_cast<int>(std::lround(uni(0, dist.max_frequency) * period));
      m.amplitude = uni(-dist.max_modulation, dist.max_modulation);
      m.phase = uni(0, 2 * std::numbers::pi);
      f.q.modulation.push_back(m);
    }
  } else {
    f.q = Profile1D::spline(0.0, wt);
  }
  return f;
}

struct SobolevRow {
  long n = 1;
  int trials = 0;
  double max_ratio = 0;
  double mean_ratio = 0;
  double min_ratio = 0;
  int argmax_trial = -1;
  int violations = 0;          // ratios above the bound for the domain
  double max_refinement_change = 0;
};

struct SobolevTable {
  SobolevDomain domain = SobolevDomain::half_cylinder;
  double bound = 0;
  std::vector<SobolevRow> rows;
  double max_ratio = 0;
  double c = 0;                // max_ratio · 1.5, the empirical constant used downstream
  double spread = 0;           // (max − min)/max over the per-n maxima
  bool all_within_bound = true;
  bool period_independent = true;   // spread < 10%
  bool c_empirical = true;

  std::string csv() const {
    csv::Writer w({"domain", "n", "trials", "max_ratio", "mean_ratio", "min_ratio", "bound", "violations"});
    for (const auto& r : rows)
      w.row({to_string(domain), std::to_string(r.n), std::to_string(r.trials), csv::format_double(r.max_ratio),
             csv::format_double(r.mean_ratio), csv::format_double(r.min_ratio), csv::format_double(bound),
             std::to_string(r.violations)});
    return w.str();
  }
};

inline constexpr double kSobolevSafetyFactor = 1.5;
inline constexpr double kPeriodSpreadTol = 0.10;

// Trial i draws from a generator seeded by (seed, i) for every n, so the same shape is
// compared across periods and tables do not depend on the thread count.
inline SobolevTable estimate_sobolev_constant(SobolevDomain domain, const std::vector<long>& n_list,
                                              int trials, std::uint64_t seed,
                                              const ProbeDistribution& dist = {},
                                              const SobolevConfig& cfg = {}) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (n_list.empty()) throw InvalidArgument("empty period list");
  SobolevTable t;
  t.domain = domain;
  t.bound = is_periodic(domain) ? kCylinderSobolevBound : kPlanarSobolevBound;
  for (long n : n_list) {
    if (n < 1) throw InvalidArgument("periods must be >= 1");
    std::vector<SobolevRatio> res(static_cast<std::size_t>(trials));
    parallel_for(res.size(), [&](std::size_t i) {
      std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(i)};
      std::mt19937_64 rng(ss);
      res[i] = sobolev_ratio(random_probe(domain, n, rng, dist), cfg);
    });
    SobolevRow row;
    row.n = n;
    row.trials = trials;
    row.min_ratio = std::numeric_limits<double>::infinity();
    double sum = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
      // Planar domains are checked against the gradient form, which is what the bound controls.
      const double r = is_periodic(domain) ? res[i].ratio : res[i].gradient_ratio;
      if (r > row.max_ratio) {
        row.max_ratio = r;
        row.argmax_trial = static_cast<int>(i);
      }
      row.min_ratio = std::min(row.min_ratio, r);
      sum += r;
      if (r > t.bound) ++row.violations;
      row.max_refinement_change = std::max(row.max_refinement_change, res[i].refinement_change);
    }
    row.mean_ratio = sum / trials;
    t.all_within_bound = t.all_within_bound && row.violations == 0;
    t.rows.push_back(row);
  }
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& r : t.rows) {
    t.max_ratio = std::max(t.max_ratio, r.max_ratio);
    lo = std::min(lo, r.max_ratio);
  }
  t.spread = t.max_ratio > 0 ? (t.max_ratio - lo) / t.max_ratio : 0.0;
  t.period_independent = t.spread < kPeriodSpreadTol;
  t.c = t.max_ratio * kSobolevSafetyFactor;
  return t;
}

// The cut-off reduction from the cylinder to the plane, evaluated numerically. For a
// cylinder probe f of period n, g(x, y) = χ(y) f̄(x, y) on ℝ², χ = 1 on [0, n], support in
// [−1, n + 1], |χ'| <= 15/8.
struct CutoffChain {
  SobolevRatio cylinder;        // f on the cylinder
  SobolevNorms planar;          // g on ℝ²
  double planar_ratio = 0;      // ‖g‖²_∞ / (‖g‖_{L²} ‖Dg‖_∞)
  double l2_factor = 0;         // ‖g‖_{L²} / ‖f‖_{L²}, at most 3
  double derivative_factor = 0; // ‖Dg‖_∞ / ‖f‖_{W^{1,∞}}, at most 2
  double chi_slope = 0;         // sup |χ'| on the sample grid
  bool sup_preserved = false;   // ‖g‖_∞ = ‖f‖_∞
  bool planar_within_bound = false;
  bool chain_holds = false;     // cylinder ratio <= 6 · planar ratio
};

inline std::pair<double, double> cutoff_function(double y, double n) {
  auto ramp = [](double x) {
    return std::pair{x * x * x * (10 - 15 * x + 6 * x * x), 30 * x * x * (1 - x) * (1 - x)};
  };
  if (y <= -1 || y >= n + 1) return {0, 0};
  if (y < 0) return ramp(y + 1);
  if (y > n) {
    auto [v, d] = ramp(n + 1 - y);
    return {v, -d};
  }
  return {1, 0};
}

inline CutoffChain cutoff_chain(const SobolevProbe& f, const SobolevConfig& cfg = {}) {
  if (f.domain != SobolevDomain::cylinder) throw InvalidArgument("cut-off chain needs a full-cylinder probe");
  using namespace sobolev_detail;
  CutoffChain c;
  c.cylinder = sobolev_ratio(f, cfg);
  const double n = static_cast<double>(f.n);
  const int ppw = c.cylinder.samples_per_width;
  auto gsample = [&](int density) {
    Samples s;
    const double h = f.q.scale() / density;
    const long m = static_cast<long>(std::ceil((n + 2) / h));
    s.h = (n + 2) / static_cast<double>(m);
    double slope = 0;
    for (long i = 0; i <= m; ++i) {
      const double y = -1 + static_cast<double>(i) * s.h;
      auto [chi, dchi] = cutoff_function(y, n);
      auto [q, dq] = f.q.eval(y);
      s.v.push_back(chi * q);
      s.dv.push_back(dchi * q + chi * dq);
      slope = std::max(slope, std::fabs(dchi));
    }
    c.chi_slope = std::max(c.chi_slope, slope);
    return s;
  };
  const Samples ps = sample(f.p, ppw), pf = sample(f.p, ppw * cfg.oversample);
  const Samples gs = gsample(ppw), gf = gsample(ppw * cfg.oversample);
  const double A = std::fabs(f.amplitude);
  c.planar.l2 = A * l2(ps, false) * l2(gs, false);
  c.planar.linf = A * sup_abs(pf.v) * sup_abs(gf.v);
  c.planar.dinf = A * std::sqrt(max_bilinear(squared(pf.dv), squared(pf.v), squared(gf.v), squared(gf.dv)));
  c.planar_ratio = c.planar.linf * c.planar.linf / (c.planar.l2 * c.planar.dinf);
  c.l2_factor = c.planar.l2 / c.cylinder.norms.l2;
  c.derivative_factor = c.planar.dinf / c.cylinder.norms.w1inf();
  c.sup_preserved = std::fabs(c.planar.linf / c.cylinder.norms.linf - 1) < 1e-3;
  c.planar_within_bound = c.planar_ratio <= kPlanarSobolevBound;
  c.chain_holds = c.cylinder.ratio <= 6 * c.planar_ratio;
  return c;
}

}  // namespace pseudorot
