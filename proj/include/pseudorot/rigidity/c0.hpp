#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "pseudorot/diophantine/bignum.hpp"
#include "pseudorot/floer/energy.hpp"
#include "pseudorot/hamiltonian/flow.hpp"

namespace pseudorot {

// Polar probe grid: rings r = i/R (i = 1..R), A angles per ring, the origin, and a
// boundary circle with 4A points.
struct ProbeGrid {
  std::vector<Vec2> points;
  double h = 0;
  int rings = 0;
  int angles = 0;
  double covering_radius = 0;   // every point of D lies this close to some probe

  static ProbeGrid polar(double h) {
    if (!(h > 0) || h > 1) throw InvalidArgument("probe spacing must lie in (0, 1]");
    ProbeGrid g;
    g.h = h;
    g.rings = static_cast<int>(std::ceil(1 / h));
    g.angles = std::max(8, static_cast<int>(std::ceil(2 * kPi / h)));
    g.points.emplace_back(0, 0);
    for (int i = 1; i <= g.rings; ++i) {
      const double r = static_cast<double>(i) / g.rings;
      for (int a = 0; a < g.angles; ++a) {
        const double th = 2 * kPi * a / g.angles;
        g.points.emplace_back(r * std::cos(th), r * std::sin(th));
      }
    }
    const int nb = 4 * g.angles;
    for (int a = 0; a < nb; ++a) {
      const double th = 2 * kPi * (a + 0.5) / nb;
      g.points.emplace_back(std::cos(th), std::sin(th));
    }
    g.covering_radius = std::hypot(0.5 / g.rings, kPi / g.angles);
    return g;
  }
};

struct C0Measurement {
  long n = 0;
  double measured = 0;          // max over probes of |φⁿ(p) − p|
  Vec2 argmax{0, 0};
  // (e^{B|n|} + 1)·δ with δ the covering radius: sup over D is at most measured + inflation.
  // Integration error is not included. Often astronomically large.
  double inflation = 0;
  double log_inflation = 0;
  double B = 0;
};

// d_C⁰(φⁿ, id) on the probe grid for every n in ns (each >= 0), in one pass per probe.
inline std::vector<C0Measurement> c0_distances(const Hamiltonian& H, std::vector<long> ns,
                                               const ProbeGrid& grid, double B,
                                               const FlowConfig& cfg = {}) {
  for (long n : ns)
    if (n < 0) throw InvalidArgument("iterate counts must be >= 0");
  std::vector<long> sorted = ns;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t P = grid.points.size(), K = sorted.size();
  std::vector<double> disp(P * K, 0.0);
  parallel_for(P, [&](std::size_t i) {
    const Vec2 p = grid.points[i];
    Vec2 q = p;
    long at = 0;
    for (std::size_t j = 0; j < K; ++j) {
      if (sorted[j] > at) {
        q = flow_to(H, q, static_cast<double>(at), static_cast<double>(sorted[j]), cfg);
        at = sorted[j];
      }
      disp[i * K + j] = std::min(2.0, (q - p).norm());
    }
  });
  std::vector<C0Measurement> out;
  for (long n : ns) {
    const std::size_t j = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), n) - sorted.begin());
    C0Measurement m;
    m.n = n;
    m.B = B;
    for (std::size_t i = 0; i < P; ++i)
      if (disp[i * K + j] > m.measured) {
        m.measured = disp[i * K + j];
        m.argmax = grid.points[i];
      }
    m.log_inflation = std::log(grid.covering_radius) + (n == 0 ? std::log(2.0) : B * static_cast<double>(n) + std::log1p(std::exp(-B * static_cast<double>(n))));
    m.inflation = n == 0 ? 0.0 : std::exp(m.log_inflation);
    if (n == 0) m.log_inflation = -std::numeric_limits<double>::infinity();
    out.push_back(m);
  }
  return out;
}

inline C0Measurement c0_distance_to_identity(const Hamiltonian& H, long n, const ProbeGrid& grid,
                                             double B, const FlowConfig& cfg = {}) {
  return c0_distances(H, {n}, grid, B, cfg).front();
}

struct BoundValue {
  double value = 0;
  double log_value = -std::numeric_limits<double>::infinity();
  bool vacuous = false;   // value > 2, the diameter of D
};

inline BoundValue bound_from_log(double log_value) {
  BoundValue b;
  b.log_value = log_value;
  b.value = std::exp(log_value);
  b.vacuous = log_value > std::log(2.0);
  return b;
}

// M·{nα}^{1/4}·n·e^{Bn} evaluated on the log scale.
inline BoundValue theoretical_bound(double M, double B, double frac_hi, double n) {
  if (!(M >= 0) || !(B >= 0) || !(frac_hi >= 0) || !(n >= 0))
    throw InvalidArgument("bound constants must be nonnegative");
  if (M == 0 || frac_hi == 0 || n == 0) return {};
  return bound_from_log(std::log(M) + 0.25 * std::log(frac_hi) + std::log(n) + B * n);
}

// Same, with the upper end of a certified enclosure of {nα} that may lie far below
// the double range.
inline BoundValue theoretical_bound(double M, double B, const RationalInterval& frac, const Integer& n) {
  if (!(M >= 0) || !(B >= 0) || frac.hi < 0 || n < 0) throw InvalidArgument("bound constants must be nonnegative");
  if (M == 0 || frac.hi == 0 || n == 0) return {};
  const double nd = to_double(n);
  return bound_from_log(std::log(M) + 0.25 * log_abs(frac.hi) + log_abs(Rational(n)) + B * nd);
}

// ln of M n^{1/4} e^{−jn/4} n e^{Bn}, the bound once {nα} <= n e^{−jn} is substituted.
inline double log_rigidity_bound(double M, double B, double n, double j) {
  return std::log(M) + 0.25 * std::log(n) - j * n / 4 + std::log(n) + B * n;
}

struct GronwallComparison {
  int row = 0;
  int column = 0;
  Vec2 p{0, 0};
  double A = 0;
  double B = 0;
  std::vector<double> t;     // elapsed time τ
  std::vector<double> lhs;   // |z(s, t_k + τ) − φ^{t_k → t_k+τ}(p)|
  std::vector<double> rhs;   // A τ e^{Bτ}
  int violations = 0;
  double max_ratio = 0;      // max lhs/rhs over τ > 0
};

// Compares the row through node (i, k) with the flow of its starting point over one
// full period of the cylinder.
inline GronwallComparison gronwall_compare_node(const Hamiltonian& H, const FloerSolution& sol,
                                                int i, int k, double A, double B,
                                                const FlowConfig& cfg = {}) {
  const CylinderGrid& g = sol.grid;
  if (i < 0 || i > g.Ns || k < 0 || k >= g.Nt) throw InvalidArgument("node outside the grid");
  GronwallComparison c;
  c.row = i;
  c.column = k;
  c.A = A;
  c.B = B;
  const cplx z0 = sol(i, k);
  c.p = Vec2(z0.real(), z0.imag());
  Vec2 q = c.p;
  const double t0 = g.t(k);
  for (int m = 0; m <= g.Nt; ++m) {
    const double tau = g.ht() * m;
    if (m > 0) q = flow_to(H, q, t0 + g.ht() * (m - 1), t0 + tau, cfg);
    const cplx z = sol(i, (k + m) % g.Nt);
    const double l = std::hypot(z.real() - q.x(), z.imag() - q.y());
    const double r = A * tau * std::exp(B * tau);
    c.t.push_back(tau);
    c.lhs.push_back(l);
    c.rhs.push_back(r);
    if (l > r) ++c.violations;
    if (m > 0 && r > 0) c.max_ratio = std::max(c.max_ratio, l / r);
  }
  return c;
}

// Locates p among the nodes of sol and runs the comparison from there.
inline GronwallComparison gronwall_compare(const Hamiltonian& H, const FloerSolution& sol,
                                           const Vec2& p, double B, const FlowConfig& cfg = {},
                                           double match_tol = 1e-12) {
  const CylinderGrid& g = sol.grid;
  for (int i = 0; i <= g.Ns; ++i)
    for (int k = 0; k < g.Nt; ++k)
      if (std::abs(sol(i, k) - cplx(p.x(), p.y())) <= match_tol)
        return gronwall_compare_node(H, sol, i, k, sup_norm_s_derivative(sol), B, cfg);
  throw InvalidArgument("probe is not a node of the solution image");
}

struct GronwallSweep {
  int rows = 0;
  long nodes = 0;
  long violations = 0;
  double max_ratio = 0;
  int worst_row = -1;
  double A = 0;
  double B = 0;
};

// Every row, started at t = 0.
inline GronwallSweep gronwall_sweep(const Hamiltonian& H, const FloerSolution& sol, double B,
                                    const FlowConfig& cfg = {}) {
  GronwallSweep s;
  s.A = sup_norm_s_derivative(sol);
  s.B = B;
  s.rows = sol.grid.Ns + 1;
  std::vector<GronwallComparison> rows(static_cast<std::size_t>(s.rows));
  parallel_for(rows.size(), [&](std::size_t i) {
    rows[i] = gronwall_compare_node(H, sol, static_cast<int>(i), 0, s.A, B, cfg);
  });
  for (const auto& c : rows) {
    s.nodes += static_cast<long>(c.t.size());
    s.violations += c.violations;
    if (c.max_ratio > s.max_ratio) {
      s.max_ratio = c.max_ratio;
      s.worst_row = c.row;
    }
  }
  return s;
}

}  // namespace pseudorot
