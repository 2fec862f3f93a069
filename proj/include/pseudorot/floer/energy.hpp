#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "pseudorot/floer/grid.hpp"

namespace pseudorot {

namespace floer_detail {

template <class Integrand>
double trapezoid(const CylinderGrid& g, Integrand&& f) {
  std::vector<double> row(g.rows());
  parallel_for(g.rows(), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    double acc = 0;
    for (int k = 0; k < g.Nt; ++k) acc += f(i, k);
    row[ii] = acc * stencil::row_weight(i, g.Ns);
  });
  double total = 0;
  for (double r : row) total += r;
  return total * g.hs() * g.ht();
}

}  // namespace floer_detail

// ∫∫ |∂ₛz|² + |∂ₜz − X_H(z)|² ds dt.
inline double floer_energy(const FloerSolution& sol, const Hamiltonian& H) {
  return floer_detail::trapezoid(sol.grid, [&](int i, int k) {
    const cplx X = vector_field_c(H, sol.grid.t(k), sol(i, k));
    return std::norm(ds_at(sol, i, k)) + std::norm(dt_at(sol, i, k) - X);
  });
}

inline double l2_s_derivative(const FloerSolution& sol) {
  return floer_detail::trapezoid(sol.grid, [&](int i, int k) { return std::norm(ds_at(sol, i, k)); });
}

inline double sup_norm_s_derivative(const FloerSolution& sol) {
  double m = 0;
  for (int i = 0; i <= sol.grid.Ns; ++i)
    for (int k = 0; k < sol.grid.Nt; ++k) m = std::max(m, std::abs(ds_at(sol, i, k)));
  return m;
}

// ‖f‖_∞ + ‖Df‖_∞ for f = ∂ₛz, with Df from the same difference stencils.
inline double w1inf_norm_s_derivative(const FloerSolution& sol) {
  const CylinderGrid& g = sol.grid;
  FloerSolution f = sol;
  for (int i = 0; i <= g.Ns; ++i)
    for (int k = 0; k < g.Nt; ++k) f(i, k) = ds_at(sol, i, k);
  double sup = 0, dsup = 0;
  for (int i = 0; i <= g.Ns; ++i)
    for (int k = 0; k < g.Nt; ++k) {
      sup = std::max(sup, std::abs(f(i, k)));
      const double d = std::sqrt(std::norm(ds_at(f, i, k)) + std::norm(dt_at(f, i, k)));
      dsup = std::max(dsup, d);
    }
  return sup + dsup;
}

struct InterpolationCheck {
  double sup_norm;      // A = ‖∂ₛz‖_∞
  double l2_norm;       // ‖∂ₛz‖_{L²}
  double w1inf_norm;    // ‖∂ₛz‖_{W^{1,∞}}
  double ratio;         // A² / (‖·‖_{L²} ‖·‖_{W^{1,∞}})
  double c;
  double b;
  bool holds;           // A² ≤ c ‖·‖_{L²} ‖·‖_{W^{1,∞}}
  double M;             // (cb)^{1/2} π^{1/4}
  bool b_empirical;
};

// b <= 0 means: use the measured W^{1,∞} norm of ∂ₛz.
inline InterpolationCheck interpolation_bound_check(const FloerSolution& sol, double c,
                                                    double b = 0) {
  InterpolationCheck r{};
  r.sup_norm = sup_norm_s_derivative(sol);
  r.l2_norm = std::sqrt(l2_s_derivative(sol));
  r.w1inf_norm = w1inf_norm_s_derivative(sol);
  const double denom = r.l2_norm * r.w1inf_norm;
  r.ratio = denom > 0 ? r.sup_norm * r.sup_norm / denom : 0.0;
  r.c = c;
  r.b_empirical = !(b > 0);
  r.b = r.b_empirical ? r.w1inf_norm : b;
  r.holds = r.sup_norm * r.sup_norm <= c * denom;
  r.M = std::sqrt(c * r.b) * std::pow(kPi, 0.25);
  return r;
}

struct EnergyReport {
  double floer_energy;
  double l2_s_derivative;
  double e_omega;
  double e_lambda;       // n, from the correspondence with pseudoholomorphic curves
  double target_lo;      // π·{nα} enclosure
  double target_hi;
  double relative_error; // of l2_s_derivative against the target midpoint
};

// E_ω = ∫∫ u*(dx∧dy + dτ∧dH) for u = (s + s₀, t + t₀, z). With τ = t the pull-back is
// ω₀(∂ₛz, ∂ₜz) − dH(∂ₛz) = ω₀(∂ₛz, ∂ₜz − X_H(z)), which has no cancellation to lose.
inline double omega_energy(const FloerSolution& sol, const Hamiltonian& H) {
  return floer_detail::trapezoid(sol.grid, [&](int i, int k) {
    const cplx X = vector_field_c(H, sol.grid.t(k), sol(i, k));
    return (std::conj(ds_at(sol, i, k)) * (dt_at(sol, i, k) - X)).imag();
  });
}

inline EnergyReport energy_report(const FloerSolution& sol, const Hamiltonian& H,
                                  const FloerTarget& tg) {
  EnergyReport r{};
  r.floer_energy = floer_energy(sol, H);
  r.l2_s_derivative = l2_s_derivative(sol);
  r.e_omega = omega_energy(sol, H);
  r.e_lambda = static_cast<double>(sol.grid.n);
  r.target_lo = kPi * tg.frac_lo;
  r.target_hi = kPi * tg.frac_hi;
  r.relative_error = std::fabs(r.l2_s_derivative / tg.energy_target() - 1);
  return r;
}

// |l2 − π{nα}| split into the exact truncation loss of the rigid profile and the rest,
// normalized by hs² + ht².
struct EnergyIdentity {
  double l2;
  double target;
  double tail_term;
  double quadrature_term;
  double quadrature_constant;
};

inline EnergyIdentity energy_identity(const FloerSolution& sol, const FloerTarget& tg) {
  EnergyIdentity e{};
  e.l2 = l2_s_derivative(sol);
  e.target = tg.energy_target();
  e.tail_term = e.target - rigid_l2_s_derivative_exact(tg, sol.grid.S);
  e.quadrature_term = std::fabs(e.l2 - e.target) - e.tail_term;
  const double h2 = sol.grid.hs() * sol.grid.hs() + sol.grid.ht() * sol.grid.ht();
  e.quadrature_constant = std::max(0.0, e.quadrature_term) / h2;
  return e;
}

struct VectorFieldSample {
  Vec2 point;
  Vec2 value;      // ∂ₜz at the node
  double t_node;   // cylinder time of the source column
  int solution;
  int i;
  int k;
};

struct InducedVectorField {
  double t = 0;
  std::vector<VectorFieldSample> samples;
  double max_deviation = 0;      // max |Xₙᵗ − X_{Hᵗ}| over samples
  double max_deviation_boundary = 0;
  double relation_error = 0;     // max |∂ₜz − X_H − i∂ₛz| over samples
};

// Samples (z(s,t+m), ∂ₜz(s,t+m)) for m = 0..n−1 at the column nearest each time.
inline InducedVectorField induced_vector_field(const std::vector<FloerSolution>& sols,
                                               const Hamiltonian& H, double t) {
  if (sols.empty()) throw InvalidArgument("empty solution family");
  InducedVectorField out;
  out.t = t - std::floor(t);
  for (std::size_t si = 0; si < sols.size(); ++si) {
    const FloerSolution& sol = sols[si];
    const CylinderGrid& g = sol.grid;
    for (long m = 0; m < g.n; ++m) {
      const double tt = out.t + static_cast<double>(m);
      const int k = static_cast<int>(std::lround(tt / g.ht())) % g.Nt;
      for (int i = 0; i <= g.Ns; ++i) {
        const cplx z = sol(i, k), v = dt_at(sol, i, k);
        const cplx X = vector_field_c(H, g.t(k), z);
        const double dev = std::abs(v - X);
        out.max_deviation = std::max(out.max_deviation, dev);
        if (i == 0) out.max_deviation_boundary = std::max(out.max_deviation_boundary, dev);
        out.relation_error = std::max(out.relation_error, std::abs(v - X - cplx(0, 1) * ds_at(sol, i, k)));
        out.samples.push_back({Vec2(z.real(), z.imag()), Vec2(v.real(), v.imag()), g.t(k),
                               static_cast<int>(si), i, k});
      }
    }
  }
  return out;
}

struct ProbeCoverage {
  Vec2 probe;
  double distance;    // to the nearest image node
  double threshold;   // local image spacing at that node
  bool covered;
  int solution;
  int i;
  int k;
};

struct FillingReport {
  std::vector<ProbeCoverage> probes;
  double covered_fraction = 0;
  double inner_radius = 0;   // smallest far-end radius max|z(S,·)| across the family
};

inline FillingReport filling_check(const std::vector<FloerSolution>& sols,
                                   const std::vector<Vec2>& probes) {
  if (sols.empty()) throw InvalidArgument("empty solution family");
  FillingReport rep;
  rep.inner_radius = std::numeric_limits<double>::infinity();
  for (const auto& s : sols) rep.inner_radius = std::min(rep.inner_radius, max_abs_z_row(s, s.grid.Ns));
  for (const Vec2& p : probes)
    if (p.norm() < 1e-12) throw InvalidArgument("filling probes must exclude the origin");
  rep.probes.resize(probes.size());
  parallel_for(probes.size(), [&](std::size_t pi) {
    const cplx p(probes[pi].x(), probes[pi].y());
    ProbeCoverage best{probes[pi], std::numeric_limits<double>::infinity(), 0, false, -1, -1, -1};
    for (std::size_t si = 0; si < sols.size(); ++si) {
      const FloerSolution& s = sols[si];
      for (int i = 0; i <= s.grid.Ns; ++i)
        for (int k = 0; k < s.grid.Nt; ++k) {
          const double d = std::abs(s(i, k) - p);
          if (d < best.distance) {
            best.distance = d;
            best.solution = static_cast<int>(si);
            best.i = i;
            best.k = k;
          }
        }
    }
    const FloerSolution& s = sols[static_cast<std::size_t>(best.solution)];
    const cplx c = s(best.i, best.k);
    double spacing = 0;
    static constexpr int kNeighbors[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& [di, dk] : kNeighbors) {
      const int i2 = best.i + di;
      if (i2 < 0 || i2 > s.grid.Ns) continue;
      const int k2 = (best.k + dk + s.grid.Nt) % s.grid.Nt;
      spacing = std::max(spacing, std::abs(s(i2, k2) - c));
    }
    best.threshold = spacing;
    best.covered = best.distance <= spacing;
    rep.probes[pi] = best;
  });
  std::size_t n = 0;
  for (const auto& c : rep.probes) n += c.covered ? 1 : 0;
  rep.covered_fraction = probes.empty() ? 1.0 : static_cast<double>(n) / static_cast<double>(probes.size());
  return rep;
}

struct MappingTorusLift {
  double s0 = 0;
  double t0 = 0;
  double cr_residual_max = 0;   // max over nodes of |∂ₛu + J_n(u)∂ₜu|
  long tau_degree = 1;
  long z_degree = 0;
  double e_omega = 0;
  double e_lambda = 0;
  bool e_lambda_derived = true; // n from the energy correspondence, not the supremum formula
  double floer_energy = 0;
};

// u(s, t) = (s + s₀, t + t₀, z(s, t)). The ℝ and τ components of the Cauchy–Riemann
// relation hold exactly; the disk component is the Floer residual with X_H taken at the
// time of z.
inline MappingTorusLift lift_to_mapping_torus(const FloerSolution& sol, const Hamiltonian& H,
                                              double s0, double t0) {
  MappingTorusLift L;
  L.s0 = s0;
  L.t0 = t0;
  L.cr_residual_max = residual(sol, H).max;
  L.tau_degree = 1;
  L.z_degree = boundary_winding(sol);
  L.e_omega = omega_energy(sol, H);
  L.e_lambda = static_cast<double>(sol.grid.n);
  L.floer_energy = floer_energy(sol, H);
  return L;
}

}  // namespace pseudorot
