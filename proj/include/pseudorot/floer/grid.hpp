#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pseudorot/core/errors.hpp"
#include "pseudorot/core/parallel.hpp"
#include "pseudorot/diophantine/continued_fraction.hpp"
#include "pseudorot/hamiltonian/hamiltonian.hpp"

namespace pseudorot {

using cplx = std::complex<double>;

// Truncated half-cylinder [0, S] × ℝ/nℤ. Rows i = 0..Ns in s, columns k = 0..Nt−1 in t.
struct CylinderGrid {
  long n = 1;
  double S = 1;
  int Ns = 16;
  int Nt = 32;

  double hs() const { return S / Ns; }
  double ht() const { return static_cast<double>(n) / Nt; }
  double s(int i) const { return S * i / Ns; }
  double t(int k) const { return static_cast<double>(n) * k / Nt; }
  std::size_t rows() const { return static_cast<std::size_t>(Ns) + 1; }
  std::size_t nodes() const { return rows() * static_cast<std::size_t>(Nt); }
  std::size_t at(int i, int k) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(Nt) + static_cast<std::size_t>(k);
  }

  void validate() const {
    if (n < 1) throw InvalidArgument("grid period n must be >= 1");
    if (!(S > 0) || !std::isfinite(S)) throw InvalidArgument("grid length S must be positive");
    if (Ns < 4) throw InvalidArgument("need Ns >= 4");
    if (Nt < 8 || Nt % 2 != 0) throw InvalidArgument("need even Nt >= 8");
  }
};

// Degree ⌊nα⌋ and an enclosure of {nα}, both derived from the continued fraction.
struct FloerTarget {
  long n = 1;
  long degree = 0;
  double frac_lo = 0;
  double frac_hi = 0;
  FractionalPartEnclosure frac;

  double frac_mid() const { return 0.5 * (frac_lo + frac_hi); }
  double energy_target() const { return kPi * frac_mid(); }
};

inline FloerTarget floer_target(const ContinuedFraction& cf, long n) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  FractionalPartEnclosure f = fractional_part_multiple(cf, Integer(n));
  ValueEnclosure v = value_enclosure(cf);
  Rational lo = v.range.lo * n;
  FloerTarget t;
  t.n = n;
  t.degree = static_cast<long>(floor(lo));
  t.frac_lo = to_double(f.lower);
  t.frac_hi = to_double(f.upper);
  t.frac = std::move(f);
  if (t.frac_lo <= 0)
    throw InsufficientPrecision("{n alpha} enclosure reaches 0; the decay rate is not certified",
                                cf.depth() + 1);
  return t;
}

// S with e^{−2π{nα}S/n} = tail_tol, capped at S_max. Returns the tail level actually reached.
struct Truncation {
  double S;
  double tail_level;
  bool capped;
};

inline Truncation choose_truncation(const FloerTarget& tg, double tail_tol, double S_max) {
  const double rate = 2 * kPi * tg.frac_lo / static_cast<double>(tg.n);
  double S = std::log(1.0 / tail_tol) / rate;
  bool capped = false;
  if (!(S <= S_max)) {
    S = S_max;
    capped = true;
  }
  return {S, std::exp(-rate * S), capped};
}

struct FloerSolution {
  CylinderGrid grid;
  std::vector<cplx> z;          // row-major, (Ns+1)·Nt
  std::vector<double> theta;    // lifted boundary angles, z(0, t_k) = e^{iθ_k}
  long degree = 0;
  double residual_norm = 0;     // discrete L² of the Floer residual
  double residual_max = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<int> linear_iterations;   // PCG iterations per outer step
  int fallback_steps = 0;               // gradient steps taken instead of Gauss–Newton
  std::string diagnostic;
  int t_order = 4;
  double penalty = 0;
  double tail_level = 0;        // max |z(S, ·)|

  const cplx& operator()(int i, int k) const { return z[grid.at(i, k)]; }
  cplx& operator()(int i, int k) { return z[grid.at(i, k)]; }
};

inline double max_abs_z_row(const FloerSolution& sol, int row) {
  double m = 0;
  for (int k = 0; k < sol.grid.Nt; ++k) m = std::max(m, std::abs(sol(row, k)));
  return m;
}

// Winding number of the loop k ↦ z(0, t_k), from wrapped angle increments.
inline long boundary_winding(const FloerSolution& sol) {
  const int Nt = sol.grid.Nt;
  double total = 0;
  for (int k = 0; k < Nt; ++k) {
    cplx a = sol(0, k), b = sol(0, (k + 1) % Nt);
    total += std::arg(b / a);
  }
  return std::lround(total / (2 * kPi));
}

namespace stencil {

// Centered periodic first derivative in t, order 2 or 4.
inline cplx dt(const cplx* row, int k, int Nt, double ht, int order) {
  auto w = [&](int j) { return row[((k + j) % Nt + Nt) % Nt]; };
  if (order == 2) return (w(1) - w(-1)) / (2 * ht);
  return (8.0 * (w(1) - w(-1)) - (w(2) - w(-2))) / (12 * ht);
}

// s-derivative weights at row i: centered inside, one-sided second order at the ends.
struct SWeights {
  int first;        // first row index used
  double c[3];
};

inline SWeights ds_weights(int i, int Ns, double hs) {
  const double q = 1.0 / (2 * hs);
  if (i == 0) return {0, {-3 * q, 4 * q, -q}};
  if (i == Ns) return {Ns - 2, {q, -4 * q, 3 * q}};
  return {i - 1, {-q, 0, q}};
}

// Trapezoid weight in s.
inline double row_weight(int i, int Ns) { return (i == 0 || i == Ns) ? 0.5 : 1.0; }

}  // namespace stencil

inline cplx ds_at(const FloerSolution& sol, int i, int k) {
  auto w = stencil::ds_weights(i, sol.grid.Ns, sol.grid.hs());
  return w.c[0] * sol(w.first, k) + w.c[1] * sol(w.first + 1, k) + w.c[2] * sol(w.first + 2, k);
}

inline cplx dt_at(const FloerSolution& sol, int i, int k) {
  return stencil::dt(&sol.z[sol.grid.at(i, 0)], k, sol.grid.Nt, sol.grid.ht(), sol.t_order);
}

inline cplx vector_field_c(const Hamiltonian& H, double t, const cplx& z) {
  Vec2 v = H.vector_field(t, Vec2(z.real(), z.imag()));
  return {v.x(), v.y()};
}

struct ResidualField {
  std::vector<cplx> F;   // nodewise D_s z + i(D_t z − X_H(z))
  double l2 = 0;
  double max = 0;
};

inline ResidualField residual(const FloerSolution& sol, const Hamiltonian& H) {
  const CylinderGrid& g = sol.grid;
  if (sol.z.size() != g.nodes()) throw InvalidArgument("solution size does not match grid");
  ResidualField r;
  r.F.resize(g.nodes());
  std::vector<double> row_sq(g.rows()), row_max(g.rows());
  parallel_for(g.rows(), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    double sq = 0, mx = 0;
    for (int k = 0; k < g.Nt; ++k) {
      cplx X = vector_field_c(H, g.t(k), sol(i, k));
      cplx F = ds_at(sol, i, k) + cplx(0, 1) * (dt_at(sol, i, k) - X);
      r.F[g.at(i, k)] = F;
      sq += std::norm(F);
      mx = std::max(mx, std::abs(F));
    }
    row_sq[ii] = sq * stencil::row_weight(i, g.Ns);
    row_max[ii] = mx;
  });
  double total = 0;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    total += row_sq[i];
    r.max = std::max(r.max, row_max[i]);
  }
  r.l2 = std::sqrt(total * g.hs() * g.ht());
  return r;
}

// z(s,t) = e^{−2π{nα}s/n} e^{i(2π⌊nα⌋t/n + θ₀)}, the exact solution for H = πα|z|².
inline FloerSolution rigid_rotation_exact_solution(const FloerTarget& tg, double theta0,
                                                   const CylinderGrid& grid, int t_order = 4) {
  grid.validate();
  if (grid.n != tg.n) throw InvalidArgument("grid period differs from target n");
  FloerSolution sol;
  sol.grid = grid;
  sol.degree = tg.degree;
  sol.t_order = t_order;
  sol.z.resize(grid.nodes());
  sol.theta.resize(static_cast<std::size_t>(grid.Nt));
  const double rate = 2 * kPi * tg.frac_mid() / static_cast<double>(tg.n);
  const double omega = 2 * kPi * static_cast<double>(tg.degree) / static_cast<double>(tg.n);
  for (int k = 0; k < grid.Nt; ++k) sol.theta[static_cast<std::size_t>(k)] = omega * grid.t(k) + theta0;
  for (int i = 0; i <= grid.Ns; ++i) {
    const double r = std::exp(-rate * grid.s(i));
    for (int k = 0; k < grid.Nt; ++k) sol(i, k) = std::polar(i == 0 ? 1.0 : r, sol.theta[static_cast<std::size_t>(k)]);
  }
  sol.tail_level = std::exp(-rate * grid.S);
  return sol;
}

// Closed-form ‖∂ₛz‖² of the oracle on [0, S]: π{nα}(1 − e^{−4π{nα}S/n}).
inline double rigid_l2_s_derivative_exact(const FloerTarget& tg, double S) {
  const double rate = 2 * kPi * tg.frac_mid() / static_cast<double>(tg.n);
  return kPi * tg.frac_mid() * (1 - std::exp(-2 * rate * S));
}

}  // namespace pseudorot
