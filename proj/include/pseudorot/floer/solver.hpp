#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "pseudorot/floer/grid.hpp"

namespace pseudorot {

struct FloerConfig {
  int max_iterations = 40;
  double residual_tol = 1e-3;    // on the discrete L² residual
  double step_tol = 1e-10;       // max-norm of an accepted Gauss–Newton step
  double penalty = 0.05;         // far-end weight μ in μ²·ht·Σ|z(S,t_k)|²
  int t_order = 4;
  int pcg_max_iterations = 300;
  double pcg_tol = 1e-9;
  double lm_initial = 1e-10;     // relative to the typical diagonal of JᵀJ
  double tail_tol = 1e-4;
  double S_max = 2000;
};

namespace floer_detail {

struct Layout {
  int Ns = 0, Nt = 0;
  std::size_t zsize() const { return 2 * static_cast<std::size_t>(Ns) * static_cast<std::size_t>(Nt); }
  std::size_t size() const { return zsize() + static_cast<std::size_t>(Nt); }
  std::size_t zi(int i, int k) const {
    return 2 * (static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(Nt) + static_cast<std::size_t>(k));
  }
  std::size_t ti(int k) const { return zsize() + static_cast<std::size_t>(k); }
};

// Jacobian of the weighted residual r = (√W_i F_ik, μ√ht z_{Ns,k}) with respect to
// the interior nodes (i ≥ 1) and the boundary angles θ_k.
class Linearization {
 public:
  Linearization(const FloerSolution& sol, const Hamiltonian& H, double penalty)
      : g_(sol.grid), order_(sol.t_order), lay_{sol.grid.Ns, sol.grid.Nt} {
    const std::size_t N = g_.nodes();
    hxx_.resize(N);
    hxy_.resize(N);
    hyy_.resize(N);
    parallel_for(g_.rows(), [&](std::size_t ii) {
      const int i = static_cast<int>(ii);
      for (int k = 0; k < g_.Nt; ++k) {
        const cplx z = sol(i, k);
        Mat2 h = H.hessian(g_.t(k), z.real(), z.imag());
        const std::size_t a = g_.at(i, k);
        hxx_[a] = h(0, 0);
        hxy_[a] = h(0, 1);
        hyy_[a] = h(1, 1);
      }
    });
    eith_.resize(static_cast<std::size_t>(g_.Nt));
    for (int k = 0; k < g_.Nt; ++k) eith_[static_cast<std::size_t>(k)] = std::polar(1.0, sol.theta[static_cast<std::size_t>(k)]);
    sw_.resize(g_.rows());
    for (int i = 0; i <= g_.Ns; ++i)
      sw_[static_cast<std::size_t>(i)] = std::sqrt(stencil::row_weight(i, g_.Ns) * g_.hs() * g_.ht());
    pw_ = penalty * std::sqrt(g_.ht());
  }

  const CylinderGrid& grid() const { return g_; }
  const Layout& layout() const { return lay_; }
  int t_order() const { return order_; }
  double row_scale(int i) const { return sw_[static_cast<std::size_t>(i)]; }
  double penalty_scale() const { return pw_; }

  // Mean over k of the Hessian trace / 2 on row i.
  double row_coefficient(int i) const {
    double acc = 0;
    for (int k = 0; k < g_.Nt; ++k) {
      const std::size_t a = g_.at(i, k);
      acc += 0.5 * (hxx_[a] + hyy_[a]);
    }
    return acc / g_.Nt;
  }

  std::vector<cplx> apply(const Eigen::VectorXd& x) const {
    const int Ns = g_.Ns, Nt = g_.Nt;
    std::vector<cplx> dz(g_.nodes());
    for (int k = 0; k < Nt; ++k)
      dz[g_.at(0, k)] = cplx(0, 1) * eith_[static_cast<std::size_t>(k)] * x[static_cast<Eigen::Index>(lay_.ti(k))];
    for (int i = 1; i <= Ns; ++i)
      for (int k = 0; k < Nt; ++k) {
        const std::size_t j = lay_.zi(i, k);
        dz[g_.at(i, k)] = cplx(x[static_cast<Eigen::Index>(j)], x[static_cast<Eigen::Index>(j + 1)]);
      }
    std::vector<cplx> out(g_.nodes() + static_cast<std::size_t>(Nt));
    const double hs = g_.hs(), ht = g_.ht();
    parallel_for(g_.rows(), [&](std::size_t ii) {
      const int i = static_cast<int>(ii);
      auto w = stencil::ds_weights(i, Ns, hs);
      const cplx* row = &dz[g_.at(i, 0)];
      for (int k = 0; k < Nt; ++k) {
        const std::size_t a = g_.at(i, k);
        cplx v = w.c[0] * dz[g_.at(w.first, k)] + w.c[1] * dz[g_.at(w.first + 1, k)] +
                 w.c[2] * dz[g_.at(w.first + 2, k)];
        v += cplx(0, 1) * stencil::dt(row, k, Nt, ht, order_);
        const cplx d = dz[a];
        v += cplx(hxx_[a] * d.real() + hxy_[a] * d.imag(), hxy_[a] * d.real() + hyy_[a] * d.imag());
        out[a] = sw_[ii] * v;
      }
    });
    for (int k = 0; k < Nt; ++k) out[g_.nodes() + static_cast<std::size_t>(k)] = pw_ * dz[g_.at(Ns, k)];
    return out;
  }

  Eigen::VectorXd apply_transpose(const std::vector<cplx>& r) const {
    const int Ns = g_.Ns, Nt = g_.Nt;
    const double hs = g_.hs(), ht = g_.ht();
    std::vector<cplx> q(g_.nodes()), acc(g_.nodes(), cplx(0, 0));
    for (int i = 0; i <= Ns; ++i)
      for (int k = 0; k < Nt; ++k) q[g_.at(i, k)] = sw_[static_cast<std::size_t>(i)] * r[g_.at(i, k)];
    // i·D_t and the Hessian are self-adjoint; D_s is transposed row by row.
    parallel_for(g_.rows(), [&](std::size_t ii) {
      const int i = static_cast<int>(ii);
      const cplx* row = &q[g_.at(i, 0)];
      for (int k = 0; k < Nt; ++k) {
        const std::size_t a = g_.at(i, k);
        const cplx d = q[a];
        acc[a] += cplx(0, 1) * stencil::dt(row, k, Nt, ht, order_) +
                  cplx(hxx_[a] * d.real() + hxy_[a] * d.imag(), hxy_[a] * d.real() + hyy_[a] * d.imag());
      }
    });
    for (int i = 0; i <= Ns; ++i) {
      auto w = stencil::ds_weights(i, Ns, hs);
      for (int m = 0; m < 3; ++m)
        for (int k = 0; k < Nt; ++k) acc[g_.at(w.first + m, k)] += w.c[m] * q[g_.at(i, k)];
    }
    for (int k = 0; k < Nt; ++k) acc[g_.at(Ns, k)] += pw_ * r[g_.nodes() + static_cast<std::size_t>(k)];
    Eigen::VectorXd x(static_cast<Eigen::Index>(lay_.size()));
    for (int i = 1; i <= Ns; ++i)
      for (int k = 0; k < Nt; ++k) {
        const std::size_t j = lay_.zi(i, k);
        x[static_cast<Eigen::Index>(j)] = acc[g_.at(i, k)].real();
        x[static_cast<Eigen::Index>(j + 1)] = acc[g_.at(i, k)].imag();
      }
    for (int k = 0; k < Nt; ++k) {
      const cplx dir = cplx(0, 1) * eith_[static_cast<std::size_t>(k)];
      x[static_cast<Eigen::Index>(lay_.ti(k))] = (std::conj(dir) * acc[g_.at(0, k)]).real();
    }
    return x;
  }

  Eigen::VectorXd normal(const Eigen::VectorXd& x, double lambda) const {
    Eigen::VectorXd y = apply_transpose(apply(x));
    y += lambda * x;
    return y;
  }

  // Rough scale of diag(JᵀJ) for interior nodes.
  double typical_diagonal() const {
    const double hs = g_.hs(), ht = g_.ht();
    const double dt2 = order_ == 2 ? 0.5 / (ht * ht) : 130.0 / (144.0 * ht * ht);
    return hs * ht * (0.5 / (hs * hs) + dt2);
  }

 private:
  CylinderGrid g_;
  int order_;
  Layout lay_;
  std::vector<double> hxx_, hxy_, hyy_, sw_;
  std::vector<cplx> eith_;
  double pw_ = 0;
};

// Symbol of the t-stencil on e^{iφk}: D_t e^{iφk} = iσ(φ) e^{iφk}.
inline double dt_symbol(double phi, double ht, int order) {
  if (order == 2) return std::sin(phi) / ht;
  return (8 * std::sin(phi) - std::sin(2 * phi)) / (6 * ht);
}

// Preconditioner from the model operator D_s + iD_t + c_i·Id in the frame rotating
// with the boundary degree. After a unitary DFT in t the model splits into small real
// systems: a chain in s per Fourier mode, with mode pairs (p, Nt−p) coupled through
// the boundary angle coordinates.
class FourierPreconditioner {
 public:
  FourierPreconditioner(const Linearization& lin, long degree, double theta_bar, double lambda)
      : lin_(lin), lay_(lin.layout()), degree_(degree) {
    const CylinderGrid& g = lin.grid();
    const int Ns = g.Ns, Nt = g.Nt;
    frame_.resize(static_cast<std::size_t>(Nt));
    for (int k = 0; k < Nt; ++k)
      frame_[static_cast<std::size_t>(k)] =
          std::polar(1.0, 2 * kPi * static_cast<double>(degree) * k / Nt + theta_bar);
    coef_.resize(static_cast<std::size_t>(Ns) + 1);
    for (int i = 0; i <= Ns; ++i) coef_[static_cast<std::size_t>(i)] = lin.row_coefficient(i);
    sigma_.resize(static_cast<std::size_t>(Nt));
    for (int p = 0; p < Nt; ++p)
      sigma_[static_cast<std::size_t>(p)] =
          dt_symbol(2 * kPi * static_cast<double>(degree + p) / Nt, g.ht(), lin.t_order());
    const double r2 = 1.0 / std::sqrt(2.0);
    systems_.resize(static_cast<std::size_t>(Nt) + 2);
    // Self-paired modes 0 and Nt/2: Re chain alone, Im chain with the boundary coordinate.
    build(systems_[0], {0}, {0.0}, false, lambda);
    build(systems_[1], {0}, {1.0}, true, lambda);
    build(systems_[2], {Nt / 2}, {0.0}, false, lambda);
    build(systems_[3], {Nt / 2}, {1.0}, true, lambda);
    std::size_t s = 4;
    for (int p = 1; p < Nt / 2; ++p) {
      build(systems_[s++], {p, Nt - p}, {-r2, r2}, true, lambda);
      build(systems_[s++], {p, Nt - p}, {r2, r2}, true, lambda);
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    const CylinderGrid& g = lin_.grid();
    const int Ns = g.Ns, Nt = g.Nt;
    const double sn = std::sqrt(static_cast<double>(Nt));
    Eigen::FFT<double> fft;
    // hat[i][p] for i = 1..Ns, stored at (i−1)
    std::vector<std::vector<cplx>> hat(static_cast<std::size_t>(Ns));
    std::vector<cplx> w(static_cast<std::size_t>(Nt));
    for (int i = 1; i <= Ns; ++i) {
      for (int k = 0; k < Nt; ++k) {
        const std::size_t j = lay_.zi(i, k);
        w[static_cast<std::size_t>(k)] = std::conj(frame_[static_cast<std::size_t>(k)]) *
                                         cplx(v[static_cast<Eigen::Index>(j)], v[static_cast<Eigen::Index>(j + 1)]);
      }
      auto& h = hat[static_cast<std::size_t>(i - 1)];
      fft.fwd(h, w);
      for (auto& c : h) c /= sn;
    }
    for (int k = 0; k < Nt; ++k) w[static_cast<std::size_t>(k)] = v[static_cast<Eigen::Index>(lay_.ti(k))];
    std::vector<cplx> th;
    fft.fwd(th, w);
    for (auto& c : th) c /= sn;

    const double r2 = std::sqrt(2.0);
    auto solve = [&](const System& sys, auto&& part, std::optional<double> bnd) {
      const int m = static_cast<int>(sys.modes.size());
      Eigen::VectorXd rhs(sys.size);
      for (int c = 0; c < m; ++c)
        for (int i = 1; i <= Ns; ++i)
          rhs[c * Ns + i - 1] = part(hat[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(sys.modes[static_cast<std::size_t>(c)])]);
      if (sys.boundary) rhs[sys.size - 1] = *bnd;
      Eigen::VectorXd x = sys.solver->solve(rhs);
      return x;
    };
    auto re = [](const cplx& c) { return c.real(); };
    auto im = [](const cplx& c) { return c.imag(); };
    std::vector<std::vector<cplx>> out(static_cast<std::size_t>(Ns), std::vector<cplx>(static_cast<std::size_t>(Nt)));
    std::vector<cplx> th_out(static_cast<std::size_t>(Nt));
    auto scatter = [&](const System& sys, const Eigen::VectorXd& x, bool imag_part) {
      for (std::size_t c = 0; c < sys.modes.size(); ++c)
        for (int i = 1; i <= Ns; ++i) {
          cplx& o = out[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(sys.modes[c])];
          const double val = x[static_cast<Eigen::Index>(c) * Ns + i - 1];
          if (imag_part) o.imag(val);
          else o.real(val);
        }
    };
    for (int self : {0, Nt / 2}) {
      const std::size_t base = self == 0 ? 0 : 2;
      Eigen::VectorXd xr = solve(systems_[base], re, std::nullopt);
      scatter(systems_[base], xr, false);
      Eigen::VectorXd xi = solve(systems_[base + 1], im, th[static_cast<std::size_t>(self)].real());
      scatter(systems_[base + 1], xi, true);
      th_out[static_cast<std::size_t>(self)] = xi[systems_[base + 1].size - 1];
    }
    std::size_t s = 4;
    for (int p = 1; p < Nt / 2; ++p) {
      const cplx tp = th[static_cast<std::size_t>(p)];
      const System& A = systems_[s++];
      const System& B = systems_[s++];
      Eigen::VectorXd xb = solve(A, re, r2 * tp.imag());
      Eigen::VectorXd xa = solve(B, im, r2 * tp.real());
      scatter(A, xb, false);
      scatter(B, xa, true);
      const double a = xa[B.size - 1] / r2, b = xb[A.size - 1] / r2;
      th_out[static_cast<std::size_t>(p)] = cplx(a, b);
      th_out[static_cast<std::size_t>(Nt - p)] = cplx(a, -b);
    }

    Eigen::VectorXd y(v.size());
    std::vector<cplx> back;
    for (int i = 1; i <= Ns; ++i) {
      fft.inv(back, out[static_cast<std::size_t>(i - 1)]);
      for (int k = 0; k < Nt; ++k) {
        const cplx d = frame_[static_cast<std::size_t>(k)] * back[static_cast<std::size_t>(k)] * sn;
        const std::size_t j = lay_.zi(i, k);
        y[static_cast<Eigen::Index>(j)] = d.real();
        y[static_cast<Eigen::Index>(j + 1)] = d.imag();
      }
    }
    fft.inv(back, th_out);
    for (int k = 0; k < Nt; ++k) y[static_cast<Eigen::Index>(lay_.ti(k))] = back[static_cast<std::size_t>(k)].real() * sn;
    return y;
  }

 private:
  struct System {
    std::vector<int> modes;
    bool boundary = false;
    Eigen::Index size = 0;
    std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> solver;
  };

  // Least-squares normal matrix of the model chains for `modes`, with the boundary
  // coordinate entering chain c at s = 0 with factor gamma[c].
  void build(System& sys, std::vector<int> modes, std::vector<double> gamma, bool boundary,
             double lambda) {
    const CylinderGrid& g = lin_.grid();
    const int Ns = g.Ns;
    const double hs = g.hs();
    const int m = static_cast<int>(modes.size());
    sys.modes = modes;
    sys.boundary = boundary;
    sys.size = static_cast<Eigen::Index>(m) * Ns + (boundary ? 1 : 0);
    std::vector<Eigen::Triplet<double>> trip;
    const int rows_per = Ns + 2;
    for (int c = 0; c < m; ++c) {
      const double sigma = sigma_[static_cast<std::size_t>(modes[static_cast<std::size_t>(c)])];
      auto col = [&](int i) -> Eigen::Index {
        return i == 0 ? sys.size - 1 : static_cast<Eigen::Index>(c) * Ns + i - 1;
      };
      auto put = [&](int row, int i, double val) {
        if (i == 0) {
          if (!boundary) return;
          val *= gamma[static_cast<std::size_t>(c)];
        }
        trip.emplace_back(c * rows_per + row, col(i), val);
      };
      for (int i = 0; i <= Ns; ++i) {
        const double sw = lin_.row_scale(i);
        auto w = stencil::ds_weights(i, Ns, hs);
        for (int q = 0; q < 3; ++q) put(i, w.first + q, sw * w.c[q]);
        put(i, i, sw * (coef_[static_cast<std::size_t>(i)] - sigma));
      }
      put(Ns + 1, Ns, lin_.penalty_scale());
    }
    Eigen::SparseMatrix<double> B(m * rows_per, sys.size);
    B.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> A = B.transpose() * B;
    Eigen::SparseMatrix<double> I(sys.size, sys.size);
    I.setIdentity();
    A += lambda * I;
    sys.solver = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(A);
    if (sys.solver->info() != Eigen::Success)
      throw Error("numerical", "preconditioner factorization failed");
  }

  const Linearization& lin_;
  Layout lay_;
  long degree_;
  std::vector<cplx> frame_;
  std::vector<double> coef_, sigma_;
  std::vector<System> systems_;
};

struct PcgResult {
  int iterations = 0;
  double relative_residual = 0;
  bool converged = false;
};

template <class Apply, class Precond>
PcgResult pcg(Apply&& A, Precond&& M, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol,
              int max_it) {
  x.setZero(b.size());
  const double bn = b.norm();
  if (bn == 0) return {0, 0, true};
  Eigen::VectorXd r = b, zv = M(r), p = zv;
  double rz = r.dot(zv);
  for (int it = 1; it <= max_it; ++it) {
    Eigen::VectorXd Ap = A(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0)) return {it, r.norm() / bn, false};
    const double a = rz / pAp;
    x += a * p;
    r -= a * Ap;
    const double rel = r.norm() / bn;
    if (rel <= tol) return {it, rel, true};
    zv = M(r);
    const double rz_new = r.dot(zv);
    p = zv + (rz_new / rz) * p;
    rz = rz_new;
  }
  return {max_it, r.norm() / bn, false};
}

// Weighted residual vector matching Linearization::apply.
inline std::vector<cplx> weighted_residual(const FloerSolution& sol, const ResidualField& rf,
                                           double penalty) {
  const CylinderGrid& g = sol.grid;
  std::vector<cplx> r(g.nodes() + static_cast<std::size_t>(g.Nt));
  for (int i = 0; i <= g.Ns; ++i) {
    const double sw = std::sqrt(stencil::row_weight(i, g.Ns) * g.hs() * g.ht());
    for (int k = 0; k < g.Nt; ++k) r[g.at(i, k)] = sw * rf.F[g.at(i, k)];
  }
  const double pw = penalty * std::sqrt(g.ht());
  for (int k = 0; k < g.Nt; ++k) r[g.nodes() + static_cast<std::size_t>(k)] = pw * sol(g.Ns, k);
  return r;
}

inline double sum_sq(const std::vector<cplx>& r) {
  double s = 0;
  for (const auto& c : r) s += std::norm(c);
  return s;
}

inline double circular_offset(const FloerSolution& sol) {
  const int Nt = sol.grid.Nt;
  cplx acc(0, 0);
  for (int k = 0; k < Nt; ++k)
    acc += std::polar(1.0, sol.theta[static_cast<std::size_t>(k)] -
                               2 * kPi * static_cast<double>(sol.degree) * k / Nt);
  return std::arg(acc);
}

// Lifted increments stay in (−π, π), so the sampled boundary loop keeps its winding.
inline bool lift_is_admissible(const std::vector<double>& theta, long degree) {
  const std::size_t Nt = theta.size();
  for (std::size_t k = 0; k < Nt; ++k) {
    const double next = k + 1 < Nt ? theta[k + 1] : theta[0] + 2 * kPi * static_cast<double>(degree);
    if (!(std::fabs(next - theta[k]) < kPi)) return false;
  }
  return true;
}

inline FloerSolution stepped(const FloerSolution& sol, const Eigen::VectorXd& d, double a) {
  FloerSolution out = sol;
  const CylinderGrid& g = sol.grid;
  Layout lay{g.Ns, g.Nt};
  for (int i = 1; i <= g.Ns; ++i)
    for (int k = 0; k < g.Nt; ++k) {
      const std::size_t j = lay.zi(i, k);
      out(i, k) += a * cplx(d[static_cast<Eigen::Index>(j)], d[static_cast<Eigen::Index>(j + 1)]);
    }
  for (int k = 0; k < g.Nt; ++k) {
    double& th = out.theta[static_cast<std::size_t>(k)];
    th += a * d[static_cast<Eigen::Index>(lay.ti(k))];
    out(0, k) = std::polar(1.0, th);
  }
  return out;
}

}  // namespace floer_detail

// Max nodewise distance to the rigid oracle, after aligning the free rotation θ₀.
inline double max_deviation_from_oracle(const FloerSolution& sol, const FloerTarget& tg) {
  const FloerSolution ref =
      rigid_rotation_exact_solution(tg, floer_detail::circular_offset(sol), sol.grid, sol.t_order);
  double d = 0;
  for (std::size_t a = 0; a < sol.z.size(); ++a) d = std::max(d, std::abs(sol.z[a] - ref.z[a]));
  return d;
}

// Multiplies interior nodes by (1 + level·(u + iv)) and shifts boundary angles by level·w,
// with u, v, w uniform in [−1, 1].
inline FloerSolution perturb_seed(FloerSolution sol, double level, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < sol.grid.Nt; ++k) {
    double& th = sol.theta[static_cast<std::size_t>(k)];
    th += level * u(rng);
    sol(0, k) = std::polar(1.0, th);
  }
  for (int i = 1; i <= sol.grid.Ns; ++i)
    for (int k = 0; k < sol.grid.Nt; ++k) sol(i, k) *= cplx(1 + level * u(rng), level * u(rng));
  return sol;
}

// Minimizes Σ_i w_i hs ht |F_ik|² + μ² ht Σ_k |z_{Ns,k}|² over interior nodes and boundary
// angle lifts. Without a seed, starts from the rigid oracle for (n, ⌊nα⌋, {nα}).
inline FloerSolution solve_floer(const Hamiltonian& H, const FloerTarget& tg,
                                 const CylinderGrid& grid,
                                 const std::optional<FloerSolution>& seed = std::nullopt,
                                 const FloerConfig& cfg = {}) {
  using namespace floer_detail;
  grid.validate();
  if (grid.n != tg.n) throw InvalidArgument("grid period differs from target n");
  FloerSolution sol = seed ? *seed : rigid_rotation_exact_solution(tg, 0.0, grid, cfg.t_order);
  if (sol.grid.Ns != grid.Ns || sol.grid.Nt != grid.Nt || sol.grid.n != grid.n)
    throw InvalidArgument("seed grid does not match");
  if (sol.degree != tg.degree) throw InvalidArgument("seed degree differs from floor(n alpha)");
  sol.grid = grid;
  sol.t_order = cfg.t_order;
  sol.penalty = cfg.penalty;
  sol.residual_history.clear();
  sol.linear_iterations.clear();
  sol.fallback_steps = 0;
  for (int k = 0; k < grid.Nt; ++k) sol(0, k) = std::polar(1.0, sol.theta[static_cast<std::size_t>(k)]);
  if (!lift_is_admissible(sol.theta, sol.degree))
    throw InvalidArgument("seed boundary lift does not have the requested winding");

  ResidualField rf = residual(sol, H);
  std::vector<cplx> r = weighted_residual(sol, rf, cfg.penalty);
  double f = sum_sq(r);
  sol.residual_history.push_back(rf.l2);
  double lambda = -1;
  bool stationary = false;
  int it = 0;
  for (; it < cfg.max_iterations && !stationary; ++it) {
    Linearization lin(sol, H, cfg.penalty);
    if (lambda < 0) lambda = cfg.lm_initial * lin.typical_diagonal();
    Eigen::VectorXd grad = lin.apply_transpose(r);
    FourierPreconditioner M(lin, sol.degree, circular_offset(sol), lambda);
    Eigen::VectorXd d;
    PcgResult pr = pcg([&](const Eigen::VectorXd& x) { return lin.normal(x, lambda); },
                       [&](const Eigen::VectorXd& x) { return M.apply(x); }, -grad, d, cfg.pcg_tol,
                       cfg.pcg_max_iterations);
    sol.linear_iterations.push_back(pr.iterations);
    double slope = grad.dot(d);
    bool use_gradient = !(slope < 0) || !d.allFinite();
    if (use_gradient) {
      d = -grad / std::max(lin.typical_diagonal(), 1e-300);
      slope = grad.dot(d);
    }
    bool accepted = false;
    double a = 1;
    for (int bt = 0; bt < 40; ++bt, a *= 0.5) {
      FloerSolution trial = stepped(sol, d, a);
      if (!lift_is_admissible(trial.theta, trial.degree)) continue;
      ResidualField trf = residual(trial, H);
      std::vector<cplx> tr = weighted_residual(trial, trf, cfg.penalty);
      const double tf = sum_sq(tr);
      if (std::isfinite(tf) && tf <= f + 1e-4 * a * 2 * slope) {
        const double step = a * d.lpNorm<Eigen::Infinity>();
        const double rel = (f - tf) / std::max(f, 1e-300);
        sol = std::move(trial);
        rf = std::move(trf);
        r = std::move(tr);
        f = tf;
        accepted = true;
        if (step <= cfg.step_tol || rel <= 1e-13) stationary = true;
        break;
      }
    }
    if (use_gradient) ++sol.fallback_steps;
    sol.residual_history.push_back(rf.l2);
    if (!accepted) {
      if (use_gradient || lambda > 1e6 * lin.typical_diagonal()) {
        stationary = true;
        sol.diagnostic = "line search failed";
        break;
      }
      lambda *= 100;
    } else if (a == 1.0) {
      lambda = std::max(lambda / 10, 1e-16 * lin.typical_diagonal());
    } else {
      lambda *= 10;
    }
  }
  sol.iterations = it;
  sol.residual_norm = rf.l2;
  sol.residual_max = rf.max;
  sol.tail_level = max_abs_z_row(sol, grid.Ns);
  sol.converged = stationary && rf.l2 <= cfg.residual_tol;
  if (!sol.converged && sol.diagnostic.empty()) {
    std::ostringstream os;
    os << (stationary ? "stationary but residual " : "iteration limit reached; residual ") << rf.l2
       << " vs tolerance " << cfg.residual_tol << "; history:";
    for (double h : sol.residual_history) os << ' ' << h;
    sol.diagnostic = os.str();
  }
  return sol;
}

}  // namespace pseudorot
