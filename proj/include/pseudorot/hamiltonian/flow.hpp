#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pseudorot/core/csv.hpp"
#include "pseudorot/core/parallel.hpp"
#include "pseudorot/hamiltonian/hamiltonian.hpp"

namespace pseudorot {

enum class Integrator { rk4, dopri5 };

struct FlowConfig {
  Integrator method = Integrator::rk4;
  double step = 1e-3;        // rk4 step, dopri5 initial step
  double rtol = 1e-10;       // dopri5 local tolerance
  double drift_tol = 1e-6;   // allowed excursion beyond |p| = 1
  bool validate = false;     // re-run at half step and report the difference
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec2> points;
  double step = 0;
  int order = 4;
  std::string method = "rk4";
  std::optional<double> validation_error;
};

namespace detail {

inline void check_drift(const Vec2& p, double t, const FlowConfig& cfg) {
  const double r = p.norm();
  if (!(r <= 1.0 + cfg.drift_tol))
    throw IntegrationDrift("trajectory left the disk: |p| = " + csv::format_double(r) +
                           " at t = " + csv::format_double(t));
}

inline Vec2 rk4_step(const Hamiltonian& H, double t, const Vec2& p, double h) {
  Vec2 k1 = H.vector_field(t, p);
  Vec2 k2 = H.vector_field(t + 0.5 * h, p + 0.5 * h * k1);
  Vec2 k3 = H.vector_field(t + 0.5 * h, p + 0.5 * h * k2);
  Vec2 k4 = H.vector_field(t + h, p + h * k3);
  return p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Integrates from t0 to t1 (either direction); calls visit(t, p) after each step.
template <class Visit>
Vec2 integrate(const Hamiltonian& H, Vec2 p, double t0, double t1, const FlowConfig& cfg,
               Visit&& visit) {
  if (t0 == t1) return p;
  if (p.x() == 0.0 && p.y() == 0.0) {
    visit(t1, p);
    return p;
  }
  const double span = t1 - t0;
  if (cfg.method == Integrator::rk4) {
    const long steps = std::max(1L, static_cast<long>(std::ceil(std::fabs(span) / cfg.step - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (long i = 0; i < steps; ++i) {
      const double t = t0 + h * static_cast<double>(i);
      p = rk4_step(H, t, p, h);
      const double tn = (i + 1 == steps) ? t1 : t0 + h * static_cast<double>(i + 1);
      check_drift(p, tn, cfg);
      visit(tn, p);
    }
    return p;
  }
  // Dormand–Prince 5(4) with standard step control.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5, a31 = 3.0 / 40, a32 = 9.0 / 40, a41 = 44.0 / 45,
                          a42 = -56.0 / 15, a43 = 32.0 / 9, a51 = 19372.0 / 6561,
                          a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729,
                          a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656, b1 = 35.0 / 384,
                          b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84, e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                          e7 = -1.0 / 40;
  const double dir = span > 0 ? 1.0 : -1.0;
  double t = t0, h = dir * std::min(cfg.step, std::fabs(span));
  Vec2 k1 = H.vector_field(t, p);
  for (int guard = 0; guard < 100000000; ++guard) {
    if (dir * (t + h - t1) > 0) h = t1 - t;
    Vec2 k2 = H.vector_field(t + c2 * h, p + h * (a21 * k1));
    Vec2 k3 = H.vector_field(t + c3 * h, p + h * (a31 * k1 + a32 * k2));
    Vec2 k4 = H.vector_field(t + c4 * h, p + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Vec2 k5 = H.vector_field(t + c5 * h, p + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vec2 k6 = H.vector_field(t + h, p + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec2 pn = p + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec2 k7 = H.vector_field(t + h, pn);
    Vec2 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double scale = cfg.rtol * (1.0 + std::max(p.norm(), pn.norm()));
    const double ratio = err.norm() / scale;
    if (ratio <= 1.0) {
      t += h;
      p = pn;
      k1 = k7;
      check_drift(p, t, cfg);
      const bool done = dir * (t - t1) >= 0;
      if (done) t = t1;
      visit(t, p);
      if (done) return p;
    }
    const double fac = ratio == 0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
    h *= fac;
  }
  throw IntegrationDrift("adaptive integrator did not reach the end time");
}

}  // namespace detail

// End point of the flow from t0 to t1 (t1 < t0 integrates backward).
inline Vec2 flow_to(const Hamiltonian& H, const Vec2& p, double t0, double t1,
                    const FlowConfig& cfg = {}) {
  detail::check_drift(p, t0, cfg);
  return detail::integrate(H, p, t0, t1, cfg, [](double, const Vec2&) {});
}

inline Trajectory flow(const Hamiltonian& H, const Vec2& p, double t0, double t1,
                       const FlowConfig& cfg = {}) {
  if (t1 < t0) throw InvalidArgument("flow expects t0 <= t1");
  detail::check_drift(p, t0, cfg);
  Trajectory tr;
  tr.step = cfg.step;
  tr.order = cfg.method == Integrator::rk4 ? 4 : 5;
  tr.method = cfg.method == Integrator::rk4 ? "rk4" : "dopri5";
  tr.times.push_back(t0);
  tr.points.push_back(p);
  detail::integrate(H, p, t0, t1, cfg, [&](double t, const Vec2& q) {
    tr.times.push_back(t);
    tr.points.push_back(q);
  });
  if (cfg.validate && t1 > t0) {
    FlowConfig half = cfg;
    half.step *= 0.5;
    half.rtol *= 1.0 / 32.0;
    Vec2 fine = flow_to(H, p, t0, t1, half);
    tr.validation_error = (fine - tr.points.back()).norm();
  }
  return tr;
}

inline Vec2 time_one_map(const Hamiltonian& H, const Vec2& p, const FlowConfig& cfg = {}) {
  return flow_to(H, p, 0.0, 1.0, cfg);
}

// φⁿ(p) for integer n; negative n integrates backward in time.
inline Vec2 iterate(const Hamiltonian& H, const Vec2& p, long n, const FlowConfig& cfg = {}) {
  if (n == 0 || (p.x() == 0.0 && p.y() == 0.0)) return p;
  return flow_to(H, p, 0.0, static_cast<double>(n), cfg);
}

struct RotationEstimate {
  double value = 0;
  double error_band = 0;
};

// Birkhoff average of the lifted boundary angle along the orbit of (1, 0).
inline RotationEstimate boundary_rotation_number(const Hamiltonian& H, long n_max,
                                                 const FlowConfig& cfg = {}) {
  if (n_max <= 0) throw InvalidArgument("n_max must be positive");
  double theta = 0.0;
  Vec2 prev(1.0, 0.0);
  detail::integrate(H, prev, 0.0, static_cast<double>(n_max), cfg, [&](double t, const Vec2& q) {
    if (std::fabs(q.norm() - 1.0) > cfg.drift_tol)
      throw IntegrationDrift("boundary orbit left the circle at t = " + csv::format_double(t));
    theta += std::atan2(prev.x() * q.y() - prev.y() * q.x(), prev.dot(q));
    prev = q;
  });
  return {theta / (2 * kPi * static_cast<double>(n_max)), 1.0 / static_cast<double>(n_max)};
}

struct HessianBound {
  double B = 0;
  double grid_max = 0;
  double lipschitz = 0;  // finite-difference Lipschitz constant of ‖Hess‖
  double spacing = 0;    // largest grid spacing in (t, x, y)
  int nt = 0, nr = 0, ntheta = 0;
};

inline double spectral_norm(const Mat2& h) {
  const double a = h(0, 0), b = h(0, 1), c = h(1, 1);
  return std::fabs(0.5 * (a + c)) + std::sqrt(0.25 * (a - c) * (a - c) + b * b);
}

// B = grid max of ‖Hess Hᵗ‖ inflated to grid_max + L·spacing, where L is the
// largest difference quotient of ‖Hess‖ between neighbouring grid nodes.
inline HessianBound hessian_bound(const Hamiltonian& H, int nt = 32, int nr = 32,
                                  int ntheta = 64) {
  HessianBound out{0, 0, 0, 0, nt, nr, ntheta};
  std::vector<double> norms(static_cast<std::size_t>(nt) * (nr + 1) * ntheta);
  auto idx = [&](int it, int ir, int ia) {
    return (static_cast<std::size_t>(it) * (nr + 1) + ir) * ntheta + ia;
  };
  auto point = [&](int ir, int ia) {
    double r = static_cast<double>(ir) / nr, a = 2 * kPi * ia / ntheta;
    return Vec2(r * std::cos(a), r * std::sin(a));
  };
  parallel_for(static_cast<std::size_t>(nt), [&](std::size_t it) {
    double t = static_cast<double>(it) / nt;
    for (int ir = 0; ir <= nr; ++ir)
      for (int ia = 0; ia < ntheta; ++ia) {
        Vec2 p = point(ir, ia);
        norms[idx(static_cast<int>(it), ir, ia)] = spectral_norm(H.hessian(t, p.x(), p.y()));
      }
  });
  double L = 0, gmax = 0;
  for (int it = 0; it < nt; ++it)
    for (int ir = 0; ir <= nr; ++ir)
      for (int ia = 0; ia < ntheta; ++ia) {
        const double v = norms[idx(it, ir, ia)];
        gmax = std::max(gmax, v);
        Vec2 p = point(ir, ia);
        auto neighbour = [&](int jt, int jr, int ja, double dist) {
          if (dist <= 0) return;
          L = std::max(L, std::fabs(v - norms[idx(jt, jr, ja)]) / dist);
        };
        neighbour((it + 1) % nt, ir, ia, 1.0 / nt);
        if (ir < nr) neighbour(it, ir + 1, ia, (point(ir + 1, ia) - p).norm());
        neighbour(it, ir, (ia + 1) % ntheta, (point(ir, (ia + 1) % ntheta) - p).norm());
      }
  const double spacing = std::max({1.0 / nt, 1.0 / nr, 2 * kPi / ntheta});
  out.grid_max = gmax;
  out.lipschitz = L;
  out.spacing = spacing;
  out.B = gmax + L * spacing;
  return out;
}

// det D(φ¹) at p by central differences with offset delta.
inline double jacobian_determinant(const Hamiltonian& H, const Vec2& p, double delta,
                                   const FlowConfig& cfg = {}) {
  Vec2 ex(delta, 0), ey(0, delta);
  Vec2 dx = (time_one_map(H, p + ex, cfg) - time_one_map(H, p - ex, cfg)) / (2 * delta);
  Vec2 dy = (time_one_map(H, p + ey, cfg) - time_one_map(H, p - ey, cfg)) / (2 * delta);
  return dx.x() * dy.y() - dx.y() * dy.x();
}

inline std::string trajectory_csv(const Trajectory& tr) {
  csv::Writer w({"t", "x", "y"});
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    w.row({csv::format_double(tr.times[i]), csv::format_double(tr.points[i].x()),
           csv::format_double(tr.points[i].y())});
  return w.str();
}

}  // namespace pseudorot
