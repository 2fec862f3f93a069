#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pseudorot/hamiltonian/jet.hpp"

namespace pseudorot {

constexpr double kPi = 3.14159265358979323846;

// π α̂ (x² + y²): rotation by 2πα̂ per unit time.
struct RigidFamily {
  double alpha_hat = 0;

  template <class J>
  J eval(double /*t*/, const J& x, const J& y) const {
    return (kPi * alpha_hat) * (x * x + y * y);
  }
};

// Angular/time mode used by the perturbation and the conjugating stages:
// (1 − r²)³ r^{2p} Re((x+iy)^m e^{i(φ − 2πkt)}). The factor (1 − r²)³ kills
// value-differences, gradient and Hessian along ∂D; r^{2p} with 2p+m ≥ 3
// keeps the origin a rest point.
struct ModeSpec {
  int m = 2;
  int p = 1;
  int k = 1;
  double phase = 0;
  double amplitude = 1;
};

template <class J>
J mode_term(const ModeSpec& s, double t, const J& x, const J& y) {
  J r2 = x * x + y * y;
  J one_minus = 1.0 - r2;
  J bump = one_minus * one_minus * one_minus * jet_pow(r2, s.p);
  J re = jet_var_x<J>(0.0) * 0.0 + 1.0, im = jet_var_x<J>(0.0) * 0.0;
  for (int i = 0; i < s.m; ++i) {
    J nre = re * x - im * y;
    J nim = re * y + im * x;
    re = nre;
    im = nim;
  }
  const double psi = s.phase - 2 * kPi * s.k * t;
  return (s.amplitude * std::cos(psi)) * (bump * re) - (s.amplitude * std::sin(psi)) * (bump * im);
}

struct PerturbedFamily {
  double alpha_hat = 0;
  double epsilon = 0;
  ModeSpec mode;

  template <class J>
  J eval(double t, const J& x, const J& y) const {
    J h = (kPi * alpha_hat) * (x * x + y * y);
    if (epsilon == 0) return h;
    return h + epsilon * mode_term(mode, t, x, y);
  }
};

// Time-one map h∘R_α̂∘h⁻¹ with h = ψ_{G_1}∘…∘ψ_{G_K}, ψ_G the time-one map of
// the autonomous generator G. The unit interval is split into 2K+1 equal
// slots run in the order −G_1, …, −G_K, rigid, G_K, …, G_1; in each slot the
// Hamiltonian is multiplied by the derivative of a smootherstep ramp.
struct StagedConjugationFamily {
  double alpha_hat = 0;
  std::vector<ModeSpec> generators;  // time mode k is ignored (autonomous)

  int slots() const { return 2 * static_cast<int>(generators.size()) + 1; }

  template <class J>
  J eval(double t, const J& x, const J& y) const {
    const int S = slots();
    double u = t - std::floor(t);
    int slot = std::min(S - 1, static_cast<int>(u * S));
    double local = u * S - slot;
    // d/dt of 6u⁵ − 15u⁴ + 10u³ with u = local, rescaled by S
    double ramp = 30.0 * local * local * (1 - local) * (1 - local) * S;
    const int K = static_cast<int>(generators.size());
    if (slot == K) return (ramp * kPi * alpha_hat) * (x * x + y * y);
    int idx = slot < K ? slot : 2 * K - slot;
    double sign = slot < K ? -1.0 : 1.0;
    ModeSpec g = generators[static_cast<std::size_t>(idx)];
    g.k = 0;
    return (sign * ramp) * mode_term(g, 0.0, x, y);
  }
};

}  // namespace pseudorot
