#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pseudorot/core/errors.hpp"

namespace pseudorot {

// Samples x(t_i) of a continuous nonnegative function on [0, T] with t_0 = 0.
struct GronwallInstance {
  std::vector<double> t;
  std::vector<double> x;
  double a = 0;
  double b = 0;

  void validate() const {
    if (t.size() != x.size() || t.empty()) throw InvalidArgument("gronwall instance needs matching nonempty samples");
    if (t.front() != 0) throw InvalidArgument("gronwall samples must start at t = 0");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) throw InvalidArgument("gronwall sample times must increase");
    for (double v : x)
      if (!(v >= 0) || !std::isfinite(v)) throw InvalidArgument("gronwall samples must be finite and nonnegative");
    if (!(a >= 0) || !(b >= 0)) throw InvalidArgument("gronwall constants must be nonnegative");
  }

  template <class F>
  static GronwallInstance sampled(F&& x, double a, double b, double T, int samples) {
    if (samples < 2 || !(T > 0)) throw InvalidArgument("need T > 0 and at least two samples");
    GronwallInstance g;
    g.a = a;
    g.b = b;
    for (int i = 0; i < samples; ++i) {
      const double t = T * i / (samples - 1);
      g.t.push_back(t);
      g.x.push_back(x(t));
    }
    return g;
  }
};

enum class GronwallVerdict { holds, hypothesis_violated, conclusion_violated };

inline std::string to_string(GronwallVerdict v) {
  switch (v) {
    case GronwallVerdict::holds: return "holds";
    case GronwallVerdict::hypothesis_violated: return "hypothesis_violated";
    case GronwallVerdict::conclusion_violated: return "conclusion_violated";
  }
  return "?";
}

struct GronwallReport {
  GronwallVerdict verdict = GronwallVerdict::holds;
  bool hypothesis_holds = true;
  bool conclusion_holds = true;
  std::size_t first_hypothesis_violation = 0;   // sample index, meaningful when the hypothesis fails
  double first_hypothesis_violation_time = 0;
  std::size_t first_conclusion_violation = 0;
  double min_slack = std::numeric_limits<double>::infinity();   // min over i of a e^{bt_i} − x_i
  double min_relative_slack = std::numeric_limits<double>::infinity();
  std::vector<double> integral;   // cumulative trapezoid ∫₀^{t_i} x
};

// Relative tolerance for both inequalities; absorbs rounding in e^{bt} and the quadrature.
inline constexpr double kGronwallRtol = 1e-9;

inline GronwallReport gronwall_check(const GronwallInstance& g, double rtol = kGronwallRtol) {
  g.validate();
  GronwallReport r;
  const std::size_t N = g.t.size();
  r.integral.assign(N, 0.0);
  for (std::size_t i = 1; i < N; ++i)
    r.integral[i] = r.integral[i - 1] + 0.5 * (g.t[i] - g.t[i - 1]) * (g.x[i] + g.x[i - 1]);
  for (std::size_t i = 0; i < N; ++i) {
    const double rhs = g.a + g.b * r.integral[i];
    if (g.x[i] > rhs + rtol * std::max(1.0, rhs) && r.hypothesis_holds) {
      r.hypothesis_holds = false;
      r.first_hypothesis_violation = i;
      r.first_hypothesis_violation_time = g.t[i];
    }
    const double bound = g.a * std::exp(g.b * g.t[i]);
    const double slack = bound - g.x[i];
    r.min_slack = std::min(r.min_slack, slack);
    if (bound > 0) r.min_relative_slack = std::min(r.min_relative_slack, slack / bound);
    if (slack < -rtol * std::max(1.0, bound) && r.conclusion_holds) {
      r.conclusion_holds = false;
      r.first_conclusion_violation = i;
    }
  }
  if (!r.hypothesis_holds)
    r.verdict = GronwallVerdict::hypothesis_violated;
  else if (!r.conclusion_holds)
    r.verdict = GronwallVerdict::conclusion_violated;
  return r;
}

}  // namespace pseudorot
