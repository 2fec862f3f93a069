#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pseudorot/analysis/sobolev.hpp"
#include "pseudorot/hamiltonian/flow.hpp"

namespace pseudorot {

// {r0 <= r <= r1, θ0 <= θ <= θ1} ⊂ D, angles in radians with 0 < θ1 − θ0 <= 2π.
struct AnnularSector {
  double r0 = 0;
  double r1 = 1;
  double theta0 = 0;
  double theta1 = 2 * kPi;

  void validate() const {
    if (!(0 <= r0 && r0 < r1 && r1 <= 1)) throw InvalidArgument("sector radii must satisfy 0 <= r0 < r1 <= 1");
    if (!(theta1 > theta0 && theta1 - theta0 <= 2 * kPi)) throw InvalidArgument("sector angles must satisfy 0 < θ1 − θ0 <= 2π");
  }
  // Lebesgue measure normalized so that μ(D) = 1.
  double measure() const { return (theta1 - theta0) * (r1 * r1 - r0 * r0) / (2 * kPi); }

  bool contains(const Vec2& p) const {
    const double r = p.norm();
    if (r < r0 || r > r1) return false;
    if (theta1 - theta0 >= 2 * kPi) return true;
    double a = std::atan2(p.y(), p.x()) - theta0;
    a -= 2 * kPi * std::floor(a / (2 * kPi));
    return a <= theta1 - theta0;
  }
  // Measure-preserving image of the unit square.
  Vec2 at(double u, double v) const {
    const double r = std::sqrt(r0 * r0 + u * (r1 * r1 - r0 * r0));
    const double th = theta0 + v * (theta1 - theta0);
    return {r * std::cos(th), r * std::sin(th)};
  }
  std::vector<Vec2> boundary(int per_edge) const {
    std::vector<Vec2> out;
    for (int i = 0; i <= per_edge; ++i) {
      const double s = static_cast<double>(i) / per_edge;
      const double th = theta0 + s * (theta1 - theta0);
      const double r = r0 + s * (r1 - r0);
      out.emplace_back(r1 * std::cos(th), r1 * std::sin(th));
      out.emplace_back(r0 * std::cos(th), r0 * std::sin(th));
      out.emplace_back(r * std::cos(theta0), r * std::sin(theta0));
      out.emplace_back(r * std::cos(theta1), r * std::sin(theta1));
    }
    return out;
  }
};

// Finite union of pairwise disjoint sectors.
struct DiskRegion {
  std::vector<AnnularSector> pieces;

  double measure() const {
    double m = 0;
    for (const auto& p : pieces) m += p.measure();
    return m;
  }
  bool contains(const Vec2& p) const {
    for (const auto& s : pieces)
      if (s.contains(p)) return true;
    return false;
  }
  void validate() const {
    if (pieces.empty()) throw InvalidArgument("region has no pieces");
    for (const auto& p : pieces) p.validate();
    // Overlap is tested on a 15×15 interior lattice of each piece.
    for (std::size_t i = 0; i < pieces.size(); ++i)
      for (std::size_t j = 0; j < pieces.size(); ++j) {
        if (i == j) continue;
        for (int a = 1; a < 16; ++a)
          for (int b = 1; b < 16; ++b)
            if (pieces[j].contains(pieces[i].at(a / 16.0, b / 16.0)))
              throw InvalidArgument("region pieces overlap");
      }
  }
};

// Smallest distance between sampled boundaries; exact up to the sampling step for
// sectors that do not contain one another.
inline double separation(const DiskRegion& A, const DiskRegion& B, int per_edge = 2048) {
  std::vector<Vec2> a, b;
  for (const auto& p : A.pieces) {
    auto v = p.boundary(per_edge);
    a.insert(a.end(), v.begin(), v.end());
  }
  for (const auto& p : B.pieces) {
    auto v = p.boundary(per_edge);
    b.insert(b.end(), v.begin(), v.end());
  }
  double d = std::numeric_limits<double>::infinity();
  for (const auto& x : a) {
    if (B.contains(x)) return 0;
    for (const auto& y : b) d = std::min(d, (x - y).squaredNorm());
  }
  for (const auto& y : b)
    if (A.contains(y)) return 0;
  return std::sqrt(d);
}

struct MixingEstimate {
  long n = 0;
  long hits = 0;
  long samples = 0;
  double estimate = 0;       // μ(φ⁻ⁿ(A) ∩ B)
  double half_width = 0;     // 1.96 standard errors
  double upper95 = 0;        // Wilson upper limit, nonzero even with no hits
};

struct MixingProbe {
  DiskRegion A;
  DiskRegion B;
  double mu_A = 0;
  double mu_B = 0;
  double product = 0;        // μ(A)μ(B)
  double separation = 0;
  std::uint64_t seed = 0;
  std::vector<MixingEstimate> rows;
  double validation_error = 0;   // max endpoint change under halving the step, on a subset

  std::string csv() const {
    csv::Writer w({"n", "samples", "hits", "estimate", "half_width", "upper95", "mu_A_mu_B"});
    for (const auto& r : rows)
      w.row({std::to_string(r.n), std::to_string(r.samples), std::to_string(r.hits),
             csv::format_double(r.estimate), csv::format_double(r.half_width),
             csv::format_double(r.upper95), csv::format_double(product)});
    return w.str();
  }
};

// Stratified uniform samples of A: each piece receives a share proportional to its
// measure, laid out on a jittered k×k grid of its unit-square parametrization, with
// the remainder drawn plainly.
inline std::vector<Vec2> stratified_samples(const DiskRegion& A, long samples, std::uint64_t seed) {
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(samples));
  const double total = A.measure();
  std::vector<long> share(A.pieces.size());
  long assigned = 0;
  for (std::size_t i = 0; i < A.pieces.size(); ++i) {
    share[i] = static_cast<long>(std::floor(samples * A.pieces[i].measure() / total));
    assigned += share[i];
  }
  for (std::size_t i = 0; assigned < samples; i = (i + 1) % share.size(), ++assigned) ++share[i];
  for (std::size_t i = 0; i < A.pieces.size(); ++i) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(ss);
    const long k = static_cast<long>(std::floor(std::sqrt(static_cast<double>(share[i]))));
    for (long a = 0; a < k; ++a)
      for (long b = 0; b < k; ++b) {
        const double u = (a + unit_uniform(rng)) / k, v = (b + unit_uniform(rng)) / k;
        out.push_back(A.pieces[i].at(u, v));
      }
    for (long r = k * k; r < share[i]; ++r) {
      const double u = unit_uniform(rng), v = unit_uniform(rng);
      out.push_back(A.pieces[i].at(u, v));
    }
  }
  return out;
}

struct MixingConfig {
  long samples = 100000;
  std::uint64_t seed = 0;
  FlowConfig flow = [] {
    FlowConfig f;
    f.step = 0.05;
    return f;
  }();
  int validation_samples = 64;
};

// μ(φ⁻ⁿ(A) ∩ B) = μ({y ∈ A : φ⁻ⁿ(y) ∈ B}) by area preservation; y is sampled in A and
// flowed backward to time −n.
inline MixingProbe mixing_probe(const Hamiltonian& H, const DiskRegion& A, const DiskRegion& B,
                                std::vector<long> n_list, const MixingConfig& cfg = {}) {
  A.validate();
  B.validate();
  if (cfg.samples < 1) throw InvalidArgument("need at least one sample");
  for (long n : n_list)
    if (n < 0) throw InvalidArgument("iterate counts must be >= 0");
  MixingProbe out;
  out.A = A;
  out.B = B;
  out.mu_A = A.measure();
  out.mu_B = B.measure();
  out.product = out.mu_A * out.mu_B;
  out.separation = separation(A, B);
  out.seed = cfg.seed;
  const std::vector<Vec2> ys = stratified_samples(A, cfg.samples, cfg.seed);
  std::vector<long> sorted = n_list;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t K = sorted.size(), N = ys.size();
  std::vector<unsigned char> in_B(N * K, 0);
  auto run = [&](const Vec2& y, const FlowConfig& fc, std::vector<Vec2>* ends) {
    Vec2 x = y;
    long at = 0;
    for (std::size_t j = 0; j < K; ++j) {
      if (sorted[j] > at) {
        x = flow_to(H, x, -static_cast<double>(at), -static_cast<double>(sorted[j]), fc);
        at = sorted[j];
      }
      ends->push_back(x);
    }
  };
  parallel_for(N, [&](std::size_t i) {
    std::vector<Vec2> ends;
    run(ys[i], cfg.flow, &ends);
    for (std::size_t j = 0; j < K; ++j) in_B[i * K + j] = B.contains(ends[j]) ? 1 : 0;
  });
  FlowConfig half = cfg.flow;
  half.step *= 0.5;
  const std::size_t V = std::min<std::size_t>(N, static_cast<std::size_t>(std::max(0, cfg.validation_samples)));
  for (std::size_t v = 0; v < V; ++v) {
    const std::size_t i = v * N / std::max<std::size_t>(V, 1);
    std::vector<Vec2> coarse, fine;
    run(ys[i], cfg.flow, &coarse);
    run(ys[i], half, &fine);
    for (std::size_t j = 0; j < K; ++j) out.validation_error = std::max(out.validation_error, (coarse[j] - fine[j]).norm());
  }
  const double z = 1.96;
  for (long n : n_list) {
    const std::size_t j = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), n) - sorted.begin());
    MixingEstimate e;
    e.n = n;
    e.samples = static_cast<long>(N);
    for (std::size_t i = 0; i < N; ++i) e.hits += in_B[i * K + j];
    const double p = static_cast<double>(e.hits) / static_cast<double>(N);
    const double Nd = static_cast<double>(N);
    e.estimate = out.mu_A * p;
    e.half_width = z * out.mu_A * std::sqrt(p * (1 - p) / Nd);
    const double center = (p + z * z / (2 * Nd)) / (1 + z * z / Nd);
    const double spread = z * std::sqrt(p * (1 - p) / Nd + z * z / (4 * Nd * Nd)) / (1 + z * z / Nd);
    e.upper95 = out.mu_A * std::min(1.0, center + spread);
    out.rows.push_back(e);
  }
  return out;
}

}  // namespace pseudorot
