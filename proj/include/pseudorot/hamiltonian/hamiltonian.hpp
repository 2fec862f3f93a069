#pragma once

#include <Eigen/Core>

#include <memory>
#include <string>
#include <utility>

#include "pseudorot/core/errors.hpp"
#include "pseudorot/hamiltonian/families.hpp"

namespace pseudorot {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct HessianSample {
  double value;
  Vec2 gradient;
  Mat2 hessian;
};

// Type-erased 1-periodic Hamiltonian H(t, x, y) on the closed unit disk.
class Hamiltonian {
 public:
  Hamiltonian() : Hamiltonian(RigidFamily{0.0}) {}

  template <class Family>
  explicit Hamiltonian(Family f, std::string tag = family_tag<Family>())
      : impl_(std::make_shared<Model<Family>>(std::move(f), std::move(tag))) {}

  static Hamiltonian rigid(double alpha_hat) { return Hamiltonian(RigidFamily{alpha_hat}); }
  static Hamiltonian perturbed(double alpha_hat, double epsilon, ModeSpec mode = {}) {
    return Hamiltonian(PerturbedFamily{alpha_hat, epsilon, mode});
  }
  static Hamiltonian staged(double alpha_hat, std::vector<ModeSpec> generators) {
    return Hamiltonian(StagedConjugationFamily{alpha_hat, std::move(generators)});
  }

  // Ĥ(t, p) = −H(−t, p); its time-one map is the inverse of H's.
  Hamiltonian inverse() const {
    Hamiltonian h;
    h.impl_ = std::make_shared<Inverse>(impl_);
    return h;
  }

  double value(double t, double x, double y) const { return impl_->value(t, x, y); }
  Vec2 gradient(double t, double x, double y) const { return impl_->gradient(t, x, y); }
  HessianSample second_order(double t, double x, double y) const {
    return impl_->second_order(t, x, y);
  }
  Mat2 hessian(double t, double x, double y) const { return second_order(t, x, y).hessian; }

  // X_H = (−∂H/∂y, ∂H/∂x), from ω₀(X_H, ·) = −dH with ω₀ = dx∧dy.
  Vec2 vector_field(double t, const Vec2& p) const {
    Vec2 g = gradient(t, p.x(), p.y());
    return {-g.y(), g.x()};
  }

  const std::string& tag() const { return impl_->tag(); }
  bool is_inverse() const { return impl_->inverted(); }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual double value(double t, double x, double y) const = 0;
    virtual Vec2 gradient(double t, double x, double y) const = 0;
    virtual HessianSample second_order(double t, double x, double y) const = 0;
    virtual const std::string& tag() const = 0;
    virtual bool inverted() const { return false; }
  };

  template <class Family>
  struct Model final : Concept {
    Model(Family f, std::string t) : family(std::move(f)), tag_(std::move(t)) {}
    double value(double t, double x, double y) const override { return family.eval(t, x, y); }
    Vec2 gradient(double t, double x, double y) const override {
      Jet1 j = family.eval(t, Jet1::var_x(x), Jet1::var_y(y));
      return {j.dx, j.dy};
    }
    HessianSample second_order(double t, double x, double y) const override {
      Jet2 j = family.eval(t, Jet2::var_x(x), Jet2::var_y(y));
      Mat2 h;
      h << j.dxx, j.dxy, j.dxy, j.dyy;
      return {j.v, Vec2(j.dx, j.dy), h};
    }
    const std::string& tag() const override { return tag_; }
    Family family;
    std::string tag_;
  };

  struct Inverse final : Concept {
    explicit Inverse(std::shared_ptr<const Concept> b) : base(std::move(b)), tag_(base->tag()) {}
    double value(double t, double x, double y) const override { return -base->value(-t, x, y); }
    Vec2 gradient(double t, double x, double y) const override {
      return -base->gradient(-t, x, y);
    }
    HessianSample second_order(double t, double x, double y) const override {
      HessianSample s = base->second_order(-t, x, y);
      return {-s.value, -s.gradient, -s.hessian};
    }
    const std::string& tag() const override { return tag_; }
    bool inverted() const override { return !base->inverted(); }
    std::shared_ptr<const Concept> base;
    std::string tag_;
  };

  template <class Family>
  static std::string family_tag() {
    if constexpr (std::is_same_v<Family, RigidFamily>) return "rigid";
    else if constexpr (std::is_same_v<Family, PerturbedFamily>) return "perturbed";
    else if constexpr (std::is_same_v<Family, StagedConjugationFamily>) return "staged_conjugation";
    else return "custom";
  }

  std::shared_ptr<const Concept> impl_;
};

}  // namespace pseudorot
