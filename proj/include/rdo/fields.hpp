#pragma once

#include "rdo/common.hpp"
#include "rdo/geometry.hpp"

#include <memory>

namespace rdo {

/// Scalar field with derivatives up to order 2, the contract needed by both
/// hard-constraint wrapping (order 0) and physics-row assembly (order 2).
class ScalarField {
public:
  virtual ~ScalarField() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const Eigen::Ref<const Vector>& y) const = 0;
  virtual Vector gradient(const Eigen::Ref<const Vector>& y) const = 0;
  virtual Matrix hessian(const Eigen::Ref<const Vector>& y) const = 0;
};

class ZeroField final : public ScalarField {
public:
  explicit ZeroField(Eigen::Index dim) : dim_(dim) {}
  Eigen::Index dim() const override { return dim_; }
  double value(const Eigen::Ref<const Vector>&) const override { return 0.0; }
  Vector gradient(const Eigen::Ref<const Vector>&) const override { return Vector::Zero(dim_); }
  Matrix hessian(const Eigen::Ref<const Vector>&) const override {
    return Matrix::Zero(dim_, dim_);
  }

private:
  Eigen::Index dim_;
};

/// c(x) = x (1 - x) on [0,1]: vanishes at both interval ends.
class IntervalBubbleField final : public ScalarField {
public:
  Eigen::Index dim() const override { return 1; }
  double value(const Eigen::Ref<const Vector>& y) const override { return y(0) * (1.0 - y(0)); }
  Vector gradient(const Eigen::Ref<const Vector>& y) const override {
    Vector g(1);
    g(0) = 1.0 - 2.0 * y(0);
    return g;
  }
  Matrix hessian(const Eigen::Ref<const Vector>&) const override {
    Matrix h(1, 1);
    h(0, 0) = -2.0;
    return h;
  }
};

/// c(x, t) = t x (1 - x): vanishes on x = 0, x = 1 and the initial time line.
class TimeScaledBubbleField final : public ScalarField {
public:
  Eigen::Index dim() const override { return 2; }
  double value(const Eigen::Ref<const Vector>& y) const override {
    return y(1) * y(0) * (1.0 - y(0));
  }
  Vector gradient(const Eigen::Ref<const Vector>& y) const override {
    Vector g(2);
    g(0) = y(1) * (1.0 - 2.0 * y(0));
    g(1) = y(0) * (1.0 - y(0));
    return g;
  }
  Matrix hessian(const Eigen::Ref<const Vector>& y) const override {
    Matrix h(2, 2);
    h(0, 0) = -2.0 * y(1);
    h(0, 1) = h(1, 0) = 1.0 - 2.0 * y(0);
    h(1, 1) = 0.0;
    return h;
  }
};

/// Hard-constraint field of a parametric domain; zero outside, smooth inside.
class DomainConstraintField final : public ScalarField {
public:
  explicit DomainConstraintField(DomainSpec domain) : domain_(std::move(domain)) {}
  Eigen::Index dim() const override { return 2; }
  double value(const Eigen::Ref<const Vector>& y) const override {
    return c_field(domain_, y(0), y(1), 0).value;
  }
  Vector gradient(const Eigen::Ref<const Vector>& y) const override {
    return c_field(domain_, y(0), y(1), 1).grad;
  }
  Matrix hessian(const Eigen::Ref<const Vector>& y) const override {
    return c_field(domain_, y(0), y(1), 2).hess;
  }
  const DomainSpec& domain() const { return domain_; }

private:
  DomainSpec domain_;
};

}  // namespace rdo
