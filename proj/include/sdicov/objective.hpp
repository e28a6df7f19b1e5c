#pragma once

#include <functional>
#include <utility>

#include "sdicov/types.hpp"

namespace sdicov {

/// A differentiable objective f: R^n -> R. `value` may return a non-finite
/// number outside the objective's domain. `hessian_apply` is optional and is
/// only consulted by the exact quadratic line search.
struct ObjectiveOracle {
  Eigen::Index dimension = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&)> hessian_apply;

  double value_at(const Vector& x) const {
    require_same_size(dimension, x.size(), "ObjectiveOracle::value_at");
    return value(x);
  }
  Vector gradient_at(const Vector& x) const {
    require_same_size(dimension, x.size(), "ObjectiveOracle::gradient_at");
    return gradient(x);
  }
  bool has_hessian() const noexcept { return static_cast<bool>(hessian_apply); }
};

/// Central-difference gradient with per-coordinate step h * (1 + ||x||).
inline Vector finite_difference_gradient(const ObjectiveOracle& f, const Vector& x,
                                         double h = 1e-6) {
  const double step = h * (1.0 + x.norm());
  Vector out(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f.value_at(probe);
    probe[i] = x[i] - step;
    const double down = f.value_at(probe);
    probe[i] = x[i];
    out[i] = (up - down) / (2.0 * step);
  }
  return out;
}

}  // namespace sdicov
