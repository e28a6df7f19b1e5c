#pragma once

// Rank-one changes of variables l(x) = (I + p g^T / ||p||^2) x and ordered
// chains of them. Everything is matrix-free: a transform is the pair (p, g)
// plus the cached ||p||^2, and each application costs O(n).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sdicov/types.hpp"

namespace sdicov {

inline constexpr double kDefaultInvertibilityEps = 1e-10;

class RankOneTransform {
 public:
  const Vector& p() const noexcept { return p_; }
  const Vector& g() const noexcept { return g_; }
  double p_norm_sq() const noexcept { return p_norm_sq_; }
  /// Invertibility margin 1 + g.p / ||p||^2; equals det(I + p g^T / ||p||^2).
  double mu() const noexcept { return mu_; }
  Eigen::Index dimension() const noexcept { return p_.size(); }

  Vector apply(const Vector& x) const {
    require_same_size(dimension(), x.size(), "RankOneTransform::apply");
    return x + p_ * (g_.dot(x) / p_norm_sq_);
  }

  Vector apply_adjoint(const Vector& x) const {
    require_same_size(dimension(), x.size(), "RankOneTransform::apply_adjoint");
    return x + g_ * (p_.dot(x) / p_norm_sq_);
  }

  /// Sherman-Morrison: (I + p g^T/||p||^2)^{-1} x = x - p (g.x) / (||p||^2 + g.p).
  Vector apply_inverse(const Vector& x) const {
    require_same_size(dimension(), x.size(), "RankOneTransform::apply_inverse");
    const double denom = p_norm_sq_ + g_.dot(p_);
    if (denom == 0.0 || !std::isfinite(denom)) {
      throw Error(ErrorCode::NearSingular, "apply_inverse: ||p||^2 + g.p vanishes");
    }
    return x - p_ * (g_.dot(x) / denom);
  }

 private:
  RankOneTransform(Vector p, Vector g, double p_norm_sq, double mu)
      : p_(std::move(p)), g_(std::move(g)), p_norm_sq_(p_norm_sq), mu_(mu) {}

  friend RankOneTransform make_transform(Vector p, Vector g, double eps_inv);

  Vector p_;
  Vector g_;
  double p_norm_sq_;
  double mu_;
};

/// Builds l = I + p g^T / ||p||^2. Throws ZeroDirection when ||p||^2 is zero
/// and NearSingular when |1 + g.p/||p||^2| < eps_inv.
inline RankOneTransform make_transform(Vector p, Vector g,
                                       double eps_inv = kDefaultInvertibilityEps) {
  require_same_size(p.size(), g.size(), "make_transform");
  if (p.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "make_transform: empty vectors");
  }
  const double p_norm_sq = p.squaredNorm();
  if (!(p_norm_sq > 0.0) || !std::isfinite(p_norm_sq)) {
    throw Error(ErrorCode::ZeroDirection, "make_transform: ||p||^2 is zero or not finite");
  }
  const double mu = 1.0 + g.dot(p) / p_norm_sq;
  if (!(std::abs(mu) >= eps_inv)) {
    throw Error(ErrorCode::NearSingular,
                "make_transform: invertibility margin " + std::to_string(mu) + " below threshold");
  }
  return RankOneTransform(std::move(p), std::move(g), p_norm_sq, mu);
}

/// Ordered transforms l_1 ... l_k, standing for the composite l_1 o ... o l_k.
class TransformChain {
 public:
  explicit TransformChain(Eigen::Index dimension) : dimension_(dimension) {}

  Eigen::Index dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return transforms_.size(); }
  bool empty() const noexcept { return transforms_.empty(); }
  const RankOneTransform& operator[](std::size_t i) const { return transforms_[i]; }
  const RankOneTransform& back() const { return transforms_.back(); }
  std::span<const RankOneTransform> members() const noexcept { return transforms_; }

  void push_back(RankOneTransform t) {
    require_same_size(dimension_, t.dimension(), "TransformChain::push_back");
    transforms_.push_back(std::move(t));
  }

  /// First `count` members as a new chain.
  TransformChain prefix(std::size_t count) const {
    if (count > transforms_.size()) {
      throw Error(ErrorCode::IndexOutOfRange, "TransformChain::prefix");
    }
    TransformChain out(dimension_);
    out.transforms_.assign(transforms_.begin(), transforms_.begin() + static_cast<std::ptrdiff_t>(count));
    return out;
  }

  /// l_1(l_2(...l_k(x))): members applied from last to first.
  Vector forward(Vector x) const {
    require_same_size(dimension_, x.size(), "TransformChain::forward");
    for (auto it = transforms_.rbegin(); it != transforms_.rend(); ++it) x = it->apply(x);
    return x;
  }

  /// l_k^T(...l_1^T(x)): adjoints applied from first to last.
  Vector adjoint(Vector x) const {
    require_same_size(dimension_, x.size(), "TransformChain::adjoint");
    for (const auto& t : transforms_) x = t.apply_adjoint(x);
    return x;
  }

  /// (l_1 o ... o l_k)^{-1}(x) = l_k^{-1}(...l_1^{-1}(x)).
  Vector inverse(Vector x) const {
    require_same_size(dimension_, x.size(), "TransformChain::inverse");
    for (const auto& t : transforms_) x = t.apply_inverse(x);
    return x;
  }

  /// H v with H = l_1...l_k l_k^T...l_1^T.
  Vector h_apply(const Vector& v) const { return forward(adjoint(v)); }

 private:
  Eigen::Index dimension_;
  std::vector<RankOneTransform> transforms_;
};

}  // namespace sdicov
