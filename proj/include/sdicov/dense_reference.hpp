#pragma once

// Dense-matrix counterparts of the matrix-free transform operations. These
// form explicit n x n products and exist only to cross-check TransformChain;
// nothing on the optimization path uses them.

#include "sdicov/transform.hpp"

namespace sdicov::dense {

inline Matrix matrix_of(const RankOneTransform& t) {
  const auto n = t.dimension();
  return Matrix::Identity(n, n) + t.p() * t.g().transpose() / t.p().dot(t.p());
}

/// L_1 L_2 ... L_k.
inline Matrix product_of(const TransformChain& c) {
  Matrix out = Matrix::Identity(c.dimension(), c.dimension());
  for (const auto& t : c.members()) out = out * matrix_of(t);
  return out;
}

struct ChainCheck {
  double forward = 0.0;
  double adjoint = 0.0;
  double inverse = 0.0;
  double h_apply = 0.0;
  double max() const { return std::max({forward, adjoint, inverse, h_apply}); }
};

/// Relative disagreement of each chain operation with its dense product at x.
inline ChainCheck compare_chain(const TransformChain& c, const Vector& x) {
  const Matrix l = product_of(c);
  ChainCheck out;
  out.forward = relative_error(c.forward(x), l * x);
  out.adjoint = relative_error(c.adjoint(x), l.transpose() * x);
  out.inverse = relative_error(c.inverse(x), l.partialPivLu().solve(x));
  out.h_apply = relative_error(c.h_apply(x), l * (l.transpose() * x));
  return out;
}

}  // namespace sdicov::dense
