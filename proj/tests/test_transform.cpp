#include <gtest/gtest.h>

#include "sdicov/dense_reference.hpp"
#include "sdicov/rng.hpp"
#include "sdicov/transform.hpp"

using namespace sdicov;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

Vector gaussian(Eigen::Index n, Rng& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

void expect_vec(const Vector& got, const Vector& want, double tol = 1e-14) {
  ASSERT_EQ(got.size(), want.size());
  for (Eigen::Index i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "component " << i;
}

TransformChain two_member_chain() {
  TransformChain c(2);
  c.push_back(make_transform(v2(1, 0), v2(0, 1)));
  c.push_back(make_transform(v2(0, 1), v2(1, 0)));
  return c;
}

}  // namespace

TEST(RankOneTransform, OrthogonalPairHasUnitMu) {
  auto t = make_transform(v2(1, 0), v2(0, 1));
  EXPECT_EQ(t.p_norm_sq(), 1.0);
  EXPECT_EQ(t.mu(), 1.0);
}

TEST(RankOneTransform, MuMatchesDeterminant) {
  auto t = make_transform(v2(2, 0), v2(1, 1));
  EXPECT_EQ(t.p_norm_sq(), 4.0);
  EXPECT_NEAR(t.mu(), 1.5, 1e-15);
  EXPECT_NEAR(dense::matrix_of(t).determinant(), 1.5, 1e-14);
}

TEST(RankOneTransform, RejectsSingular) {
  try {
    make_transform(v2(1, 0), v2(-1, 0));
    FAIL() << "expected NearSingular";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NearSingular);
  }
}

TEST(RankOneTransform, RejectsZeroDirectionAndMismatch) {
  try {
    make_transform(v2(0, 0), v2(1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroDirection);
  }
  try {
    make_transform(v2(1, 0), Vector::Ones(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(RankOneTransform, ApplyExamples) {
  expect_vec(make_transform(v2(1, 0), v2(0, 1)).apply(v2(0, 1)), v2(1, 1));
  expect_vec(make_transform(v2(1, 2), v2(3, 4)).apply(v2(1, 1)), v2(2.4, 3.8));
  expect_vec(make_transform(v2(1, 2), v2(3, 4)).apply(v2(0, 0)), v2(0, 0), 0.0);
}

TEST(RankOneTransform, AdjointExamples) {
  expect_vec(make_transform(v2(1, 0), v2(0, 1)).apply_adjoint(v2(1, 0)), v2(1, 1));
  expect_vec(make_transform(v2(1, 0), v2(0, 1)).apply_adjoint(v2(0, 5)), v2(0, 5), 0.0);
  expect_vec(make_transform(v2(1, 2), v2(3, 4)).apply_adjoint(v2(1, 1)), v2(2.8, 3.4));
}

TEST(RankOneTransform, InverseExamples) {
  expect_vec(make_transform(v2(1, 0), v2(0, 1)).apply_inverse(v2(1, 1)), v2(0, 1));
  expect_vec(make_transform(v2(1, 3), v2(0, 0)).apply_inverse(v2(-2, 7)), v2(-2, 7), 0.0);
  expect_vec(make_transform(v2(1, 2), v2(3, 4)).apply_inverse(v2(2.4, 3.8)), v2(1, 1));
}

TEST(RankOneTransform, EigenvectorWhenOrthogonal) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Vector p = gaussian(6, rng);
    Vector g = gaussian(6, rng);
    g -= p * (g.dot(p) / p.squaredNorm());
    auto t = make_transform(p, g);
    EXPECT_LE(relative_error(t.apply(p), p), 1e-14);
  }
}

TEST(RankOneTransform, RandomRoundTripAndAdjoint) {
  Rng rng(11);
  int checked = 0;
  while (checked < 500) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(8));
    Vector p = gaussian(n, rng), g = gaussian(n, rng), x = gaussian(n, rng), y = gaussian(n, rng);
    if (std::abs(1.0 + g.dot(p) / p.squaredNorm()) < 1e-6) continue;
    auto t = make_transform(p, g);
    EXPECT_LE(relative_error(t.apply_inverse(t.apply(x)), x), 1e-10);
    EXPECT_LE(relative_error(t.apply(t.apply_inverse(x)), x), 1e-10);
    const double lhs = t.apply(x).dot(y);
    const double rhs = x.dot(t.apply_adjoint(y));
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * t.apply(x).norm() * y.norm());
    ++checked;
  }
}

TEST(TransformChain, EmptyIsIdentity) {
  TransformChain c(2);
  expect_vec(c.forward(v2(3, -1)), v2(3, -1), 0.0);
  expect_vec(c.adjoint(v2(3, -1)), v2(3, -1), 0.0);
  expect_vec(c.inverse(v2(3, -1)), v2(3, -1), 0.0);
  expect_vec(c.h_apply(v2(3, -1)), v2(3, -1), 0.0);
}

TEST(TransformChain, SingleMemberMatchesTransform) {
  auto t = make_transform(v2(1, 2), v2(3, 4));
  TransformChain c(2);
  c.push_back(t);
  expect_vec(c.forward(v2(1, 1)), t.apply(v2(1, 1)), 0.0);
  expect_vec(c.adjoint(v2(1, 1)), t.apply_adjoint(v2(1, 1)), 0.0);
}

TEST(TransformChain, TwoMemberExamples) {
  const auto c = two_member_chain();
  expect_vec(c.forward(v2(1, 1)), v2(3, 2));
  expect_vec(c.adjoint(v2(1, 1)), v2(3, 2));
  expect_vec(c.inverse(v2(3, 2)), v2(1, 1));
}

TEST(TransformChain, HApplyExample) {
  TransformChain c(2);
  c.push_back(make_transform(v2(1, 0), v2(0, 1)));
  expect_vec(c.h_apply(v2(0, 1)), v2(1, 1));
}

TEST(TransformChain, HandWrittenDenseProducts) {
  // L1 = I + e1 e2^T, L2 = I + e2 e1^T
  Matrix l1{{1, 1}, {0, 1}};
  Matrix l2{{1, 0}, {1, 1}};
  const auto c = two_member_chain();
  const Vector x = v2(0.3, -1.7);
  expect_vec(c.forward(x), l1 * l2 * x);
  expect_vec(c.adjoint(x), l2.transpose() * l1.transpose() * x);
  expect_vec(c.inverse(x), (l1 * l2).inverse() * x);
  expect_vec(c.h_apply(x), l1 * l2 * l2.transpose() * l1.transpose() * x);
}

TEST(TransformChain, DimensionAndPrefixErrors) {
  TransformChain c(2);
  try {
    c.push_back(make_transform(Vector::Ones(3), Vector::Zero(3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    c.forward(Vector::Ones(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    (void)c.prefix(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
  }
  const auto two = two_member_chain();
  EXPECT_EQ(two.prefix(1).size(), 1u);
  expect_vec(two.prefix(1).forward(v2(1, 1)), two[0].apply(v2(1, 1)), 0.0);
}

TEST(TransformChain, RandomChainsAgreeWithDenseOracle) {
  Rng rng(2024);
  int cases = 0;
  while (cases < 200) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(8));
    const int k = 1 + static_cast<int>(rng.index(6));
    TransformChain c(n);
    while (static_cast<int>(c.size()) < k) {
      Vector p = gaussian(n, rng), g = gaussian(n, rng);
      if (std::abs(1.0 + g.dot(p) / p.squaredNorm()) < 1e-6) continue;
      c.push_back(make_transform(p, g));
    }
    const Vector x = gaussian(n, rng);
    const Vector w = gaussian(n, rng);
    EXPECT_LE(dense::compare_chain(c, x).max(), 1e-10);
    EXPECT_LE(relative_error(c.inverse(c.forward(x)), x), 1e-10);
    EXPECT_GE(x.dot(c.h_apply(x)), 0.0);
    const double a = c.h_apply(x).dot(w);
    const double b = x.dot(c.h_apply(w));
    EXPECT_LE(std::abs(a - b), 1e-12 * std::max(std::abs(a), c.h_apply(x).norm() * w.norm()));
    ++cases;
  }
}
