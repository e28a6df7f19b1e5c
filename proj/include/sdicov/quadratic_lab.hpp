#pragma once

// Convex quadratics f(x) = x^T A x / 2 - b^T x with dense data, used to check
// the change-of-variables method against its exact-arithmetic properties:
// the explicitly updated form (f_k = f_{k-1} o l_k), linear conjugate
// gradient, Krylov subspace shrinkage, and the secant condition.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sdicov/objective.hpp"
#include "sdicov/optimizers.hpp"
#include "sdicov/rng.hpp"
#include "sdicov/transform.hpp"

namespace sdicov {

class QuadraticObjective {
 public:
  static constexpr Eigen::Index kMaxCheckedDimension = 200;

  QuadraticObjective(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != a_.cols()) throw Error(ErrorCode::DimensionMismatch, "A must be square");
    require_same_size(a_.rows(), b_.size(), "QuadraticObjective: b");
    const double scale = a_.cwiseAbs().maxCoeff();
    if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(ErrorCode::NotPositiveDefinite, "A is not symmetric");
    }
    if (a_.rows() <= kMaxCheckedDimension) {
      Eigen::LLT<Matrix> llt(a_);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NotPositiveDefinite, "A failed Cholesky factorization");
      }
    }
  }

  const Matrix& a() const noexcept { return a_; }
  const Vector& b() const noexcept { return b_; }
  Eigen::Index dimension() const noexcept { return b_.size(); }

  double value(const Vector& x) const { return 0.5 * x.dot(a_ * x) - b_.dot(x); }
  Vector gradient(const Vector& x) const { return a_ * x - b_; }
  Vector minimizer() const { return a_.llt().solve(b_); }

  ObjectiveOracle oracle() const {
    ObjectiveOracle o;
    o.dimension = dimension();
    auto a = a_;
    auto b = b_;
    o.value = [a, b](const Vector& x) { return 0.5 * x.dot(a * x) - b.dot(x); };
    o.gradient = [a, b](const Vector& x) -> Vector { return a * x - b; };
    o.hessian_apply = [a](const Vector& v) -> Vector { return a * v; };
    return o;
  }

 private:
  Matrix a_;
  Vector b_;
};

/// Q from the QR factorization of a Gaussian matrix.
inline Matrix random_orthogonal(Eigen::Index n, Rng& rng) {
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(n, n);
}

inline Matrix spd_from_spectrum(const Vector& eigenvalues, Rng& rng) {
  const Matrix q = random_orthogonal(eigenvalues.size(), rng);
  Matrix a = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

/// Eigenvalues log-uniform in [1, kappa]; b has standard normal entries.
inline QuadraticObjective random_spd_quadratic(Eigen::Index n, double kappa, Rng& rng) {
  Vector lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) lambda[i] = std::pow(kappa, rng.uniform());
  Matrix a = spd_from_spectrum(lambda, rng);
  Vector b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = rng.normal();
  return QuadraticObjective(std::move(a), std::move(b));
}

/// SPD matrix with exactly `distinct` different eigenvalues (each used at
/// least once), values log-uniform in [1, kappa].
inline QuadraticObjective quadratic_with_distinct_eigenvalues(Eigen::Index n, int distinct,
                                                              double kappa, Rng& rng) {
  if (distinct < 1 || distinct > n) throw Error(ErrorCode::Config, "distinct eigenvalue count");
  std::vector<double> values(static_cast<std::size_t>(distinct));
  for (int s = 0; s < distinct; ++s) {
    // stratified so the values are genuinely distinct
    values[static_cast<std::size_t>(s)] =
        std::pow(kappa, (s + 0.1 + 0.8 * rng.uniform()) / distinct);
  }
  Vector lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lambda[i] = i < distinct ? values[static_cast<std::size_t>(i)] : values[rng.index(values.size())];
  }
  Matrix a = spd_from_spectrum(lambda, rng);
  Vector b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = rng.normal();
  return QuadraticObjective(std::move(a), std::move(b));
}

// ---------------------------------------------------------------------------
// Linear conjugate gradient

struct LinearCgState {
  int k = 0;
  Vector x;
  Vector r;      ///< r_k = r_{k-1} - alpha_k A n_k (recurrence, not recomputed)
  Vector n_dir;  ///< n_k; empty for k = 0
  double beta = 0.0;
  double alpha = 0.0;
};

/// Classical CG for A x = b, written with the textbook recurrences. Stops when
/// ||r_k|| <= tol ||r_0|| or after n steps. Entry 0 holds (x_0, r_0).
inline std::vector<LinearCgState> linear_cg(const QuadraticObjective& q, const Vector& x0,
                                            double tol) {
  require_same_size(q.dimension(), x0.size(), "linear_cg: x0");
  const Matrix& a = q.a();
  std::vector<LinearCgState> trace;
  LinearCgState s0;
  s0.x = x0;
  s0.r = q.b() - a * x0;
  trace.push_back(s0);
  const double r0_norm = s0.r.norm();
  if (r0_norm == 0.0) return trace;

  for (int k = 1; k <= q.dimension(); ++k) {
    const auto& prev = trace.back();
    LinearCgState s;
    s.k = k;
    if (k == 1) {
      s.n_dir = prev.r;
    } else {
      const auto& prev2 = trace[trace.size() - 2];
      s.beta = prev.r.squaredNorm() / prev2.r.squaredNorm();
      s.n_dir = s.beta * prev.n_dir + prev.r;
    }
    const Vector an = a * s.n_dir;
    const double curvature = s.n_dir.dot(an);
    if (!(curvature > 0.0)) throw Error(ErrorCode::Breakdown, "linear_cg: n^T A n <= 0");
    s.alpha = prev.r.squaredNorm() / curvature;
    s.x = prev.x + s.alpha * s.n_dir;
    s.r = prev.r - s.alpha * an;
    trace.push_back(std::move(s));
    if (trace.back().r.norm() <= tol * r0_norm) break;
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Explicitly updated change of variables (f_k = f_{k-1} o l_k)

struct Algorithm1State {
  int k = 0;
  Matrix a;         ///< A_k = l_k^T A_{k-1} l_k
  Vector b;         ///< b_k = l_k^T b_{k-1}
  Vector w;         ///< w_k = l_k^{-1}(w_tilde_k)
  Vector w_tilde;   ///< w_{k-1} + alpha_k p_k; empty for k = 0
  Vector p;         ///< -grad f_{k-1}(w_{k-1})
  Vector g;         ///< -grad f_{k-1}(w_tilde_k)
  double alpha = 0.0;
  Vector x;         ///< the same point in original coordinates
  bool transform_appended = false;
};

struct Algorithm1Trace {
  std::vector<Algorithm1State> states;  ///< states[0] is the starting data
  TransformChain chain;
  Vector solution;  ///< chain.forward(w_N)
};

/// Runs the explicitly updated method with exact steps. Terminates when the
/// original-coordinate gradient at the current point falls to
/// tol * (initial gradient norm), or after `max_iterations` (default n).
inline Algorithm1Trace algorithm1_quadratic(const QuadraticObjective& q, const Vector& w0,
                                            double tol, int max_iterations = -1,
                                            double eps_inv = kDefaultInvertibilityEps) {
  const Eigen::Index n = q.dimension();
  require_same_size(n, w0.size(), "algorithm1_quadratic: w0");
  if (max_iterations < 0) max_iterations = static_cast<int>(n);

  Algorithm1Trace trace{{}, TransformChain(n), {}};
  Algorithm1State s0;
  s0.a = q.a();
  s0.b = q.b();
  s0.w = w0;
  s0.x = w0;
  trace.states.push_back(s0);

  const double g0_norm = q.gradient(w0).norm();
  if (g0_norm == 0.0) {
    trace.solution = w0;
    return trace;
  }

  for (int k = 1; k <= max_iterations; ++k) {
    const Algorithm1State& prev = trace.states.back();
    Algorithm1State s;
    s.k = k;
    s.p = prev.b - prev.a * prev.w;
    s.alpha = exact_quadratic_alpha([&](const Vector& v) -> Vector { return prev.a * v; }, s.p);
    s.w_tilde = prev.w + s.alpha * s.p;
    s.g = prev.b - prev.a * s.w_tilde;
    s.x = trace.chain.forward(s.w_tilde);

    const bool done = q.gradient(s.x).norm() <= tol * g0_norm;
    if (done) {
      s.a = prev.a;
      s.b = prev.b;
      s.w = s.w_tilde;
      trace.states.push_back(std::move(s));
      break;
    }
    RankOneTransform l = make_transform(s.p, s.g, eps_inv);
    const Matrix lmat = Matrix::Identity(n, n) + l.p() * l.g().transpose() / l.p_norm_sq();
    s.a = lmat.transpose() * prev.a * lmat;
    s.a = 0.5 * (s.a + s.a.transpose());
    s.b = l.apply_adjoint(prev.b);
    s.w = l.apply_inverse(s.w_tilde);
    trace.chain.push_back(std::move(l));
    s.transform_appended = true;
    trace.states.push_back(std::move(s));
  }
  trace.solution = trace.chain.forward(trace.states.back().w);
  return trace;
}

// ---------------------------------------------------------------------------
// Verifiers

struct CgEquivalenceIteration {
  int k = 0;
  double p_vs_r = 0.0;      ///< p_k against r_{k-1}
  double m_vs_n = 0.0;      ///< m_k against n_k
  double g_vs_r = 0.0;      ///< g_k against r_k
  double alpha = 0.0;
  double max() const { return std::max({p_vs_r, m_vs_n, g_vs_r, alpha}); }
};

struct CgEquivalenceReport {
  std::vector<CgEquivalenceIteration> iterations;
  int sdicov_iterations = 0;
  int cg_iterations = 0;
  double max_deviation = 0.0;
  bool passed = false;
};

/// ||a - b|| / max(||b||, floor). Quantities that should vanish in exact
/// arithmetic are compared on the scale `floor` instead of their own
/// (rounding-level) norm.
inline double floored_deviation(const Vector& a, const Vector& b, double floor) {
  const double ref = std::max(b.norm(), floor);
  return ref > 0.0 ? (a - b).norm() / ref : (a - b).norm();
}

inline constexpr double kDefaultVerifyTol = TerminationPolicy{}.grad_rel_tol;

/// Runs SDICOV with exact line search and linear CG from the same start and
/// compares p_k = r_{k-1}, m_k = n_k, g_k = r_k, alpha_k iteration by
/// iteration. Both runs stop at relative residual `tol`; vector deviations
/// are relative, floored at tol * ||r_0||.
inline CgEquivalenceReport verify_cg_equivalence(const QuadraticObjective& q, const Vector& x0,
                                                 double tol = kDefaultVerifyTol,
                                                 double threshold = 1e-8) {
  TerminationPolicy term;
  term.grad_rel_tol = tol;
  term.max_iterations = static_cast<int>(q.dimension());
  const RunReport run = sdicov_minimize(q.oracle(), x0, LineSearchSpec::exact(), term);
  const auto cg = linear_cg(q, x0, tol);

  CgEquivalenceReport report;
  report.sdicov_iterations = run.iterations;
  report.cg_iterations = static_cast<int>(cg.size()) - 1;
  const double floor = tol * cg[0].r.norm();
  const std::size_t common = std::min(run.records.size(), cg.size() - 1);
  for (std::size_t i = 0; i < common; ++i) {
    const auto& rec = run.records[i];
    const auto& st = cg[i + 1];
    CgEquivalenceIteration it;
    it.k = rec.k;
    it.p_vs_r = floored_deviation(rec.p, cg[i].r, floor);
    it.m_vs_n = floored_deviation(rec.m, st.n_dir, floor);
    it.g_vs_r = floored_deviation(rec.g, st.r, floor);
    it.alpha = relative_error(rec.alpha, st.alpha);
    report.max_deviation = std::max(report.max_deviation, it.max());
    report.iterations.push_back(it);
  }
  report.passed = report.max_deviation <= threshold &&
                  std::abs(report.sdicov_iterations - report.cg_iterations) <= 1;
  return report;
}

struct AlgorithmEquivalenceReport {
  int iterations_compared = 0;
  double max_trace_deviation = 0.0;       ///< over p_k, g_k, alpha_k
  double max_coordinate_deviation = 0.0;  ///< x_k against l_1 o ... o l_k (w_k)
};

/// Runs the explicitly updated method and SDICOV (exact line search) side by
/// side and compares their p_k, g_k, alpha_k and the coordinate map
/// x_k = l_1 o ... o l_k (w_k). p and g deviations are floored at tol * ||p_1||.
inline AlgorithmEquivalenceReport verify_algorithm_equivalence(const QuadraticObjective& q,
                                                               const Vector& w0,
                                                               double tol = kDefaultVerifyTol) {
  const Algorithm1Trace a1 = algorithm1_quadratic(q, w0, tol);
  TerminationPolicy term;
  term.grad_rel_tol = tol;
  term.max_iterations = static_cast<int>(q.dimension());
  const RunReport run = sdicov_minimize(q.oracle(), w0, LineSearchSpec::exact(), term);

  AlgorithmEquivalenceReport report;
  if (a1.states.size() < 2 || run.records.empty()) return report;
  const double floor = tol * a1.states[1].p.norm();
  std::size_t appended = 0;
  for (std::size_t i = 0; i < run.records.size() && i + 1 < a1.states.size(); ++i) {
    const auto& s = a1.states[i + 1];
    const auto& rec = run.records[i];
    if (s.transform_appended) ++appended;
    const double trace = std::max({floored_deviation(rec.p, s.p, floor),
                                   floored_deviation(rec.g, s.g, floor),
                                   relative_error(rec.alpha, s.alpha)});
    const Vector mapped = a1.chain.prefix(appended).forward(s.w);
    report.max_trace_deviation = std::max(report.max_trace_deviation, trace);
    report.max_coordinate_deviation =
        std::max(report.max_coordinate_deviation, relative_error(mapped, rec.x));
    ++report.iterations_compared;
  }
  return report;
}

struct KrylovBasis {
  Matrix basis;  ///< n x dim, orthonormal columns
  int dim = 0;
};

/// Orthonormal basis of span(p, Ap, A^2 p, ...) by repeated multiplication
/// with two passes of Gram-Schmidt. Growth stops when the new vector's
/// residual after orthogonalization drops below drop_tol times its norm.
inline KrylovBasis krylov_dim(const Matrix& a, const Vector& p, double drop_tol = 1e-8) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "krylov_dim: A not square");
  require_same_size(a.rows(), p.size(), "krylov_dim: p");
  const double p_norm = p.norm();
  if (!(p_norm > 0.0)) throw Error(ErrorCode::ZeroDirection, "krylov_dim: p = 0");

  const Eigen::Index n = p.size();
  Matrix q(n, n);
  q.col(0) = p / p_norm;
  Eigen::Index dim = 1;
  while (dim < n) {
    Vector v = a * q.col(dim - 1);
    const double v_norm = v.norm();
    if (v_norm == 0.0) break;
    for (int pass = 0; pass < 2; ++pass) {
      v -= q.leftCols(dim) * (q.leftCols(dim).transpose() * v);
    }
    const double residual = v.norm();
    if (residual < drop_tol * v_norm) break;
    q.col(dim) = v / residual;
    ++dim;
  }
  return KrylovBasis{q.leftCols(dim), static_cast<int>(dim)};
}

struct ShrinkageReport {
  std::vector<int> dims;  ///< dim K(A_{k-1}, p_k) for k = 1, 2, ...
  double max_containment_residual = 0.0;
  bool strictly_decreasing = true;
  bool passed = false;
};

/// Checks that K(A_k, p_{k+1}) is contained in K(A_{k-1}, p_k) intersected
/// with the orthogonal complement of p_k, and that its dimension drops every
/// iteration.
inline ShrinkageReport verify_subspace_shrinkage(const QuadraticObjective& q, const Vector& w0,
                                                 double tol = kDefaultVerifyTol,
                                                 double residual_limit = 1e-6) {
  if (q.dimension() > 50) throw Error(ErrorCode::Config, "shrinkage check limited to n <= 50");
  const Algorithm1Trace trace = algorithm1_quadratic(q, w0, tol);
  ShrinkageReport report;
  std::vector<KrylovBasis> bases;
  for (std::size_t k = 1; k < trace.states.size(); ++k) {
    const auto& s = trace.states[k];
    bases.push_back(krylov_dim(trace.states[k - 1].a, s.p));
    report.dims.push_back(bases.back().dim);
  }
  for (std::size_t i = 1; i < bases.size(); ++i) {
    if (report.dims[i] >= report.dims[i - 1]) report.strictly_decreasing = false;
    const Matrix& old_basis = bases[i - 1].basis;
    const Vector p_hat = trace.states[i].p.normalized();
    const Matrix& v = bases[i].basis;
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      const Vector col = v.col(c);
      const double outside = (col - old_basis * (old_basis.transpose() * col)).norm();
      const double along_p = std::abs(p_hat.dot(col));
      report.max_containment_residual =
          std::max({report.max_containment_residual, outside, along_p});
    }
  }
  report.passed = report.strictly_decreasing && report.max_containment_residual <= residual_limit;
  return report;
}

/// Secant residual ||H y - m|| / ||m|| for record `index` of an SDICOV run,
/// where y = grad f(x_k) - grad f(x_{k-1}), m = m_k, and H is built from the
/// transforms that formed m_k followed by the transform l_k made from that
/// record's (p_k, g_k). `index` is 0-based into run.records.
inline double verify_secant(const ObjectiveOracle& f, const RunReport& run, std::size_t index,
                            double eps_inv = kDefaultInvertibilityEps) {
  if (!run.chain) throw Error(ErrorCode::InvalidInput, "verify_secant: run has no transform chain");
  if (index >= run.records.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "verify_secant: iteration index out of range");
  }
  const IterationRecord& rec = run.records[index];
  const Vector& x_prev = index == 0 ? run.x0 : run.records[index - 1].x;
  const Vector y = f.gradient_at(rec.x) - f.gradient_at(x_prev);
  TransformChain h = run.chain->prefix(rec.chain_length);
  try {
    h.push_back(make_transform(rec.p, rec.g, eps_inv));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NearSingular) throw;
  }
  return (h.h_apply(y) - rec.m).norm() / rec.m.norm();
}

}  // namespace sdicov
