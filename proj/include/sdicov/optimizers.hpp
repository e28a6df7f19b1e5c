#pragma once

// Unconstrained minimizers sharing one driver: steepest descent with
// iterated change of variables (SDICOV), product-form BFGS and DFP, and
// nonlinear conjugate gradient (Polak-Ribiere+ and Fletcher-Reeves).
//
// The driver owns the iterate, the line search, termination and the trace;
// a method only supplies the search direction and its post-step update.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdicov/line_search.hpp"
#include "sdicov/objective.hpp"
#include "sdicov/transform.hpp"

namespace sdicov {

enum class Method { Sdicov, Bfgs, Dfp, CgPrPlus, CgFr };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Sdicov: return "sdicov";
    case Method::Bfgs: return "bfgs";
    case Method::Dfp: return "dfp";
    case Method::CgPrPlus: return "cg-pr+";
    case Method::CgFr: return "cg-fr";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::Sdicov, Method::Bfgs, Method::Dfp, Method::CgPrPlus, Method::CgFr}) {
    if (name == to_string(m)) return m;
  }
  if (name == "cg-pr") return Method::CgPrPlus;
  return std::nullopt;
}

inline constexpr Method kAllMethods[] = {Method::Sdicov, Method::Bfgs, Method::Dfp,
                                         Method::CgPrPlus, Method::CgFr};

enum class RunStatus { GradConverged, Stagnated, MaxIterations, LineSearchFailure };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::GradConverged: return "GradConverged";
    case RunStatus::Stagnated: return "Stagnated";
    case RunStatus::MaxIterations: return "MaxIterations";
    case RunStatus::LineSearchFailure: return "LineSearchFailure";
  }
  return "Unknown";
}

/// Per-iteration bookkeeping flags.
enum class StepEvent {
  None,
  NearSingularSkip,  // SDICOV: new transform not invertible enough, chain not extended
  CurvatureSkip,     // BFGS/DFP: y.s <= 0, update skipped
  DescentReset,      // CG: direction was not descent, reset to -grad
};

inline const char* to_string(StepEvent e) {
  switch (e) {
    case StepEvent::None: return "none";
    case StepEvent::NearSingularSkip: return "near-singular-skip";
    case StepEvent::CurvatureSkip: return "curvature-skip";
    case StepEvent::DescentReset: return "descent-reset";
  }
  return "unknown";
}

struct TerminationPolicy {
  double grad_rel_tol = 1e-5;
  int max_iterations = 5000;
  int stagnation_window = 4;
  double stagnation_rel = 1e-8;

  void validate() const {
    if (!(grad_rel_tol > 0.0) || max_iterations < 1 || stagnation_window < 1 ||
        !(stagnation_rel > 0.0)) {
      throw Error(ErrorCode::Config, "termination policy fields must be positive");
    }
  }
};

struct IterationRecord {
  int k = 0;
  Vector x;      ///< x_k = x_{k-1} + alpha * m
  Vector m;      ///< search direction in original coordinates
  double alpha = 0.0;
  Vector p;      ///< SDICOV: transformed steepest-descent direction (empty otherwise)
  Vector g;      ///< SDICOV: transformed negative gradient at x_k (empty otherwise)
  double f_value = 0.0;
  double grad_norm = 0.0;
  double slope = 0.0;  ///< grad f(x_{k-1}) . m
  LineSearchStatus ls_status = LineSearchStatus::Converged;
  double ls_end_slope = 0.0;  ///< phi'(alpha)
  int f_evals = 0;
  int g_evals = 0;
  std::size_t chain_length = 0;  ///< SDICOV: transforms used to form m
  std::size_t rank_one_ops = 0;  ///< rank-one applications spent on the direction and update
  StepEvent event = StepEvent::None;
};

struct RunReport {
  Method method = Method::Sdicov;
  RunStatus status = RunStatus::MaxIterations;
  int iterations = 0;
  std::vector<IterationRecord> records;
  Vector x0;
  Vector final_x;
  double initial_f = 0.0;
  double final_f = 0.0;
  double initial_grad_norm = 0.0;
  double final_grad_norm = 0.0;
  long f_evals = 0;
  long g_evals = 0;
  std::string detail;
  /// SDICOV only: every transform appended during the run, in order.
  std::optional<TransformChain> chain;
};

/// True iff none of the last `stagnation_window` steps decreased either f or
/// ||grad f|| by a relative amount >= stagnation_rel. Needs window+1 records;
/// returns false with fewer.
inline bool check_stagnation(std::span<const IterationRecord> records,
                             const TerminationPolicy& policy) {
  const auto window = static_cast<std::size_t>(policy.stagnation_window);
  if (records.size() < window + 1) return false;
  auto significant = [&](double before, double after) {
    const double drop = before - after;
    return drop > 0.0 && drop >= policy.stagnation_rel * std::abs(before);
  };
  for (std::size_t i = records.size() - window; i < records.size(); ++i) {
    const auto& prev = records[i - 1];
    const auto& cur = records[i];
    if (significant(prev.f_value, cur.f_value) || significant(prev.grad_norm, cur.grad_norm)) {
      return false;
    }
  }
  return true;
}

namespace detail {

template <class Strategy>
RunReport run_driver(Method method, const ObjectiveOracle& f, const Vector& x0,
                     const LineSearchSpec& ls, const TerminationPolicy& term, Strategy& strategy) {
  term.validate();
  if (ls.kind == LineSearchKind::Bisection) ls.validate();
  if (ls.kind == LineSearchKind::ExactQuadratic && !f.has_hessian()) {
    throw Error(ErrorCode::MissingHessian, "exact line search needs a Hessian-vector product");
  }
  require_same_size(f.dimension, x0.size(), "minimize: x0");

  RunReport report;
  report.method = method;
  report.x0 = x0;

  Vector x = x0;
  double fx = f.value_at(x);
  Vector grad = f.gradient_at(x);
  report.f_evals = 1;
  report.g_evals = 1;
  if (!grad.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "minimize: gradient at x0 is not finite");
  }
  report.initial_f = fx;
  report.initial_grad_norm = grad.norm();
  const double grad_target = term.grad_rel_tol * report.initial_grad_norm;

  auto finish = [&](RunStatus status) {
    report.status = status;
    report.iterations = static_cast<int>(report.records.size());
    report.final_x = x;
    report.final_f = fx;
    report.final_grad_norm = grad.norm();
    strategy.finalize(report);
    return report;
  };

  if (report.initial_grad_norm == 0.0) return finish(RunStatus::GradConverged);

  for (int k = 1; k <= term.max_iterations; ++k) {
    IterationRecord rec;
    rec.k = k;
    Vector m = strategy.direction(grad, rec);
    rec.slope = grad.dot(m);

    Vector x_new;
    double f_new = 0.0;
    Vector grad_new;
    int f_calls = 0;
    int g_calls = 0;

    if (ls.kind == LineSearchKind::ExactQuadratic) {
      if (!(rec.slope < 0.0)) {
        report.detail = "iteration " + std::to_string(k) + ": NonDescent";
        return finish(RunStatus::LineSearchFailure);
      }
      rec.alpha = exact_quadratic_step(f.hessian_apply, grad, m);
      rec.ls_status = LineSearchStatus::Converged;
      x_new = x + rec.alpha * m;
      f_new = f.value_at(x_new);
      grad_new = f.gradient_at(x_new);
      f_calls = g_calls = 1;
      rec.ls_end_slope = grad_new.dot(m);
    } else {
      // Remember the last gradient evaluated so the accepted step does not
      // need another oracle call.
      double cached_alpha = std::numeric_limits<double>::quiet_NaN();
      Vector cached_grad;
      auto phi = [&](double a) {
        if (a == 0.0) return fx;
        ++f_calls;
        return f.value_at(x + a * m);
      };
      auto phi_prime = [&](double a) {
        if (a == 0.0) return rec.slope;
        ++g_calls;
        cached_grad = f.gradient_at(x + a * m);
        cached_alpha = a;
        return cached_grad.dot(m);
      };
      const LineSearchResult res = bisection_search(phi, phi_prime, ls);
      rec.ls_status = res.status;
      rec.ls_end_slope = res.phi_alpha_slope;
      if (res.status == LineSearchStatus::NonDescent ||
          res.status == LineSearchStatus::DomainSafeguard) {
        report.f_evals += f_calls;
        report.g_evals += g_calls;
        report.detail = "iteration " + std::to_string(k) + ": " + to_string(res.status);
        return finish(RunStatus::LineSearchFailure);
      }
      rec.alpha = res.alpha;
      x_new = x + rec.alpha * m;
      f_new = res.phi_alpha;
      if (cached_alpha == res.alpha) {
        grad_new = std::move(cached_grad);
      } else {
        grad_new = f.gradient_at(x_new);
        ++g_calls;
      }
    }

    report.f_evals += f_calls;
    report.g_evals += g_calls;
    rec.f_evals = f_calls;
    rec.g_evals = g_calls;

    if (!std::isfinite(f_new) || !grad_new.allFinite()) {
      report.detail = "iteration " + std::to_string(k) + ": non-finite objective after step";
      return finish(RunStatus::LineSearchFailure);
    }

    const double grad_norm_new = grad_new.norm();
    const bool converged = grad_norm_new <= grad_target;
    strategy.update(x, x_new, grad, grad_new, rec.alpha, m, converged, rec);

    rec.x = x_new;
    rec.m = std::move(m);
    rec.f_value = f_new;
    rec.grad_norm = grad_norm_new;
    report.records.push_back(std::move(rec));

    x = std::move(x_new);
    fx = f_new;
    grad = std::move(grad_new);

    if (converged) return finish(RunStatus::GradConverged);
    if (check_stagnation(report.records, term)) return finish(RunStatus::Stagnated);
  }
  return finish(RunStatus::MaxIterations);
}

class SdicovStrategy {
 public:
  SdicovStrategy(Eigen::Index n, bool use_shortcut, double eps_inv)
      : chain_(n), use_shortcut_(use_shortcut), eps_inv_(eps_inv) {}

  Vector direction(const Vector& grad, IterationRecord& rec) {
    Vector p;
    if (!use_shortcut_ || prev_g_.size() == 0) {
      p = chain_.adjoint(-grad);
      rec.rank_one_ops += chain_.size();
    } else if (appended_last_) {
      // p_k = l_{k-1}^T(g_{k-1}).
      p = chain_.back().apply_adjoint(prev_g_);
      rec.rank_one_ops += 1;
    } else {
      p = prev_g_;
    }
    rec.chain_length = chain_.size();
    Vector m = chain_.forward(p);
    rec.rank_one_ops += chain_.size();
    rec.p = std::move(p);
    return m;
  }

  void update(const Vector&, const Vector&, const Vector&, const Vector& grad_new, double,
              const Vector&, bool converged, IterationRecord& rec) {
    rec.g = chain_.adjoint(-grad_new);
    rec.rank_one_ops += chain_.size();
    appended_last_ = false;
    if (!converged) {
      try {
        chain_.push_back(make_transform(rec.p, rec.g, eps_inv_));
        appended_last_ = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NearSingular && e.code() != ErrorCode::ZeroDirection) throw;
        rec.event = StepEvent::NearSingularSkip;
      }
    }
    prev_g_ = rec.g;
  }

  void finalize(RunReport& report) { report.chain = chain_; }

 private:
  TransformChain chain_;
  bool use_shortcut_;
  double eps_inv_;
  Vector prev_g_;
  bool appended_last_ = false;
};

/// Inverse-Hessian approximation kept as the list of (s, y) pairs; applied by
/// the two-loop recursion over the full history with H_1 = I.
class BfgsStrategy {
 public:
  Vector direction(const Vector& grad, IterationRecord& rec) {
    Vector q = -grad;
    std::vector<double> a(s_.size());
    for (std::size_t i = s_.size(); i-- > 0;) {
      a[i] = rho_[i] * s_[i].dot(q);
      q -= a[i] * y_[i];
    }
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const double b = rho_[i] * y_[i].dot(q);
      q += (a[i] - b) * s_[i];
    }
    rec.rank_one_ops += 2 * s_.size();
    return q;
  }

  void update(const Vector& x, const Vector& x_new, const Vector& grad, const Vector& grad_new,
              double, const Vector&, bool converged, IterationRecord& rec) {
    if (converged) return;
    Vector s = x_new - x;
    Vector y = grad_new - grad;
    const double sy = s.dot(y);
    if (!(sy > 0.0)) {
      rec.event = StepEvent::CurvatureSkip;
      return;
    }
    rho_.push_back(1.0 / sy);
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
  }

  void finalize(RunReport&) {}

 private:
  std::vector<Vector> s_;
  std::vector<Vector> y_;
  std::vector<double> rho_;
};

/// DFP inverse-Hessian approximation as a sum of rank-one terms:
/// H = I + sum_i ( s_i s_i^T / (s_i.y_i) - u_i u_i^T / (y_i.u_i) ), u_i = H_i y_i.
class DfpStrategy {
 public:
  Vector direction(const Vector& grad, IterationRecord& rec) {
    if (next_hg_.size() == grad.size()) return -next_hg_;
    rec.rank_one_ops += 2 * terms_.size();
    return -apply(grad);
  }

  // H_k y_k = H_k grad_new + m_k, since m_k = -H_k grad. Keeping H_{k+1} grad_new
  // for the next direction makes each iteration cost 2k + 2 rank-one terms.
  void update(const Vector& x, const Vector& x_new, const Vector& grad, const Vector& grad_new,
              double, const Vector& m, bool converged, IterationRecord& rec) {
    next_hg_.resize(0);
    if (converged) return;
    Vector s = x_new - x;
    Vector y = grad_new - grad;
    const double sy = s.dot(y);
    Vector hg = apply(grad_new);
    rec.rank_one_ops += 2 * terms_.size();
    Vector u = hg + m;
    const double yu = y.dot(u);
    if (!(sy > 0.0) || !(yu > 0.0)) {
      rec.event = StepEvent::CurvatureSkip;
      next_hg_ = std::move(hg);
      return;
    }
    next_hg_ = hg + s * (s.dot(grad_new) / sy) - u * (u.dot(grad_new) / yu);
    rec.rank_one_ops += 2;
    terms_.push_back(Term{std::move(s), std::move(u), sy, yu});
  }

  void finalize(RunReport&) {}

 private:
  struct Term {
    Vector s;
    Vector u;
    double sy;
    double yu;
  };

  Vector apply(const Vector& v) const {
    Vector out = v;
    for (const auto& t : terms_) {
      out += t.s * (t.s.dot(v) / t.sy) - t.u * (t.u.dot(v) / t.yu);
    }
    return out;
  }

  std::vector<Term> terms_;
  Vector next_hg_;
};

class NonlinearCgStrategy {
 public:
  explicit NonlinearCgStrategy(bool polak_ribiere_plus) : pr_plus_(polak_ribiere_plus) {}

  Vector direction(const Vector& grad, IterationRecord& rec) {
    Vector d;
    if (prev_grad_.size() == 0) {
      d = -grad;
    } else {
      const double denom = prev_grad_.squaredNorm();
      const double beta = pr_plus_ ? std::max(0.0, grad.dot(grad - prev_grad_) / denom)
                                   : grad.squaredNorm() / denom;
      d = -grad + beta * prev_dir_;
      if (!(grad.dot(d) < 0.0)) {
        d = -grad;
        rec.event = StepEvent::DescentReset;
      }
    }
    prev_grad_ = grad;
    prev_dir_ = d;
    return d;
  }

  void update(const Vector&, const Vector&, const Vector&, const Vector&, double, const Vector&,
              bool, IterationRecord&) {}

  void finalize(RunReport&) {}

 private:
  bool pr_plus_;
  Vector prev_grad_;
  Vector prev_dir_;
};

}  // namespace detail

struct SdicovOptions {
  /// Use p_k = l_{k-1}^T(g_{k-1}) instead of re-running the whole adjoint chain.
  bool use_shortcut = true;
  double eps_inv = kDefaultInvertibilityEps;
};

inline RunReport sdicov_minimize(const ObjectiveOracle& f, const Vector& x0,
                                 const LineSearchSpec& ls = {}, const TerminationPolicy& term = {},
                                 const SdicovOptions& options = {}) {
  detail::SdicovStrategy strategy(f.dimension, options.use_shortcut, options.eps_inv);
  return detail::run_driver(Method::Sdicov, f, x0, ls, term, strategy);
}

inline RunReport bfgs_minimize(const ObjectiveOracle& f, const Vector& x0,
                               const LineSearchSpec& ls = {}, const TerminationPolicy& term = {}) {
  detail::BfgsStrategy strategy;
  return detail::run_driver(Method::Bfgs, f, x0, ls, term, strategy);
}

inline RunReport dfp_minimize(const ObjectiveOracle& f, const Vector& x0,
                              const LineSearchSpec& ls = {}, const TerminationPolicy& term = {}) {
  detail::DfpStrategy strategy;
  return detail::run_driver(Method::Dfp, f, x0, ls, term, strategy);
}

inline RunReport cg_pr_minimize(const ObjectiveOracle& f, const Vector& x0,
                                const LineSearchSpec& ls = {}, const TerminationPolicy& term = {}) {
  detail::NonlinearCgStrategy strategy(true);
  return detail::run_driver(Method::CgPrPlus, f, x0, ls, term, strategy);
}

inline RunReport cg_fr_minimize(const ObjectiveOracle& f, const Vector& x0,
                                const LineSearchSpec& ls = {}, const TerminationPolicy& term = {}) {
  detail::NonlinearCgStrategy strategy(false);
  return detail::run_driver(Method::CgFr, f, x0, ls, term, strategy);
}

inline RunReport minimize(Method method, const ObjectiveOracle& f, const Vector& x0,
                          const LineSearchSpec& ls = {}, const TerminationPolicy& term = {}) {
  switch (method) {
    case Method::Sdicov: return sdicov_minimize(f, x0, ls, term);
    case Method::Bfgs: return bfgs_minimize(f, x0, ls, term);
    case Method::Dfp: return dfp_minimize(f, x0, ls, term);
    case Method::CgPrPlus: return cg_pr_minimize(f, x0, ls, term);
    case Method::CgFr: return cg_fr_minimize(f, x0, ls, term);
  }
  throw Error(ErrorCode::Config, "unknown method");
}

}  // namespace sdicov
