#pragma once

// Step-length selection along a search direction.
//
// bisection_search brackets a minimizer by doubling from the initial step,
// then bisects until |phi'(alpha)| <= c |phi'(0)| at a point with
// phi(alpha) <= phi(0). A step at which phi (or phi') is not finite is
// treated as outside the objective's domain and halved toward the last good
// point.

#include <cmath>
#include <limits>
#include <string>

#include "sdicov/types.hpp"

namespace sdicov {

enum class LineSearchStatus { Converged, MaxIterations, NonDescent, DomainSafeguard };

inline const char* to_string(LineSearchStatus s) {
  switch (s) {
    case LineSearchStatus::Converged: return "Converged";
    case LineSearchStatus::MaxIterations: return "MaxIterations";
    case LineSearchStatus::NonDescent: return "NonDescent";
    case LineSearchStatus::DomainSafeguard: return "DomainSafeguard";
  }
  return "Unknown";
}

enum class LineSearchKind {
  Bisection,
  /// alpha = -grad.m / (m^T A m); needs a Hessian-vector product from the oracle.
  ExactQuadratic,
};

struct LineSearchSpec {
  LineSearchKind kind = LineSearchKind::Bisection;
  double shrink_factor = 0.2;
  int max_expansions = 60;
  int max_bisections = 100;
  double initial_step = 1.0;

  void validate() const {
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) {
      throw Error(ErrorCode::Config, "line search shrink factor must lie in (0,1)");
    }
    if (max_expansions < 1 || max_bisections < 1) {
      throw Error(ErrorCode::Config, "line search budgets must be >= 1");
    }
    if (!(initial_step > 0.0) || !std::isfinite(initial_step)) {
      throw Error(ErrorCode::Config, "line search initial step must be positive");
    }
  }

  static LineSearchSpec exact() {
    LineSearchSpec s;
    s.kind = LineSearchKind::ExactQuadratic;
    return s;
  }
};

struct LineSearchResult {
  double alpha = 0.0;
  double phi0_slope = 0.0;
  double phi_alpha_slope = 0.0;
  /// phi(alpha); NaN when never evaluated.
  double phi_alpha = std::numeric_limits<double>::quiet_NaN();
  int f_evals = 0;
  int g_evals = 0;
  LineSearchStatus status = LineSearchStatus::MaxIterations;
};

/// Exact minimizer of a convex quadratic along the steepest-descent
/// direction p: (p.p) / (p.Ap).
template <class ApplyA>
double exact_quadratic_alpha(ApplyA&& apply_a, const Vector& p) {
  const double pp = p.squaredNorm();
  if (!(pp > 0.0)) throw Error(ErrorCode::ZeroDirection, "exact_quadratic_alpha: p = 0");
  const double curvature = p.dot(apply_a(p));
  if (!(curvature > 0.0)) {
    throw Error(ErrorCode::NonPositiveCurvature, "exact_quadratic_alpha: p.Ap <= 0");
  }
  return pp / curvature;
}

/// Exact minimizer along an arbitrary direction m from a point with gradient
/// grad: -(grad.m) / (m.Am). Reduces to exact_quadratic_alpha when m = -grad.
template <class ApplyA>
double exact_quadratic_step(ApplyA&& apply_a, const Vector& grad, const Vector& m) {
  const double curvature = m.dot(apply_a(m));
  if (!(curvature > 0.0)) {
    throw Error(ErrorCode::NonPositiveCurvature, "exact_quadratic_step: m.Am <= 0");
  }
  return -grad.dot(m) / curvature;
}

template <class Phi, class PhiPrime>
LineSearchResult bisection_search(Phi&& phi, PhiPrime&& phi_prime, const LineSearchSpec& spec) {
  spec.validate();
  LineSearchResult r;

  const double d0 = phi_prime(0.0);
  ++r.g_evals;
  r.phi0_slope = d0;
  r.phi_alpha_slope = d0;
  if (!(d0 < 0.0)) {
    r.status = LineSearchStatus::NonDescent;
    return r;
  }
  const double v0 = phi(0.0);
  ++r.f_evals;
  const double target = spec.shrink_factor * std::abs(d0);

  double best_alpha = 0.0;
  double best_abs = std::numeric_limits<double>::infinity();
  double best_slope = d0;
  double best_value = std::numeric_limits<double>::quiet_NaN();

  enum class Trial { Outside, Overshoot, Accept, Below, Above };
  // Classifies a trial step: Outside (non-finite), Overshoot (phi above
  // phi(0)), Accept (criterion met), Below (phi' < 0) or Above (phi' >= 0).
  auto classify = [&](double a, double& value, double& slope) {
    value = phi(a);
    ++r.f_evals;
    if (!std::isfinite(value)) return Trial::Outside;
    if (value > v0) return Trial::Overshoot;
    slope = phi_prime(a);
    ++r.g_evals;
    if (!std::isfinite(slope)) return Trial::Outside;
    if (std::abs(slope) < best_abs) {
      best_abs = std::abs(slope);
      best_alpha = a;
      best_slope = slope;
      best_value = value;
    }
    if (std::abs(slope) <= target) return Trial::Accept;
    return slope < 0.0 ? Trial::Below : Trial::Above;
  };
  auto finish = [&](LineSearchStatus status, double a, double value, double slope) {
    r.status = status;
    r.alpha = a;
    r.phi_alpha = value;
    r.phi_alpha_slope = slope;
    return r;
  };
  auto exhausted = [&] {
    if (std::isfinite(best_abs)) {
      return finish(LineSearchStatus::MaxIterations, best_alpha, best_value, best_slope);
    }
    return finish(LineSearchStatus::DomainSafeguard, 0.0, v0, d0);
  };

  // Expansion: double until the step is bracketed. A non-finite trial marks
  // the edge of the domain and the step is halved back toward lo.
  double lo = 0.0;
  double hi = 0.0;
  double domain_hi = std::numeric_limits<double>::infinity();
  double alpha = spec.initial_step;
  bool bracketed = false;

  for (int i = 0; i < spec.max_expansions && !bracketed; ++i) {
    double value = 0.0;
    double slope = 0.0;
    switch (classify(alpha, value, slope)) {
      case Trial::Accept:
        return finish(LineSearchStatus::Converged, alpha, value, slope);
      case Trial::Outside:
        domain_hi = alpha;
        alpha = 0.5 * (lo + alpha);
        break;
      case Trial::Overshoot:
      case Trial::Above:
        hi = alpha;
        bracketed = true;
        break;
      case Trial::Below:
        lo = alpha;
        alpha = std::isfinite(domain_hi) ? 0.5 * (lo + domain_hi) : 2.0 * alpha;
        break;
    }
  }
  if (!bracketed) return exhausted();

  // Bisection. Invariant: phi'(lo) < 0 and phi(lo) <= phi(0); hi has
  // phi' >= 0, phi > phi(0), or lies outside the domain.
  for (int i = 0; i < spec.max_bisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    double value = 0.0;
    double slope = 0.0;
    switch (classify(mid, value, slope)) {
      case Trial::Accept:
        return finish(LineSearchStatus::Converged, mid, value, slope);
      case Trial::Below:
        lo = mid;
        break;
      case Trial::Outside:
      case Trial::Overshoot:
      case Trial::Above:
        hi = mid;
        break;
    }
  }
  return exhausted();
}

}  // namespace sdicov
