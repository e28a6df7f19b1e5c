#pragma once

// Test objectives. The main one is planar distance geometry: recover
// particle positions from a subset of pairwise distances by minimizing
//
//   f(x_3, ..., x_N) = sum_{(i,j) in E} (||x_i - x_j||^2 - d_ij^2)^2
//
// with particles 0 and 1 (0-based) pinned at their true positions. Free
// coordinates are stored flat, (x, y) interleaved, in particle order.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdicov/objective.hpp"
#include "sdicov/quadratic_lab.hpp"
#include "sdicov/rng.hpp"

namespace sdicov {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct DistanceEdge {
  int i = 0;  ///< i < j
  int j = 0;
  double d = 0.0;
};

struct DistanceGeometryInstance {
  int n_particles = 0;
  std::vector<Point2> truth;
  std::vector<DistanceEdge> edges;
  std::uint64_t seed = 0;

  static constexpr int kFixedParticles = 2;

  Eigen::Index unknowns() const { return 2 * static_cast<Eigen::Index>(n_particles - kFixedParticles); }

  Vector truth_free() const {
    Vector x(unknowns());
    for (int i = kFixedParticles; i < n_particles; ++i) {
      x[2 * (i - kFixedParticles)] = truth[static_cast<std::size_t>(i)].x;
      x[2 * (i - kFixedParticles) + 1] = truth[static_cast<std::size_t>(i)].y;
    }
    return x;
  }

  Point2 position(int i, const Vector& x) const {
    if (i < kFixedParticles) return truth[static_cast<std::size_t>(i)];
    const Eigen::Index o = 2 * (i - kFixedParticles);
    return {x[o], x[o + 1]};
  }

  /// Degree of every particle in the edge graph.
  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(n_particles), 0);
    for (const auto& e : edges) {
      ++deg[static_cast<std::size_t>(e.i)];
      ++deg[static_cast<std::size_t>(e.j)];
    }
    return deg;
  }
};

inline double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Random instance with a known zero-residual configuration. Positions are
/// uniform in the unit square. Edges: a random spanning tree, then every
/// other pair independently with probability edge_fraction, then extra
/// random edges until each free particle has degree >= 3. Three particles
/// always give the complete graph.
inline DistanceGeometryInstance generate_distg(int n_particles, double edge_fraction = 0.3,
                                               std::uint64_t seed = 0) {
  if (n_particles < 3) throw Error(ErrorCode::Config, "distance geometry needs >= 3 particles");
  if (!(edge_fraction > 0.0 && edge_fraction <= 1.0)) {
    throw Error(ErrorCode::Config, "edge_fraction must lie in (0, 1]");
  }
  Rng rng(seed);
  DistanceGeometryInstance inst;
  inst.n_particles = n_particles;
  inst.seed = seed;
  const auto n = static_cast<std::size_t>(n_particles);
  inst.truth.resize(n);
  for (auto& pt : inst.truth) {
    pt.x = rng.uniform();
    pt.y = rng.uniform();
  }

  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  std::vector<int> deg(n, 0);
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b || adj[a][b]) return;
    adj[a][b] = adj[b][a] = true;
    ++deg[a];
    ++deg[b];
  };

  if (n_particles == 3) {
    link(0, 1);
    link(0, 2);
    link(1, 2);
  } else {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
    for (std::size_t t = 1; t < n; ++t) link(order[t], order[rng.index(t)]);

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!adj[i][j] && rng.uniform() < edge_fraction) link(i, j);

    for (std::size_t i = DistanceGeometryInstance::kFixedParticles; i < n; ++i) {
      while (deg[i] < 3) {
        std::vector<std::size_t> candidates;
        for (std::size_t j = 0; j < n; ++j)
          if (j != i && !adj[i][j]) candidates.push_back(j);
        link(i, candidates[rng.index(candidates.size())]);
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (adj[i][j]) {
        inst.edges.push_back({static_cast<int>(i), static_cast<int>(j),
                              distance(inst.truth[i], inst.truth[j])});
      }
  return inst;
}

inline double distg_value(const DistanceGeometryInstance& inst, const Vector& x) {
  require_same_size(inst.unknowns(), x.size(), "distg_value");
  double f = 0.0;
  for (const auto& e : inst.edges) {
    const Point2 a = inst.position(e.i, x);
    const Point2 b = inst.position(e.j, x);
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double r = dx * dx + dy * dy - e.d * e.d;
    f += r * r;
  }
  return f;
}

/// d/dx_i = sum_j 4 (||x_i - x_j||^2 - d_ij^2)(x_i - x_j), free particles only.
inline Vector distg_gradient(const DistanceGeometryInstance& inst, const Vector& x) {
  require_same_size(inst.unknowns(), x.size(), "distg_gradient");
  constexpr int fixed = DistanceGeometryInstance::kFixedParticles;
  Vector grad = Vector::Zero(x.size());
  for (const auto& e : inst.edges) {
    const Point2 a = inst.position(e.i, x);
    const Point2 b = inst.position(e.j, x);
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double w = 4.0 * (dx * dx + dy * dy - e.d * e.d);
    if (e.i >= fixed) {
      grad[2 * (e.i - fixed)] += w * dx;
      grad[2 * (e.i - fixed) + 1] += w * dy;
    }
    if (e.j >= fixed) {
      grad[2 * (e.j - fixed)] -= w * dx;
      grad[2 * (e.j - fixed) + 1] -= w * dy;
    }
  }
  return grad;
}

inline double configuration_diameter(const DistanceGeometryInstance& inst) {
  double diam = 0.0;
  for (std::size_t i = 0; i < inst.truth.size(); ++i)
    for (std::size_t j = i + 1; j < inst.truth.size(); ++j)
      diam = std::max(diam, distance(inst.truth[i], inst.truth[j]));
  return diam;
}

/// Truth plus Gaussian noise with standard deviation noise_scale * diameter.
inline Vector initial_point(const DistanceGeometryInstance& inst, double noise_scale = 0.05,
                            std::uint64_t seed = 0) {
  if (!(noise_scale >= 0.0)) throw Error(ErrorCode::Config, "noise_scale must be >= 0");
  Vector x = inst.truth_free();
  if (noise_scale == 0.0) return x;
  const double sigma = noise_scale * configuration_diameter(inst);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += sigma * rng.normal();
  return x;
}

inline ObjectiveOracle distg_oracle(const DistanceGeometryInstance& inst) {
  auto shared = std::make_shared<const DistanceGeometryInstance>(inst);
  ObjectiveOracle o;
  o.dimension = inst.unknowns();
  o.value = [shared](const Vector& x) { return distg_value(*shared, x); };
  o.gradient = [shared](const Vector& x) { return distg_gradient(*shared, x); };
  return o;
}

// ---------------------------------------------------------------------------
// Text format:
//   distg <n_particles> <n_edges> <seed>
//   P <index> <x> <y>        one per particle, 0-based index
//   E <i> <j> <d>            one per edge
// Reals are printed with 17 significant digits.

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string write_distg(const DistanceGeometryInstance& inst) {
  std::ostringstream out;
  out << "distg " << inst.n_particles << ' ' << inst.edges.size() << ' ' << inst.seed << '\n';
  for (std::size_t i = 0; i < inst.truth.size(); ++i) {
    out << "P " << i << ' ' << format_real(inst.truth[i].x) << ' ' << format_real(inst.truth[i].y)
        << '\n';
  }
  for (const auto& e : inst.edges) {
    out << "E " << e.i << ' ' << e.j << ' ' << format_real(e.d) << '\n';
  }
  return out.str();
}

inline DistanceGeometryInstance read_distg(std::istream& in) {
  auto fail = [](const std::string& msg) { return Error(ErrorCode::Parse, "distg: " + msg); };
  std::string tag;
  std::size_t n_edges = 0;
  DistanceGeometryInstance inst;
  if (!(in >> tag >> inst.n_particles >> n_edges >> inst.seed) || tag != "distg") {
    throw fail("bad header");
  }
  if (inst.n_particles < 3) throw fail("fewer than 3 particles");
  inst.truth.resize(static_cast<std::size_t>(inst.n_particles));
  for (int k = 0; k < inst.n_particles; ++k) {
    int idx = -1;
    Point2 pt;
    if (!(in >> tag >> idx >> pt.x >> pt.y) || tag != "P" || idx != k) throw fail("bad particle line");
    inst.truth[static_cast<std::size_t>(k)] = pt;
  }
  for (std::size_t k = 0; k < n_edges; ++k) {
    DistanceEdge e;
    if (!(in >> tag >> e.i >> e.j >> e.d) || tag != "E") throw fail("bad edge line");
    if (e.i < 0 || e.j <= e.i || e.j >= inst.n_particles) throw fail("edge index out of range");
    inst.edges.push_back(e);
  }
  return inst;
}

inline DistanceGeometryInstance read_distg(const std::string& text) {
  std::istringstream in(text);
  return read_distg(in);
}

// ---------------------------------------------------------------------------
// Standard smooth test problems

struct ProblemBundle {
  ObjectiveOracle oracle;
  std::optional<Vector> x_star;
  Vector x0;
  std::string name;
};

/// Chained Rosenbrock: sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
inline ProblemBundle rosenbrock(Eigen::Index n) {
  if (n < 2) throw Error(ErrorCode::Config, "rosenbrock needs n >= 2");
  ProblemBundle b;
  b.name = "rosenbrock-" + std::to_string(n);
  b.oracle.dimension = n;
  b.oracle.value = [](const Vector& x) {
    double f = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double t = x[i + 1] - x[i] * x[i];
      const double u = 1.0 - x[i];
      f += 100.0 * t * t + u * u;
    }
    return f;
  };
  b.oracle.gradient = [](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double t = x[i + 1] - x[i] * x[i];
      g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
      g[i + 1] += 200.0 * t;
    }
    return g;
  };
  b.x_star = Vector::Ones(n);
  b.x0.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) b.x0[i] = (i % 2 == 0) ? -1.2 : 1.0;
  return b;
}

inline ProblemBundle quadratic_bundle(const QuadraticObjective& q, std::string name, Vector x0) {
  ProblemBundle b;
  b.name = std::move(name);
  b.oracle = q.oracle();
  b.x_star = q.minimizer();
  b.x0 = std::move(x0);
  return b;
}

/// Diagonal quadratic of size n with eigenvalues log-spaced over [1, kappa];
/// b = A * ones so the minimizer is the all-ones vector.
inline QuadraticObjective ill_conditioned_quadratic(Eigen::Index n, double kappa) {
  Vector lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lambda[i] = n == 1 ? 1.0 : std::pow(kappa, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  Matrix a = lambda.asDiagonal();
  return QuadraticObjective(a, lambda);
}

/// Rosenbrock 2-D and 10-D from (-1.2, 1, ...), a kappa = 1e4 diagonal
/// quadratic (n = 20) and a random SPD quadratic (n = 10, kappa = 1e3,
/// seed 1), both started from the origin.
inline std::vector<ProblemBundle> standard_suite() {
  std::vector<ProblemBundle> suite;
  suite.push_back(rosenbrock(2));
  suite.push_back(rosenbrock(10));
  suite.push_back(quadratic_bundle(ill_conditioned_quadratic(20, 1e4), "ill-conditioned-quadratic-20",
                                   Vector::Zero(20)));
  Rng rng(1);
  suite.push_back(quadratic_bundle(random_spd_quadratic(10, 1e3, rng), "random-spd-quadratic-10",
                                   Vector::Zero(10)));
  return suite;
}

}  // namespace sdicov
