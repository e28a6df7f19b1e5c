#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "sdicov/objective.hpp"
#include "sdicov/problems.hpp"

using namespace sdicov;

namespace {

// truth (0,0), (1,0), (0,1); target distances set explicitly to 1 on the
// edges touching particle 2
DistanceGeometryInstance three_particle_instance() {
  DistanceGeometryInstance inst;
  inst.n_particles = 3;
  inst.truth = {{0, 0}, {1, 0}, {0, 1}};
  inst.edges = {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}};
  return inst;
}

bool connected(const DistanceGeometryInstance& inst) {
  std::vector<int> parent(static_cast<std::size_t>(inst.n_particles));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
    return v;
  };
  for (const auto& e : inst.edges) parent[static_cast<std::size_t>(find(e.i))] = find(e.j);
  for (int v = 1; v < inst.n_particles; ++v)
    if (find(v) != find(0)) return false;
  return true;
}

// Plain loop over edges, written independently of distg_value.
double brute_force_value(const DistanceGeometryInstance& inst, const Vector& x) {
  double total = 0.0;
  for (const auto& e : inst.edges) {
    const Point2 a = inst.position(e.i, x), b = inst.position(e.j, x);
    const double sq = (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
    total += (sq - e.d * e.d) * (sq - e.d * e.d);
  }
  return total;
}

}  // namespace

TEST(DistanceGeometry, ThreeParticleHandExample) {
  const auto inst = three_particle_instance();
  const Vector x = (Vector(2) << 1, 1).finished();
  EXPECT_DOUBLE_EQ(distg_value(inst, x), 1.0);
  EXPECT_DOUBLE_EQ(brute_force_value(inst, x), 1.0);
  const Vector g = distg_gradient(inst, x);
  EXPECT_NEAR(g[0], 4.0, 1e-14);
  EXPECT_NEAR(g[1], 4.0, 1e-14);
  const Vector fd = finite_difference_gradient(distg_oracle(inst), x);
  EXPECT_LE(relative_error(g, fd), 1e-6);
}

TEST(DistanceGeometry, ThreeParticleTruthDerivedDistances) {
  // d_23 taken from the truth is sqrt(2)
  auto inst = three_particle_instance();
  inst.edges[2].d = std::sqrt(2.0);
  const Vector x = (Vector(2) << 1, 1).finished();
  EXPECT_DOUBLE_EQ(distg_value(inst, x), 2.0);
  EXPECT_DOUBLE_EQ(brute_force_value(inst, x), 2.0);
  const Vector g = distg_gradient(inst, x);
  EXPECT_NEAR(g[0], 4.0, 1e-14);
  EXPECT_NEAR(g[1], 0.0, 1e-14);
}

TEST(DistanceGeometry, ThreeParticlesIsCompleteGraph) {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const auto inst = generate_distg(3, 0.3, seed);
    EXPECT_EQ(inst.edges.size(), 3u);
    EXPECT_EQ(inst.unknowns(), 2);
  }
}

TEST(DistanceGeometry, UnknownCounts) {
  const auto ten = generate_distg(10, 1.0, 5);
  EXPECT_EQ(ten.edges.size(), 45u);
  EXPECT_EQ(ten.unknowns(), 16);
  EXPECT_EQ(generate_distg(100, 1.0, 5).unknowns(), 196);
  EXPECT_EQ(generate_distg(100, 0.3, 5).unknowns(), 196);
}

TEST(DistanceGeometry, StructuralInvariants) {
  for (int n : {4, 5, 10, 30, 100}) {
    for (double frac : {0.01, 0.3, 1.0}) {
      const auto inst = generate_distg(n, frac, 17);
      EXPECT_TRUE(connected(inst)) << n << ' ' << frac;
      const auto deg = inst.degrees();
      for (int i = DistanceGeometryInstance::kFixedParticles; i < n; ++i) {
        EXPECT_GE(deg[static_cast<std::size_t>(i)], 3) << n << ' ' << frac << " particle " << i;
      }
      for (const auto& e : inst.edges) {
        EXPECT_LT(e.i, e.j);
        EXPECT_GT(e.d, 0.0);
        EXPECT_DOUBLE_EQ(e.d, distance(inst.truth[static_cast<std::size_t>(e.i)],
                                       inst.truth[static_cast<std::size_t>(e.j)]));
      }
      for (const auto& p : inst.truth) {
        EXPECT_GE(p.x, 0.0);
        EXPECT_LT(p.x, 1.0);
        EXPECT_GE(p.y, 0.0);
        EXPECT_LT(p.y, 1.0);
      }
    }
  }
}

TEST(DistanceGeometry, ZeroAtTruth) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_distg(20, 0.3, seed);
    const Vector xt = inst.truth_free();
    EXPECT_LE(distg_value(inst, xt), 1e-20);
    EXPECT_LE(distg_gradient(inst, xt).norm(), 1e-12);
  }
}

TEST(DistanceGeometry, ValueMatchesBruteForce) {
  const auto inst = generate_distg(12, 0.4, 8);
  const Vector x = initial_point(inst, 0.3, 9);
  EXPECT_LE(relative_error(distg_value(inst, x), brute_force_value(inst, x)), 1e-14);
}

TEST(DistanceGeometry, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_distg(10, 0.3, seed);
    for (std::uint64_t pt = 0; pt < 20; ++pt) {
      const Vector x = initial_point(inst, 0.2, 1000 * seed + pt);
      const Vector fd = finite_difference_gradient(distg_oracle(inst), x);
      EXPECT_LE(relative_error(distg_gradient(inst, x), fd), 1e-6) << seed << '/' << pt;
    }
  }
}

TEST(DistanceGeometry, InitialPoint) {
  const auto inst = generate_distg(10, 0.3, 4);
  EXPECT_EQ(initial_point(inst, 0.0, 1), inst.truth_free());
  EXPECT_EQ(initial_point(inst, 0.05, 1), initial_point(inst, 0.05, 1));
  EXPECT_NE(initial_point(inst, 0.05, 1), initial_point(inst, 0.05, 2));
}

TEST(DistanceGeometry, TenParticleSdicovRun) {
  const auto inst = generate_distg(10, 0.3, 101);
  const auto run = sdicov_minimize(distg_oracle(inst), initial_point(inst, 0.05, 102));
  EXPECT_EQ(run.status, RunStatus::GradConverged);
  EXPECT_LE(run.final_f, 1e-7);
}

TEST(DistanceGeometry, Deterministic) {
  EXPECT_EQ(write_distg(generate_distg(25, 0.3, 42)), write_distg(generate_distg(25, 0.3, 42)));
  EXPECT_NE(write_distg(generate_distg(25, 0.3, 42)), write_distg(generate_distg(25, 0.3, 43)));
}

TEST(DistanceGeometry, FileRoundTrip) {
  const auto inst = generate_distg(15, 0.3, 7);
  const std::string text = write_distg(inst);
  EXPECT_EQ(text.rfind("distg 15 " + std::to_string(inst.edges.size()) + " 7\n", 0), 0u);
  const auto back = read_distg(text);
  EXPECT_EQ(back.n_particles, inst.n_particles);
  EXPECT_EQ(back.seed, inst.seed);
  ASSERT_EQ(back.edges.size(), inst.edges.size());
  for (std::size_t k = 0; k < inst.edges.size(); ++k) {
    EXPECT_EQ(back.edges[k].d, inst.edges[k].d);
  }
  for (std::size_t k = 0; k < inst.truth.size(); ++k) {
    EXPECT_EQ(back.truth[k].x, inst.truth[k].x);
    EXPECT_EQ(back.truth[k].y, inst.truth[k].y);
  }
  EXPECT_EQ(write_distg(back), text);
}

TEST(DistanceGeometry, ParseErrors) {
  for (const char* bad : {"", "graph 3 3 0", "distg 3 1 0\nP 0 0 0\nP 1 1 0\n",
                          "distg 3 1 0\nP 0 0 0\nP 1 1 0\nP 2 0 1\nE 2 1 1\n"}) {
    try {
      read_distg(std::string(bad));
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Parse);
    }
  }
}

TEST(StandardSuite, Contents) {
  const auto suite = standard_suite();
  ASSERT_GE(suite.size(), 4u);
  EXPECT_EQ(suite[0].name, "rosenbrock-2");
  EXPECT_EQ(suite[0].oracle.value_at(*suite[0].x_star), 0.0);
  EXPECT_EQ(*suite[0].x_star, Vector::Ones(2));
  EXPECT_EQ(suite[0].x0, (Vector(2) << -1.2, 1).finished());
  for (const auto& b : suite) {
    ASSERT_TRUE(b.x_star.has_value()) << b.name;
    EXPECT_LE(b.oracle.gradient_at(*b.x_star).norm(), 1e-8 * (1 + b.oracle.gradient_at(b.x0).norm())) << b.name;
    const Vector fd = finite_difference_gradient(b.oracle, b.x0);
    EXPECT_LE(relative_error(b.oracle.gradient_at(b.x0), fd), 1e-6) << b.name;
  }
}

TEST(StandardSuite, QuadraticMinimizerSolvesSystem) {
  const auto suite = standard_suite();
  Rng rng(1);
  const auto q = random_spd_quadratic(10, 1e3, rng);
  const Vector x = q.a().fullPivLu().solve(q.b());
  EXPECT_LE(relative_error(*suite[3].x_star, x), 1e-10);
}
