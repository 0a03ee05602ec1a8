#include "doctest.h"

#include <mutex>

#include "oracles.hpp"
#include "stlsynth/de.hpp"
#include "stlsynth/problem.hpp"

using namespace stlsynth;

namespace {

Box cube(int dim, double lo, double hi) {
  return Box{Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)};
}

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

bool inside(const Eigen::VectorXd& x, const Box& box) {
  return (x.array() >= box.lower.array()).all() &&
         (x.array() <= box.upper.array()).all();
}

} // namespace

TEST_SUITE("de.minimize") {
  TEST_CASE("config validation") {
    const Box box = cube(2, -1, 1);
    DeConfig cfg;
    cfg.population = 3;
    CHECK_THROWS_AS(de_minimize(sphere, box, cfg), std::invalid_argument);
    cfg = DeConfig{};
    cfg.weight = 0.0;
    CHECK_THROWS_AS(de_minimize(sphere, box, cfg), std::invalid_argument);
    cfg = DeConfig{};
    cfg.crossover = 1.5;
    CHECK_THROWS_AS(de_minimize(sphere, box, cfg), std::invalid_argument);
    cfg = DeConfig{};
    cfg.k_best = cfg.population + 1;
    CHECK_THROWS_AS(de_minimize(sphere, box, cfg), std::invalid_argument);
    Box bad = cube(2, 1, -1);
    CHECK_THROWS_AS(de_minimize(sphere, bad, DeConfig{}), std::invalid_argument);
  }

  TEST_CASE("zero generations returns the evaluated initial population") {
    DeConfig cfg;
    cfg.population = 12;
    cfg.generations = 0;
    cfg.k_best = 12;
    cfg.seed = 9;
    const Box box = cube(3, -2, 2);
    const DeResult result = de_minimize(sphere, box, cfg);
    CHECK(result.evaluations == 12);
    CHECK(result.members.size() == 12);
    CHECK(result.best_history.size() == 1);
    for (std::size_t i = 0; i < result.members.size(); ++i) {
      CHECK(inside(result.members[i].point, box));
      CHECK(result.members[i].cost == sphere(result.members[i].point));
      if (i > 0) {
        CHECK(result.members[i - 1].cost <= result.members[i].cost);
      }
    }
  }

  TEST_CASE("solves the sphere benchmark on most seeds") {
    DeConfig cfg;
    cfg.population = 20;
    cfg.generations = 50;
    const Box box = cube(4, -5, 5);
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      cfg.seed = seed;
      const DeResult result = de_minimize(sphere, box, cfg);
      if (result.members.front().cost <= 0.01) ++solved;
      for (std::size_t g = 1; g < result.best_history.size(); ++g) {
        CHECK(result.best_history[g] <= result.best_history[g - 1]);
      }
    }
    CHECK(solved >= 9);
  }

  TEST_CASE("every evaluated point stays inside the box") {
    const Box box = cube(3, -1.5, 0.5);
    DeConfig cfg;
    cfg.population = 15;
    cfg.generations = 20;
    cfg.seed = 4;
    bool all_inside = true;
    auto guarded = [&](const Eigen::VectorXd& x) {
      all_inside = all_inside && inside(x, box);
      return sphere(x);
    };
    de_minimize(guarded, box, cfg);
    CHECK(all_inside);
  }

  TEST_CASE("deterministic for a fixed seed") {
    DeConfig cfg;
    cfg.population = 10;
    cfg.generations = 15;
    cfg.seed = 1234;
    cfg.k_best = 5;
    const Box box = cube(4, -3, 3);
    const DeResult a = de_minimize(sphere, box, cfg);
    const DeResult b = de_minimize(sphere, box, cfg);
    REQUIRE(a.members.size() == b.members.size());
    for (std::size_t i = 0; i < a.members.size(); ++i) {
      CHECK(a.members[i].point == b.members[i].point);
      CHECK(a.members[i].cost == b.members[i].cost);
    }
    CHECK(a.best_history == b.best_history);
  }

  TEST_CASE("distinct_best deduplicates and backfills") {
    Eigen::VectorXd p1 = Eigen::VectorXd::Constant(1, 1.0);
    Eigen::VectorXd p2 = Eigen::VectorXd::Constant(1, 2.0);
    Eigen::VectorXd p3 = Eigen::VectorXd::Constant(1, 3.0);
    const std::vector<ScoredPoint> sorted = {
        {p1, 0.1}, {p1, 0.1}, {p2, 0.2}, {p2, 0.2}, {p3, 0.3}};
    const auto top2 = distinct_best(sorted, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].point == p1);
    CHECK(top2[1].point == p2);
    const auto top4 = distinct_best(sorted, 4);
    CHECK(top4.size() == 3); // only three distinct points exist
  }
}

TEST_SUITE("de.seeding") {
  TEST_CASE("returns the whole population when k_best = P") {
    const SystemModel di = SystemModel::double_integrator(-1.0, 1.0);
    const Formula spec = parse_formula("F[0,3] (y0 > 0.5)", 4);
    DeConfig cfg;
    cfg.population = 8;
    cfg.generations = 2;
    cfg.k_best = 8;
    cfg.seed = 2;
    const auto seeds = de_seed_synthesis(di, spec, cfg);
    CHECK(seeds.size() == 8);
    for (const auto& seq : seeds) {
      CHECK(seq.length() == horizon(spec) + 1);
      for (int t = 0; t < seq.length(); ++t) {
        CHECK((seq.at(t).array() >= -1.0).all());
        CHECK((seq.at(t).array() <= 1.0).all());
      }
    }
  }

  TEST_CASE("control length can extend past the horizon") {
    const SystemModel di = SystemModel::double_integrator(-1.0, 1.0);
    const Formula spec = parse_formula("F[0,3] (y0 > 0.5)", 4);
    DeConfig cfg;
    cfg.population = 6;
    cfg.generations = 1;
    cfg.k_best = 3;
    const auto seeds = de_seed_synthesis(di, spec, cfg, 9);
    REQUIRE(!seeds.empty());
    CHECK(seeds.front().length() == 9);
  }

  TEST_CASE("a short DE run reaches near-feasible costs on the reach-avoid task") {
    // Threshold 0.3 sits far inside what uniform sampling reaches on this
    // geometry (a 1e6-sample random search sees J < 0.3 on ~5.7% of draws),
    // so a handful of DE generations clearing it is a meaningful bar.
    const SystemModel di = SystemModel::double_integrator(-2.0, 2.0);
    const CaseStudyGeometry geometry{{2.9, 5.2, 2.9, 5.2},
                                     {0.3, 2.0, 2.2, 4.2},
                                     {2.2, 4.2, 0.3, 2.0},
                                     {2.1, 2.8, 2.1, 2.8},
                                     std::nullopt};
    const Formula spec = build_reach_avoid_spec(geometry, 10, -2.0, 2.0);
    DeConfig cfg;
    cfg.population = 30;
    cfg.generations = 8;
    cfg.k_best = 5;
    int near_feasible = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      cfg.seed = seed;
      const auto seeds = de_seed_synthesis(di, spec, cfg);
      bool any = false;
      for (const auto& candidate : seeds) {
        any = any || objective(di, spec, candidate) < 0.3;
      }
      if (any) ++near_feasible;
    }
    CHECK(near_feasible >= 8);
  }
}
