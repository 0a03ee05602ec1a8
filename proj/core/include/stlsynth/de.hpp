#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <vector>

#include "stlsynth/system.hpp"

namespace stlsynth {

/// DE/rand/1/bin settings. Defaults follow the standard Storn-Price choices.
struct DeConfig {
  int population = 30;  // P >= 4
  int generations = 8;  // G >= 0; 0 only evaluates the initial population
  double weight = 0.8;  // differential weight F in (0, 2]
  double crossover = 0.9; // crossover rate CR in [0, 1]
  std::uint64_t seed = 0;
  int k_best = 5; // distinct members returned, <= population
};

struct ScoredPoint {
  Eigen::VectorXd point;
  double cost;
};

struct DeResult {
  /// Up to k_best pairwise-distinct members, cost ascending.
  std::vector<ScoredPoint> members;
  /// Best-so-far cost after initialization and after each generation;
  /// non-increasing by construction (greedy replacement).
  std::vector<double> best_history;
  int evaluations = 0;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

/// Global minimization with DE/rand/1/bin: per member, mutate three distinct
/// peers (v = x_r1 + F (x_r2 - x_r3)), binomial crossover with one forced
/// coordinate, clamp to the box, and greedily replace when the trial cost is
/// no worse. Deterministic for a fixed (cfg, objective): trial vectors for a
/// generation are drawn before any replacement is applied, so evaluation
/// order cannot change the outcome.
DeResult de_minimize(const ObjectiveFn& objective, const Box& bounds,
                     const DeConfig& cfg);

/// First k pairwise-distinct points from a cost-ascending list, backfilling
/// past exact duplicates; returns fewer when the list has fewer distinct
/// entries.
std::vector<ScoredPoint> distinct_best(const std::vector<ScoredPoint>& sorted,
                                       int k);

/// Runs DE on the synthesis objective over the control box and returns the
/// k_best candidates as control sequences — the initial-guess set for the
/// Bayesian optimization stage. control_length defaults to horizon(spec)+1.
std::vector<ControlSequence> de_seed_synthesis(const SystemModel& model,
                                               const Formula& spec,
                                               const DeConfig& cfg,
                                               int control_length = -1);

} // namespace stlsynth
