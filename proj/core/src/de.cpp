#include "stlsynth/de.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace stlsynth {

namespace {

void check_config(const DeConfig& cfg) {
  if (cfg.population < 4) {
    throw std::invalid_argument("DE population must be >= 4");
  }
  if (cfg.generations < 0) {
    throw std::invalid_argument("DE generations must be >= 0");
  }
  if (!(cfg.weight > 0.0 && cfg.weight <= 2.0)) {
    throw std::invalid_argument("DE differential weight must be in (0, 2]");
  }
  if (!(cfg.crossover >= 0.0 && cfg.crossover <= 1.0)) {
    throw std::invalid_argument("DE crossover rate must be in [0, 1]");
  }
  if (cfg.k_best < 1 || cfg.k_best > cfg.population) {
    throw std::invalid_argument("DE k_best must be in [1, population]");
  }
}

void check_box(const Box& box) {
  if (box.lower.size() != box.upper.size() || box.lower.size() < 1) {
    throw std::invalid_argument("search box must have dimension >= 1");
  }
  for (Eigen::Index j = 0; j < box.lower.size(); ++j) {
    if (!(box.lower[j] <= box.upper[j])) {
      throw std::invalid_argument("search box is empty in coordinate " +
                                  std::to_string(j));
    }
  }
}

} // namespace

std::vector<ScoredPoint> distinct_best(const std::vector<ScoredPoint>& sorted,
                                       int k) {
  std::vector<ScoredPoint> out;
  for (const auto& candidate : sorted) {
    if (static_cast<int>(out.size()) == k) break;
    const bool duplicate =
        std::any_of(out.begin(), out.end(), [&](const ScoredPoint& kept) {
          return kept.point == candidate.point;
        });
    if (!duplicate) {
      out.push_back(candidate);
    }
  }
  return out;
}

DeResult de_minimize(const ObjectiveFn& objective, const Box& bounds,
                     const DeConfig& cfg) {
  check_config(cfg);
  check_box(bounds);
  const int d = bounds.dim();
  const int P = cfg.population;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_member(0, P - 1);
  std::uniform_int_distribution<int> any_coord(0, d - 1);

  DeResult result;

  std::vector<Eigen::VectorXd> population(static_cast<std::size_t>(P));
  std::vector<double> cost(static_cast<std::size_t>(P));
  for (int i = 0; i < P; ++i) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) {
      x[j] = bounds.lower[j] + unit(rng) * (bounds.upper[j] - bounds.lower[j]);
    }
    cost[static_cast<std::size_t>(i)] = objective(x);
    population[static_cast<std::size_t>(i)] = std::move(x);
  }
  result.evaluations = P;
  result.best_history.push_back(*std::min_element(cost.begin(), cost.end()));

  std::vector<Eigen::VectorXd> trials(static_cast<std::size_t>(P));
  std::vector<double> trial_cost(static_cast<std::size_t>(P));
  for (int gen = 0; gen < cfg.generations; ++gen) {
    // Build the whole generation's trial vectors before evaluating any of
    // them; replacements are applied at the generation boundary.
    for (int i = 0; i < P; ++i) {
      int r1, r2, r3;
      do { r1 = any_member(rng); } while (r1 == i);
      do { r2 = any_member(rng); } while (r2 == i || r2 == r1);
      do { r3 = any_member(rng); } while (r3 == i || r3 == r1 || r3 == r2);

      const Eigen::VectorXd mutant =
          population[static_cast<std::size_t>(r1)] +
          cfg.weight * (population[static_cast<std::size_t>(r2)] -
                        population[static_cast<std::size_t>(r3)]);

      const int forced = any_coord(rng);
      Eigen::VectorXd trial = population[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j) {
        if (j == forced || unit(rng) < cfg.crossover) {
          trial[j] = mutant[j];
        }
      }
      trial = trial.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
      trials[static_cast<std::size_t>(i)] = std::move(trial);
    }

    for (int i = 0; i < P; ++i) {
      trial_cost[static_cast<std::size_t>(i)] =
          objective(trials[static_cast<std::size_t>(i)]);
    }
    result.evaluations += P;

    for (int i = 0; i < P; ++i) {
      if (trial_cost[static_cast<std::size_t>(i)] <=
          cost[static_cast<std::size_t>(i)]) {
        cost[static_cast<std::size_t>(i)] = trial_cost[static_cast<std::size_t>(i)];
        population[static_cast<std::size_t>(i)] =
            std::move(trials[static_cast<std::size_t>(i)]);
      }
    }
    result.best_history.push_back(*std::min_element(cost.begin(), cost.end()));
  }

  std::vector<ScoredPoint> scored(static_cast<std::size_t>(P));
  for (int i = 0; i < P; ++i) {
    scored[static_cast<std::size_t>(i)] = {population[static_cast<std::size_t>(i)],
                                           cost[static_cast<std::size_t>(i)]};
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredPoint& a, const ScoredPoint& b) {
                     return a.cost < b.cost;
                   });
  result.members = distinct_best(scored, cfg.k_best);
  return result;
}

std::vector<ControlSequence> de_seed_synthesis(const SystemModel& model,
                                               const Formula& spec,
                                               const DeConfig& cfg,
                                               int control_length) {
  const int length = control_length < 0 ? horizon(spec) + 1 : control_length;
  const Box box = control_box(model, length);
  const DeResult result = de_minimize(objective_on_flat(model, spec, length), box, cfg);

  std::vector<ControlSequence> seeds;
  seeds.reserve(result.members.size());
  for (const auto& member : result.members) {
    seeds.push_back(ControlSequence::from_flat(member.point, model.input_dim(),
                                               model.input_lower(),
                                               model.input_upper()));
  }
  return seeds;
}

} // namespace stlsynth
