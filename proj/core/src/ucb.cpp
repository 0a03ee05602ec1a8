#include "stlsynth/ucb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace stlsynth {

// ---------------------------------------------------------------------------
// Beta schedules

BetaSchedule BetaSchedule::constant(double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("constant beta must be positive");
  }
  BetaSchedule s;
  s.kind = Kind::Constant;
  s.value = beta;
  return s;
}

BetaSchedule BetaSchedule::log_growth(double a, double b) {
  if (!(a > 0.0) || !(b > 1.0)) {
    throw std::invalid_argument("log_growth needs a > 0 and b > 1");
  }
  BetaSchedule s;
  s.kind = Kind::LogGrowth;
  s.growth_scale = a;
  s.growth_rate = b;
  return s;
}

BetaSchedule BetaSchedule::lemma2(double rkhs_bound, double delta,
                                  double gamma_scale, double gamma_exponent) {
  if (!(rkhs_bound > 0.0)) {
    throw std::invalid_argument("lemma2 RKHS bound must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("lemma2 delta must lie in (0, 1)");
  }
  if (!(gamma_scale > 0.0) || !(gamma_exponent >= 0.0)) {
    throw std::invalid_argument("lemma2 gamma proxy must be positive and "
                                "non-decreasing");
  }
  BetaSchedule s;
  s.kind = Kind::Lemma2;
  s.rkhs_bound = rkhs_bound;
  s.delta = delta;
  s.gamma_scale = gamma_scale;
  s.gamma_exponent = gamma_exponent;
  return s;
}

double beta_value(const BetaSchedule& schedule, int iteration) {
  if (iteration < 1) {
    throw std::invalid_argument("beta_value requires iteration >= 1");
  }
  const double i = static_cast<double>(iteration);
  switch (schedule.kind) {
  case BetaSchedule::Kind::Constant:
    return schedule.value;
  case BetaSchedule::Kind::LogGrowth:
    return schedule.growth_scale * std::log(schedule.growth_rate * i * i);
  case BetaSchedule::Kind::Lemma2: {
    const double gamma =
        schedule.gamma_scale * std::pow(i, schedule.gamma_exponent);
    const double log_term = std::log(i / schedule.delta);
    return 2.0 * schedule.rkhs_bound + 300.0 * gamma * log_term * log_term * log_term;
  }
  }
  return schedule.value;
}

// ---------------------------------------------------------------------------
// Acquisition

namespace {

double lcb(const GaussianProcess& gp, double beta, const Eigen::VectorXd& x) {
  const auto post = gp.posterior(x);
  return post.mean - std::sqrt(beta) * std::sqrt(post.variance);
}

} // namespace

Eigen::VectorXd ucb_acquire(const GaussianProcess& gp, double beta, const Box& bounds,
                            const AcquisitionBudget& budget, std::mt19937_64& rng) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("acquisition beta must be positive");
  }
  if (bounds.dim() < 1) {
    throw std::invalid_argument("acquisition box must have dimension >= 1");
  }
  if (budget.candidates < 1) {
    throw std::invalid_argument("acquisition needs at least one candidate");
  }
  const int d = bounds.dim();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> candidates;
  candidates.reserve(static_cast<std::size_t>(budget.candidates));
  std::vector<double> value(static_cast<std::size_t>(budget.candidates));
  for (int c = 0; c < budget.candidates; ++c) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) {
      x[j] = bounds.lower[j] + unit(rng) * (bounds.upper[j] - bounds.lower[j]);
    }
    value[static_cast<std::size_t>(c)] = lcb(gp, beta, x);
    candidates.push_back(std::move(x));
  }

  std::vector<int> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return value[static_cast<std::size_t>(a)] < value[static_cast<std::size_t>(b)];
  });

  // Strictly-better comparisons throughout, so ties resolve to the earliest
  // evaluated point.
  Eigen::VectorXd best = candidates[static_cast<std::size_t>(order.front())];
  double best_value = value[static_cast<std::size_t>(order.front())];

  const int restarts =
      std::min<int>(budget.restarts, static_cast<int>(candidates.size()));
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd x = candidates[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    double fx = value[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    Eigen::VectorXd step = 0.25 * (bounds.upper - bounds.lower);
    for (int pass = 0; pass < budget.refine_passes; ++pass) {
      bool improved = false;
      for (int j = 0; j < d; ++j) {
        if (step[j] == 0.0) continue;
        for (const double delta : {step[j], -step[j]}) {
          Eigen::VectorXd probe = x;
          // A move past a face bisects toward it instead of landing on it, so
          // refined proposals stay strictly inside the box.
          double moved = x[j] + delta;
          if (moved >= bounds.upper[j]) moved = 0.5 * (x[j] + bounds.upper[j]);
          if (moved <= bounds.lower[j]) moved = 0.5 * (x[j] + bounds.lower[j]);
          probe[j] = moved;
          if (probe[j] == x[j]) continue;
          const double fp = lcb(gp, beta, probe);
          if (fp < fx) {
            x = std::move(probe);
            fx = fp;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        step *= 0.5;
        if ((step.array() < 1e-4 * (bounds.upper - bounds.lower).array().max(1e-12))
                .all()) {
          break;
        }
      }
    }
    if (fx < best_value) {
      best_value = fx;
      best = std::move(x);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Synthesis loop

const char* to_string(SynthesisStatus status) {
  return status == SynthesisStatus::Satisfied ? "satisfied" : "infeasible_budget";
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

} // namespace

SynthesisResult synthesize(const SystemModel& model, const Formula& spec,
                           const UcbConfig& cfg,
                           const std::vector<ControlSequence>& init) {
  if (init.empty()) {
    throw std::invalid_argument("synthesize needs at least one initial guess");
  }
  if (cfg.max_iters < 1) {
    throw std::invalid_argument("iteration budget N must be >= 1");
  }
  if (!(cfg.rho_min > 0.0)) {
    throw std::invalid_argument("rho_min must be positive");
  }
  const int length = init.front().length();
  if (length < horizon(spec) + 1) {
    throw std::invalid_argument("initial guesses shorter than the formula horizon");
  }
  for (const auto& u : init) {
    if (u.length() != length || u.input_dim() != model.input_dim()) {
      throw std::invalid_argument("initial guesses must share the control shape");
    }
  }

  const Box bounds = control_box(model, length);
  const int d = bounds.dim();

  KernelParams kernel = cfg.kernel;
  if (kernel.lengthscale <= 0.0) {
    kernel.lengthscale = std::sqrt(static_cast<double>(d));
  }

  std::mt19937_64 rng(cfg.seed);
  GaussianProcess gp(kernel, cfg.center_targets);

  SynthesisResult result{SynthesisStatus::InfeasibleBudget, init.front(),
                         std::numeric_limits<double>::infinity(),
                         -std::numeric_limits<double>::infinity(),
                         {},
                         0};

  auto record = [&](int iteration, const ControlSequence& u, double cost,
                    double beta, const GaussianProcess::Posterior& post,
                    double elapsed) {
    result.log.push_back(IterationRecord{iteration, u.flattened(), cost, -cost,
                                         beta, post.mean, std::sqrt(post.variance),
                                         elapsed, gp.size()});
    if (cost < result.best_cost) {
      result.best_cost = cost;
      result.best_rho = -cost;
      result.best_input = u;
    }
  };

  // Initialization phase: evaluate the guess set and fit the surrogate. A
  // guess that already meets the margin ends the run as iteration 0.
  for (const auto& u : init) {
    const auto start = Clock::now();
    const auto post = gp.posterior(u.flattened());
    const double cost = objective(model, spec, u);
    ++result.evaluations;
    if (cost <= -cfg.rho_min) {
      record(0, u, cost, 0.0, post, ms_since(start));
      result.status = SynthesisStatus::Satisfied;
      return result;
    }
    gp = gp.with_observation(u.flattened(), cost);
    record(0, u, cost, 0.0, post, ms_since(start));
  }

  for (int i = 1; i <= cfg.max_iters; ++i) {
    const auto start = Clock::now();
    const double beta = beta_value(cfg.beta, i);
    const Eigen::VectorXd proposal_flat =
        ucb_acquire(gp, beta, bounds, cfg.budget, rng);
    const auto post = gp.posterior(proposal_flat);
    const ControlSequence proposal = ControlSequence::from_flat(
        proposal_flat, model.input_dim(), model.input_lower(), model.input_upper());
    const double cost = objective(model, spec, proposal);
    ++result.evaluations;

    if (cost <= -cfg.rho_min) {
      // Algorithm returns the satisfying tape before updating the surrogate.
      record(i, proposal, cost, beta, post, ms_since(start));
      result.status = SynthesisStatus::Satisfied;
      return result;
    }

    gp = gp.with_observation(proposal_flat, cost);
    if (cfg.refit_every > 0 && gp.size() % cfg.refit_every == 0) {
      gp = gp.tuned_by_grid();
    }
    record(i, proposal, cost, beta, post, ms_since(start));
  }

  result.status = SynthesisStatus::InfeasibleBudget;
  return result;
}

// ---------------------------------------------------------------------------
// Logging helpers

void write_iteration_csv(std::ostream& out, const SynthesisResult& result) {
  const Eigen::Index d = result.log.empty() ? 0 : result.log.front().input.size();
  out << "iter";
  for (Eigen::Index j = 0; j < d; ++j) {
    out << ",u" << j;
  }
  out << ",J,rho,beta,post_mean,post_sigma,elapsed_ms\n";
  char buf[32];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& row : result.log) {
    out << row.iteration;
    for (Eigen::Index j = 0; j < row.input.size(); ++j) {
      out << ',' << fmt(row.input[j]);
    }
    out << ',' << fmt(row.cost) << ',' << fmt(row.rho) << ',' << fmt(row.beta)
        << ',' << fmt(row.posterior_mean) << ',' << fmt(row.posterior_sigma) << ','
        << fmt(row.elapsed_ms) << '\n';
  }
}

bool same_outcome(const SynthesisResult& a, const SynthesisResult& b) {
  if (a.status != b.status || a.evaluations != b.evaluations ||
      a.best_cost != b.best_cost || a.best_rho != b.best_rho ||
      !(a.best_input == b.best_input) || a.log.size() != b.log.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    const auto& ra = a.log[i];
    const auto& rb = b.log[i];
    if (ra.iteration != rb.iteration || ra.input != rb.input ||
        ra.cost != rb.cost || ra.rho != rb.rho || ra.beta != rb.beta ||
        ra.posterior_mean != rb.posterior_mean ||
        ra.posterior_sigma != rb.posterior_sigma || ra.gp_size != rb.gp_size) {
      return false;
    }
  }
  return true;
}

} // namespace stlsynth
