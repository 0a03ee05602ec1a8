#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "stlsynth/gp.hpp"
#include "stlsynth/system.hpp"

namespace stlsynth {

/// Exploration parameter schedule for GP-UCB.
struct BetaSchedule {
  enum class Kind { Constant, LogGrowth, Lemma2 };

  Kind kind = Kind::LogGrowth;
  // Constant
  double value = 4.0;
  // LogGrowth: beta_i = a log(b i^2); requires a > 0 and b > 1.
  double growth_scale = 2.0;                   // a
  double growth_rate = 32.898681336964529;     // b, default pi^2 / (3 * 0.1)
  // Lemma2: beta_i = 2B + 300 gamma_i ln^3(i / delta) with the information
  // gain proxied by gamma_i = gamma_scale * i^gamma_exponent.
  double rkhs_bound = 1.0; // B
  double delta = 0.1;
  double gamma_scale = 1.0;
  double gamma_exponent = 1.0;

  static BetaSchedule constant(double beta);
  static BetaSchedule log_growth(double a, double b);
  static BetaSchedule lemma2(double rkhs_bound, double delta,
                             double gamma_scale = 1.0, double gamma_exponent = 1.0);
};

/// beta_i for BO iteration i >= 1. Positive for valid schedules; monotone
/// non-decreasing in i for LogGrowth and Lemma2.
double beta_value(const BetaSchedule& schedule, int iteration);

/// Inner-search effort for one acquisition optimization.
struct AcquisitionBudget {
  int candidates = 512;   // uniform random samples in the box
  int restarts = 3;       // coordinate-descent refinements from the best samples
  int refine_passes = 50; // sweep limit per refinement, step halves on failure
};

struct UcbConfig {
  int max_iters = 100;  // N
  double rho_min = 0.05;
  BetaSchedule beta;
  AcquisitionBudget budget;
  std::uint64_t seed = 0;
  /// Kernel for the cost surrogate. lengthscale <= 0 selects the sqrt(d)
  /// default for input dimension d.
  KernelParams kernel{1.0, 0.0, 1e-6};
  bool center_targets = true;
  /// Refit hyperparameters by marginal-likelihood grid every this many GP
  /// updates; 0 disables.
  int refit_every = 0;
};

enum class SynthesisStatus { Satisfied, InfeasibleBudget };

const char* to_string(SynthesisStatus status);

struct IterationRecord {
  int iteration; // 0 for initialization samples, 1..N for BO proposals
  Eigen::VectorXd input;
  double cost;
  double rho;
  double beta;            // 0 for initialization samples
  double posterior_mean;  // surrogate prediction at the proposal,
  double posterior_sigma; // taken before observing its true cost
  double elapsed_ms;
  int gp_size; // observations in the surrogate after this record
};

struct SynthesisResult {
  SynthesisStatus status;
  ControlSequence best_input;
  double best_cost;
  double best_rho;
  std::vector<IterationRecord> log;
  int evaluations;
};

/// Minimizes the lower confidence bound mean - sqrt(beta) sigma over the box:
/// `candidates` uniform samples, then coordinate-descent refinement started
/// from the best samples. Ties break toward the earliest point evaluated.
Eigen::VectorXd ucb_acquire(const GaussianProcess& gp, double beta, const Box& bounds,
                            const AcquisitionBudget& budget, std::mt19937_64& rng);

/// GP-UCB synthesis: evaluate the initial guesses, then repeatedly propose
/// the acquisition minimizer, stopping as soon as a proposal reaches
/// J <= -rho_min (before its GP update) or the iteration budget runs out.
/// A satisfying initial guess short-circuits with zero BO iterations.
/// Deterministic: a fixed (config, init) pair reproduces the run.
SynthesisResult synthesize(const SystemModel& model, const Formula& spec,
                           const UcbConfig& cfg,
                           const std::vector<ControlSequence>& init);

/// Iteration log as CSV with the fixed column order
/// iter,u0..u{d-1},J,rho,beta,post_mean,post_sigma,elapsed_ms.
void write_iteration_csv(std::ostream& out, const SynthesisResult& result);

/// Semantic equality ignoring wall-clock fields.
bool same_outcome(const SynthesisResult& a, const SynthesisResult& b);

} // namespace stlsynth
