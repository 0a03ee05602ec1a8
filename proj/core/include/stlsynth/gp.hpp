#pragma once

#include <Eigen/Core>

#include <vector>

namespace stlsynth {

/// Matern-5/2 kernel hyperparameters. The smoothness is fixed at nu = 5/2;
/// noise_variance is the observation noise sigma^2 (a jitter floor of 1e-10
/// is always added on top during factorization).
struct KernelParams {
  double signal_variance = 1.0; // sigma_f^2
  double lengthscale = 1.0;     // ell, isotropic
  double noise_variance = 1e-6; // sigma^2
};

/// k(x, x') = sigma_f^2 (1 + sqrt5 r/ell + 5 r^2 / (3 ell^2)) exp(-sqrt5 r/ell)
/// with r = |x - x'|_2.
double matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                const KernelParams& params);

/// Gaussian process regression over flattened control vectors with a zero
/// prior mean.
///
/// A GaussianProcess is an immutable snapshot: with_observation returns a new
/// state and posterior() is pure, so snapshots can be queried concurrently.
/// The covariance factorization K + (sigma^2 + jitter) I = L L^T is extended
/// incrementally on update; the result matches a from-scratch refit to
/// numerical roundoff.
///
/// When target centering is enabled (the default) observed costs are shifted
/// by their running mean before fitting and the shift is added back at
/// prediction, which keeps the zero-mean prior sensible for costs far from 0.
class GaussianProcess {
public:
  explicit GaussianProcess(KernelParams params, bool center_targets = true);

  /// Adds one (input, cost) observation. Throws on a non-finite cost or a
  /// dimension mismatch with existing observations.
  GaussianProcess with_observation(Eigen::VectorXd x, double cost) const;

  struct Posterior {
    double mean;
    double variance;
  };

  /// Posterior at a query point. An empty state returns the prior
  /// (0, signal_variance). Variance is clamped at zero against roundoff.
  Posterior posterior(const Eigen::VectorXd& x) const;

  /// Number of observations; equals the covariance factorization dimension.
  int size() const { return static_cast<int>(inputs_.size()); }

  const KernelParams& kernel() const { return params_; }
  bool centering() const { return center_; }
  const std::vector<Eigen::VectorXd>& inputs() const { return inputs_; }
  const Eigen::VectorXd& costs() const { return costs_; }

  /// Refactorizes the same observations under different hyperparameters.
  GaussianProcess with_kernel(KernelParams params) const;

  /// log p(costs | inputs, kernel); -inf for an empty state.
  double log_marginal_likelihood() const;

  /// Grid search over multiples of the current lengthscale and signal
  /// variance, keeping whichever refit maximizes the marginal likelihood.
  GaussianProcess tuned_by_grid() const;

private:
  void refactor();
  void recompute_weights();
  Eigen::VectorXd kernel_column(const Eigen::VectorXd& x) const;

  KernelParams params_;
  bool center_;
  std::vector<Eigen::VectorXd> inputs_;
  Eigen::VectorXd costs_;
  Eigen::MatrixXd chol_;    // lower-triangular L
  Eigen::VectorXd weights_; // (K + sigma^2 I)^-1 (costs - mean)
  double target_mean_ = 0.0;
  double jitter_;
};

} // namespace stlsynth
