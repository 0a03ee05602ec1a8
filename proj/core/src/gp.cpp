#include "stlsynth/gp.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace stlsynth {

namespace {

constexpr double kBaseJitter = 1e-10;
constexpr double kMaxJitter = 1e-4;
constexpr double kPi = 3.14159265358979323846;

void check_params(const KernelParams& p) {
  if (!(p.signal_variance > 0.0)) {
    throw std::invalid_argument("signal variance must be positive");
  }
  if (!(p.lengthscale > 0.0)) {
    throw std::invalid_argument("lengthscale must be positive");
  }
  if (!(p.noise_variance >= 0.0)) {
    throw std::invalid_argument("noise variance must be non-negative");
  }
}

} // namespace

double matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                const KernelParams& params) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("matern52: dimension mismatch");
  }
  const double r = (x - y).norm();
  const double a = std::sqrt(5.0) * r / params.lengthscale;
  return params.signal_variance *
         (1.0 + a + 5.0 * r * r / (3.0 * params.lengthscale * params.lengthscale)) *
         std::exp(-a);
}

GaussianProcess::GaussianProcess(KernelParams params, bool center_targets)
    : params_(params), center_(center_targets), jitter_(kBaseJitter) {
  check_params(params_);
}

Eigen::VectorXd GaussianProcess::kernel_column(const Eigen::VectorXd& x) const {
  Eigen::VectorXd k(size());
  for (int i = 0; i < size(); ++i) {
    k[i] = matern52(inputs_[static_cast<std::size_t>(i)], x, params_);
  }
  return k;
}

void GaussianProcess::refactor() {
  const int n = size();
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      K(i, j) = matern52(inputs_[static_cast<std::size_t>(i)],
                         inputs_[static_cast<std::size_t>(j)], params_);
      K(j, i) = K(i, j);
    }
  }
  while (true) {
    Eigen::MatrixXd shifted = K;
    shifted.diagonal().array() += params_.noise_variance + jitter_;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      recompute_weights();
      return;
    }
    jitter_ *= 2.0;
    if (jitter_ > kMaxJitter) {
      throw std::runtime_error("GP covariance is not positive definite even "
                               "with maximum jitter");
    }
  }
}

void GaussianProcess::recompute_weights() {
  target_mean_ = center_ && size() > 0 ? costs_.mean() : 0.0;
  const Eigen::VectorXd centered = costs_.array() - target_mean_;
  weights_ = chol_.triangularView<Eigen::Lower>().solve(centered);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(weights_);
}

GaussianProcess GaussianProcess::with_observation(Eigen::VectorXd x,
                                                  double cost) const {
  if (!std::isfinite(cost)) {
    throw std::invalid_argument("GP observation cost must be finite");
  }
  if (size() > 0 && x.size() != inputs_.front().size()) {
    throw std::invalid_argument("GP observation dimension mismatch");
  }

  const int old_n = size();
  GaussianProcess next = *this;
  next.inputs_.push_back(std::move(x));
  next.costs_.conservativeResize(old_n + 1);
  next.costs_[old_n] = cost;

  const int n = next.size();
  if (n == 1) {
    next.refactor();
    return next;
  }

  // Rank-one Cholesky extension: append a row [l^T lambda] to L.
  const Eigen::VectorXd& x_new = next.inputs_.back();
  Eigen::VectorXd k(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    k[i] = matern52(next.inputs_[static_cast<std::size_t>(i)], x_new, params_);
  }
  const double kappa =
      matern52(x_new, x_new, params_) + params_.noise_variance + next.jitter_;
  const Eigen::VectorXd l = chol_.triangularView<Eigen::Lower>().solve(k);
  const double lambda_sq = kappa - l.squaredNorm();
  if (lambda_sq <= 0.0) {
    // Numerically losing positive definiteness; rebuild with escalated jitter.
    next.jitter_ *= 2.0;
    next.refactor();
    return next;
  }

  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(n, n);
  grown.topLeftCorner(n - 1, n - 1) = chol_;
  grown.row(n - 1).head(n - 1) = l.transpose();
  grown(n - 1, n - 1) = std::sqrt(lambda_sq);
  next.chol_ = std::move(grown);
  next.recompute_weights();
  return next;
}

GaussianProcess::Posterior GaussianProcess::posterior(const Eigen::VectorXd& x) const {
  if (size() == 0) {
    return {0.0, params_.signal_variance};
  }
  if (x.size() != inputs_.front().size()) {
    throw std::invalid_argument("GP query dimension mismatch");
  }
  const Eigen::VectorXd k = kernel_column(x);
  const double mean = target_mean_ + k.dot(weights_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  double variance = params_.signal_variance - v.squaredNorm();
  if (variance < 0.0) {
    variance = 0.0;
  }
  return {mean, variance};
}

GaussianProcess GaussianProcess::with_kernel(KernelParams params) const {
  check_params(params);
  GaussianProcess next = *this;
  next.params_ = params;
  next.jitter_ = kBaseJitter;
  if (next.size() > 0) {
    next.refactor();
  }
  return next;
}

double GaussianProcess::log_marginal_likelihood() const {
  const int n = size();
  if (n == 0) {
    return -std::numeric_limits<double>::infinity();
  }
  const Eigen::VectorXd centered = costs_.array() - target_mean_;
  const double fit = centered.dot(weights_);
  const double log_det = chol_.diagonal().array().log().sum();
  return -0.5 * fit - log_det - 0.5 * n * std::log(2.0 * kPi);
}

GaussianProcess GaussianProcess::tuned_by_grid() const {
  if (size() < 2) {
    return *this;
  }
  static constexpr double ls_grid[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  static constexpr double sv_grid[] = {0.25, 1.0, 4.0};
  GaussianProcess best = *this;
  double best_lml = log_marginal_likelihood();
  for (double ls : ls_grid) {
    for (double sv : sv_grid) {
      if (ls == 1.0 && sv == 1.0) continue;
      KernelParams cand = params_;
      cand.lengthscale = params_.lengthscale * ls;
      cand.signal_variance = params_.signal_variance * sv;
      GaussianProcess fit = with_kernel(cand);
      const double lml = fit.log_marginal_likelihood();
      if (lml > best_lml) {
        best_lml = lml;
        best = std::move(fit);
      }
    }
  }
  return best;
}

} // namespace stlsynth
