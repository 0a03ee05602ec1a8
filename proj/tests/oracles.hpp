#pragma once

// Independent reference implementations used only by tests. These transcribe
// the semantics directly and take different numerical routes than the
// library (explicit window scans, explicit matrix inverses), so agreement is
// meaningful.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "stlsynth/stl.hpp"

namespace oracle {

using stlsynth::Formula;
using stlsynth::FormulaKind;

// ---------------------------------------------------------------------------
// Naive STL semantics over anything with an `at(t)` sample accessor.

template <class TraceLike>
bool naive_bool(const Formula& f, const TraceLike& tr, int t) {
  switch (f.kind()) {
  case FormulaKind::Predicate:
    return f.mu(tr.at(t)) >= f.offset();
  case FormulaKind::Not:
    return !naive_bool(f.left(), tr, t);
  case FormulaKind::And:
    return naive_bool(f.left(), tr, t) && naive_bool(f.right(), tr, t);
  case FormulaKind::Or:
    return naive_bool(f.left(), tr, t) || naive_bool(f.right(), tr, t);
  case FormulaKind::Until: {
    for (int tp = t + f.lower_bound(); tp <= t + f.upper_bound(); ++tp) {
      if (!naive_bool(f.right(), tr, tp)) continue;
      bool prefix = true;
      for (int k = t; k <= tp; ++k) {
        prefix = prefix && naive_bool(f.left(), tr, k);
      }
      if (prefix) return true;
    }
    return false;
  }
  case FormulaKind::Eventually: {
    for (int tp = t + f.lower_bound(); tp <= t + f.upper_bound(); ++tp) {
      if (naive_bool(f.left(), tr, tp)) return true;
    }
    return false;
  }
  case FormulaKind::Always: {
    for (int tp = t + f.lower_bound(); tp <= t + f.upper_bound(); ++tp) {
      if (!naive_bool(f.left(), tr, tp)) return false;
    }
    return true;
  }
  }
  return false;
}

template <class TraceLike>
double naive_rob(const Formula& f, const TraceLike& tr, int t) {
  switch (f.kind()) {
  case FormulaKind::Predicate:
    return f.mu(tr.at(t)) - f.offset();
  case FormulaKind::Not:
    return -naive_rob(f.left(), tr, t);
  case FormulaKind::And:
    return std::min(naive_rob(f.left(), tr, t), naive_rob(f.right(), tr, t));
  case FormulaKind::Or:
    return std::max(naive_rob(f.left(), tr, t), naive_rob(f.right(), tr, t));
  case FormulaKind::Until: {
    double best = -std::numeric_limits<double>::infinity();
    for (int tp = t + f.lower_bound(); tp <= t + f.upper_bound(); ++tp) {
      double prefix = std::numeric_limits<double>::infinity();
      for (int k = t; k <= tp; ++k) {
        prefix = std::min(prefix, naive_rob(f.left(), tr, k));
      }
      best = std::max(best, std::min(naive_rob(f.right(), tr, tp), prefix));
    }
    return best;
  }
  case FormulaKind::Eventually: {
    double best = -std::numeric_limits<double>::infinity();
    for (int tp = t + f.lower_bound(); tp <= t + f.upper_bound(); ++tp) {
      best = std::max(best, naive_rob(f.left(), tr, tp));
    }
    return best;
  }
  case FormulaKind::Always: {
    double worst = std::numeric_limits<double>::infinity();
    for (int tp = t + f.lower_bound(); tp <= t + f.upper_bound(); ++tp) {
      worst = std::min(worst, naive_rob(f.left(), tr, tp));
    }
    return worst;
  }
  }
  return 0.0;
}

// Trace stand-in that records the largest sample index touched; running
// naive_rob on it measures the horizon empirically (robustness never
// short-circuits a window).
struct RecordingTrace {
  explicit RecordingTrace(int dimension) : value(Eigen::VectorXd::Zero(dimension)) {}
  const Eigen::VectorXd& at(int t) const {
    max_index = std::max(max_index, t);
    return value;
  }
  Eigen::VectorXd value;
  mutable int max_index = -1;
};

inline int horizon_by_instrumentation(const Formula& f, int dimension) {
  RecordingTrace probe(dimension);
  naive_rob(f, probe, 0);
  return std::max(probe.max_index, 0);
}

// ---------------------------------------------------------------------------
// Random generators

struct FormulaGen {
  std::mt19937_64 rng;
  int dimension = 1;
  int max_depth = 3;
  int max_bound = 2;

  explicit FormulaGen(std::uint64_t seed, int dim = 1) : rng(seed), dimension(dim) {}

  Formula predicate() {
    std::uniform_int_distribution<int> coef(-2, 2);
    std::uniform_int_distribution<int> off(-4, 4);
    Eigen::VectorXd c(dimension);
    for (int i = 0; i < dimension; ++i) {
      c[i] = coef(rng);
    }
    return Formula::predicate(std::move(c), off(rng));
  }

  std::pair<int, int> window() {
    std::uniform_int_distribution<int> lo(0, max_bound);
    std::uniform_int_distribution<int> len(0, max_bound);
    const int a = lo(rng);
    return {a, a + len(rng)};
  }

  Formula gen(int depth) {
    if (depth <= 0) {
      return predicate();
    }
    std::uniform_int_distribution<int> pick(0, 6);
    switch (pick(rng)) {
    case 0: return predicate();
    case 1: return Formula::negation(gen(depth - 1));
    case 2: return Formula::conjunction(gen(depth - 1), gen(depth - 1));
    case 3: return Formula::disjunction(gen(depth - 1), gen(depth - 1));
    case 4: {
      auto [a, b] = window();
      return Formula::until(gen(depth - 1), gen(depth - 1), a, b);
    }
    case 5: {
      auto [a, b] = window();
      return Formula::eventually(gen(depth - 1), a, b);
    }
    default: {
      auto [a, b] = window();
      return Formula::always(gen(depth - 1), a, b);
    }
    }
  }

  Formula gen() { return gen(max_depth); }
};

inline stlsynth::Trace random_integer_trace(std::mt19937_64& rng, int dimension,
                                            int length, int lo = 0, int hi = 5) {
  std::uniform_int_distribution<int> value(lo, hi);
  std::vector<Eigen::VectorXd> samples;
  samples.reserve(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    Eigen::VectorXd y(dimension);
    for (int i = 0; i < dimension; ++i) {
      y[i] = value(rng);
    }
    samples.push_back(std::move(y));
  }
  return stlsynth::Trace(std::move(samples));
}

// ---------------------------------------------------------------------------
// Dense-inverse GP reference

// Same Matern-5/2 function arranged differently: s = sqrt(5 d^2)/ell and the
// quadratic term written as s^2/3.
inline double matern52_reference(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                 double signal_variance, double lengthscale) {
  const double d2 = (a - b).squaredNorm();
  const double s = std::sqrt(5.0 * d2) / lengthscale;
  return signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

// Posterior through an explicit inverse of K + (noise + jitter) I.
inline std::pair<double, double>
gp_posterior_reference(const std::vector<Eigen::VectorXd>& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& query, double signal_variance,
                       double lengthscale, double noise, double jitter,
                       bool center) {
  const int n = static_cast<int>(X.size());
  if (n == 0) {
    return {0.0, signal_variance};
  }
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      K(i, j) = matern52_reference(X[static_cast<std::size_t>(i)],
                                   X[static_cast<std::size_t>(j)], signal_variance,
                                   lengthscale);
    }
  }
  K.diagonal().array() += noise + jitter;
  const Eigen::MatrixXd K_inv = K.inverse();

  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) {
    k[i] = matern52_reference(X[static_cast<std::size_t>(i)], query, signal_variance,
                              lengthscale);
  }
  const double shift = center ? y.mean() : 0.0;
  const Eigen::VectorXd centered = y.array() - shift;
  const double mean = shift + k.dot(K_inv * centered);
  const double variance =
      matern52_reference(query, query, signal_variance, lengthscale) -
      k.dot(K_inv * k);
  return {mean, variance};
}

} // namespace oracle
