#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stlsynth {

namespace detail {
struct FormulaNode;
}

/// Finite discrete-time output signal y_0..y_T with a fixed dimension p.
/// Immutable after construction; safe to share between threads.
class Trace {
public:
  explicit Trace(std::vector<Eigen::VectorXd> samples);

  /// Convenience for one-dimensional signals.
  static Trace from_scalars(const std::vector<double>& values);

  /// Number of samples, T+1. Always >= 1.
  int length() const { return static_cast<int>(samples_.size()); }
  int dimension() const { return static_cast<int>(samples_.front().size()); }
  const Eigen::VectorXd& at(int t) const;

private:
  std::vector<Eigen::VectorXd> samples_;
};

enum class FormulaKind { Predicate, Not, And, Or, Until, Eventually, Always };

/// Bounded STL formula over the output signal.
///
/// A Formula is an immutable AST; copies share nodes and every operation on
/// it is pure, so formulas can be evaluated concurrently. Temporal windows
/// [t1,t2] are interpreted relative to the evaluation time. Atomic
/// predicates compare mu(y_t) against an offset: the parser only produces
/// linear mu(y) = a.y, but a custom scalar function can be plugged in
/// programmatically.
class Formula {
public:
  using PredicateFn = std::function<double(const Eigen::VectorXd&)>;

  static Formula predicate(Eigen::VectorXd coefficients, double offset);
  static Formula predicate(PredicateFn mu, double offset, std::string name);
  static Formula negation(Formula child);
  static Formula conjunction(Formula left, Formula right);
  static Formula disjunction(Formula left, Formula right);
  static Formula until(Formula left, Formula right, int t1, int t2);
  static Formula eventually(Formula child, int t1, int t2);
  static Formula always(Formula child, int t1, int t2);

  FormulaKind kind() const;

  /// Child accessors. left() doubles as the only child of unary nodes.
  Formula left() const;
  Formula right() const;

  /// Window of a temporal node.
  int lower_bound() const;
  int upper_bound() const;

  /// Predicate accessors.
  const Eigen::VectorXd& coefficients() const;
  double offset() const;
  bool has_custom_mu() const;
  const std::string& predicate_name() const;
  /// mu(y) for a predicate node.
  double mu(const Eigen::VectorXd& y) const;

  /// Structural equality with exact coefficient match. Custom predicates
  /// compare equal only when they share the underlying node.
  bool operator==(const Formula& other) const;
  bool operator!=(const Formula& other) const { return !(*this == other); }

private:
  explicit Formula(std::shared_ptr<const detail::FormulaNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const detail::FormulaNode> node_;

  friend int horizon(const Formula&);
  friend bool eval_boolean(const Formula&, const Trace&, int);
  friend double robustness(const Formula&, const Trace&, int);
  friend std::string to_string(const Formula&);
};

/// Error raised by parse_formula, carrying the byte offset of the offending
/// token in the input text.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// Parses the textual STL grammar:
///
///   predicates  (expr > c) with expr a linear combination of y0..y{p-1}
///   operators   not, and, or, U[a,b], F[a,b], G[a,b]
///   precedence  not/F/G bind tightest, then and, then or, then U
///
/// `dimension` is the output dimension p; referencing y_k with k >= p is an
/// error.
Formula parse_formula(std::string_view text, int dimension);

/// Canonical text form; parse_formula(to_string(f), p) == f for any formula
/// with linear predicates.
std::string to_string(const Formula& formula);

/// Smallest T such that evaluating the formula at time 0 touches only
/// samples y_0..y_T. Nested windows add up.
int horizon(const Formula& formula);

/// Boolean satisfaction at time t. Predicates hold when mu(y_t) >= c.
/// Requires t + horizon(formula) <= trace.length() - 1.
bool eval_boolean(const Formula& formula, const Trace& trace, int t = 0);

/// Quantitative robustness degree at time t. Positive robustness implies
/// Boolean satisfaction of the same formula on the same trace.
double robustness(const Formula& formula, const Trace& trace, int t = 0);

} // namespace stlsynth
