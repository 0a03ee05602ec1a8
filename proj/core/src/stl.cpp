#include "stlsynth/stl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

namespace stlsynth {

// ---------------------------------------------------------------------------
// Trace

Trace::Trace(std::vector<Eigen::VectorXd> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw std::invalid_argument("Trace: need at least one sample");
  }
  const Eigen::Index p = samples_.front().size();
  if (p < 1) {
    throw std::invalid_argument("Trace: samples must have dimension >= 1");
  }
  for (const auto& y : samples_) {
    if (y.size() != p) {
      throw std::invalid_argument("Trace: all samples must share one dimension");
    }
  }
}

Trace Trace::from_scalars(const std::vector<double>& values) {
  std::vector<Eigen::VectorXd> samples;
  samples.reserve(values.size());
  for (double v : values) {
    samples.push_back(Eigen::VectorXd::Constant(1, v));
  }
  return Trace(std::move(samples));
}

const Eigen::VectorXd& Trace::at(int t) const {
  if (t < 0 || t >= length()) {
    throw std::out_of_range("Trace: sample index " + std::to_string(t) +
                            " outside [0," + std::to_string(length() - 1) + "]");
  }
  return samples_[static_cast<std::size_t>(t)];
}

// ---------------------------------------------------------------------------
// Formula nodes

namespace detail {

struct FormulaNode {
  FormulaKind kind;
  // Predicate payload.
  Eigen::VectorXd coeffs;
  double offset = 0.0;
  Formula::PredicateFn custom;
  std::string name;
  // Children; `left` is the single child of unary nodes.
  std::shared_ptr<const FormulaNode> left;
  std::shared_ptr<const FormulaNode> right;
  // Temporal window.
  int t1 = 0;
  int t2 = 0;
};

} // namespace detail

namespace {

using detail::FormulaNode;

void check_window(int t1, int t2) {
  if (t1 < 0 || t2 < 0) {
    throw std::invalid_argument("temporal bounds must be non-negative");
  }
  if (t1 > t2) {
    throw std::invalid_argument("temporal interval [" + std::to_string(t1) + "," +
                                std::to_string(t2) + "] has t1 > t2");
  }
}

} // namespace

Formula Formula::predicate(Eigen::VectorXd coefficients, double offset) {
  if (coefficients.size() < 1) {
    throw std::invalid_argument("predicate needs at least one coefficient");
  }
  auto node = std::make_shared<FormulaNode>();
  node->kind = FormulaKind::Predicate;
  node->coeffs = std::move(coefficients);
  node->offset = offset;
  return Formula(std::move(node));
}

Formula Formula::predicate(PredicateFn mu, double offset, std::string name) {
  if (!mu) {
    throw std::invalid_argument("predicate function must be callable");
  }
  auto node = std::make_shared<FormulaNode>();
  node->kind = FormulaKind::Predicate;
  node->custom = std::move(mu);
  node->offset = offset;
  node->name = std::move(name);
  return Formula(std::move(node));
}

Formula Formula::negation(Formula child) {
  auto node = std::make_shared<FormulaNode>();
  node->kind = FormulaKind::Not;
  node->left = std::move(child.node_);
  return Formula(std::move(node));
}

Formula Formula::conjunction(Formula left, Formula right) {
  auto node = std::make_shared<FormulaNode>();
  node->kind = FormulaKind::And;
  node->left = std::move(left.node_);
  node->right = std::move(right.node_);
  return Formula(std::move(node));
}

Formula Formula::disjunction(Formula left, Formula right) {
  auto node = std::make_shared<FormulaNode>();
  node->kind = FormulaKind::Or;
  node->left = std::move(left.node_);
  node->right = std::move(right.node_);
  return Formula(std::move(node));
}

Formula Formula::until(Formula left, Formula right, int t1, int t2) {
  check_window(t1, t2);
  auto node = std::make_shared<FormulaNode>();
  node->kind = FormulaKind::Until;
  node->left = std::move(left.node_);
  node->right = std::move(right.node_);
  node->t1 = t1;
  node->t2 = t2;
  return Formula(std::move(node));
}

Formula Formula::eventually(Formula child, int t1, int t2) {
  check_window(t1, t2);
  auto node = std::make_shared<FormulaNode>();
  node->kind = FormulaKind::Eventually;
  node->left = std::move(child.node_);
  node->t1 = t1;
  node->t2 = t2;
  return Formula(std::move(node));
}

Formula Formula::always(Formula child, int t1, int t2) {
  check_window(t1, t2);
  auto node = std::make_shared<FormulaNode>();
  node->kind = FormulaKind::Always;
  node->left = std::move(child.node_);
  node->t1 = t1;
  node->t2 = t2;
  return Formula(std::move(node));
}

FormulaKind Formula::kind() const { return node_->kind; }

Formula Formula::left() const {
  if (!node_->left) {
    throw std::logic_error("formula node has no child");
  }
  return Formula(node_->left);
}

Formula Formula::right() const {
  if (!node_->right) {
    throw std::logic_error("formula node has no right child");
  }
  return Formula(node_->right);
}

int Formula::lower_bound() const { return node_->t1; }
int Formula::upper_bound() const { return node_->t2; }

const Eigen::VectorXd& Formula::coefficients() const { return node_->coeffs; }
double Formula::offset() const { return node_->offset; }
bool Formula::has_custom_mu() const { return static_cast<bool>(node_->custom); }
const std::string& Formula::predicate_name() const { return node_->name; }

double Formula::mu(const Eigen::VectorXd& y) const {
  if (node_->kind != FormulaKind::Predicate) {
    throw std::logic_error("mu() is only defined on predicate nodes");
  }
  if (node_->custom) {
    return node_->custom(y);
  }
  if (node_->coeffs.size() != y.size()) {
    throw std::invalid_argument("predicate dimension " +
                                std::to_string(node_->coeffs.size()) +
                                " does not match sample dimension " +
                                std::to_string(y.size()));
  }
  return node_->coeffs.dot(y);
}

namespace {

bool equal_nodes(const FormulaNode* a, const FormulaNode* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
  case FormulaKind::Predicate:
    if (a->custom || b->custom) return false; // distinct custom nodes differ
    return a->offset == b->offset && a->coeffs.size() == b->coeffs.size() &&
           a->coeffs == b->coeffs;
  case FormulaKind::Not:
    return equal_nodes(a->left.get(), b->left.get());
  case FormulaKind::And:
  case FormulaKind::Or:
    return equal_nodes(a->left.get(), b->left.get()) &&
           equal_nodes(a->right.get(), b->right.get());
  case FormulaKind::Until:
    return a->t1 == b->t1 && a->t2 == b->t2 &&
           equal_nodes(a->left.get(), b->left.get()) &&
           equal_nodes(a->right.get(), b->right.get());
  case FormulaKind::Eventually:
  case FormulaKind::Always:
    return a->t1 == b->t1 && a->t2 == b->t2 &&
           equal_nodes(a->left.get(), b->left.get());
  }
  return false;
}

} // namespace

bool Formula::operator==(const Formula& other) const {
  return equal_nodes(node_.get(), other.node_.get());
}

// ---------------------------------------------------------------------------
// Horizon and semantics

namespace {

int node_horizon(const FormulaNode& n) {
  switch (n.kind) {
  case FormulaKind::Predicate:
    return 0;
  case FormulaKind::Not:
    return node_horizon(*n.left);
  case FormulaKind::And:
  case FormulaKind::Or:
    return std::max(node_horizon(*n.left), node_horizon(*n.right));
  case FormulaKind::Until:
    return n.t2 + std::max(node_horizon(*n.left), node_horizon(*n.right));
  case FormulaKind::Eventually:
  case FormulaKind::Always:
    return n.t2 + node_horizon(*n.left);
  }
  return 0;
}

double predicate_margin(const FormulaNode& n, const Eigen::VectorXd& y) {
  double value;
  if (n.custom) {
    value = n.custom(y);
  } else {
    if (n.coeffs.size() != y.size()) {
      throw std::invalid_argument("predicate dimension " +
                                  std::to_string(n.coeffs.size()) +
                                  " does not match trace dimension " +
                                  std::to_string(y.size()));
    }
    value = n.coeffs.dot(y);
  }
  return value - n.offset;
}

bool eval_node(const FormulaNode& n, const Trace& tr, int t) {
  switch (n.kind) {
  case FormulaKind::Predicate:
    return predicate_margin(n, tr.at(t)) >= 0.0;
  case FormulaKind::Not:
    return !eval_node(*n.left, tr, t);
  case FormulaKind::And:
    return eval_node(*n.left, tr, t) && eval_node(*n.right, tr, t);
  case FormulaKind::Or:
    return eval_node(*n.left, tr, t) || eval_node(*n.right, tr, t);
  case FormulaKind::Until: {
    // exists t' in [t+t1, t+t2] with phi2 at t' and phi1 on all of [t, t'].
    bool left_holds = true;
    int k = t;
    for (int tp = t + n.t1; tp <= t + n.t2; ++tp) {
      while (left_holds && k <= tp) {
        left_holds = eval_node(*n.left, tr, k);
        ++k;
      }
      if (!left_holds) {
        return false;
      }
      if (eval_node(*n.right, tr, tp)) {
        return true;
      }
    }
    return false;
  }
  case FormulaKind::Eventually:
    for (int tp = t + n.t1; tp <= t + n.t2; ++tp) {
      if (eval_node(*n.left, tr, tp)) return true;
    }
    return false;
  case FormulaKind::Always:
    for (int tp = t + n.t1; tp <= t + n.t2; ++tp) {
      if (!eval_node(*n.left, tr, tp)) return false;
    }
    return true;
  }
  return false;
}

double rob_node(const FormulaNode& n, const Trace& tr, int t) {
  switch (n.kind) {
  case FormulaKind::Predicate:
    return predicate_margin(n, tr.at(t));
  case FormulaKind::Not:
    return -rob_node(*n.left, tr, t);
  case FormulaKind::And:
    return std::min(rob_node(*n.left, tr, t), rob_node(*n.right, tr, t));
  case FormulaKind::Or:
    return std::max(rob_node(*n.left, tr, t), rob_node(*n.right, tr, t));
  case FormulaKind::Until: {
    // max over t' of min(rho_phi2(t'), min over t'' in [t,t'] of rho_phi1(t'')).
    double best = -std::numeric_limits<double>::infinity();
    double left_min = std::numeric_limits<double>::infinity();
    int k = t;
    for (int tp = t + n.t1; tp <= t + n.t2; ++tp) {
      for (; k <= tp; ++k) {
        left_min = std::min(left_min, rob_node(*n.left, tr, k));
      }
      best = std::max(best, std::min(rob_node(*n.right, tr, tp), left_min));
    }
    return best;
  }
  case FormulaKind::Eventually: {
    double best = -std::numeric_limits<double>::infinity();
    for (int tp = t + n.t1; tp <= t + n.t2; ++tp) {
      best = std::max(best, rob_node(*n.left, tr, tp));
    }
    return best;
  }
  case FormulaKind::Always: {
    double worst = std::numeric_limits<double>::infinity();
    for (int tp = t + n.t1; tp <= t + n.t2; ++tp) {
      worst = std::min(worst, rob_node(*n.left, tr, tp));
    }
    return worst;
  }
  }
  return 0.0;
}

void check_trace_window(const Formula& f, const Trace& tr, int t) {
  if (t < 0) {
    throw std::out_of_range("evaluation time must be non-negative");
  }
  const int needed = t + horizon(f);
  if (needed > tr.length() - 1) {
    throw std::out_of_range("trace too short: evaluating at t=" + std::to_string(t) +
                            " touches samples up to index " + std::to_string(needed) +
                            " but the trace ends at " + std::to_string(tr.length() - 1));
  }
}

} // namespace

int horizon(const Formula& formula) { return node_horizon(*formula.node_); }

bool eval_boolean(const Formula& formula, const Trace& trace, int t) {
  check_trace_window(formula, trace, t);
  return eval_node(*formula.node_, trace, t);
}

double robustness(const Formula& formula, const Trace& trace, int t) {
  check_trace_window(formula, trace, t);
  return rob_node(*formula.node_, trace, t);
}

// ---------------------------------------------------------------------------
// Pretty printer

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string print_node(const FormulaNode& n) {
  switch (n.kind) {
  case FormulaKind::Predicate: {
    std::string out = "(";
    if (n.custom) {
      out += n.name.empty() ? "<custom>" : n.name;
    } else {
      bool first = true;
      for (Eigen::Index i = 0; i < n.coeffs.size(); ++i) {
        if (n.coeffs[i] == 0.0) continue;
        if (!first) out += " + ";
        out += format_double(n.coeffs[i]) + "*y" + std::to_string(i);
        first = false;
      }
      if (first) {
        out += "0*y0";
      }
    }
    out += " > " + format_double(n.offset) + ")";
    return out;
  }
  case FormulaKind::Not:
    return "not " + print_node(*n.left);
  case FormulaKind::And:
    return "(" + print_node(*n.left) + " and " + print_node(*n.right) + ")";
  case FormulaKind::Or:
    return "(" + print_node(*n.left) + " or " + print_node(*n.right) + ")";
  case FormulaKind::Until:
    return "(" + print_node(*n.left) + " U[" + std::to_string(n.t1) + "," +
           std::to_string(n.t2) + "] " + print_node(*n.right) + ")";
  case FormulaKind::Eventually:
    return "F[" + std::to_string(n.t1) + "," + std::to_string(n.t2) + "] " +
           print_node(*n.left);
  case FormulaKind::Always:
    return "G[" + std::to_string(n.t1) + "," + std::to_string(n.t2) + "] " +
           print_node(*n.left);
  }
  return {};
}

} // namespace

std::string to_string(const Formula& formula) { return print_node(*formula.node_); }

// ---------------------------------------------------------------------------
// Parser

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
      position_(position) {}

namespace {

enum class Tok {
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Greater,
  Plus,
  Minus,
  Star,
  Number,
  YVar,
  KwNot,
  KwAnd,
  KwOr,
  KwUntil,
  KwFinally,
  KwGlobally,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::size_t pos = 0;
  double number = 0.0;
  bool integral = false; // number written as plain digits
  int var_index = 0;
};

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    current_ = Token{};
    current_.pos = pos_;
    if (pos_ >= text_.size()) {
      current_.kind = Tok::End;
      return;
    }
    const char c = text_[pos_];
    switch (c) {
    case '(': current_.kind = Tok::LParen; ++pos_; return;
    case ')': current_.kind = Tok::RParen; ++pos_; return;
    case '[': current_.kind = Tok::LBracket; ++pos_; return;
    case ']': current_.kind = Tok::RBracket; ++pos_; return;
    case ',': current_.kind = Tok::Comma; ++pos_; return;
    case '>': current_.kind = Tok::Greater; ++pos_; return;
    case '+': current_.kind = Tok::Plus; ++pos_; return;
    case '-': current_.kind = Tok::Minus; ++pos_; return;
    case '*': current_.kind = Tok::Star; ++pos_; return;
    default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      lex_word();
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  void lex_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) {
      throw ParseError("malformed number", pos_);
    }
    current_.kind = Tok::Number;
    current_.number = value;
    current_.integral = std::all_of(begin, ptr, [](char ch) {
      return std::isdigit(static_cast<unsigned char>(ch));
    });
    pos_ += static_cast<std::size_t>(ptr - begin);
  }

  void lex_word() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalnum(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    const std::string_view word = text_.substr(start, pos_ - start);
    if (word == "not") { current_.kind = Tok::KwNot; return; }
    if (word == "and") { current_.kind = Tok::KwAnd; return; }
    if (word == "or") { current_.kind = Tok::KwOr; return; }
    if (word == "U") { current_.kind = Tok::KwUntil; return; }
    if (word == "F") { current_.kind = Tok::KwFinally; return; }
    if (word == "G") { current_.kind = Tok::KwGlobally; return; }
    if (word.size() > 1 && word[0] == 'y' &&
        std::all_of(word.begin() + 1, word.end(), [](char ch) {
          return std::isdigit(static_cast<unsigned char>(ch));
        })) {
      current_.kind = Tok::YVar;
      int index = 0;
      std::from_chars(word.data() + 1, word.data() + word.size(), index);
      current_.var_index = index;
      return;
    }
    throw ParseError("unknown token '" + std::string(word) + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token current_;
};

class Parser {
public:
  Parser(std::string_view text, int dimension) : lex_(text), dim_(dimension) {
    if (dimension < 1) {
      throw std::invalid_argument("signal dimension must be >= 1");
    }
  }

  Formula parse() {
    Formula f = parse_until();
    expect(Tok::End, "unexpected trailing input");
    return f;
  }

private:
  // until := or ( 'U' '[a,b]' or )*     (loosest binding, left-associative)
  Formula parse_until() {
    Formula f = parse_or();
    while (lex_.peek().kind == Tok::KwUntil) {
      lex_.take();
      auto [t1, t2] = parse_bounds();
      Formula rhs = parse_or();
      f = Formula::until(std::move(f), std::move(rhs), t1, t2);
    }
    return f;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (lex_.peek().kind == Tok::KwOr) {
      lex_.take();
      f = Formula::disjunction(std::move(f), parse_and());
    }
    return f;
  }

  Formula parse_and() {
    Formula f = parse_unary();
    while (lex_.peek().kind == Tok::KwAnd) {
      lex_.take();
      f = Formula::conjunction(std::move(f), parse_unary());
    }
    return f;
  }

  Formula parse_unary() {
    const Token& t = lex_.peek();
    switch (t.kind) {
    case Tok::KwNot:
      lex_.take();
      return Formula::negation(parse_unary());
    case Tok::KwFinally: {
      lex_.take();
      auto [t1, t2] = parse_bounds();
      return Formula::eventually(parse_unary(), t1, t2);
    }
    case Tok::KwGlobally: {
      lex_.take();
      auto [t1, t2] = parse_bounds();
      return Formula::always(parse_unary(), t1, t2);
    }
    case Tok::LParen:
      return parse_group();
    default:
      throw ParseError("expected formula", t.pos);
    }
  }

  // A parenthesized item is either a predicate (expr > c) or a grouped
  // sub-formula; the first token inside decides.
  Formula parse_group() {
    expect(Tok::LParen, "expected '('");
    const Tok inner = lex_.peek().kind;
    Formula f = (inner == Tok::Number || inner == Tok::YVar ||
                 inner == Tok::Plus || inner == Tok::Minus)
                    ? parse_predicate_body()
                    : parse_until();
    expect(Tok::RParen, "expected ')'");
    return f;
  }

  Formula parse_predicate_body() {
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(dim_);
    double constant = 0.0;
    parse_linear_term(coeffs, constant, /*sign=*/1.0);
    while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
      const double sign = lex_.take().kind == Tok::Plus ? 1.0 : -1.0;
      parse_linear_term(coeffs, constant, sign);
    }
    expect(Tok::Greater, "expected '>' in predicate");
    const double rhs = parse_signed_number();
    return Formula::predicate(std::move(coeffs), rhs - constant);
  }

  // term := [sign] ( number ['*'] yvar | number | yvar )
  void parse_linear_term(Eigen::VectorXd& coeffs, double& constant, double sign) {
    while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
      if (lex_.take().kind == Tok::Minus) sign = -sign;
    }
    const Token t = lex_.peek();
    if (t.kind == Tok::Number) {
      const double value = lex_.take().number;
      if (lex_.peek().kind == Tok::Star) {
        lex_.take();
        coeffs[expect_yvar()] += sign * value;
      } else if (lex_.peek().kind == Tok::YVar) {
        coeffs[expect_yvar()] += sign * value;
      } else {
        constant += sign * value; // bare constant folds into the offset
      }
      return;
    }
    if (t.kind == Tok::YVar) {
      coeffs[expect_yvar()] += sign;
      return;
    }
    throw ParseError("expected a coefficient or signal variable", t.pos);
  }

  int expect_yvar() {
    const Token t = lex_.take();
    if (t.kind != Tok::YVar) {
      throw ParseError("expected signal variable y0..y" + std::to_string(dim_ - 1),
                       t.pos);
    }
    if (t.var_index >= dim_) {
      throw ParseError("signal variable y" + std::to_string(t.var_index) +
                           " exceeds dimension p=" + std::to_string(dim_),
                       t.pos);
    }
    return t.var_index;
  }

  double parse_signed_number() {
    double sign = 1.0;
    while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
      if (lex_.take().kind == Tok::Minus) sign = -sign;
    }
    const Token t = lex_.take();
    if (t.kind != Tok::Number) {
      throw ParseError("expected a number", t.pos);
    }
    return sign * t.number;
  }

  std::pair<int, int> parse_bounds() {
    expect(Tok::LBracket, "expected '[' after temporal operator");
    const int t1 = parse_bound_value();
    expect(Tok::Comma, "expected ',' in temporal bounds");
    const std::size_t t2_pos = lex_.peek().pos;
    const int t2 = parse_bound_value();
    expect(Tok::RBracket, "expected ']' after temporal bounds");
    if (t1 > t2) {
      throw ParseError("temporal interval has t1 > t2", t2_pos);
    }
    return {t1, t2};
  }

  int parse_bound_value() {
    if (lex_.peek().kind == Tok::Minus) {
      throw ParseError("temporal bound must be non-negative", lex_.peek().pos);
    }
    const Token num = lex_.take();
    if (num.kind != Tok::Number || !num.integral) {
      throw ParseError("temporal bound must be a non-negative integer", num.pos);
    }
    if (num.number > static_cast<double>(std::numeric_limits<int>::max())) {
      throw ParseError("temporal bound too large", num.pos);
    }
    return static_cast<int>(num.number);
  }

  void expect(Tok kind, const char* message) {
    const Token t = lex_.take();
    if (t.kind != kind) {
      throw ParseError(message, t.pos);
    }
  }

  Lexer lex_;
  int dim_;
};

} // namespace

Formula parse_formula(std::string_view text, int dimension) {
  return Parser(text, dimension).parse();
}

} // namespace stlsynth
