#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gp2s/random.hpp"

namespace gp2s {

/// Node-scoring expressions. Scores are minimized: the open node with the
/// smallest score is processed first.

enum class Symbol : std::uint8_t {
  // operators, all binary
  Add,
  Sub,
  Mul,
  Div,
  // node terminals
  Depth,
  BestEstimate,
  LowerBound,
  // model terminals
  RootDualBound,
  NumConstraints,
  NumVariables,
  // constant
  BigM,
};

inline constexpr std::size_t kNumOperators = 4;
inline constexpr std::size_t kNumTerminals = 7;
inline constexpr std::size_t kNumSymbols = kNumOperators + kNumTerminals;

/// Non-finite intermediate values are replaced by +/- this value.
inline constexpr double kBigScore = 1e30;
inline constexpr double kDefaultBigM = 1e8;

constexpr bool is_operator(Symbol s) { return static_cast<int>(s) < static_cast<int>(kNumOperators); }
constexpr int arity(Symbol s) { return is_operator(s) ? 2 : 0; }

std::string_view symbol_name(Symbol s);

struct NodeContext {
  std::int64_t depth = 0;
  double best_estimate = 0.0;
  double lower_bound = 0.0;
  double root_dual_bound = 0.0;
  std::int64_t num_constraints = 0;
  std::int64_t num_variables = 0;
  double big_m = kDefaultBigM;

  bool valid() const;
};

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ExprError {
 public:
  enum class Kind { Syntax, Arity, UnknownSymbol };
  ParseError(Kind kind, std::size_t offset, const std::string& what);
  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Expression tree stored in prefix order. A subtree is a contiguous range
/// starting at its root, which makes crossover and mutation splices.
class ScoreExpr {
 public:
  /// Single-leaf LowerBound expression.
  ScoreExpr();
  /// Throws ExprError if `prefix` is not exactly one well-formed tree.
  explicit ScoreExpr(std::vector<Symbol> prefix);

  static ScoreExpr leaf(Symbol terminal);
  static ScoreExpr binary(Symbol op, const ScoreExpr& lhs, const ScoreExpr& rhs);

  std::span<const Symbol> prefix() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  int depth() const;

  /// One past the last index of the subtree rooted at `root`.
  std::size_t subtree_end(std::size_t root) const;
  ScoreExpr subtree(std::size_t root) const;
  /// Copy of this tree with the subtree at `root` replaced by `graft`.
  ScoreExpr replace_subtree(std::size_t root, const ScoreExpr& graft) const;

  friend bool operator==(const ScoreExpr&, const ScoreExpr&) = default;

 private:
  std::vector<Symbol> nodes_;
};

double protected_div(double num, double den);

/// Total: never returns a non-finite value for a valid context.
double evaluate(const ScoreExpr& expr, const NodeContext& ctx);

ScoreExpr parse(std::string_view text);
std::string print(const ScoreExpr& expr);

/// Reads a `.ssx` file: one expression, `#` comment lines allowed.
ScoreExpr read_ssx(const std::string& path);
void write_ssx(const ScoreExpr& expr, const std::string& path);

/// Grow-style generator. Nodes shallower than `min_depth` are operators,
/// nodes at `max_depth` are terminals, anything in between is drawn
/// uniformly from all 11 symbols.
ScoreExpr random_tree(Rng& rng, int min_depth, int max_depth);

/// Number of perfect binary trees of depth r over 4 operators and 7
/// terminals. Throws std::overflow_error past 64 bits.
std::uint64_t count_perfect_trees(unsigned r);

}  // namespace gp2s
