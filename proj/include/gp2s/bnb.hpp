#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gp2s/expr.hpp"
#include "gp2s/milp.hpp"

namespace gp2s {

inline constexpr double kIntegralityTol = 1e-6;
inline constexpr double kPruneTol = 1e-9;
/// Gap reported when no incumbent exists (or the gap is undefined).
inline constexpr double kNoSolutionGap = 1e20;

struct BoundChange {
  Eigen::Index var;
  double lower;
  double upper;
};

struct FractionalVar {
  Eigen::Index var;
  double frac;  // in (0, 1)
};

struct BnbNode {
  std::int64_t id = 0;
  int depth = 0;
  std::vector<BoundChange> bound_changes;  // cumulative from the root
  double lower_bound = 0.0;
  std::vector<FractionalVar> frac;
  double best_estimate = 0.0;
  Eigen::VectorXd solution;
};

/// Fractional integer variables of `x`, ascending by index.
std::vector<FractionalVar> fractional_parts(const std::vector<bool>& integer_mask,
                                            const Eigen::VectorXd& x,
                                            double tol = kIntegralityTol);

/// Most fractional variable, smallest index on ties. `frac` must be nonempty.
Eigen::Index branch_variable(std::span<const FractionalVar> frac);

enum class BranchDirection { Down, Up };

class PseudocostTable {
 public:
  explicit PseudocostTable(Eigen::Index num_variables = 0);

  /// Records (child_z - parent_z) / f for Down, / (1 - f) for Up.
  /// Negative degradations from LP round-off are clamped to zero.
  void update(Eigen::Index var, double parent_z, double child_z, BranchDirection dir,
              double frac);

  /// Average unit degradation; variables without observations fall back
  /// to the global average for that direction, then to 1.
  double pseudocost(Eigen::Index var, BranchDirection dir) const;
  std::int64_t count(Eigen::Index var, BranchDirection dir) const;

 private:
  struct Side {
    std::vector<double> sum;
    std::vector<std::int64_t> count;
    double total = 0.0;
    std::int64_t observations = 0;
  };
  const Side& side(BranchDirection d) const { return d == BranchDirection::Down ? down_ : up_; }
  Side& side(BranchDirection d) { return d == BranchDirection::Down ? down_ : up_; }
  Side down_;
  Side up_;
};

/// z + sum_j min(P-_j f_j, P+_j (1 - f_j)) over the fractional variables.
double best_estimate(double lower_bound, std::span<const FractionalVar> frac,
                     const PseudocostTable& table);

/// |(z* - lb) / min(z*, lb)|; 0 when the two agree within 1e-9, 1e20 with no
/// incumbent or a zero denominator.
double compute_gap(double incumbent, double best_lb);

// Search strategies ---------------------------------------------------------

struct ScoreBfs {
  ScoreExpr expr;
  std::string label;  // name used in reports; defaults to the printed expr
};
struct LbBfs {};
struct BeBfs {};
struct BeDfs {};

using Strategy = std::variant<ScoreBfs, LbBfs, BeBfs, BeDfs>;

std::string strategy_name(const Strategy& s);
/// `lb-bfs`, `be-bfs`, `be-dfs`, `expr:<path.ssx>`, or `score:<s-expression>`.
Strategy parse_strategy(const std::string& spec);

/// Instance-level terminal values shared by every node of one solve.
struct ModelFeatures {
  double root_dual_bound = 0.0;
  std::int64_t num_constraints = 0;
  std::int64_t num_variables = 0;
  double big_m = kDefaultBigM;
};

NodeContext make_context(const BnbNode& node, const ModelFeatures& model);
/// Priority of `node` under `s`; smaller is processed first.
double node_score(const Strategy& s, const BnbNode& node, const ModelFeatures& model);

/// Open-node set ordered by (score, creation id).
class NodePool {
 public:
  NodePool(Strategy strategy, ModelFeatures model);

  /// Nodes pushed between two pops count as children of the node popped
  /// first (used by BeDfs).
  void push(BnbNode node);
  /// Next node per the strategy. Precondition: !empty().
  BnbNode pop();

  bool empty() const { return open_.empty(); }
  std::size_t size() const { return open_.size(); }
  /// +inf when empty.
  double min_lower_bound() const;

 private:
  using Key = std::pair<double, std::int64_t>;
  Strategy strategy_;
  ModelFeatures model_;
  std::map<Key, BnbNode> open_;
  std::vector<Key> last_children_;
};

// Solver --------------------------------------------------------------------

/// Error marks a cell whose solve threw; benchmarks record it instead of aborting.
enum class SolveStatus { Optimal, Infeasible, TimeLimit, NodeLimit, Error };
std::string_view status_name(SolveStatus s);

struct SolveLimits {
  double time_seconds = std::numeric_limits<double>::infinity();
  std::int64_t nodes = std::numeric_limits<std::int64_t>::max();
};

struct SolveOptions {
  double big_m = kDefaultBigM;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Optimal;
  double objective = std::numeric_limits<double>::infinity();  // z*, +inf without incumbent
  double best_lb = -std::numeric_limits<double>::infinity();
  double gap = kNoSolutionGap;
  std::int64_t nodes_explored = 0;  // LP relaxations solved
  double wall_time = 0.0;
  std::optional<Eigen::VectorXd> incumbent_solution;
  std::string strategy;
};

/// Event log for property checks.
struct SolveTrace {
  std::vector<double> incumbents;  // in discovery order
  std::int64_t bound_prunes = 0;
  std::int64_t unsound_prunes = 0;  // prunes where z < z* - 1e-9 (must stay 0)
  std::vector<std::int64_t> processed_ids;
};

SolveOutcome solve(const Milp& milp, const Strategy& strategy, const SolveLimits& limits = {},
                   const SolveOptions& options = {}, SolveTrace* trace = nullptr);

/// Keys: status, objective, best_lb, gap, nodes, wall_time_s, strategy.
/// Infinite values serialize as null.
std::string to_json(const SolveOutcome& outcome);

}  // namespace gp2s
