#include "gp2s/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

namespace gp2s {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::vector<FractionalVar> fractional_parts(const std::vector<bool>& integer_mask,
                                            const Eigen::VectorXd& x, double tol) {
  std::vector<FractionalVar> out;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!integer_mask[static_cast<std::size_t>(j)]) continue;
    const double f = x[j] - std::floor(x[j]);
    if (std::min(f, 1.0 - f) > tol) out.push_back({j, f});
  }
  return out;
}

Eigen::Index branch_variable(std::span<const FractionalVar> frac) {
  Eigen::Index best = -1;
  double best_score = -1.0;
  for (const auto& fv : frac) {
    const double score = std::min(fv.frac, 1.0 - fv.frac);
    // 0.3 and 1 - 0.7 differ in the last bit; treat them as a tie
    if (score > best_score + 1e-12) {
      best_score = score;
      best = fv.var;
    }
  }
  return best;
}

PseudocostTable::PseudocostTable(Eigen::Index num_variables) {
  const auto n = static_cast<std::size_t>(num_variables);
  for (Side* s : {&down_, &up_}) {
    s->sum.assign(n, 0.0);
    s->count.assign(n, 0);
  }
}

void PseudocostTable::update(Eigen::Index var, double parent_z, double child_z,
                             BranchDirection dir, double frac) {
  const double width = dir == BranchDirection::Down ? frac : 1.0 - frac;
  if (!(width > 0.0)) return;
  const double obs = std::max(0.0, child_z - parent_z) / width;
  Side& s = side(dir);
  s.sum.at(static_cast<std::size_t>(var)) += obs;
  s.count.at(static_cast<std::size_t>(var)) += 1;
  s.total += obs;
  s.observations += 1;
}

double PseudocostTable::pseudocost(Eigen::Index var, BranchDirection dir) const {
  const Side& s = side(dir);
  const auto j = static_cast<std::size_t>(var);
  if (j < s.count.size() && s.count[j] > 0) return s.sum[j] / static_cast<double>(s.count[j]);
  if (s.observations > 0) return s.total / static_cast<double>(s.observations);
  return 1.0;
}

std::int64_t PseudocostTable::count(Eigen::Index var, BranchDirection dir) const {
  return side(dir).count.at(static_cast<std::size_t>(var));
}

double best_estimate(double lower_bound, std::span<const FractionalVar> frac,
                     const PseudocostTable& table) {
  double est = lower_bound;
  for (const auto& fv : frac) {
    const double down = table.pseudocost(fv.var, BranchDirection::Down) * fv.frac;
    const double up = table.pseudocost(fv.var, BranchDirection::Up) * (1.0 - fv.frac);
    est += std::min(down, up);
  }
  return est;
}

double compute_gap(double incumbent, double best_lb) {
  if (!std::isfinite(incumbent) || !std::isfinite(best_lb)) return kNoSolutionGap;
  const double diff = incumbent - best_lb;
  if (std::abs(diff) <= kPruneTol) return 0.0;
  const double denom = std::min(incumbent, best_lb);
  if (denom == 0.0) return kNoSolutionGap;
  return std::abs(diff / denom);
}

std::string strategy_name(const Strategy& s) {
  return std::visit(Overloaded{
                        [](const ScoreBfs& x) {
                          return x.label.empty() ? "score:" + print(x.expr) : x.label;
                        },
                        [](const LbBfs&) { return std::string("lb-bfs"); },
                        [](const BeBfs&) { return std::string("be-bfs"); },
                        [](const BeDfs&) { return std::string("be-dfs"); },
                    },
                    s);
}

Strategy parse_strategy(const std::string& spec) {
  if (spec == "lb-bfs") return LbBfs{};
  if (spec == "be-bfs") return BeBfs{};
  if (spec == "be-dfs") return BeDfs{};
  if (spec.rfind("expr:", 0) == 0) return ScoreBfs{read_ssx(spec.substr(5)), spec};
  if (spec.rfind("score:", 0) == 0) return ScoreBfs{parse(spec.substr(6)), spec};
  throw std::invalid_argument("unknown strategy '" + spec +
                              "' (expected lb-bfs, be-bfs, be-dfs or expr:<file.ssx>)");
}

NodeContext make_context(const BnbNode& node, const ModelFeatures& model) {
  NodeContext ctx;
  ctx.depth = node.depth;
  ctx.best_estimate = node.best_estimate;
  ctx.lower_bound = node.lower_bound;
  ctx.root_dual_bound = model.root_dual_bound;
  ctx.num_constraints = model.num_constraints;
  ctx.num_variables = model.num_variables;
  ctx.big_m = model.big_m;
  return ctx;
}

double node_score(const Strategy& s, const BnbNode& node, const ModelFeatures& model) {
  return std::visit(Overloaded{
                        [&](const ScoreBfs& x) { return evaluate(x.expr, make_context(node, model)); },
                        [&](const LbBfs&) { return node.lower_bound; },
                        [&](const BeBfs&) { return node.best_estimate; },
                        [&](const BeDfs&) { return node.best_estimate; },
                    },
                    s);
}

NodePool::NodePool(Strategy strategy, ModelFeatures model)
    : strategy_(std::move(strategy)), model_(model) {}

void NodePool::push(BnbNode node) {
  Key key{node_score(strategy_, node, model_), node.id};
  last_children_.push_back(key);
  open_.emplace(key, std::move(node));
}

BnbNode NodePool::pop() {
  auto it = open_.begin();
  if (std::holds_alternative<BeDfs>(strategy_)) {
    // Prefer the best open child of the last processed node.
    std::optional<Key> best;
    for (const auto& k : last_children_) {
      if (open_.count(k) && (!best || k < *best)) best = k;
    }
    if (best) it = open_.find(*best);
  }
  BnbNode node = std::move(it->second);
  open_.erase(it);
  last_children_.clear();
  return node;
}

double NodePool::min_lower_bound() const {
  double lb = kInf;
  for (const auto& [key, node] : open_) lb = std::min(lb, node.lower_bound);
  return lb;
}

std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::Error: return "error";
  }
  return "unknown";
}

namespace {

class Search {
 public:
  Search(const Milp& milp, const Strategy& strategy, const SolveLimits& limits,
         const SolveOptions& options, SolveTrace* trace)
      : milp_(milp),
        strategy_(strategy),
        limits_(limits),
        options_(options),
        trace_(trace),
        lp_(milp.lp),
        pseudocosts_(milp.num_variables()),
        start_(std::chrono::steady_clock::now()) {}

  SolveOutcome run() {
    SolveOutcome out;
    out.strategy = strategy_name(strategy_);
    const auto status = search();
    out.status = status;
    out.nodes_explored = solved_;
    out.objective = incumbent_;
    if (incumbent_solution_) out.incumbent_solution = incumbent_solution_;
    if (status == SolveStatus::Optimal) {
      out.best_lb = incumbent_;
      out.gap = 0.0;
    } else if (status == SolveStatus::Infeasible) {
      out.best_lb = kInf;
      out.gap = kNoSolutionGap;
    } else {
      double lb = pending_lb_;
      if (pool_) lb = std::min(lb, pool_->min_lower_bound());
      // open nodes above the incumbent are prunable; never report lb > z*
      out.best_lb = std::min(lb, incumbent_);
      out.gap = compute_gap(incumbent_, out.best_lb);
    }
    out.wall_time = elapsed();
    return out;
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool out_of_time() const {
    return std::isfinite(limits_.time_seconds) && elapsed() >= limits_.time_seconds;
  }

  // Solves the relaxation under `changes`; counts toward the node limit.
  LpResultd relax(const std::vector<BoundChange>& changes) {
    lp_.lower = milp_.lp.lower;
    lp_.upper = milp_.lp.upper;
    for (const auto& c : changes) {
      lp_.lower[c.var] = c.lower;
      lp_.upper[c.var] = c.upper;
    }
    ++solved_;
    auto result = solve_lp(lp_);
    if (result.status == LpStatus::Unbounded) {
      throw LpNumericalError("LP relaxation is unbounded; the model needs finite bounds");
    }
    return result;
  }

  void record_incumbent(double z, const Eigen::VectorXd& x) {
    if (z < incumbent_) {
      incumbent_ = z;
      incumbent_solution_ = x;
      if (trace_) trace_->incumbents.push_back(z);
    }
  }

  void prune(double z) {
    if (!trace_) return;
    ++trace_->bound_prunes;
    if (z < incumbent_ - kPruneTol) ++trace_->unsound_prunes;
  }

  // Handles a freshly solved relaxation: incumbent update, prune or enqueue.
  void admit(BnbNode node, const LpResultd& lp) {
    node.lower_bound = lp.objective;
    if (node.lower_bound >= incumbent_ - kPruneTol) {
      prune(node.lower_bound);
      return;
    }
    node.frac = fractional_parts(milp_.integer_mask, lp.x);
    if (node.frac.empty()) {
      record_incumbent(lp.objective, lp.x);
      return;
    }
    node.best_estimate = best_estimate(node.lower_bound, node.frac, pseudocosts_);
    node.solution = lp.x;
    pool_->push(std::move(node));
  }

  SolveStatus search() {
    if (limits_.nodes < 1) return SolveStatus::NodeLimit;
    BnbNode root;
    root.id = next_id_++;
    const auto root_lp = relax(root.bound_changes);
    if (root_lp.status == LpStatus::Infeasible) return SolveStatus::Infeasible;

    ModelFeatures model;
    model.root_dual_bound = root_lp.objective;
    model.num_constraints = milp_.num_constraints();
    model.num_variables = milp_.num_variables();
    model.big_m = options_.big_m;
    pool_.emplace(strategy_, model);
    admit(std::move(root), root_lp);

    while (!pool_->empty()) {
      if (out_of_time()) return SolveStatus::TimeLimit;
      BnbNode node = pool_->pop();
      if (node.lower_bound >= incumbent_ - kPruneTol) {
        prune(node.lower_bound);
        continue;
      }
      if (trace_) trace_->processed_ids.push_back(node.id);

      const Eigen::Index j = branch_variable(node.frac);
      const double value = node.solution[j];
      const double f = value - std::floor(value);
      const double lo = lp_bound(node, j, true);
      const double hi = lp_bound(node, j, false);
      const std::pair<BranchDirection, BoundChange> children[] = {
          {BranchDirection::Down, {j, lo, std::floor(value)}},
          {BranchDirection::Up, {j, std::floor(value) + 1.0, hi}},
      };
      for (const auto& [dir, change] : children) {
        if (solved_ >= limits_.nodes || out_of_time()) {
          pending_lb_ = std::min(pending_lb_, node.lower_bound);
          return solved_ >= limits_.nodes ? SolveStatus::NodeLimit : SolveStatus::TimeLimit;
        }
        BnbNode child;
        child.id = next_id_++;
        child.depth = node.depth + 1;
        child.bound_changes = node.bound_changes;
        child.bound_changes.push_back(change);
        const auto lp = relax(child.bound_changes);
        if (lp.status != LpStatus::Optimal) continue;
        pseudocosts_.update(j, node.lower_bound, lp.objective, dir, f);
        admit(std::move(child), lp);
      }
    }
    return std::isfinite(incumbent_) ? SolveStatus::Optimal : SolveStatus::Infeasible;
  }

  double lp_bound(const BnbNode& node, Eigen::Index j, bool lower) const {
    double v = lower ? milp_.lp.lower[j] : milp_.lp.upper[j];
    for (const auto& c : node.bound_changes) {
      if (c.var == j) v = lower ? c.lower : c.upper;
    }
    return v;
  }

  const Milp& milp_;
  const Strategy& strategy_;
  SolveLimits limits_;
  SolveOptions options_;
  SolveTrace* trace_;
  LpProblemd lp_;
  PseudocostTable pseudocosts_;
  std::optional<NodePool> pool_;
  std::chrono::steady_clock::time_point start_;
  std::int64_t solved_ = 0;
  std::int64_t next_id_ = 0;
  double incumbent_ = kInf;
  double pending_lb_ = kInf;
  std::optional<Eigen::VectorXd> incumbent_solution_;
};

}  // namespace

SolveOutcome solve(const Milp& milp, const Strategy& strategy, const SolveLimits& limits,
                   const SolveOptions& options, SolveTrace* trace) {
  milp.validate();
  return Search(milp, strategy, limits, options, trace).run();
}

std::string to_json(const SolveOutcome& o) {
  auto num = [](double v) -> nlohmann::json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  nlohmann::ordered_json j;
  j["status"] = std::string(status_name(o.status));
  j["objective"] = num(o.objective);
  j["best_lb"] = num(o.best_lb);
  j["gap"] = o.gap;
  j["nodes"] = o.nodes_explored;
  j["wall_time_s"] = o.wall_time;
  j["strategy"] = o.strategy;
  return j.dump();
}

}  // namespace gp2s
