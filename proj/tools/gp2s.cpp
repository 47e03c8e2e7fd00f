// gp2s: instance generation, solving, policy training and benchmarking.
//
// Exit codes: 0 success (solve: proven optimal or infeasible), 2 solve hit a
// limit, 1 any error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gp2s/bench.hpp"
#include "gp2s/bnb.hpp"
#include "gp2s/expr.hpp"
#include "gp2s/format.hpp"
#include "gp2s/gp.hpp"
#include "gp2s/milp.hpp"

namespace fs = std::filesystem;
using namespace gp2s;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Range {
  int lo = 0;
  int hi = 0;
};

Range parse_range(const std::string& s) {
  Range r;
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) {
      r.lo = r.hi = std::stoi(s);
    } else {
      r.lo = std::stoi(s.substr(0, colon));
      r.hi = std::stoi(s.substr(colon + 1));
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("bad range '" + s + "' (expected N or LO:HI)");
  }
  if (r.lo < 2 || r.hi < r.lo) throw std::invalid_argument("bad range '" + s + "'");
  return r;
}

std::string format_range(const Range& r) {
  return r.lo == r.hi ? std::to_string(r.lo) : std::to_string(r.lo) + ":" + std::to_string(r.hi);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("GP2S_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("GP2S_SEED is not an integer: ") + env);
    }
  }
  return 0;
}

void print_config(const std::string& line) { std::cerr << "# effective: gp2s " << line << "\n"; }

std::string limits_flags(const SolveLimits& l) {
  std::string s = " --time-limit " + format_number(l.time_seconds);
  if (l.nodes != std::numeric_limits<std::int64_t>::max()) {
    s += " --node-limit " + std::to_string(l.nodes);
  }
  return s;
}

std::vector<Milp> load_instances(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".milp") {
      paths.push_back(entry.path().string());
    }
  }
  if (paths.empty()) throw std::runtime_error("no .milp files in " + dir);
  std::sort(paths.begin(), paths.end());
  std::vector<Milp> out;
  for (const auto& p : paths) {
    try {
      out.push_back(read_instance(p));
    } catch (const std::exception& e) {
      throw std::runtime_error("cannot load " + p + ": " + e.what());
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// gen ------------------------------------------------------------------------

struct GenArgs {
  std::string type;
  int count = 0;
  std::string nodes_graph;
  std::optional<double> edge_prob;
  std::optional<int> commodities;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

int cmd_gen(const GenArgs& a) {
  if (a.count < 1) throw std::invalid_argument("--count must be at least 1");
  const bool gisp = a.type == "gisp";
  const bool maxsat = a.type == "maxsat";
  const bool fcmcnf = a.type == "fcmcnf";
  if (!gisp && !maxsat && !fcmcnf) throw std::invalid_argument("unknown --type " + a.type);
  const Range nodes = parse_range(a.nodes_graph.empty() ? (fcmcnf ? "6:8" : "15:25") : a.nodes_graph);
  const double p = a.edge_prob.value_or(fcmcnf ? 0.3 : 0.6);
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("--edge-prob outside [0, 1]");
  if (a.commodities && *a.commodities < 1) throw std::invalid_argument("--commodities must be >= 1");
  const auto seed = resolve_seed(a.seed);

  std::string cfg = "gen --type " + a.type + " --count " + std::to_string(a.count) +
                    " --nodes-graph " + format_range(nodes) + " --edge-prob " + format_number(p);
  if (fcmcnf) {
    cfg += " --commodities " + (a.commodities ? std::to_string(*a.commodities) : "1.5n");
  }
  print_config(cfg + " --seed " + std::to_string(seed) + " --out " + a.out);

  fs::create_directories(a.out);
  for (int i = 0; i < a.count; ++i) {
    const auto inst_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    Rng rng(inst_seed);
    const int n = uniform_int(rng, nodes.lo, nodes.hi);
    Milp milp;
    if (fcmcnf) {
      const int q = a.commodities.value_or(static_cast<int>(std::lround(1.5 * n)));
      ErGraph g;
      for (std::uint64_t attempt = 0;; ++attempt) {
        g = gen_er_graph(n, p, derive_seed(inst_seed, 1 + 2 * attempt));
        if (g.connected()) break;
        if (attempt > 10000) throw std::runtime_error("could not sample a connected graph");
      }
      milp = gen_fcmcnf(g, q, derive_seed(inst_seed, 2));
    } else {
      const ErGraph g = gen_er_graph(n, p, derive_seed(inst_seed, 1));
      milp = gisp ? gen_gisp(g, derive_seed(inst_seed, 2))
                  : gen_maxsat(std::max(n, 3), g, derive_seed(inst_seed, 2));
    }
    const std::string stem = a.type + "_" + std::to_string(seed) + "_" + std::to_string(i);
    milp.name = stem;
    write_instance(milp, (fs::path(a.out) / (stem + ".milp")).string());
  }
  std::cout << "wrote " << a.count << " instances to " << a.out << "\n";
  return 0;
}

// solve ----------------------------------------------------------------------

struct LimitArgs {
  double time_limit = kInf;
  std::optional<std::int64_t> node_limit;

  SolveLimits limits() const {
    SolveLimits l;
    if (!(time_limit > 0.0)) throw std::invalid_argument("--time-limit must be positive");
    l.time_seconds = time_limit;
    if (node_limit) {
      if (*node_limit < 1) throw std::invalid_argument("--node-limit must be >= 1");
      l.nodes = *node_limit;
    }
    return l;
  }
};

struct SolveArgs {
  std::string instance;
  std::string strategy = "lb-bfs";
  LimitArgs limits;
  double big_m = kDefaultBigM;
};

int cmd_solve(const SolveArgs& a) {
  const auto limits = a.limits.limits();
  print_config("solve " + a.instance + " --strategy " + a.strategy + limits_flags(limits) +
               " --big-m " + format_number(a.big_m));
  const Strategy strategy = parse_strategy(a.strategy);
  const Milp milp = read_instance(a.instance);
  SolveOptions options;
  options.big_m = a.big_m;
  const auto out = solve(milp, strategy, limits, options);
  std::cout << to_json(out) << "\n";
  return out.status == SolveStatus::Optimal || out.status == SolveStatus::Infeasible ? 0 : 2;
}

// train ----------------------------------------------------------------------

struct TrainArgs {
  std::string instances;
  std::string fitness = "time";
  GpConfig cfg;
  std::optional<std::uint64_t> seed;
  std::optional<double> time_limit;
  std::optional<std::int64_t> node_limit;
  std::string out = ".";
};

int cmd_train(TrainArgs a) {
  a.cfg.fitness_kind = parse_measure(a.fitness);
  a.cfg.seed = resolve_seed(a.seed);
  if (a.time_limit || a.node_limit) {
    SolveLimits l = a.cfg.effective_limits();
    LimitArgs la;
    la.time_limit = a.time_limit.value_or(l.time_seconds);
    la.node_limit = a.node_limit;
    if (!a.node_limit && l.nodes != std::numeric_limits<std::int64_t>::max()) la.node_limit = l.nodes;
    a.cfg.limits = la.limits();
  }
  a.cfg.validate();
  const auto& c = a.cfg;
  print_config("train --instances " + a.instances + " --fitness " + a.fitness + " --pop " +
               std::to_string(c.pop_size) + " --gens " + std::to_string(c.generations) +
               " --tournament " + std::to_string(c.tournament_size) + " --p-mate " +
               format_number(c.p_mate) + " --p-mutate " + format_number(c.p_mutate) +
               " --p-size " + format_number(c.p_size) + " --d-init-min " +
               std::to_string(c.d_init_min) + " --d-init-max " + std::to_string(c.d_init_max) +
               " --d-mut-min " + std::to_string(c.d_mut_min) + " --d-mut-max " +
               std::to_string(c.d_mut_max) + limits_flags(c.effective_limits()) + " --big-m " +
               format_number(c.big_m) + " --seed " + std::to_string(c.seed) + " --jobs " +
               std::to_string(c.jobs) + " --out " + a.out);

  const auto training = load_instances(a.instances);
  const auto result = evolve(training, a.cfg, [](const GenerationRecord& r) {
    std::cerr << "gen " << r.generation << " best_so_far=" << format_number(r.best_so_far)
              << " population_best=" << format_number(r.population_best)
              << " mean_size=" << format_number(r.mean_size) << "\n";
  });
  fs::create_directories(a.out);
  write_ssx(result.best.expr, (fs::path(a.out) / "best.ssx").string());
  write_file(fs::path(a.out) / "convergence.csv", convergence_csv(result.trace));
  std::cout << print(result.best.expr) << "\nfitness " << format_number(*result.best.fitness)
            << "\n";
  return 0;
}

// bench ----------------------------------------------------------------------

struct BenchArgs {
  std::string instances;
  std::vector<std::string> strategies;
  std::string measure = "time";
  LimitArgs limits;
  unsigned jobs = 1;
  double big_m = kDefaultBigM;
  bool no_wall_time = false;
  std::string out = ".";
};

int cmd_bench(BenchArgs a) {
  if (a.strategies.empty()) a.strategies = {"lb-bfs", "be-bfs", "be-dfs"};
  const auto measure = parse_measure(a.measure);
  const auto limits = a.limits.limits();
  std::string cfg = "bench --instances " + a.instances;
  for (const auto& s : a.strategies) cfg += " --strategy " + s;
  cfg += " --fitness " + a.measure + limits_flags(limits) + " --big-m " + format_number(a.big_m) +
         " --jobs " + std::to_string(a.jobs) + (a.no_wall_time ? " --no-wall-time" : "") +
         " --out " + a.out;
  print_config(cfg);

  std::vector<Strategy> strategies;
  for (const auto& s : a.strategies) strategies.push_back(parse_strategy(s));
  const auto instances = load_instances(a.instances);
  BenchOptions options;
  options.jobs = a.jobs;
  options.solve.big_m = a.big_m;
  const auto report = run_bench(instances, strategies, limits, measure, options);
  fs::create_directories(a.out);
  write_file(fs::path(a.out) / "report.csv", report_csv(report, !a.no_wall_time));
  write_file(fs::path(a.out) / "summary.csv", summary_csv(report));
  std::cout << summary_table(report);
  return 0;
}

// expr -----------------------------------------------------------------------

struct ExprArgs {
  std::string text;
  std::string file;
  std::optional<unsigned> count;
  NodeContext ctx;
};

int cmd_expr(const ExprArgs& a) {
  if (a.count) {
    print_config("expr --count " + std::to_string(*a.count));
    std::cout << count_perfect_trees(*a.count) << "\n";
    return 0;
  }
  if (a.text.empty() == a.file.empty()) {
    throw std::invalid_argument("give exactly one of an expression or --file");
  }
  if (!a.ctx.valid()) throw std::invalid_argument("invalid node context");
  const ScoreExpr e = a.file.empty() ? parse(a.text) : read_ssx(a.file);
  const auto& c = a.ctx;
  print_config("expr " + (a.file.empty() ? "'" + a.text + "'" : "--file " + a.file) +
               " --depth " + std::to_string(c.depth) + " --estimate " +
               format_number(c.best_estimate) + " --lb " + format_number(c.lower_bound) +
               " --rootlb " + format_number(c.root_dual_bound) + " --ncons " +
               std::to_string(c.num_constraints) + " --nvars " + std::to_string(c.num_variables) +
               " --big-m " + format_number(c.big_m));
  std::cout << "expr  " << print(e) << "\nsize  " << e.size() << "\ndepth " << e.depth()
            << "\nvalue " << format_number(evaluate(e, a.ctx)) << "\n";
  return 0;
}

void add_limit_flags(CLI::App* app, LimitArgs& l) {
  app->add_option("--time-limit", l.time_limit, "per-solve time limit in seconds (inf = none)");
  app->add_option("--node-limit", l.node_limit, "per-solve limit on LP-solved nodes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GP-evolved node selection for MILP branch-and-bound"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate MILP-TXT instances");
  gen_cmd->add_option("--type", gen.type, "gisp, maxsat or fcmcnf")->required();
  gen_cmd->add_option("--count", gen.count, "number of instances")->required();
  gen_cmd->add_option("--nodes-graph", gen.nodes_graph, "graph size N or LO:HI");
  gen_cmd->add_option("--edge-prob", gen.edge_prob, "Erdos-Renyi edge probability");
  gen_cmd->add_option("--commodities", gen.commodities, "FCMCNF commodities (default 1.5n)");
  gen_cmd->add_option("--seed", gen.seed, "base seed (falls back to GP2S_SEED)");
  gen_cmd->add_option("--out", gen.out, "output directory");

  SolveArgs sol;
  auto* solve_cmd = app.add_subcommand("solve", "solve one instance, print JSON");
  solve_cmd->add_option("instance", sol.instance, "MILP-TXT file")->required();
  solve_cmd->add_option("--strategy", sol.strategy, "lb-bfs, be-bfs, be-dfs or expr:<file.ssx>");
  add_limit_flags(solve_cmd, sol.limits);
  solve_cmd->add_option("--big-m", sol.big_m, "value of the bigM terminal");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "evolve a node-scoring policy");
  train_cmd->add_option("--instances", tr.instances, "directory of .milp files")->required();
  train_cmd->add_option("--fitness", tr.fitness, "time, nodes or gap");
  train_cmd->add_option("--pop", tr.cfg.pop_size, "population size");
  train_cmd->add_option("--gens", tr.cfg.generations, "generations");
  train_cmd->add_option("--tournament", tr.cfg.tournament_size, "fitness tournament size");
  train_cmd->add_option("--p-mate", tr.cfg.p_mate, "crossover probability");
  train_cmd->add_option("--p-mutate", tr.cfg.p_mutate, "mutation probability");
  train_cmd->add_option("--p-size", tr.cfg.p_size, "size-playoff parameter in [1, 2]");
  train_cmd->add_option("--d-init-min", tr.cfg.d_init_min);
  train_cmd->add_option("--d-init-max", tr.cfg.d_init_max);
  train_cmd->add_option("--d-mut-min", tr.cfg.d_mut_min);
  train_cmd->add_option("--d-mut-max", tr.cfg.d_mut_max);
  train_cmd->add_option("--time-limit", tr.time_limit, "per-instance time limit in seconds");
  train_cmd->add_option("--node-limit", tr.node_limit, "per-instance node limit");
  train_cmd->add_option("--big-m", tr.cfg.big_m, "value of the bigM terminal");
  train_cmd->add_option("--seed", tr.seed, "seed (falls back to GP2S_SEED)");
  train_cmd->add_option("--jobs", tr.cfg.jobs, "parallel solves");
  train_cmd->add_option("--out", tr.out, "output directory for best.ssx and convergence.csv");

  BenchArgs be;
  auto* bench_cmd = app.add_subcommand("bench", "compare strategies on a directory of instances");
  bench_cmd->add_option("--instances", be.instances, "directory of .milp files")->required();
  bench_cmd->add_option("--strategy", be.strategies, "repeatable; default lb-bfs be-bfs be-dfs");
  bench_cmd->add_option("--fitness", be.measure, "summary measure: time, nodes or gap");
  add_limit_flags(bench_cmd, be.limits);
  bench_cmd->add_option("--jobs", be.jobs, "parallel solves");
  bench_cmd->add_option("--big-m", be.big_m, "value of the bigM terminal");
  bench_cmd->add_flag("--no-wall-time", be.no_wall_time, "write 0 in wall_time_s");
  bench_cmd->add_option("--out", be.out, "output directory for report.csv and summary.csv");

  ExprArgs ex;
  auto* expr_cmd = app.add_subcommand("expr", "parse, print and evaluate a scoring expression");
  expr_cmd->add_option("expression", ex.text, "prefix s-expression");
  expr_cmd->add_option("--file", ex.file, ".ssx file");
  expr_cmd->add_option("--count", ex.count, "print the number of perfect trees of depth R");
  expr_cmd->add_option("--depth", ex.ctx.depth);
  expr_cmd->add_option("--estimate", ex.ctx.best_estimate);
  expr_cmd->add_option("--lb", ex.ctx.lower_bound);
  expr_cmd->add_option("--rootlb", ex.ctx.root_dual_bound);
  expr_cmd->add_option("--ncons", ex.ctx.num_constraints);
  expr_cmd->add_option("--nvars", ex.ctx.num_variables);
  expr_cmd->add_option("--big-m", ex.ctx.big_m);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*solve_cmd) return cmd_solve(sol);
    if (*train_cmd) return cmd_train(tr);
    if (*bench_cmd) return cmd_bench(be);
    if (*expr_cmd) return cmd_expr(ex);
  } catch (const std::exception& e) {
    std::cerr << "gp2s: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
