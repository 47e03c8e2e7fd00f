// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <iostream>
#include <sstream>
#include <string>

#include "gp2s/bench.hpp"
#include "gp2s/bnb.hpp"
#include "gp2s/expr.hpp"
#include "gp2s/gp.hpp"
#include "oracles.hpp"
#include "policies.hpp"
#include "random_models.hpp"
#include "run_command.hpp"

using namespace gp2s;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void criterion(int id, const std::string& title, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << "exception: " << e.what() << "; ";
  }
  v.detail << "elapsed " << seconds_since(t0) << " s";
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " ["
            << v.detail.str() << "]" << std::endl;
  failures += !v.pass;
}

// Pure-integer instances with at most 12 integer variables.
Milp oracle_instance(Rng& rng, int t) {
  const std::string name = "oracle" + std::to_string(t);
  switch (t % 3) {
    case 0: {
      const int n = uniform_int(rng, 3, 7);
      const auto g = gen_er_graph(n, 0.6, rng());
      std::vector<bool> removable(g.edges.size());
      int vars = n;
      for (std::size_t e = 0; e < removable.size(); ++e) {
        removable[e] = vars < 12 && unit_real(rng) < 0.5;
        vars += removable[e];
      }
      return gisp_model(g, removable, {}, name);
    }
    case 1: {
      const int vars = uniform_int(rng, 3, 6);
      const int count = uniform_int(rng, 3, 12 - vars);
      std::vector<Clause> clauses;
      std::vector<double> weights;
      for (int c = 0; c < count; ++c) {
        Clause cl;
        for (int l = 0; l < 3; ++l) {
          cl.push_back({static_cast<int>(uniform_index(rng, static_cast<std::size_t>(vars))),
                        unit_real(rng) < 0.5});
        }
        clauses.push_back(cl);
        weights.push_back(uniform_int(rng, 1, 5));
      }
      return maxsat_model(vars, clauses, weights, name);
    }
    default:
      return models::random_knapsack(rng, uniform_int(rng, 3, 8), name);
  }
}

std::vector<Milp> toy_gisp(int count, std::uint64_t seed) {
  std::vector<Milp> out;
  for (int i = 0; i < count; ++i) {
    const auto g = gen_er_graph(12, 0.6, derive_seed(seed, 2 * static_cast<std::uint64_t>(i)));
    out.push_back(gen_gisp(g, derive_seed(seed, 2 * static_cast<std::uint64_t>(i) + 1)));
    out.back().name = "toy" + std::to_string(i);
  }
  return out;
}

GpConfig toy_config() {
  GpConfig cfg;
  cfg.pop_size = 16;
  cfg.generations = 10;
  cfg.fitness_kind = Measure::NodeCount;
  cfg.seed = 2025;
  return cfg;
}

std::vector<int> leaf_depths(std::span<const Symbol> prefix) {
  std::vector<int> out;
  std::vector<int> pending{0};
  for (Symbol s : prefix) {
    const int d = pending.back();
    pending.pop_back();
    if (is_operator(s)) {
      pending.push_back(d + 1);
      pending.push_back(d + 1);
    } else {
      out.push_back(d);
    }
  }
  return out;
}

double fixed_policy_fitness(const Strategy& s, std::span<const Milp> set, const GpConfig& cfg) {
  std::vector<double> nodes;
  for (const auto& m : set) {
    nodes.push_back(static_cast<double>(solve(m, s, cfg.effective_limits()).nodes_explored));
  }
  return shifted_geomean(nodes);
}

}  // namespace

int main() {
  const auto training = toy_gisp(20, 11);
  const auto held_out = toy_gisp(20, 12);
  std::optional<EvolveResult> evolved;

  criterion(1, "strategies match exhaustive enumeration on 200 instances", [](Verdict& v) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(1);
    const std::vector<Strategy> strategies{LbBfs{}, BeBfs{}, BeDfs{},
                                           ScoreBfs{parse("(sub lb (mul bigM depth))"), ""}};
    double worst = 0.0;
    int solves = 0;
    for (int t = 0; t < 200; ++t) {
      const auto m = oracle_instance(rng, t);
      v.require(m.num_integers() <= 12, m.name + " has more than 12 integer variables");
      const auto expect = oracle::milp_by_enumeration(m);
      for (const auto& s : strategies) {
        const auto out = solve(m, s);
        ++solves;
        if (!expect.feasible) {
          v.require(out.status == SolveStatus::Infeasible, m.name + " should be infeasible");
          continue;
        }
        const double err = std::abs(out.objective - expect.objective);
        worst = std::max(worst, err);
        v.require(out.status == SolveStatus::Optimal && err <= 1e-6,
                  m.name + " under " + strategy_name(s));
      }
    }
    const double elapsed = seconds_since(t0);
    v.require(elapsed < 60.0, "took longer than 60 s");
    v.detail << solves << " solves, max |error| " << worst << "; ";
  });

  criterion(2, "500 random LPs match basis enumeration", [](Verdict& v) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2);
    double worst = 0.0;
    int infeasible = 0;
    for (int t = 0; t < 500; ++t) {
      const auto p = models::random_lp(rng, 5, 8);
      const auto expect = oracle::lp_by_vertices(p);
      const auto got = solve_lp(p);
      if (!expect.feasible) {
        ++infeasible;
        v.require(got.status == LpStatus::Infeasible, "LP " + std::to_string(t) + " infeasible");
        continue;
      }
      const double err = std::abs(got.objective - expect.objective);
      worst = std::max(worst, err);
      v.require(got.status == LpStatus::Optimal && err <= 1e-6, "LP " + std::to_string(t));
    }
    v.require(seconds_since(t0) < 30.0, "took longer than 30 s");
    v.detail << infeasible << " infeasible, max |error| " << worst << "; ";
  });

  criterion(3, "metric exactness", [](Verdict& v) {
    const std::vector<double> one_three{1, 3};
    v.require(std::abs(shifted_geomean(one_three) - (2 * std::sqrt(2.0) - 1)) <= 1e-12,
              "shifted_geomean([1,3])");
    v.require(compute_gap(10, 8) == 0.25, "compute_gap(10, 8)");
    v.require(compute_gap(std::numeric_limits<double>::infinity(), 8) == 1e20,
              "gap without incumbent");
    const std::vector<double> equal{3.5, 3.5, 3.5, 3.5};
    v.require(geo_stddev(equal) == 1.0, "geo_stddev of equal values");
  });

  criterion(4, "perfect tree counts", [](Verdict& v) {
    v.require(count_perfect_trees(3) == 94450499584ULL, "r = 3");
    // brute force: grow every perfect tree of depth r and count distinct prints
    std::vector<std::string> level;
    for (std::size_t t = 0; t < kNumTerminals; ++t) {
      level.push_back(std::string(symbol_name(static_cast<Symbol>(kNumOperators + t))));
    }
    for (unsigned r = 0; r <= 2; ++r) {
      std::set<std::string> distinct(level.begin(), level.end());
      v.require(distinct.size() == count_perfect_trees(r), "r = " + std::to_string(r));
      v.detail << "r=" << r << ": " << distinct.size() << "; ";
      if (r == 2) break;
      std::vector<std::string> next;
      for (std::size_t op = 0; op < kNumOperators; ++op) {
        const std::string name(symbol_name(static_cast<Symbol>(op)));
        for (const auto& a : level) {
          for (const auto& b : level) next.push_back("(" + name + " " + a + " " + b + ")");
        }
      }
      level = std::move(next);
    }
    v.detail << "r=3: " << count_perfect_trees(3) << "; ";
  });

  criterion(5, "published policies parse, print, round-trip and evaluate", [](Verdict& v) {
    const auto ctx = policies::fixed_context();
    int count = 0;
    for (const auto& p : policies::published()) {
      const auto e = parse(p.text);
      v.require(print(e) == p.text, p.label + " prints");
      v.require(parse(print(e)) == e, p.label + " round-trips");
      const double value = evaluate(e, ctx);
      const double expect = p.formula(ctx);
      v.require(std::isfinite(value) && std::abs(value - expect) <= 1e-12 * (1 + std::abs(expect)),
                p.label + " evaluates");
      ++count;
    }
    v.detail << count << " functions; ";
  });

  criterion(6, "GP mechanics on 20 toy GISP instances", [&](Verdict& v) {
    const auto cfg = toy_config();
    const auto t0 = std::chrono::steady_clock::now();
    const auto first = evolve(training, cfg);
    const auto second = evolve(training, cfg);
    const auto& trace = first.trace;
    for (std::size_t g = 1; g < trace.size(); ++g) {
      v.require(trace[g].best_so_far <= trace[g - 1].best_so_far, "best-so-far non-increasing");
    }
    v.require(*first.best.fitness <= trace.front().population_best, "final best <= generation 0 best");
    v.require(convergence_csv(first.trace) == convergence_csv(second.trace), "identical traces");
    const auto dir = cmd::fresh_dir("gp2s_acceptance_c6");
    write_ssx(first.best.expr, (dir / "a.ssx").string());
    write_ssx(second.best.expr, (dir / "b.ssx").string());
    v.require(cmd::slurp(dir / "a.ssx") == cmd::slurp(dir / "b.ssx"), "identical best.ssx");
    v.require(seconds_since(t0) < 900.0, "took longer than 15 minutes");
    v.detail << "gen0 best " << trace.front().population_best << ", final " << *first.best.fitness
             << ", best " << print(first.best.expr) << "; ";
    evolved = first;
  });

  criterion(7, "evolved policy matches or beats the fixed strategies", [&](Verdict& v) {
    const auto cfg = toy_config();
    if (!evolved) evolved = evolve(training, cfg);
    const std::vector<Strategy> baselines{LbBfs{}, BeBfs{}, BeDfs{}};
    double best_train = std::numeric_limits<double>::infinity();
    double best_test = best_train;
    for (const auto& s : baselines) {
      const double tr = fixed_policy_fitness(s, training, cfg);
      const double te = fixed_policy_fitness(s, held_out, cfg);
      v.detail << strategy_name(s) << " train " << tr << " test " << te << "; ";
      best_train = std::min(best_train, tr);
      best_test = std::min(best_test, te);
    }
    const Strategy gp = ScoreBfs{evolved->best.expr, ""};
    const double gp_train = *evolved->best.fitness;
    const double gp_test = fixed_policy_fitness(gp, held_out, cfg);
    v.require(gp_train <= 1.05 * best_train, "training fitness within 5% of the best baseline");
    v.detail << "evolved train " << gp_train << " (ratio " << gp_train / best_train
             << "), held-out " << gp_test << " (ratio " << gp_test / best_test << "); ";
  });

  criterion(8, "double-tournament size playoff statistics", [](Verdict& v) {
    const Individual small{parse("lb"), 1.0};
    const Individual large{parse("(add lb (mul bigM depth))"), 1.0};
    Rng rng(8);
    const int trials = 100000;
    int wins = 0;
    for (int t = 0; t < trials; ++t) wins += &size_playoff(large, small, rng, 1.2) == &small;
    const double freq = wins / static_cast<double>(trials);
    v.require(std::abs(freq - 0.6) <= 0.01, "p_size 1.2 frequency");
    int sure = 0;
    for (int t = 0; t < trials; ++t) sure += &size_playoff(large, small, rng, 2.0) == &small;
    v.require(sure == trials, "p_size 2 frequency");
    v.detail << "p_size 1.2: " << freq << ", p_size 2: " << sure / static_cast<double>(trials) << "; ";
  });

  criterion(9, "crossover and mutation properties over 10^4 operations", [](Verdict& v) {
    Rng rng(9);
    const GpConfig defaults;
    int size_violations = 0, depth_violations = 0, round_trip = 0;
    for (int t = 0; t < 10000; ++t) {
      const Individual a{random_tree(rng, 0, 8), 1.0};
      const Individual b{random_tree(rng, 0, 8), 1.0};
      const auto [c1, c2] = crossover(a, b, rng);
      size_violations += c1.size() + c2.size() != a.size() + b.size();
      round_trip += !(parse(print(c1.expr)) == c1.expr) + !(parse(print(c2.expr)) == c2.expr);

      // a single leaf always mutates at its root, exposing the graft itself
      const Individual leaf{ScoreExpr::leaf(Symbol::LowerBound), 1.0};
      const auto graft = mutate(leaf, rng, defaults.d_mut_min, defaults.d_mut_max);
      for (int d : leaf_depths(graft.expr.prefix())) {
        depth_violations += d < defaults.d_mut_min || d > defaults.d_mut_max;
      }
      const auto m = mutate(a, rng, defaults.d_mut_min, defaults.d_mut_max);
      round_trip += !(parse(print(m.expr)) == m.expr) + !(parse(print(graft.expr)) == graft.expr);
    }
    v.require(size_violations == 0, "size conservation");
    v.require(depth_violations == 0, "graft depths in [1, 5]");
    v.require(round_trip == 0, "offspring round-trip");
    v.detail << size_violations << " size, " << depth_violations << " depth, " << round_trip
             << " round-trip violations; ";
  });

  criterion(10, "gen -> train -> bench pipeline is byte-identical on rerun", [](Verdict& v) {
    const std::string bin = GP2S_BIN;
    std::vector<std::string> outputs[2];
    for (int run = 0; run < 2; ++run) {
      const auto dir = cmd::fresh_dir("gp2s_acceptance_c10_" + std::to_string(run));
      // relative paths keep the expr:<path> strategy label identical across runs
      const auto in_dir = "cd '" + dir.string() + "' && " + bin;
      const auto gen = cmd::run(in_dir + " gen --type gisp --count 6 --nodes-graph 12 --seed 31 --out inst");
      const auto train = cmd::run(in_dir + " train --instances inst --fitness nodes --pop 8 --gens 3 --seed 5 --out train");
      const auto bench = cmd::run(in_dir + " bench --instances inst --strategy lb-bfs --strategy be-bfs"
                                  " --strategy be-dfs --strategy expr:train/best.ssx"
                                  " --fitness nodes --no-wall-time --out bench");
      v.require(gen.code == 0 && train.code == 0 && bench.code == 0, "pipeline commands succeed");
      for (const auto& f : {dir / "train" / "convergence.csv", dir / "train" / "best.ssx",
                            dir / "bench" / "report.csv", dir / "bench" / "summary.csv"}) {
        outputs[run].push_back(cmd::slurp(f));
      }
      for (int i = 0; i < 6; ++i) {
        outputs[run].push_back(cmd::slurp(dir / "inst" / ("gisp_31_" + std::to_string(i) + ".milp")));
      }
    }
    v.require(!outputs[0][2].empty(), "report.csv written");
    v.require(outputs[0] == outputs[1], "outputs identical");
    v.detail << outputs[0].size() << " files compared; ";
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
