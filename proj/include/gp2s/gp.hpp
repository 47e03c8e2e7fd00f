#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gp2s/bench.hpp"
#include "gp2s/bnb.hpp"
#include "gp2s/expr.hpp"

namespace gp2s {

struct Individual {
  ScoreExpr expr;
  std::optional<double> fitness;  // empty until evaluated

  std::size_t size() const { return expr.size(); }
};

struct GpConfig {
  int pop_size = 50;
  int generations = 50;
  double p_mate = 0.9;
  double p_mutate = 0.1;
  int d_init_min = 1;
  int d_init_max = 17;
  int d_mut_min = 1;
  int d_mut_max = 5;
  int tournament_size = 5;
  double p_size = 1.2;
  Measure fitness_kind = Measure::Time;
  /// Per-instance limits; when empty, 50,000 nodes for time/nodes fitness
  /// and a 10 s time limit for gap fitness.
  std::optional<SolveLimits> limits;
  double big_m = kDefaultBigM;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  SolveLimits effective_limits() const;
  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

/// Per-instance measures of ScoreBfs(expr), in instance order.
std::vector<double> instance_measures(const ScoreExpr& expr, std::span<const Milp> training,
                                      const GpConfig& cfg);
/// 1-shifted geometric mean of instance_measures.
double evaluate_fitness(const ScoreExpr& expr, std::span<const Milp> training,
                        const GpConfig& cfg);

/// Returns the smaller of the two with probability p_size / 2, else the
/// larger; equal sizes count `first` as the smaller.
const Individual& size_playoff(const Individual& first, const Individual& second, Rng& rng,
                               double p_size);

/// Two fitness tournaments (draws with replacement), then a size playoff
/// where the smaller winner survives with probability p_size / 2.
Individual double_tournament(std::span<const Individual> pop, Rng& rng, int tournament_size,
                             double p_size);

/// One-point subtree swap; offspring are unevaluated.
std::pair<Individual, Individual> crossover(const Individual& a, const Individual& b, Rng& rng);

/// Replaces a uniformly chosen subtree by random_tree(min_depth, max_depth).
Individual mutate(const Individual& a, Rng& rng, int min_depth, int max_depth);

struct GenerationRecord {
  int generation = 0;
  double best_so_far = 0.0;
  double population_best = 0.0;
  double mean_size = 0.0;
};

struct EvolveResult {
  Individual best;
  std::vector<GenerationRecord> trace;  // generation 0 .. g
  std::vector<Individual> population;   // final generation
  std::size_t evaluations = 0;          // distinct expressions evaluated
};

using GenerationCallback = std::function<void(const GenerationRecord&)>;

EvolveResult evolve(std::span<const Milp> training, const GpConfig& cfg,
                    const GenerationCallback& on_generation = {});

/// Columns: generation, best_so_far_fitness, population_best_fitness, mean_size.
std::string convergence_csv(std::span<const GenerationRecord> trace);

}  // namespace gp2s
