#include "gp2s/gp.hpp"

#include <limits>
#include <map>
#include <stdexcept>

#include "gp2s/format.hpp"
#include "gp2s/parallel.hpp"

namespace gp2s {

SolveLimits GpConfig::effective_limits() const {
  if (limits) return *limits;
  SolveLimits l;
  if (fitness_kind == Measure::Gap) {
    l.time_seconds = 10.0;
  } else {
    l.nodes = 50000;
  }
  return l;
}

void GpConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("GpConfig: ") + what);
  };
  require(pop_size >= 1, "pop_size must be >= 1");
  require(generations >= 0, "generations must be >= 0");
  require(p_mate >= 0.0 && p_mate <= 1.0, "p_mate outside [0, 1]");
  require(p_mutate >= 0.0 && p_mutate <= 1.0, "p_mutate outside [0, 1]");
  require(0 <= d_init_min && d_init_min <= d_init_max, "need 0 <= d_init_min <= d_init_max");
  require(0 <= d_mut_min && d_mut_min <= d_mut_max, "need 0 <= d_mut_min <= d_mut_max");
  require(tournament_size >= 1, "tournament_size must be >= 1");
  require(p_size >= 1.0 && p_size <= 2.0, "p_size outside [1, 2]");
  require(big_m > 0.0, "big_m must be positive");
}

namespace {

// A failed solve scores like an instance without an incumbent.
double guarded_measure(const Milp& milp, const Strategy& strategy, const SolveLimits& limits,
                       const SolveOptions& options, Measure kind) {
  try {
    return measure_of(solve(milp, strategy, limits, options), kind);
  } catch (const std::exception&) {
    return kNoSolutionGap;
  }
}

}  // namespace

std::vector<double> instance_measures(const ScoreExpr& expr, std::span<const Milp> training,
                                      const GpConfig& cfg) {
  const Strategy strategy = ScoreBfs{expr, {}};
  const auto limits = cfg.effective_limits();
  SolveOptions options;
  options.big_m = cfg.big_m;
  std::vector<double> out;
  out.reserve(training.size());
  for (const auto& milp : training) {
    out.push_back(guarded_measure(milp, strategy, limits, options, cfg.fitness_kind));
  }
  return out;
}

double evaluate_fitness(const ScoreExpr& expr, std::span<const Milp> training,
                        const GpConfig& cfg) {
  if (training.empty()) throw std::invalid_argument("evaluate_fitness: empty training set");
  const auto m = instance_measures(expr, training, cfg);
  return shifted_geomean(m);
}

Individual double_tournament(std::span<const Individual> pop, Rng& rng, int tournament_size,
                             double p_size) {
  if (pop.empty()) throw std::invalid_argument("double_tournament: empty population");
  auto fitness_round = [&]() -> const Individual& {
    const Individual* best = nullptr;
    for (int t = 0; t < tournament_size; ++t) {
      const Individual& cand = pop[uniform_index(rng, pop.size())];
      if (!best || cand.fitness.value() < best->fitness.value()) best = &cand;
    }
    return *best;
  };
  const Individual& first = fitness_round();
  const Individual& second = fitness_round();
  return size_playoff(first, second, rng, p_size);
}

const Individual& size_playoff(const Individual& first, const Individual& second, Rng& rng,
                               double p_size) {
  const bool swap = second.size() < first.size();
  const Individual& small = swap ? second : first;
  const Individual& large = swap ? first : second;
  return unit_real(rng) < p_size / 2.0 ? small : large;
}

std::pair<Individual, Individual> crossover(const Individual& a, const Individual& b, Rng& rng) {
  const auto i = uniform_index(rng, a.size());
  const auto j = uniform_index(rng, b.size());
  Individual c1{a.expr.replace_subtree(i, b.expr.subtree(j)), std::nullopt};
  Individual c2{b.expr.replace_subtree(j, a.expr.subtree(i)), std::nullopt};
  return {std::move(c1), std::move(c2)};
}

Individual mutate(const Individual& a, Rng& rng, int min_depth, int max_depth) {
  const auto i = uniform_index(rng, a.size());
  const ScoreExpr graft = random_tree(rng, min_depth, max_depth);
  return Individual{a.expr.replace_subtree(i, graft), std::nullopt};
}

namespace {

class Evolution {
 public:
  Evolution(std::span<const Milp> training, const GpConfig& cfg)
      : training_(training), cfg_(cfg), rng_(cfg.seed) {}

  EvolveResult run(const GenerationCallback& on_generation) {
    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(cfg_.pop_size));
    for (int i = 0; i < cfg_.pop_size; ++i) {
      pop.push_back({random_tree(rng_, cfg_.d_init_min, cfg_.d_init_max), std::nullopt});
    }
    EvolveResult result;
    evaluate(pop);
    record(0, pop, result, on_generation);

    for (int gen = 1; gen <= cfg_.generations; ++gen) {
      std::vector<Individual> next;
      next.reserve(pop.size());
      for (std::size_t i = 0; i < pop.size(); ++i) {
        next.push_back(double_tournament(pop, rng_, cfg_.tournament_size, cfg_.p_size));
      }
      // pairs (0,1), (2,3), ...; an odd tail passes through
      for (std::size_t i = 0; i + 1 < next.size(); i += 2) {
        if (unit_real(rng_) < cfg_.p_mate) {
          auto [c1, c2] = crossover(next[i], next[i + 1], rng_);
          next[i] = std::move(c1);
          next[i + 1] = std::move(c2);
        }
      }
      for (auto& ind : next) {
        if (unit_real(rng_) < cfg_.p_mutate) {
          ind = mutate(ind, rng_, cfg_.d_mut_min, cfg_.d_mut_max);
        }
      }
      pop = std::move(next);
      evaluate(pop);
      record(gen, pop, result, on_generation);
    }
    result.best = *hall_of_fame_;
    result.population = std::move(pop);
    result.evaluations = cache_.size();
    return result;
  }

 private:
  // Fills in missing fitness values. Distinct new expressions are solved in
  // parallel over (expression, instance) pairs, then reduced in order.
  void evaluate(std::vector<Individual>& pop) {
    std::vector<std::string> keys(pop.size());
    std::vector<std::string> todo;
    std::map<std::string, ScoreExpr> todo_expr;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (pop[i].fitness) continue;
      keys[i] = print(pop[i].expr);
      if (!cache_.count(keys[i]) && !todo_expr.count(keys[i])) {
        todo.push_back(keys[i]);
        todo_expr.emplace(keys[i], pop[i].expr);
      }
    }
    const auto ni = training_.size();
    const auto limits = cfg_.effective_limits();
    SolveOptions options;
    options.big_m = cfg_.big_m;
    std::vector<double> measures(todo.size() * ni);
    parallel_for(measures.size(), cfg_.jobs, [&](std::size_t task) {
      const Strategy s = ScoreBfs{todo_expr.at(todo[task / ni]), {}};
      measures[task] = guarded_measure(training_[task % ni], s, limits, options, cfg_.fitness_kind);
    });
    for (std::size_t e = 0; e < todo.size(); ++e) {
      cache_[todo[e]] = shifted_geomean(std::span<const double>(measures).subspan(e * ni, ni));
    }
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!pop[i].fitness) pop[i].fitness = cache_.at(keys[i]);
    }
  }

  void record(int gen, const std::vector<Individual>& pop, EvolveResult& result,
              const GenerationCallback& on_generation) {
    GenerationRecord rec;
    rec.generation = gen;
    rec.population_best = std::numeric_limits<double>::infinity();
    double total_size = 0.0;
    for (const auto& ind : pop) {
      rec.population_best = std::min(rec.population_best, *ind.fitness);
      total_size += static_cast<double>(ind.size());
      // strict improvement only: earlier discoveries win full ties
      if (!hall_of_fame_ || *ind.fitness < *hall_of_fame_->fitness ||
          (*ind.fitness == *hall_of_fame_->fitness && ind.size() < hall_of_fame_->size())) {
        hall_of_fame_ = ind;
      }
    }
    rec.best_so_far = *hall_of_fame_->fitness;
    rec.mean_size = total_size / static_cast<double>(pop.size());
    result.trace.push_back(rec);
    if (on_generation) on_generation(rec);
  }

  std::span<const Milp> training_;
  const GpConfig& cfg_;
  Rng rng_;
  std::map<std::string, double> cache_;
  std::optional<Individual> hall_of_fame_;
};

}  // namespace

EvolveResult evolve(std::span<const Milp> training, const GpConfig& cfg,
                    const GenerationCallback& on_generation) {
  cfg.validate();
  if (training.empty()) throw std::invalid_argument("evolve: empty training set");
  return Evolution(training, cfg).run(on_generation);
}

std::string convergence_csv(std::span<const GenerationRecord> trace) {
  std::string out = "generation,best_so_far_fitness,population_best_fitness,mean_size\n";
  for (const auto& r : trace) {
    out += std::to_string(r.generation) + "," + format_number(r.best_so_far) + "," +
           format_number(r.population_best) + "," + format_number(r.mean_size) + "\n";
  }
  return out;
}

}  // namespace gp2s
