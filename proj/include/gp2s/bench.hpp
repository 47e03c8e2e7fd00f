#pragma once

#include <span>
#include <string>
#include <vector>

#include "gp2s/bnb.hpp"
#include "gp2s/format.hpp"

namespace gp2s {

/// (prod (v_i + 1))^(1/n) - 1, accumulated in log space.
double shifted_geomean(std::span<const double> values);
/// exp of the sample standard deviation of ln(v_i + 1); 1 for a single value.
double geo_stddev(std::span<const double> values);

/// Per-instance performance measure, shared by benchmarks and GP fitness.
enum class Measure { Time, NodeCount, Gap };

std::string_view measure_name(Measure m);
/// "time", "nodes" or "gap".
Measure parse_measure(const std::string& s);
double measure_of(const SolveOutcome& outcome, Measure m);

struct BenchSummary {
  std::string strategy;
  double measure_geomean = 0.0;  // NaN when no instance qualifies
  double geo_stddev = 1.0;
  std::int64_t inf_count = 0;    // instances without an incumbent
  std::size_t instances_in_mean = 0;
};

struct BenchReport {
  Measure measure = Measure::Time;
  std::vector<std::string> instances;
  std::vector<std::string> strategies;
  std::vector<std::vector<SolveOutcome>> cells;  // [instance][strategy]
  std::vector<BenchSummary> summary;             // one per strategy

  bool complete() const;
};

struct BenchOptions {
  unsigned jobs = 1;
  SolveOptions solve;
};

/// Solves every (instance, strategy) pair. With Measure::Gap the mean only
/// covers instances on which every strategy found a solution; infeasible
/// counts always cover all instances.
BenchReport run_bench(std::span<const Milp> instances, std::span<const Strategy> strategies,
                      const SolveLimits& limits, Measure measure,
                      const BenchOptions& options = {});

/// Columns: instance, strategy, status, objective, best_lb, gap, nodes,
/// wall_time_s. With `wall_time` false the timing column is written as 0
/// so reruns are byte-identical.
std::string report_csv(const BenchReport& report, bool wall_time = true);
/// Columns: strategy, measure_geomean, geo_stddev, inf_count.
std::string summary_csv(const BenchReport& report);
std::string summary_table(const BenchReport& report);

}  // namespace gp2s
