#include "gp2s/bench.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "gp2s/parallel.hpp"

namespace gp2s {

double shifted_geomean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("shifted_geomean: empty input");
  double log_sum = 0.0;
  for (double v : values) log_sum += std::log1p(v);
  return std::expm1(log_sum / static_cast<double>(values.size()));
}

double geo_stddev(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("geo_stddev: empty input");
  const auto n = values.size();
  if (n == 1) return 1.0;
  double mean = 0.0;
  for (double v : values) mean += std::log1p(v);
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    const double d = std::log1p(v) - mean;
    ss += d * d;
  }
  return std::exp(std::sqrt(ss / static_cast<double>(n - 1)));
}

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::Time: return "time";
    case Measure::NodeCount: return "nodes";
    case Measure::Gap: return "gap";
  }
  return "unknown";
}

Measure parse_measure(const std::string& s) {
  if (s == "time") return Measure::Time;
  if (s == "nodes") return Measure::NodeCount;
  if (s == "gap") return Measure::Gap;
  throw std::invalid_argument("unknown measure '" + s + "' (expected time, nodes or gap)");
}

double measure_of(const SolveOutcome& o, Measure m) {
  switch (m) {
    case Measure::Time: return o.wall_time;
    case Measure::NodeCount: return static_cast<double>(o.nodes_explored);
    case Measure::Gap: return std::isfinite(o.objective) ? o.gap : kNoSolutionGap;
  }
  return 0.0;
}

bool BenchReport::complete() const {
  if (cells.size() != instances.size() || summary.size() != strategies.size()) return false;
  for (const auto& row : cells) {
    if (row.size() != strategies.size()) return false;
  }
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    if (summary[s].strategy != strategies[s]) return false;
  }
  return true;
}

BenchReport run_bench(std::span<const Milp> instances, std::span<const Strategy> strategies,
                      const SolveLimits& limits, Measure measure, const BenchOptions& options) {
  if (instances.empty() || strategies.empty()) {
    throw std::invalid_argument("run_bench: need at least one instance and one strategy");
  }
  BenchReport report;
  report.measure = measure;
  for (const auto& m : instances) report.instances.push_back(m.name);
  for (const auto& s : strategies) report.strategies.push_back(strategy_name(s));
  const auto ns = strategies.size();
  report.cells.assign(instances.size(), std::vector<SolveOutcome>(ns));

  parallel_for(instances.size() * ns, options.jobs, [&](std::size_t task) {
    const auto i = task / ns;
    const auto s = task % ns;
    SolveOutcome out;
    try {
      out = solve(instances[i], strategies[s], limits, options.solve);
    } catch (const std::exception&) {
      out = SolveOutcome{};
      out.status = SolveStatus::Error;
      out.strategy = report.strategies[s];
    }
    report.cells[i][s] = std::move(out);
  });

  // Gap means use only instances solved (incumbent found) by every strategy.
  std::vector<bool> in_mean(instances.size(), true);
  if (measure == Measure::Gap) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      for (const auto& o : report.cells[i]) {
        if (!std::isfinite(o.objective)) in_mean[i] = false;
      }
    }
  }
  for (std::size_t s = 0; s < ns; ++s) {
    BenchSummary row;
    row.strategy = report.strategies[s];
    std::vector<double> values;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto& o = report.cells[i][s];
      if (!std::isfinite(o.objective)) ++row.inf_count;
      if (in_mean[i]) values.push_back(measure_of(o, measure));
    }
    row.instances_in_mean = values.size();
    if (values.empty()) {
      row.measure_geomean = std::nan("");
      row.geo_stddev = std::nan("");
    } else {
      row.measure_geomean = shifted_geomean(values);
      row.geo_stddev = geo_stddev(values);
    }
    report.summary.push_back(std::move(row));
  }
  return report;
}

std::string report_csv(const BenchReport& report, bool wall_time) {
  std::string out = "instance,strategy,status,objective,best_lb,gap,nodes,wall_time_s\n";
  for (std::size_t i = 0; i < report.instances.size(); ++i) {
    for (std::size_t s = 0; s < report.strategies.size(); ++s) {
      const auto& o = report.cells[i][s];
      out += report.instances[i] + "," + report.strategies[s] + "," +
             std::string(status_name(o.status)) + "," + format_number(o.objective) + "," +
             format_number(o.best_lb) + "," + format_number(o.gap) + "," +
             std::to_string(o.nodes_explored) + "," +
             (wall_time ? format_number(o.wall_time) : std::string("0")) + "\n";
    }
  }
  return out;
}

std::string summary_csv(const BenchReport& report) {
  std::string out = "strategy,measure_geomean,geo_stddev,inf_count\n";
  for (const auto& row : report.summary) {
    out += row.strategy + "," + format_number(row.measure_geomean) + "," +
           format_number(row.geo_stddev) + "," + std::to_string(row.inf_count) + "\n";
  }
  return out;
}

std::string summary_table(const BenchReport& report) {
  std::size_t width = 8;
  for (const auto& row : report.summary) width = std::max(width, row.strategy.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "strategy" << "  " << std::right
      << std::setw(14) << measure_name(report.measure) << "  " << std::setw(8) << "gsd"
      << "  " << std::setw(4) << "inf" << "\n";
  for (const auto& row : report.summary) {
    out << std::left << std::setw(static_cast<int>(width)) << row.strategy << "  " << std::right
        << std::setw(14) << std::setprecision(6) << row.measure_geomean << "  " << std::setw(8)
        << std::setprecision(3) << row.geo_stddev << "  " << std::setw(4) << row.inf_count
        << "\n";
  }
  return out.str();
}

}  // namespace gp2s
