#pragma once

#include "gp2s/lp.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gp2s {

/// min c.x s.t. A x >= b, bounds, with x_j integral where integer_mask[j].
struct Milp {
  LpProblemd lp;
  std::vector<bool> integer_mask;
  std::string name;
  std::vector<std::string> variable_names;
  std::vector<std::string> constraint_names;

  Eigen::Index num_variables() const { return lp.num_variables(); }
  Eigen::Index num_constraints() const { return lp.num_constraints(); }
  std::size_t num_integers() const;

  /// Throws MilpError unless dimensions agree, 0 < k <= n and every integer
  /// variable has finite bounds.
  void validate() const;

  friend bool operator==(const Milp& a, const Milp& b);
};

class MilpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MilpParseError : public MilpError {
 public:
  MilpParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Row-by-row construction in any sense; rows are stored as >=.
class MilpBuilder {
 public:
  enum class Sense { Le, Ge, Eq };
  using Term = std::pair<std::size_t, double>;

  explicit MilpBuilder(std::string name);

  std::size_t add_variable(std::string name, double lower, double upper, bool integer,
                           double cost = 0.0);
  std::size_t add_binary(std::string name, double cost = 0.0) {
    return add_variable(std::move(name), 0.0, 1.0, true, cost);
  }
  void set_cost(std::size_t var, double cost);
  /// `=` becomes two rows, `<=` is negated.
  void add_constraint(const std::string& name, const std::vector<Term>& terms, Sense sense,
                      double rhs);

  std::size_t num_variables() const { return names_.size(); }
  std::size_t find_variable(const std::string& name) const;  // npos if absent
  void set_bounds(std::size_t var, double lower, double upper);
  void set_integer(std::size_t var, bool integer);

  Milp build() const;

 private:
  struct Row {
    std::string name;
    std::vector<Term> terms;
    double rhs;
  };
  std::string name_;
  std::vector<std::string> names_;
  std::vector<double> cost_, lower_, upper_;
  std::vector<bool> integer_;
  std::vector<Row> rows_;
};

// MILP-TXT v1 ---------------------------------------------------------------

Milp parse_instance(const std::string& text, const std::string& name = "");
std::string format_instance(const Milp& milp);
Milp read_instance(const std::string& path);
void write_instance(const Milp& milp, const std::string& path);

// Generators ----------------------------------------------------------------

struct ErGraph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;  // u < v, lexicographic order
  std::uint64_t seed = 0;

  bool connected() const;
};

ErGraph gen_er_graph(int node_count, double edge_prob, std::uint64_t seed);

struct GispParams {
  double revenue = 100.0;
  double removal_cost = 1.0;
  double removable_prob = 0.5;
};

/// Generalized independent set on explicit removable flags (one per edge).
Milp gisp_model(const ErGraph& g, const std::vector<bool>& removable, const GispParams& params,
                const std::string& name);
Milp gen_gisp(const ErGraph& g, std::uint64_t seed, const GispParams& params = {});

/// Literal: variable index and polarity.
struct Literal {
  int var;
  bool positive;
};
using Clause = std::vector<Literal>;

Milp maxsat_model(int num_vars, const std::vector<Clause>& clauses,
                  const std::vector<double>& weights, const std::string& name);
/// One length-3 clause per graph edge: the edge's endpoints plus a random
/// third variable, each literal negated with probability 1/2.
Milp gen_maxsat(int num_vars, const ErGraph& g, std::uint64_t seed);

struct FcmcnfParams {
  int fixed_cost_min = 50;
  int fixed_cost_max = 100;
  int unit_cost_min = 10;
  int unit_cost_max = 20;
};

struct Commodity {
  int origin;
  int destination;
};

struct Arc {
  int from;
  int to;
  double fixed_cost;
  double unit_cost;
  double capacity;
};

Milp fcmcnf_model(int node_count, const std::vector<Arc>& arcs,
                  const std::vector<Commodity>& commodities, const std::string& name);
/// Throws MilpError if `g` is disconnected.
Milp gen_fcmcnf(const ErGraph& g, int commodities, std::uint64_t seed,
                const FcmcnfParams& params = {});

/// Deterministic 64-bit mixing of a base seed with a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace gp2s
