#include "gp2s/milp.hpp"

#include <cmath>
#include <limits>

namespace gp2s {

std::size_t Milp::num_integers() const {
  std::size_t k = 0;
  for (bool b : integer_mask) k += b ? 1 : 0;
  return k;
}

void Milp::validate() const {
  try {
    lp.validate();
  } catch (const std::invalid_argument& e) {
    throw MilpError(std::string("dimension mismatch: ") + e.what());
  }
  const auto n = static_cast<std::size_t>(num_variables());
  if (integer_mask.size() != n) throw MilpError("dimension mismatch: integer mask length");
  if (!variable_names.empty() && variable_names.size() != n) {
    throw MilpError("dimension mismatch: variable names");
  }
  if (!constraint_names.empty() &&
      constraint_names.size() != static_cast<std::size_t>(num_constraints())) {
    throw MilpError("dimension mismatch: constraint names");
  }
  if (num_integers() == 0) throw MilpError("model has no integer variables");
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (integer_mask[j] && (!std::isfinite(lp.lower[jj]) || !std::isfinite(lp.upper[jj]))) {
      const std::string var = variable_names.empty() ? std::to_string(j) : variable_names[j];
      throw MilpError("integer variable " + var + " has an infinite bound");
    }
  }
}

bool operator==(const Milp& a, const Milp& b) {
  return a.name == b.name && a.integer_mask == b.integer_mask &&
         a.variable_names == b.variable_names && a.constraint_names == b.constraint_names &&
         a.lp.objective == b.lp.objective && a.lp.constraints == b.lp.constraints &&
         a.lp.rhs == b.lp.rhs && a.lp.lower == b.lp.lower && a.lp.upper == b.lp.upper;
}

MilpParseError::MilpParseError(std::size_t line, const std::string& what)
    : MilpError("line " + std::to_string(line) + ": " + what), line_(line) {}

MilpBuilder::MilpBuilder(std::string name) : name_(std::move(name)) {}

std::size_t MilpBuilder::add_variable(std::string name, double lower, double upper, bool integer,
                                      double cost) {
  names_.push_back(std::move(name));
  lower_.push_back(lower);
  upper_.push_back(upper);
  integer_.push_back(integer);
  cost_.push_back(cost);
  return names_.size() - 1;
}

void MilpBuilder::set_cost(std::size_t var, double cost) { cost_.at(var) = cost; }

void MilpBuilder::set_bounds(std::size_t var, double lower, double upper) {
  lower_.at(var) = lower;
  upper_.at(var) = upper;
}

void MilpBuilder::set_integer(std::size_t var, bool integer) { integer_.at(var) = integer; }

std::size_t MilpBuilder::find_variable(const std::string& name) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == name) return j;
  }
  return static_cast<std::size_t>(-1);
}

void MilpBuilder::add_constraint(const std::string& name, const std::vector<Term>& terms,
                                 Sense sense, double rhs) {
  auto negated = [&] {
    std::vector<Term> out = terms;
    for (auto& t : out) t.second = -t.second;
    return out;
  };
  switch (sense) {
    case Sense::Ge: rows_.push_back({name, terms, rhs}); break;
    case Sense::Le: rows_.push_back({name, negated(), -rhs}); break;
    case Sense::Eq:
      rows_.push_back({name + ".ge", terms, rhs});
      rows_.push_back({name + ".le", negated(), -rhs});
      break;
  }
}

Milp MilpBuilder::build() const {
  const auto n = static_cast<Eigen::Index>(names_.size());
  const auto m = static_cast<Eigen::Index>(rows_.size());
  Milp out;
  out.name = name_;
  out.variable_names = names_;
  out.integer_mask = integer_;
  out.lp.objective = Eigen::Map<const Eigen::VectorXd>(cost_.data(), n);
  out.lp.lower = Eigen::Map<const Eigen::VectorXd>(lower_.data(), n);
  out.lp.upper = Eigen::Map<const Eigen::VectorXd>(upper_.data(), n);
  out.lp.constraints = Eigen::MatrixXd::Zero(m, n);
  out.lp.rhs.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = rows_[static_cast<std::size_t>(i)];
    out.constraint_names.push_back(row.name);
    out.lp.rhs[i] = row.rhs;
    for (const auto& [var, coeff] : row.terms) {
      if (var >= names_.size()) throw MilpError("constraint " + row.name + ": bad variable index");
      out.lp.constraints(i, static_cast<Eigen::Index>(var)) += coeff;
    }
  }
  out.validate();
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over a combined state
  std::uint64_t z = base * 0x9E3779B97F4A7C15ULL + stream + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace gp2s
