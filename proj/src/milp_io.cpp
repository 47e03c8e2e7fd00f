#include "gp2s/milp.hpp"
#include "gp2s/format.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace gp2s {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_number(const std::string& tok, double& out) {
  if (tok == "inf" || tok == "+inf" || tok == "infinity") {
    out = kInf;
    return true;
  }
  if (tok == "-inf" || tok == "-infinity") {
    out = -kInf;
    return true;
  }
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

enum class Section { None, Objective, Constraints, Bounds, Integers, End };

class InstanceParser {
 public:
  explicit InstanceParser(std::string name) : builder_(std::move(name)) {}

  Milp run(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      auto tokens = split_ws(raw);
      if (tokens.empty()) continue;
      if (section_ == Section::End) fail("content after 'end'");
      if (switch_section(tokens)) continue;
      switch (section_) {
        case Section::None: fail("expected 'minimize'");
        case Section::Objective: objective_line(tokens); break;
        case Section::Constraints: constraint_line(tokens); break;
        case Section::Bounds: bounds_line(tokens); break;
        case Section::Integers: integers_line(tokens); break;
        case Section::End: break;
      }
    }
    if (section_ != Section::End) fail("missing 'end'");
    try {
      return builder_.build();
    } catch (const MilpError& e) {
      throw MilpParseError(line_, e.what());
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw MilpParseError(line_, msg); }

  bool switch_section(const std::vector<std::string>& t) {
    Section next = Section::None;
    if (t.size() == 1 && t[0] == "minimize") {
      next = Section::Objective;
    } else if (t.size() == 2 && t[0] == "subject" && t[1] == "to") {
      next = Section::Constraints;
    } else if (t.size() == 1 && t[0] == "bounds") {
      next = Section::Bounds;
    } else if (t.size() == 1 && t[0] == "integers") {
      next = Section::Integers;
    } else if (t.size() == 1 && t[0] == "end") {
      next = Section::End;
    } else {
      return false;
    }
    if (static_cast<int>(next) <= static_cast<int>(section_)) {
      fail("section '" + t[0] + "' out of order");
    }
    if (next != Section::Objective && section_ == Section::None) fail("expected 'minimize'");
    section_ = next;
    return true;
  }

  std::size_t variable(const std::string& name) {
    if (name.empty() || name.find(':') != std::string::npos) fail("bad variable name '" + name + "'");
    double dummy;
    if (parse_number(name, dummy)) fail("expected variable name, got number '" + name + "'");
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const auto j = builder_.add_variable(name, 0.0, kInf, false);
    index_.emplace(name, j);
    return j;
  }

  // Splits "name: rest" and returns the name; tokens are advanced past it.
  std::string label(std::vector<std::string>& t) {
    const auto colon = t[0].find(':');
    if (colon == std::string::npos) fail("expected 'name:' prefix");
    std::string name = t[0].substr(0, colon);
    std::string rest = t[0].substr(colon + 1);
    if (name.empty()) fail("empty row name");
    if (rest.empty()) {
      t.erase(t.begin());
    } else {
      t[0] = rest;
    }
    return name;
  }

  std::vector<MilpBuilder::Term> terms(const std::vector<std::string>& t, std::size_t begin,
                                       std::size_t end) {
    std::vector<MilpBuilder::Term> out;
    std::size_t i = begin;
    bool first = true;
    while (i < end) {
      double sign = 1.0;
      if (t[i] == "+" || t[i] == "-") {
        sign = t[i] == "-" ? -1.0 : 1.0;
        ++i;
      } else if (!first) {
        fail("expected '+' or '-' before term '" + t[i] + "'");
      }
      if (i >= end) fail("dangling sign");
      double coeff = 1.0;
      if (parse_number(t[i], coeff)) {
        if (!std::isfinite(coeff)) fail("non-finite coefficient");
        ++i;
        if (i >= end) fail("coefficient without variable");
      }
      out.emplace_back(variable(t[i]), sign * coeff);
      ++i;
      first = false;
    }
    return out;
  }

  void objective_line(std::vector<std::string> t) {
    if (have_objective_) fail("second objective line");
    have_objective_ = true;
    label(t);
    for (const auto& [var, coeff] : terms(t, 0, t.size())) {
      objective_[var] += coeff;
    }
    for (const auto& [var, coeff] : objective_) builder_.set_cost(var, coeff);
  }

  void constraint_line(std::vector<std::string> t) {
    const std::string name = label(t);
    if (t.size() < 3) fail("constraint needs terms, a sense and a right-hand side");
    const std::string& sense_tok = t[t.size() - 2];
    MilpBuilder::Sense sense;
    if (sense_tok == "<=") {
      sense = MilpBuilder::Sense::Le;
    } else if (sense_tok == ">=") {
      sense = MilpBuilder::Sense::Ge;
    } else if (sense_tok == "=") {
      sense = MilpBuilder::Sense::Eq;
    } else {
      fail("expected sense '<=', '>=' or '=', got '" + sense_tok + "'");
    }
    double rhs = 0.0;
    if (!parse_number(t.back(), rhs) || !std::isfinite(rhs)) fail("bad right-hand side");
    builder_.add_constraint(name, terms(t, 0, t.size() - 2), sense, rhs);
  }

  void bounds_line(const std::vector<std::string>& t) {
    if (t.size() != 5 || t[1] != "<=" || t[3] != "<=") fail("expected 'lo <= var <= hi'");
    double lo = 0.0;
    double hi = 0.0;
    if (!parse_number(t[0], lo) || !parse_number(t[4], hi)) fail("bad bound value");
    if (lo > hi) fail("lower bound exceeds upper bound for " + t[2]);
    builder_.set_bounds(variable(t[2]), lo, hi);
  }

  void integers_line(const std::vector<std::string>& t) {
    for (const auto& name : t) {
      auto it = index_.find(name);
      if (it == index_.end()) fail("unknown variable '" + name + "' in integers");
      builder_.set_integer(it->second, true);
    }
  }

  MilpBuilder builder_;
  std::map<std::string, std::size_t> index_;
  std::map<std::size_t, double> objective_;
  Section section_ = Section::None;
  bool have_objective_ = false;
  std::size_t line_ = 0;
};

}  // namespace

Milp parse_instance(const std::string& text, const std::string& name) {
  return InstanceParser(name).run(text);
}

std::string format_instance(const Milp& milp) {
  const auto n = milp.num_variables();
  const auto m = milp.num_constraints();
  auto var_name = [&](Eigen::Index j) {
    return milp.variable_names.empty() ? "x" + std::to_string(j + 1)
                                       : milp.variable_names[static_cast<std::size_t>(j)];
  };
  auto row_name = [&](Eigen::Index i) {
    return milp.constraint_names.empty() ? "c" + std::to_string(i + 1)
                                         : milp.constraint_names[static_cast<std::size_t>(i)];
  };
  auto term = [&](std::string& out, bool first, double coeff, Eigen::Index j) {
    if (first) {
      out += format_number(coeff);
    } else {
      out += coeff < 0 ? " - " : " + ";
      out += format_number(std::abs(coeff));
    }
    out += ' ';
    out += var_name(j);
  };

  std::string out = "# MILP-TXT v1\nminimize\nobj:";
  // Every variable appears in the objective so the column order survives a
  // round trip.
  for (Eigen::Index j = 0; j < n; ++j) {
    out += j == 0 ? " " : "";
    term(out, j == 0, milp.lp.objective[j], j);
  }
  out += "\nsubject to\n";
  for (Eigen::Index i = 0; i < m; ++i) {
    out += row_name(i) + ":";
    bool first = true;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = milp.lp.constraints(i, j);
      if (a == 0.0) continue;
      out += first ? " " : "";
      term(out, first, a, j);
      first = false;
    }
    if (first) out += " 0 " + var_name(0);
    out += " >= " + format_number(milp.lp.rhs[i]) + "\n";
  }
  out += "bounds\n";
  for (Eigen::Index j = 0; j < n; ++j) {
    out += format_number(milp.lp.lower[j]) + " <= " + var_name(j) + " <= " +
           format_number(milp.lp.upper[j]) + "\n";
  }
  out += "integers\n";
  int on_line = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!milp.integer_mask[static_cast<std::size_t>(j)]) continue;
    out += on_line > 0 ? " " : "";
    out += var_name(j);
    if (++on_line == 16) {
      out += '\n';
      on_line = 0;
    }
  }
  if (on_line > 0) out += '\n';
  out += "end\n";
  return out;
}

Milp read_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MilpError("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance(buf.str(), std::filesystem::path(path).stem().string());
  } catch (const MilpParseError& e) {
    throw MilpParseError(e.line(), path + ": " + e.what());
  }
}

void write_instance(const Milp& milp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MilpError("cannot write instance file: " + path);
  out << format_instance(milp);
  if (!out) throw MilpError("write failed: " + path);
}

}  // namespace gp2s
