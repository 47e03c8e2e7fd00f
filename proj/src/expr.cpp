#include "gp2s/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace gp2s {

namespace {

constexpr std::array<std::string_view, kNumSymbols> kNames = {
    "add", "sub", "mul", "div", "depth", "estimate", "lb", "rootlb", "ncons", "nvars", "bigM"};

bool lookup_symbol(std::string_view name, Symbol& out) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) {
      out = static_cast<Symbol>(i);
      return true;
    }
  }
  return false;
}

double finite_or_clamped(double v) {
  if (std::isnan(v)) return kBigScore;
  if (std::isinf(v)) return v > 0 ? kBigScore : -kBigScore;
  return v;
}

double terminal_value(Symbol s, const NodeContext& ctx) {
  switch (s) {
    case Symbol::Depth: return static_cast<double>(ctx.depth);
    case Symbol::BestEstimate: return ctx.best_estimate;
    case Symbol::LowerBound: return ctx.lower_bound;
    case Symbol::RootDualBound: return ctx.root_dual_bound;
    case Symbol::NumConstraints: return static_cast<double>(ctx.num_constraints);
    case Symbol::NumVariables: return static_cast<double>(ctx.num_variables);
    case Symbol::BigM: return ctx.big_m;
    default: break;
  }
  throw ExprError("terminal_value: not a terminal");
}

// Recursive-descent reader over prefix s-expressions.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  ScoreExpr read_all() {
    std::vector<Symbol> out;
    skip_space();
    if (pos_ >= text_.size()) throw syntax("empty expression");
    read(out);
    skip_space();
    if (pos_ < text_.size()) throw syntax("trailing input after expression");
    return ScoreExpr(std::move(out));
  }

 private:
  void read(std::vector<Symbol>& out) {
    skip_space();
    if (pos_ >= text_.size()) throw syntax("unexpected end of input");
    const char c = text_[pos_];
    if (c == ')') throw syntax("unexpected ')'");
    if (c != '(') {
      const std::size_t at = pos_;
      const Symbol s = atom();
      if (is_operator(s)) {
        throw ParseError(ParseError::Kind::Arity, at,
                         "operator '" + std::string(symbol_name(s)) + "' used without arguments");
      }
      out.push_back(s);
      return;
    }
    ++pos_;
    skip_space();
    const std::size_t head_at = pos_;
    if (pos_ >= text_.size()) throw syntax("unexpected end of input");
    if (text_[pos_] == '(' || text_[pos_] == ')') throw syntax("expected operator name");
    const Symbol op = atom();
    if (!is_operator(op)) {
      throw ParseError(ParseError::Kind::Arity, head_at,
                       "terminal '" + std::string(symbol_name(op)) + "' cannot take arguments");
    }
    out.push_back(op);
    int args = 0;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) throw syntax("missing ')'");
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      if (args == 2) {
        throw ParseError(ParseError::Kind::Arity, pos_,
                         "operator '" + std::string(symbol_name(op)) + "' takes 2 arguments");
      }
      read(out);
      ++args;
    }
    if (args != 2) {
      throw ParseError(ParseError::Kind::Arity, head_at,
                       "operator '" + std::string(symbol_name(op)) + "' takes 2 arguments, got " +
                           std::to_string(args));
    }
  }

  Symbol atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    Symbol s{};
    if (!lookup_symbol(name, s)) {
      throw ParseError(ParseError::Kind::UnknownSymbol, start,
                       "unknown symbol '" + std::string(name) + "'");
    }
    return s;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  ParseError syntax(const std::string& msg) const {
    return ParseError(ParseError::Kind::Syntax, pos_, msg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_into(const ScoreExpr& e, std::size_t& i, std::string& out) {
  const Symbol s = e.prefix()[i++];
  if (!is_operator(s)) {
    out += symbol_name(s);
    return;
  }
  out += '(';
  out += symbol_name(s);
  out += ' ';
  print_into(e, i, out);
  out += ' ';
  print_into(e, i, out);
  out += ')';
}

void grow(Rng& rng, int depth, int min_depth, int max_depth, std::vector<Symbol>& out) {
  Symbol s;
  if (depth < min_depth) {
    s = static_cast<Symbol>(uniform_index(rng, kNumOperators));
  } else if (depth >= max_depth) {
    s = static_cast<Symbol>(kNumOperators + uniform_index(rng, kNumTerminals));
  } else {
    s = static_cast<Symbol>(uniform_index(rng, kNumSymbols));
  }
  out.push_back(s);
  if (is_operator(s)) {
    grow(rng, depth + 1, min_depth, max_depth, out);
    grow(rng, depth + 1, min_depth, max_depth, out);
  }
}

}  // namespace

std::string_view symbol_name(Symbol s) { return kNames[static_cast<std::size_t>(s)]; }

bool NodeContext::valid() const {
  return depth >= 0 && num_constraints >= 0 && num_variables >= 0 && std::isfinite(best_estimate) &&
         std::isfinite(lower_bound) && std::isfinite(root_dual_bound) && std::isfinite(big_m) &&
         big_m > 0.0;
}

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : ExprError("at byte " + std::to_string(offset) + ": " + what), kind_(kind), offset_(offset) {}

ScoreExpr::ScoreExpr() : nodes_{Symbol::LowerBound} {}

ScoreExpr::ScoreExpr(std::vector<Symbol> prefix) : nodes_(std::move(prefix)) {
  // Each node needs (arity) more nodes after it; a well-formed prefix tree
  // closes exactly at the last element.
  std::size_t open = 1;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (open == 0) throw ExprError("ScoreExpr: extra nodes after a complete tree");
    if (static_cast<std::size_t>(nodes_[i]) >= kNumSymbols) throw ExprError("ScoreExpr: bad symbol");
    open = open - 1 + static_cast<std::size_t>(arity(nodes_[i]));
  }
  if (open != 0) throw ExprError("ScoreExpr: incomplete tree");
}

ScoreExpr ScoreExpr::leaf(Symbol terminal) {
  if (is_operator(terminal)) throw ExprError("ScoreExpr::leaf: operator given");
  return ScoreExpr(std::vector<Symbol>{terminal});
}

ScoreExpr ScoreExpr::binary(Symbol op, const ScoreExpr& lhs, const ScoreExpr& rhs) {
  if (!is_operator(op)) throw ExprError("ScoreExpr::binary: terminal given");
  std::vector<Symbol> p;
  p.reserve(1 + lhs.size() + rhs.size());
  p.push_back(op);
  p.insert(p.end(), lhs.nodes_.begin(), lhs.nodes_.end());
  p.insert(p.end(), rhs.nodes_.begin(), rhs.nodes_.end());
  return ScoreExpr(std::move(p));
}

int ScoreExpr::depth() const {
  // Stack of remaining-children counts mirrors the current root path.
  std::vector<int> pending;
  int best = 0;
  for (Symbol s : nodes_) {
    best = std::max(best, static_cast<int>(pending.size()));
    if (!pending.empty()) --pending.back();
    if (is_operator(s)) {
      pending.push_back(2);
    } else {
      while (!pending.empty() && pending.back() == 0) pending.pop_back();
    }
  }
  return best;
}

std::size_t ScoreExpr::subtree_end(std::size_t root) const {
  std::size_t open = 1;
  std::size_t i = root;
  while (open > 0) {
    open = open - 1 + static_cast<std::size_t>(arity(nodes_.at(i)));
    ++i;
  }
  return i;
}

ScoreExpr ScoreExpr::subtree(std::size_t root) const {
  const auto end = subtree_end(root);
  return ScoreExpr(std::vector<Symbol>(nodes_.begin() + root, nodes_.begin() + end));
}

ScoreExpr ScoreExpr::replace_subtree(std::size_t root, const ScoreExpr& graft) const {
  const auto end = subtree_end(root);
  std::vector<Symbol> p;
  p.reserve(nodes_.size() - (end - root) + graft.size());
  p.insert(p.end(), nodes_.begin(), nodes_.begin() + root);
  p.insert(p.end(), graft.nodes_.begin(), graft.nodes_.end());
  p.insert(p.end(), nodes_.begin() + end, nodes_.end());
  return ScoreExpr(std::move(p));
}

double protected_div(double num, double den) { return den == 0.0 ? 1.0 : num / den; }

double evaluate(const ScoreExpr& expr, const NodeContext& ctx) {
  const auto p = expr.prefix();
  std::vector<double> stack;
  stack.reserve(p.size());
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    if (!is_operator(*it)) {
      stack.push_back(terminal_value(*it, ctx));
      continue;
    }
    const double lhs = stack.back();
    stack.pop_back();
    const double rhs = stack.back();
    double v = 0.0;
    switch (*it) {
      case Symbol::Add: v = lhs + rhs; break;
      case Symbol::Sub: v = lhs - rhs; break;
      case Symbol::Mul: v = lhs * rhs; break;
      case Symbol::Div: v = protected_div(lhs, rhs); break;
      default: break;
    }
    stack.back() = finite_or_clamped(v);
  }
  return stack.back();
}

ScoreExpr parse(std::string_view text) { return Reader(text).read_all(); }

std::string print(const ScoreExpr& expr) {
  std::string out;
  std::size_t i = 0;
  print_into(expr, i, out);
  return out;
}

ScoreExpr read_ssx(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open expression file: " + path);
  std::string body;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] == '#') continue;
    body += line;
    body += '\n';
  }
  try {
    return parse(body);
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), e.offset(), path + ": " + e.what());
  }
}

void write_ssx(const ScoreExpr& expr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write expression file: " + path);
  out << print(expr) << '\n';
}

ScoreExpr random_tree(Rng& rng, int min_depth, int max_depth) {
  if (min_depth < 0 || min_depth > max_depth) {
    throw ExprError("random_tree: need 0 <= min_depth <= max_depth");
  }
  std::vector<Symbol> out;
  grow(rng, 0, min_depth, max_depth, out);
  return ScoreExpr(std::move(out));
}

std::uint64_t count_perfect_trees(unsigned r) {
  // 7^(2^r) * 4^(2^r - 1)
  if (r >= 63) throw std::overflow_error("count_perfect_trees: depth too large");
  const std::uint64_t leaves = std::uint64_t{1} << r;
  std::uint64_t result = 1;
  auto mul = [&result](std::uint64_t f) {
    if (result > std::numeric_limits<std::uint64_t>::max() / f) {
      throw std::overflow_error("count_perfect_trees: result exceeds 64 bits");
    }
    result *= f;
  };
  for (std::uint64_t i = 0; i < leaves; ++i) mul(kNumTerminals);
  for (std::uint64_t i = 0; i + 1 < leaves; ++i) mul(kNumOperators);
  return result;
}

}  // namespace gp2s
