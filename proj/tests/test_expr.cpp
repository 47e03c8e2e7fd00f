#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "gp2s/expr.hpp"
#include "policies.hpp"

using namespace gp2s;

namespace {

// Depth of every leaf, walking the prefix with an explicit stack.
std::vector<int> leaf_depths(const ScoreExpr& e) {
  std::vector<int> out;
  std::vector<int> pending{0};
  for (Symbol s : e.prefix()) {
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

std::vector<ScoreExpr> all_perfect_trees(int r) {
  std::vector<ScoreExpr> out;
  if (r == 0) {
    for (std::size_t t = 0; t < kNumTerminals; ++t) {
      out.push_back(ScoreExpr::leaf(static_cast<Symbol>(kNumOperators + t)));
    }
    return out;
  }
  const auto sub = all_perfect_trees(r - 1);
  for (std::size_t op = 0; op < kNumOperators; ++op) {
    for (const auto& a : sub) {
      for (const auto& b : sub) out.push_back(ScoreExpr::binary(static_cast<Symbol>(op), a, b));
    }
  }
  return out;
}

NodeContext ctx_with(double z, std::int64_t d, double big_m) {
  NodeContext c;
  c.lower_bound = z;
  c.depth = d;
  c.big_m = big_m;
  return c;
}

}  // namespace

TEST_CASE("protected division") {
  CHECK(protected_div(4, 0) == 1.0);
  CHECK(protected_div(6, 3) == 2.0);
  CHECK(protected_div(0, 5) == 0.0);
  CHECK(protected_div(1, 1e-300) == doctest::Approx(1e300));
}

TEST_CASE("evaluate the depth-first layered score") {
  const auto e = parse("(sub lb (mul bigM depth))");
  CHECK(evaluate(e, ctx_with(5, 2, 1e6)) == -1999995.0);
  CHECK(evaluate(parse("(div lb depth)"), ctx_with(4, 0, 1e6)) == 1.0);
}

TEST_CASE("evaluate clamps overflow") {
  NodeContext c = ctx_with(1e200, 1, 1e200);
  const auto square = parse("(mul lb bigM)");
  CHECK(evaluate(square, c) == kBigScore);
  CHECK(evaluate(parse("(sub depth (mul lb bigM))"), c) == -kBigScore);
  CHECK(std::isfinite(evaluate(parse("(sub (mul lb bigM) (mul lb bigM))"), c)));
}

TEST_CASE("parse and print examples") {
  CHECK(parse("lb") == ScoreExpr::leaf(Symbol::LowerBound));
  CHECK(print(ScoreExpr::leaf(Symbol::LowerBound)) == "lb");
  const auto two_lb = ScoreExpr::binary(Symbol::Add, ScoreExpr::leaf(Symbol::LowerBound),
                                        ScoreExpr::leaf(Symbol::LowerBound));
  CHECK(print(two_lb) == "(add lb lb)");
  CHECK(parse("(div estimate depth)") ==
        ScoreExpr::binary(Symbol::Div, ScoreExpr::leaf(Symbol::BestEstimate),
                          ScoreExpr::leaf(Symbol::Depth)));
  const auto gisp = parse("(sub (div depth estimate) depth)");
  CHECK(gisp.size() == 5);
  CHECK(gisp.depth() == 2);
  CHECK(print(parse("  ( add\n lb\tlb ) ")) == "(add lb lb)");
}

TEST_CASE("parse errors") {
  auto kind_of = [](const char* text) {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.kind();
    }
    FAIL("no error for " << text);
    return ParseError::Kind::Syntax;
  };
  using K = ParseError::Kind;
  CHECK(kind_of("") == K::Syntax);
  CHECK(kind_of("(add lb lb") == K::Syntax);
  CHECK(kind_of("(add lb lb))") == K::Syntax);
  CHECK(kind_of("lb lb") == K::Syntax);
  CHECK(kind_of("(add lb)") == K::Arity);
  CHECK(kind_of("(add lb lb lb)") == K::Arity);
  CHECK(kind_of("add") == K::Arity);
  CHECK(kind_of("(lb depth)") == K::Arity);
  CHECK(kind_of("(pow lb lb)") == K::UnknownSymbol);
  CHECK(kind_of("foo") == K::UnknownSymbol);
  try {
    parse("(add lb foo)");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 8);
  }
}

TEST_CASE("published policies parse, round-trip and evaluate") {
  const auto ctx = policies::fixed_context();
  for (const auto& p : policies::published()) {
    INFO(p.label);
    const auto e = parse(p.text);
    CHECK(print(e) == p.text);
    CHECK(parse(print(e)) == e);
    const double v = evaluate(e, ctx);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(p.formula(ctx)).epsilon(1e-12));
  }
}

TEST_CASE("random trees round-trip and respect depth bounds") {
  Rng rng(7);
  int bad_round_trip = 0, bad_depth = 0;
  for (int i = 0; i < 10000; ++i) {
    const int lo = static_cast<int>(uniform_index(rng, 18));
    const int hi = lo + static_cast<int>(uniform_index(rng, 18 - lo));
    const auto e = random_tree(rng, lo, hi);
    bad_round_trip += !(parse(print(e)) == e);
    const auto depths = leaf_depths(e);
    bad_depth += std::any_of(depths.begin(), depths.end(), [&](int d) { return d < lo || d > hi; });
  }
  CHECK(bad_round_trip == 0);
  CHECK(bad_depth == 0);
}

TEST_CASE("random tree extremes") {
  Rng rng(1);
  std::set<Symbol> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto e = random_tree(rng, 0, 0);
    REQUIRE(e.size() == 1);
    seen.insert(e.prefix()[0]);
  }
  CHECK(seen.size() == kNumTerminals);
  const auto full = random_tree(rng, 3, 3);
  CHECK(full.size() == 15);
  Rng a(42), b(42);
  CHECK(random_tree(a, 1, 17) == random_tree(b, 1, 17));
}

TEST_CASE("symbols between the depth bounds are uniform") {
  // With dmin = 0 and dmax = 1 the root is any of the 11 symbols.
  Rng rng(3);
  std::vector<int> counts(kNumSymbols, 0);
  const int trials = 110000;
  for (int i = 0; i < trials; ++i) ++counts[static_cast<int>(random_tree(rng, 0, 1).prefix()[0])];
  for (int c : counts) CHECK(std::abs(c - trials / 11) < 5 * std::sqrt(trials / 11.0));
}

TEST_CASE("perfect tree counts") {
  CHECK(count_perfect_trees(0) == 7);
  CHECK(count_perfect_trees(1) == 196);
  CHECK(count_perfect_trees(2) == 153664);
  CHECK(count_perfect_trees(3) == 94450499584ULL);
  for (int r = 0; r <= 2; ++r) {
    const auto trees = all_perfect_trees(r);
    std::set<std::string> distinct;
    for (const auto& t : trees) distinct.insert(print(t));
    CHECK(distinct.size() == count_perfect_trees(static_cast<unsigned>(r)));
  }
  CHECK_THROWS_AS(count_perfect_trees(5), std::overflow_error);
}

TEST_CASE("subtree surgery") {
  const auto e = parse("(add (mul lb depth) estimate)");
  CHECK(e.subtree_end(0) == 5);
  CHECK(e.subtree_end(1) == 4);
  CHECK(print(e.subtree(1)) == "(mul lb depth)");
  CHECK(print(e.replace_subtree(4, parse("(div nvars ncons)"))) ==
        "(add (mul lb depth) (div nvars ncons))");
  CHECK(e.replace_subtree(0, parse("bigM")) == parse("bigM"));
  CHECK_THROWS_AS(ScoreExpr(std::vector<Symbol>{Symbol::Add, Symbol::Depth}), ExprError);
  CHECK_THROWS_AS(ScoreExpr(std::vector<Symbol>{Symbol::Depth, Symbol::Depth}), ExprError);
  CHECK_THROWS_AS(ScoreExpr(std::vector<Symbol>{}), ExprError);
}

TEST_CASE("evaluation is total on random trees") {
  Rng rng(11);
  NodeContext c;
  c.depth = 0;
  c.best_estimate = -1e15;
  c.lower_bound = 1e15;
  c.root_dual_bound = 0.0;
  c.num_constraints = 0;
  c.num_variables = 1000000;
  c.big_m = 1e8;
  for (int i = 0; i < 5000; ++i) REQUIRE(std::isfinite(evaluate(random_tree(rng, 1, 17), c)));
}

TEST_CASE("ssx files") {
  const auto path = std::filesystem::temp_directory_path() / "gp2s_test_expr.ssx";
  {
    std::ofstream out(path);
    out << "# evolved\n(sub (div depth estimate)\n depth)\n";
  }
  CHECK(print(read_ssx(path.string())) == "(sub (div depth estimate) depth)");
  write_ssx(parse("(add lb lb)"), path.string());
  CHECK(read_ssx(path.string()) == parse("(add lb lb)"));
  std::filesystem::remove(path);
  CHECK_THROWS(read_ssx(path.string()));
}
