#include <algorithm>
#include <limits>
#include <numeric>

#include "gp2s/milp.hpp"
#include "gp2s/random.hpp"

namespace gp2s {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

bool ErGraph::connected() const {
  if (node_count <= 1) return true;
  std::vector<int> parent(static_cast<std::size_t>(node_count));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int components = node_count;
  for (const auto& [u, v] : edges) {
    const int a = find(u);
    const int b = find(v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

ErGraph gen_er_graph(int node_count, double edge_prob, std::uint64_t seed) {
  if (node_count < 2) throw MilpError("gen_er_graph: need at least 2 nodes");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw MilpError("gen_er_graph: p outside [0, 1]");
  Rng rng(seed);
  ErGraph g;
  g.node_count = node_count;
  g.seed = seed;
  for (int u = 0; u < node_count; ++u) {
    for (int v = u + 1; v < node_count; ++v) {
      if (unit_real(rng) < edge_prob) g.edges.emplace_back(u, v);
    }
  }
  return g;
}

Milp gisp_model(const ErGraph& g, const std::vector<bool>& removable, const GispParams& params,
                const std::string& name) {
  if (removable.size() != g.edges.size()) throw MilpError("gisp_model: one flag per edge");
  MilpBuilder b(name);
  std::vector<std::size_t> x(static_cast<std::size_t>(g.node_count));
  for (int v = 0; v < g.node_count; ++v) {
    x[v] = b.add_binary("x" + std::to_string(v), -params.revenue);
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto [u, v] = g.edges[e];
    std::vector<MilpBuilder::Term> terms{{x[u], 1.0}, {x[v], 1.0}};
    if (removable[e]) {
      const auto y = b.add_binary("y" + std::to_string(u) + "_" + std::to_string(v),
                                  params.removal_cost);
      terms.emplace_back(y, -1.0);
    }
    b.add_constraint("e" + std::to_string(u) + "_" + std::to_string(v), terms,
                     MilpBuilder::Sense::Le, 1.0);
  }
  return b.build();
}

Milp gen_gisp(const ErGraph& g, std::uint64_t seed, const GispParams& params) {
  Rng rng(seed);
  std::vector<bool> removable(g.edges.size());
  for (std::size_t e = 0; e < removable.size(); ++e) {
    removable[e] = unit_real(rng) < params.removable_prob;
  }
  return gisp_model(g, removable, params, "gisp");
}

Milp maxsat_model(int num_vars, const std::vector<Clause>& clauses,
                  const std::vector<double>& weights, const std::string& name) {
  if (weights.size() != clauses.size()) throw MilpError("maxsat_model: one weight per clause");
  MilpBuilder b(name);
  for (int j = 0; j < num_vars; ++j) b.add_binary("x" + std::to_string(j));
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    const auto s = b.add_binary("s" + std::to_string(c), -weights[c]);
    // sum_pos x + sum_neg (1 - x) >= s
    std::vector<MilpBuilder::Term> terms;
    double negatives = 0.0;
    for (const auto& lit : clauses[c]) {
      if (lit.var < 0 || lit.var >= num_vars) throw MilpError("maxsat_model: literal out of range");
      terms.emplace_back(static_cast<std::size_t>(lit.var), lit.positive ? 1.0 : -1.0);
      negatives += lit.positive ? 0.0 : 1.0;
    }
    terms.emplace_back(s, -1.0);
    b.add_constraint("c" + std::to_string(c), terms, MilpBuilder::Sense::Ge, -negatives);
  }
  return b.build();
}

Milp gen_maxsat(int num_vars, const ErGraph& g, std::uint64_t seed) {
  if (num_vars < 3) throw MilpError("gen_maxsat: need at least 3 variables");
  if (g.node_count > num_vars) throw MilpError("gen_maxsat: graph larger than variable set");
  Rng rng(seed);
  std::vector<Clause> clauses;
  for (const auto& [u, v] : g.edges) {
    int w = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(num_vars - 2)));
    // skip over u < v to land on a third distinct variable
    if (w >= u) ++w;
    if (w >= v) ++w;
    Clause clause;
    for (int var : {u, v, w}) clause.push_back({var, unit_real(rng) < 0.5});
    clauses.push_back(std::move(clause));
  }
  return maxsat_model(num_vars, clauses, std::vector<double>(clauses.size(), 1.0), "maxsat");
}

Milp fcmcnf_model(int node_count, const std::vector<Arc>& arcs,
                  const std::vector<Commodity>& commodities, const std::string& name) {
  MilpBuilder b(name);
  const auto q_count = commodities.size();
  // flow[a][q]
  std::vector<std::vector<std::size_t>> flow(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    for (std::size_t q = 0; q < q_count; ++q) {
      flow[a].push_back(b.add_variable("f" + std::to_string(a) + "_" + std::to_string(q), 0.0,
                                       kInf, false, arcs[a].unit_cost));
    }
  }
  std::vector<std::size_t> open(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    open[a] = b.add_binary("y" + std::to_string(arcs[a].from) + "_" + std::to_string(arcs[a].to),
                           arcs[a].fixed_cost);
  }
  for (std::size_t q = 0; q < q_count; ++q) {
    const auto& com = commodities[q];
    for (int v = 0; v < node_count; ++v) {
      std::vector<MilpBuilder::Term> terms;
      for (std::size_t a = 0; a < arcs.size(); ++a) {
        if (arcs[a].from == v) terms.emplace_back(flow[a][q], 1.0);
        if (arcs[a].to == v) terms.emplace_back(flow[a][q], -1.0);
      }
      double supply = 0.0;
      if (com.origin != com.destination) {
        if (v == com.origin) supply = 1.0;
        if (v == com.destination) supply = -1.0;
      }
      if (terms.empty() && supply == 0.0) continue;
      b.add_constraint("flow" + std::to_string(q) + "_" + std::to_string(v), terms,
                       MilpBuilder::Sense::Eq, supply);
    }
  }
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    std::vector<MilpBuilder::Term> terms;
    for (std::size_t q = 0; q < q_count; ++q) terms.emplace_back(flow[a][q], 1.0);
    terms.emplace_back(open[a], -arcs[a].capacity);
    b.add_constraint("cap" + std::to_string(a), terms, MilpBuilder::Sense::Le, 0.0);
  }
  return b.build();
}

Milp gen_fcmcnf(const ErGraph& g, int commodities, std::uint64_t seed, const FcmcnfParams& params) {
  if (commodities < 1) throw MilpError("gen_fcmcnf: need at least one commodity");
  if (!g.connected()) throw MilpError("gen_fcmcnf: graph is disconnected");
  Rng rng(seed);
  std::vector<Arc> arcs;
  for (const auto& [u, v] : g.edges) {
    for (auto [from, to] : {std::pair{u, v}, std::pair{v, u}}) {
      const double fixed = uniform_int(rng, params.fixed_cost_min, params.fixed_cost_max);
      const double unit = uniform_int(rng, params.unit_cost_min, params.unit_cost_max);
      arcs.push_back({from, to, fixed, unit, static_cast<double>(commodities)});
    }
  }
  std::vector<Commodity> coms;
  for (int q = 0; q < commodities; ++q) {
    const int o = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(g.node_count)));
    int d = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(g.node_count - 1)));
    if (d >= o) ++d;
    coms.push_back({o, d});
  }
  return fcmcnf_model(g.node_count, arcs, coms, "fcmcnf");
}

}  // namespace gp2s
