#pragma once

// Brute-force reference solvers used to check the engine.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "gp2s/milp.hpp"

namespace oracle {

struct LpAnswer {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
};

inline bool next_combination(std::vector<int>& idx, int total) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == total - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

// Vertex enumeration of {A x >= b, l <= x <= u} with finite bounds: every
// vertex is the solution of n linearly independent tight constraints.
inline LpAnswer lp_by_vertices(const gp2s::LpProblemd& p, double tol = 1e-7) {
  const auto n = static_cast<int>(p.num_variables());
  const auto m = static_cast<int>(p.num_constraints());
  // rows of the full system G x >= h: A, I (lower), -I (upper)
  Eigen::MatrixXd G(m + 2 * n, n);
  Eigen::VectorXd h(m + 2 * n);
  G.topRows(m) = p.constraints;
  h.head(m) = p.rhs;
  G.middleRows(m, n) = Eigen::MatrixXd::Identity(n, n);
  h.segment(m, n) = p.lower;
  G.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  h.tail(n) = -p.upper;

  LpAnswer best;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  const int total = m + 2 * n;
  do {
    Eigen::MatrixXd S(n, n);
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i) {
      S.row(i) = G.row(idx[i]);
      t[i] = h[idx[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(t);
    const Eigen::VectorXd slack = G * x - h;
    if (slack.minCoeff() < -tol * (1.0 + h.cwiseAbs().maxCoeff())) continue;
    const double z = p.objective.dot(x);
    best.feasible = true;
    if (z < best.objective) best.objective = z;
  } while (next_combination(idx, total));
  return best;
}

// Exhaustive search over every integer point of a pure-integer model.
inline LpAnswer milp_by_enumeration(const gp2s::Milp& milp, double tol = 1e-9) {
  const auto n = milp.num_variables();
  const auto& p = milp.lp;
  std::vector<std::int64_t> lo(n), hi(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    lo[j] = static_cast<std::int64_t>(std::ceil(p.lower[j] - tol));
    hi[j] = static_cast<std::int64_t>(std::floor(p.upper[j] + tol));
    if (lo[j] > hi[j]) return {};
  }
  LpAnswer best;
  Eigen::VectorXd x(n);
  for (Eigen::Index j = 0; j < n; ++j) x[j] = static_cast<double>(lo[j]);
  while (true) {
    const Eigen::VectorXd r = p.constraints * x - p.rhs;
    if (r.size() == 0 || r.minCoeff() >= -tol) {
      const double z = p.objective.dot(x);
      best.feasible = true;
      if (z < best.objective) best.objective = z;
    }
    Eigen::Index j = 0;
    while (j < n && x[j] >= static_cast<double>(hi[j])) {
      x[j] = static_cast<double>(lo[j]);
      ++j;
    }
    if (j == n) break;
    x[j] += 1.0;
  }
  return best;
}

}  // namespace oracle
