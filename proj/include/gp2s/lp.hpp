#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gp2s {

/// min c.x  s.t.  A x >= b,  lower <= x <= upper  (bounds may be infinite).
template <typename Scalar>
struct LpProblem {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector objective;
  Matrix constraints;
  Vector rhs;
  Vector lower;
  Vector upper;

  Eigen::Index num_variables() const { return objective.size(); }
  Eigen::Index num_constraints() const { return rhs.size(); }

  /// Throws std::invalid_argument on inconsistent dimensions or lower > upper.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  typename LpProblem<Scalar>::Vector x;
  Scalar objective = Scalar(0);
  long iterations = 0;
};

struct LpSettings {
  double tolerance = 1e-7;
  double pivot_tolerance = 1e-9;
};

class LpNumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-phase bounded-variable primal simplex on a dense tableau. Dantzig
/// pricing, switching to Bland's rule after 10*(n+m) iterations without
/// objective progress.
template <typename Scalar>
LpResult<Scalar> solve_lp(const LpProblem<Scalar>& problem, const LpSettings& settings = {});

/// True when x satisfies rows and bounds within `tol`.
template <typename Scalar>
bool is_feasible(const LpProblem<Scalar>& problem,
                 const typename LpProblem<Scalar>::Vector& x, Scalar tol);

// ---------------------------------------------------------------------------

template <typename Scalar>
void LpProblem<Scalar>::validate() const {
  const auto n = num_variables();
  const auto m = num_constraints();
  if (constraints.rows() != m || constraints.cols() != n || lower.size() != n ||
      upper.size() != n) {
    throw std::invalid_argument("LpProblem: inconsistent dimensions");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(lower[j] <= upper[j])) throw std::invalid_argument("LpProblem: lower > upper");
  }
}

template <typename Scalar>
bool is_feasible(const LpProblem<Scalar>& problem, const typename LpProblem<Scalar>::Vector& x,
                 Scalar tol) {
  if (x.size() != problem.num_variables()) return false;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] < problem.lower[j] - tol || x[j] > problem.upper[j] + tol) return false;
  }
  if (problem.num_constraints() == 0) return true;
  const typename LpProblem<Scalar>::Vector activity = problem.constraints * x;
  return ((activity - problem.rhs).array() >= -tol).all();
}

namespace detail {

template <typename Scalar>
class BoundedSimplex {
 public:
  using Vector = typename LpProblem<Scalar>::Vector;
  using Matrix = typename LpProblem<Scalar>::Matrix;

  BoundedSimplex(const LpProblem<Scalar>& p, const LpSettings& s)
      : p_(p),
        tol_(static_cast<Scalar>(s.tolerance)),
        piv_tol_(static_cast<Scalar>(s.pivot_tolerance)),
        n_(p.num_variables()),
        m_(p.num_constraints()) {}

  LpResult<Scalar> run() {
    setup();
    LpResult<Scalar> result;

    // Phase 1: drive the artificial variables to zero.
    Vector phase1_cost = Vector::Zero(cols_);
    phase1_cost.tail(cols_ - n_ - m_).setOnes();
    iterate(phase1_cost);
    refresh_basic_values();
    Scalar infeasibility(0);
    for (Eigen::Index j = n_ + m_; j < cols_; ++j) infeasibility += value_of(j);
    const Scalar scale = Scalar(1) + (m_ > 0 ? p_.rhs.cwiseAbs().maxCoeff() : Scalar(0));
    if (infeasibility > tol_ * scale) {
      result.status = LpStatus::Infeasible;
      result.iterations = iterations_;
      return result;
    }
    for (Eigen::Index j = n_ + m_; j < cols_; ++j) upper_[j] = Scalar(0);

    // Phase 2: true objective, artificials pinned at zero.
    Vector cost = Vector::Zero(cols_);
    cost.head(n_) = p_.objective;
    if (!iterate(cost)) {
      result.status = LpStatus::Unbounded;
      result.iterations = iterations_;
      return result;
    }
    refresh_basic_values();

    result.status = LpStatus::Optimal;
    result.x.resize(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      result.x[j] = std::clamp(value_of(j), p_.lower[j], p_.upper[j]);
    }
    result.objective = p_.objective.dot(result.x);
    result.iterations = iterations_;
    return result;
  }

 private:
  static constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  // Column j of the working matrix [A | -I | artificials].
  Vector column(Eigen::Index j) const {
    if (j < n_) return p_.constraints.col(j);
    Vector e = Vector::Zero(m_);
    if (j < n_ + m_) {
      e[j - n_] = Scalar(-1);
    } else {
      e[art_row_[j - n_ - m_]] = Scalar(1);
    }
    return e;
  }

  Scalar value_of(Eigen::Index j) const {
    return row_of_[j] >= 0 ? basic_value_[row_of_[j]] : value_[j];
  }

  void setup() {
    lower_.resize(n_ + m_);
    upper_.resize(n_ + m_);
    lower_.head(n_) = p_.lower;
    upper_.head(n_) = p_.upper;
    lower_.tail(m_).setZero();
    upper_.tail(m_).setConstant(kInf);

    value_ = Vector::Zero(n_ + m_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (std::isfinite(static_cast<double>(lower_[j]))) {
        value_[j] = lower_[j];
      } else if (std::isfinite(static_cast<double>(upper_[j]))) {
        value_[j] = upper_[j];
      }
    }

    // residual r = b - A x_N: rows with r <= 0 start with their slack basic,
    // the rest get an artificial.
    const Vector residual = p_.rhs - p_.constraints * value_.head(n_);
    art_row_.clear();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (residual[i] > Scalar(0)) art_row_.push_back(i);
    }
    const auto nart = static_cast<Eigen::Index>(art_row_.size());
    cols_ = n_ + m_ + nart;
    lower_.conservativeResize(cols_);
    upper_.conservativeResize(cols_);
    value_.conservativeResize(cols_);
    for (Eigen::Index k = 0; k < nart; ++k) {
      lower_[n_ + m_ + k] = Scalar(0);
      upper_[n_ + m_ + k] = kInf;
      value_[n_ + m_ + k] = Scalar(0);
    }

    basis_.assign(static_cast<std::size_t>(m_), -1);
    row_of_.assign(static_cast<std::size_t>(cols_), -1);
    basic_value_ = Vector::Zero(m_);
    initial_sign_ = Vector::Zero(m_);
    initial_col_.assign(static_cast<std::size_t>(m_), -1);
    std::vector<Eigen::Index> art_of_row(static_cast<std::size_t>(m_), -1);
    for (Eigen::Index k = 0; k < nart; ++k) art_of_row[art_row_[k]] = n_ + m_ + k;

    tableau_.resize(m_, cols_);
    tableau_.leftCols(n_) = p_.constraints;
    tableau_.middleCols(n_, m_) = -Matrix::Identity(m_, m_);
    tableau_.rightCols(nart).setZero();
    for (Eigen::Index k = 0; k < nart; ++k) tableau_(art_row_[k], n_ + m_ + k) = Scalar(1);

    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index col = art_of_row[i] >= 0 ? art_of_row[i] : n_ + i;
      const Scalar sign = art_of_row[i] >= 0 ? Scalar(1) : Scalar(-1);
      basis_[i] = col;
      row_of_[col] = i;
      initial_col_[i] = col;
      initial_sign_[i] = sign;
      tableau_.row(i) *= sign;
      basic_value_[i] = sign * residual[i];
    }
  }

  // B^{-1} is held in the columns of the initial (diagonal +-1) basis.
  void refresh_basic_values() {
    if (m_ == 0) return;
    Matrix binv(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) binv.col(i) = tableau_.col(initial_col_[i]) * initial_sign_[i];
    Vector rhs = p_.rhs;
    for (Eigen::Index j = 0; j < cols_; ++j) {
      if (row_of_[j] < 0 && value_[j] != Scalar(0)) rhs -= column(j) * value_[j];
    }
    basic_value_ = binv * rhs;
  }

  // Returns false if the objective is unbounded below.
  bool iterate(const Vector& cost) {
    Vector reduced = cost;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Scalar cb = cost[basis_[i]];
      if (cb != Scalar(0)) reduced -= cb * tableau_.row(i).transpose();
    }
    Scalar objective(0);
    for (Eigen::Index j = 0; j < cols_; ++j) objective += cost[j] * value_of(j);

    const long stall_limit = 10 * static_cast<long>(n_ + m_) + 10;
    const long hard_limit = 200 * static_cast<long>(cols_ + m_) + 10000;
    long stalled = 0;
    long steps = 0;
    bool bland = false;
    Scalar best_objective = objective;

    for (;;) {
      if (++steps > hard_limit) throw LpNumericalError("simplex failed to terminate");
      Eigen::Index entering = -1;
      Scalar direction(0);
      Scalar best_score(0);
      for (Eigen::Index j = 0; j < cols_; ++j) {
        if (row_of_[j] >= 0 || !(lower_[j] < upper_[j])) continue;
        const Scalar d = reduced[j];
        const bool at_lower = value_[j] <= lower_[j];
        const bool at_upper = value_[j] >= upper_[j];
        Scalar dir(0);
        if (d < -tol_ && !at_upper) {
          dir = Scalar(1);
        } else if (d > tol_ && !at_lower) {
          dir = Scalar(-1);
        }
        if (dir == Scalar(0)) continue;
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best_score) {
          best_score = std::abs(d);
          entering = j;
          direction = dir;
        }
      }
      if (entering < 0) return true;

      // Ratio test: largest step before a basic variable or the entering
      // variable itself hits a bound.
      Scalar step = upper_[entering] - lower_[entering];
      Eigen::Index leave_row = -1;
      Scalar leave_pivot(0);
      for (Eigen::Index i = 0; i < m_; ++i) {
        const Scalar alpha = direction * tableau_(i, entering);
        if (std::abs(alpha) <= piv_tol_) continue;
        const Eigen::Index b = basis_[i];
        Scalar limit;
        if (alpha > Scalar(0)) {
          if (!std::isfinite(static_cast<double>(lower_[b]))) continue;
          limit = (basic_value_[i] - lower_[b]) / alpha;
        } else {
          if (!std::isfinite(static_cast<double>(upper_[b]))) continue;
          limit = (upper_[b] - basic_value_[i]) / -alpha;
        }
        limit = std::max(limit, Scalar(0));
        bool take = false;
        if (limit < step) {
          take = true;
        } else if (limit == step && leave_row >= 0) {
          take = bland ? b < basis_[leave_row] : std::abs(alpha) > std::abs(leave_pivot);
        }
        if (take) {
          step = limit;
          leave_row = i;
          leave_pivot = alpha;
        }
      }
      if (!std::isfinite(static_cast<double>(step))) return false;

      ++iterations_;
      const Scalar entering_value = value_[entering] + direction * step;
      if (step != Scalar(0)) {
        basic_value_ -= (direction * step) * tableau_.col(entering);
      }
      objective += reduced[entering] * direction * step;

      if (leave_row < 0) {
        // bound flip, basis unchanged
        value_[entering] = direction > Scalar(0) ? upper_[entering] : lower_[entering];
      } else {
        const Eigen::Index leaving = basis_[leave_row];
        const Scalar alpha = tableau_(leave_row, entering);
        value_[leaving] = (direction * alpha > Scalar(0)) ? lower_[leaving] : upper_[leaving];
        row_of_[leaving] = -1;
        basis_[leave_row] = entering;
        row_of_[entering] = leave_row;
        value_[entering] = Scalar(0);
        basic_value_[leave_row] = entering_value;
        pivot(leave_row, entering, reduced);
      }

      if (objective < best_objective - tol_ * (Scalar(1) + std::abs(best_objective))) {
        best_objective = objective;
        stalled = 0;
      } else if (!bland && ++stalled > stall_limit) {
        bland = true;
      }
    }
  }

  void pivot(Eigen::Index r, Eigen::Index q, Vector& reduced) {
    tableau_.row(r) /= tableau_(r, q);
    const Vector col = tableau_.col(q);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i != r && col[i] != Scalar(0)) tableau_.row(i) -= col[i] * tableau_.row(r);
    }
    tableau_.col(q).setZero();
    tableau_(r, q) = Scalar(1);
    const Scalar dq = reduced[q];
    if (dq != Scalar(0)) reduced -= dq * tableau_.row(r).transpose();
    reduced[q] = Scalar(0);
  }

  const LpProblem<Scalar>& p_;
  Scalar tol_;
  Scalar piv_tol_;
  Eigen::Index n_;
  Eigen::Index m_;
  Eigen::Index cols_ = 0;
  Matrix tableau_;
  Vector lower_, upper_, value_, basic_value_, initial_sign_;
  std::vector<Eigen::Index> basis_, row_of_, art_row_, initial_col_;
  long iterations_ = 0;
};

}  // namespace detail

template <typename Scalar>
LpResult<Scalar> solve_lp(const LpProblem<Scalar>& problem, const LpSettings& settings) {
  problem.validate();
  return detail::BoundedSimplex<Scalar>(problem, settings).run();
}

extern template struct LpProblem<double>;
extern template LpResult<double> solve_lp<double>(const LpProblem<double>&, const LpSettings&);

using LpProblemd = LpProblem<double>;
using LpResultd = LpResult<double>;

}  // namespace gp2s
