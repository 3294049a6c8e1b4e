/*
   Copyright 2026 The zpfsim Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// Dense two-phase simplex.
//
// Sized for the Bell feasibility problems (a few hundred rows and columns).
// The strategy matrices are highly degenerate, so long degenerate stretches
// switch pricing to Bland's rule.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "zpfsim/errors.hpp"

namespace zpfsim::lp {

enum class RowKind { LessEqual, GreaterEqual, Equal };
enum class Status { Optimal, Infeasible, Unbounded };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "?";
}

struct Problem {
  Eigen::MatrixXd A;  ///< m x n
  Eigen::VectorXd b;  ///< m
  Eigen::VectorXd c;  ///< n, objective is minimized
  std::vector<RowKind> kinds;
};

struct Result {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

namespace detail {

inline constexpr std::size_t kMaxIterations = 200000;
inline constexpr std::size_t kDegenerateStreak = 50;
inline constexpr double kPivotTol = 1e-9;

class Tableau {
 public:
  Tableau(Eigen::MatrixXd t, std::vector<int> basis, double eps)
      : t_(std::move(t)), basis_(std::move(basis)), eps_(eps) {}

  // Runs simplex on objective row `obj` over columns [0, active). Returns
  // false when unbounded. Dantzig pricing with the largest pivot among tied
  // ratios; after a run of degenerate pivots it falls back to Bland's rule.
  bool run(Eigen::Index obj, Eigen::Index active, std::size_t& pivots) {
    const Eigen::Index rows = static_cast<Eigen::Index>(basis_.size());
    const Eigen::Index rhs = t_.cols() - 1;
    std::size_t degenerate = 0;
    for (std::size_t iter = 0;; ++iter) {
      if (iter > kMaxIterations) throw NumericContractError("lp::solve: iteration limit reached");
      const bool bland = degenerate > kDegenerateStreak;
      Eigen::Index enter = -1;
      double most = -eps_;
      for (Eigen::Index j = 0; j < active; ++j) {
        const double r = t_(obj, j);
        if (r < most) {
          enter = j;
          if (bland) break;
          most = r;
        }
      }
      if (enter < 0) return true;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows; ++i)
        if (t_(i, enter) > kPivotTol) best = std::min(best, std::max(0.0, t_(i, rhs)) / t_(i, enter));
      if (!std::isfinite(best)) return false;
      Eigen::Index leave = -1;
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol || std::max(0.0, t_(i, rhs)) / a > best + 1e-12) continue;
        if (leave < 0 || (bland ? basis_[i] < basis_[leave] : a > t_(leave, enter))) leave = i;
      }
      degenerate = best <= 1e-12 ? degenerate + 1 : 0;
      pivot(leave, enter);
      ++pivots;
    }
  }

  void pivot(Eigen::Index r, Eigen::Index col) {
    t_.row(r) /= t_(r, col);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    t_ = t_.unaryExpr([](double v) { return std::abs(v) < 1e-14 ? 0.0 : v; });
    basis_[r] = static_cast<int>(col);
  }

  Eigen::MatrixXd& table() { return t_; }
  std::vector<int>& basis() { return basis_; }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  double eps_;
};

}  // namespace detail

/// Minimizes c.x subject to A x (<=,>=,=) b and x >= 0.
inline Result solve(const Problem& p, double eps = 1e-11) {
  const Eigen::Index m = p.A.rows(), n = p.A.cols();
  require(p.b.size() == m && p.c.size() == n && static_cast<Eigen::Index>(p.kinds.size()) == m,
          "lp::solve: dimension mismatch");

  // Columns: x (n) | slack/surplus (one per inequality) | artificial | rhs.
  Eigen::Index slacks = 0, artificials = 0;
  for (auto k : p.kinds) {
    if (k != RowKind::Equal) ++slacks;
  }
  std::vector<double> sign(m, 1.0);
  std::vector<RowKind> kinds = p.kinds;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (p.b(i) < 0) {
      sign[i] = -1.0;
      if (kinds[i] == RowKind::LessEqual)
        kinds[i] = RowKind::GreaterEqual;
      else if (kinds[i] == RowKind::GreaterEqual)
        kinds[i] = RowKind::LessEqual;
    }
    if (kinds[i] != RowKind::LessEqual) ++artificials;
  }
  const Eigen::Index art0 = n + slacks, cols = n + slacks + artificials + 1, rhs = cols - 1;
  // Rows 0..m-1 constraints, row m phase-II objective, row m+1 phase-I objective.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 2, cols);
  std::vector<int> basis(m);
  Eigen::Index s = n, a = art0;
  for (Eigen::Index i = 0; i < m; ++i) {
    t.row(i).head(n) = sign[i] * p.A.row(i);
    t(i, rhs) = sign[i] * p.b(i);
    if (kinds[i] == RowKind::LessEqual) {
      t(i, s) = 1.0;
      basis[i] = static_cast<int>(s++);
    } else {
      if (kinds[i] == RowKind::GreaterEqual) t(i, s++) = -1.0;
      t(i, a) = 1.0;
      basis[i] = static_cast<int>(a++);
    }
  }
  t.row(m).head(n) = p.c.transpose();
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[i] >= art0) t.row(m + 1) -= t.row(i);
  for (Eigen::Index j = art0; j < rhs; ++j) t(m + 1, j) = 0.0;

  detail::Tableau tab(std::move(t), std::move(basis), eps);
  Result res;
  if (artificials > 0) {
    tab.run(m + 1, rhs, res.pivots);
    const double scale = 1.0 + p.b.cwiseAbs().maxCoeff();
    if (-tab.table()(m + 1, rhs) > 1e-9 * scale) {
      res.status = Status::Infeasible;
      return res;
    }
    // Drive remaining artificials out of the basis where possible.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis()[i] < art0) continue;
      for (Eigen::Index j = 0; j < art0; ++j)
        if (std::abs(tab.table()(i, j)) > eps) {
          tab.pivot(i, j);
          ++res.pivots;
          break;
        }
    }
  }
  if (!tab.run(m, art0, res.pivots)) {
    res.status = Status::Unbounded;
    return res;
  }
  res.status = Status::Optimal;
  res.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i)
    if (tab.basis()[i] < n) res.x(tab.basis()[i]) = tab.table()(i, rhs);
  res.objective = p.c.dot(res.x);
  return res;
}

}  // namespace zpfsim::lp
