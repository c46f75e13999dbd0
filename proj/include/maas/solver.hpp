#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "maas/errors.hpp"

namespace maas {

// Exact solver for small 0-1 linear programs: optimize c*x subject to rows of
// A*x <= b or A*x = b, x binary. Depth-first branch and bound; the relaxation
// bound assigns each free variable to at most one all-nonnegative <= row and
// sums per-row fractional knapsack optima (rows with negative coefficients on
// free variables are skipped, leaving the unconstrained positive-sum bound).

enum class Relation { LessEq, Eq };
enum class Sense { Maximize, Minimize };

struct LinearRow {
  std::vector<double> coeffs;
  Relation relation = Relation::LessEq;
  double rhs = 0.0;
};

struct BinaryProgram {
  Sense sense = Sense::Maximize;
  std::vector<double> objective;
  std::vector<LinearRow> rows;

  int var_count() const { return static_cast<int>(objective.size()); }
};

enum class SolveStatus { Optimal, Infeasible };

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double value = 0.0;
  std::vector<std::uint8_t> assignment;
};

namespace detail {

constexpr double kFeasEps = 1e-6;
constexpr double kGainEps = 1e-9;

class BnbSolver {
 public:
  explicit BnbSolver(const BinaryProgram& p) : program_(p), n_(p.var_count()) {
    for (const LinearRow& r : p.rows) {
      if (static_cast<int>(r.coeffs.size()) != n_)
        throw MalformedProgramError("constraint row length mismatch");
      for (double c : r.coeffs)
        if (!std::isfinite(c)) throw MalformedProgramError("non-finite coefficient");
    }
    for (double c : p.objective)
      if (!std::isfinite(c)) throw MalformedProgramError("non-finite objective");

    obj_.resize(n_);
    const double sign = (p.sense == Sense::Maximize) ? 1.0 : -1.0;
    for (int v = 0; v < n_; ++v) obj_[v] = sign * p.objective[v];

    const int m = static_cast<int>(p.rows.size());
    rows_.resize(m);
    var_rows_.resize(n_);
    for (int r = 0; r < m; ++r) {
      RowState& rs = rows_[r];
      rs.relation = p.rows[r].relation;
      rs.rhs = p.rows[r].rhs;
      for (int v = 0; v < n_; ++v) {
        const double a = p.rows[r].coeffs[v];
        if (a == 0.0) continue;
        rs.vars.push_back({v, a});
        var_rows_[v].push_back({r, a});
        rs.min_lhs += std::min(a, 0.0);
        rs.max_lhs += std::max(a, 0.0);
      }
      // static greedy order for the fractional knapsack bound
      rs.knap_order = rs.vars;
      std::sort(rs.knap_order.begin(), rs.knap_order.end(),
                [this](const VarCoeff& x, const VarCoeff& y) {
                  const double rx = (x.coeff > 0.0) ? obj_[x.var] / x.coeff
                                                    : std::numeric_limits<double>::infinity();
                  const double ry = (y.coeff > 0.0) ? obj_[y.var] / y.coeff
                                                    : std::numeric_limits<double>::infinity();
                  if (rx != ry) return rx > ry;
                  return x.var < y.var;
                });
    }

    branch_order_.resize(n_);
    std::iota(branch_order_.begin(), branch_order_.end(), 0);
    std::stable_sort(branch_order_.begin(), branch_order_.end(), [&p](int a, int b) {
      const double ca = std::fabs(p.objective[a]);
      const double cb = std::fabs(p.objective[b]);
      if (ca != cb) return ca > cb;
      return a < b;
    });

    fixed_.assign(n_, kUnfixed);
  }

  Solution run() {
    incumbent_value_ = -std::numeric_limits<double>::infinity();
    if (root_feasible()) search();
    Solution sol;
    if (incumbent_value_ == -std::numeric_limits<double>::infinity()) {
      sol.status = SolveStatus::Infeasible;
      return sol;
    }
    sol.status = SolveStatus::Optimal;
    sol.assignment = incumbent_;
    // canonical value in the caller's sense
    sol.value = 0.0;
    for (int v = 0; v < n_; ++v)
      if (incumbent_[v]) sol.value += program_.objective[v];
    return sol;
  }

 private:
  struct VarCoeff {
    int var;
    double coeff;
  };
  struct RowState {
    Relation relation = Relation::LessEq;
    double rhs = 0.0;
    double min_lhs = 0.0;
    double max_lhs = 0.0;
    double fixed_lhs = 0.0;
    int free_neg = 0;  // free vars with negative coeff (eligibility tracking)
    std::vector<VarCoeff> vars;
    std::vector<VarCoeff> knap_order;
  };

  static constexpr std::int8_t kUnfixed = -1;

  bool root_feasible() {
    for (RowState& rs : rows_)
      for (const VarCoeff& vc : rs.vars)
        if (vc.coeff < 0.0) ++rs.free_neg;
    // propagate from every row once before branching
    trail_.clear();
    for (std::size_t r = 0; r < rows_.size(); ++r)
      if (!propagate_row(static_cast<int>(r))) return false;
    return drain_queue();
  }

  bool fix(int v, std::uint8_t val) {
    if (fixed_[v] != kUnfixed) return fixed_[v] == static_cast<std::int8_t>(val);
    fixed_[v] = static_cast<std::int8_t>(val);
    trail_.push_back(v);
    if (val) fixed_value_ += obj_[v];
    for (const auto& [r, a] : var_rows_[v]) {
      RowState& rs = rows_[r];
      rs.min_lhs += a * val - std::min(a, 0.0);
      rs.max_lhs += a * val - std::max(a, 0.0);
      rs.fixed_lhs += a * val;
      if (a < 0.0) --rs.free_neg;
      queue_.push_back(r);
    }
    return true;
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      const int v = trail_.back();
      trail_.pop_back();
      const std::uint8_t val = static_cast<std::uint8_t>(fixed_[v]);
      if (val) fixed_value_ -= obj_[v];
      for (const auto& [r, a] : var_rows_[v]) {
        RowState& rs = rows_[r];
        rs.min_lhs -= a * val - std::min(a, 0.0);
        rs.max_lhs -= a * val - std::max(a, 0.0);
        rs.fixed_lhs -= a * val;
        if (a < 0.0) ++rs.free_neg;
      }
      fixed_[v] = kUnfixed;
    }
  }

  bool propagate_row(int r) {
    RowState& rs = rows_[r];
    if (rs.min_lhs > rs.rhs + kFeasEps) return false;
    if (rs.relation == Relation::Eq && rs.max_lhs < rs.rhs - kFeasEps) return false;
    for (const VarCoeff& vc : rs.vars) {
      if (fixed_[vc.var] != kUnfixed) continue;
      const double a = vc.coeff;
      if (a > 0.0) {
        if (rs.min_lhs + a > rs.rhs + kFeasEps) {
          if (!fix(vc.var, 0)) return false;
        } else if (rs.relation == Relation::Eq && rs.max_lhs - a < rs.rhs - kFeasEps) {
          if (!fix(vc.var, 1)) return false;
        }
      } else {
        if (rs.min_lhs - a > rs.rhs + kFeasEps) {
          if (!fix(vc.var, 1)) return false;
        } else if (rs.relation == Relation::Eq && rs.max_lhs + a < rs.rhs - kFeasEps) {
          if (!fix(vc.var, 0)) return false;
        }
      }
    }
    return true;
  }

  bool drain_queue() {
    while (!queue_.empty()) {
      const int r = queue_.back();
      queue_.pop_back();
      if (!propagate_row(r)) {
        queue_.clear();
        return false;
      }
    }
    return true;
  }

  // Sum of per-row fractional knapsack optima under a partition of the free
  // variables into eligible rows. Both partition directions are sound
  // relaxations; taking the min tightens packing-heavy and knapsack-heavy
  // programs alike.
  double partition_bound(bool first_row) const {
    double total = fixed_value_;
    std::vector<int> assigned_row(n_, -1);
    for (int v = 0; v < n_; ++v) {
      if (fixed_[v] != kUnfixed || obj_[v] <= 0.0) continue;
      int row = -1;
      for (const auto& [r, a] : var_rows_[v]) {
        const RowState& rs = rows_[r];
        if (a > 0.0 && rs.relation == Relation::LessEq && rs.free_neg == 0) {
          row = r;
          if (first_row) break;
        }
      }
      assigned_row[v] = row;
      if (row < 0) total += obj_[v];
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const RowState& rs = rows_[r];
      double cap = std::max(0.0, rs.rhs - rs.fixed_lhs);
      double best = 0.0;
      for (const VarCoeff& vc : rs.knap_order) {
        if (fixed_[vc.var] != kUnfixed) continue;
        if (assigned_row[vc.var] != static_cast<int>(r)) continue;
        if (vc.coeff <= cap) {
          best += obj_[vc.var];
          cap -= vc.coeff;
        } else {
          if (vc.coeff > 0.0) best += obj_[vc.var] * (cap / vc.coeff);
          cap = 0.0;
          break;
        }
      }
      total += best;
    }
    return total;
  }

  double bound() const { return std::min(partition_bound(true), partition_bound(false)); }

  // returns best value found in the subtree, for the bound soundness check
  double search() {
    int v = -1;
    for (int candidate : branch_order_) {
      if (fixed_[candidate] == kUnfixed) {
        v = candidate;
        break;
      }
    }
    if (v < 0) {
      // leaf; rows were kept consistent by propagation
      if (fixed_value_ > incumbent_value_ + kGainEps) {
        incumbent_value_ = fixed_value_;
        incumbent_.assign(n_, 0);
        for (int i = 0; i < n_; ++i)
          if (fixed_[i] == 1) incumbent_[i] = 1;
      }
      return fixed_value_;
    }

    const double node_bound = bound();
    if (node_bound <= incumbent_value_ + kGainEps)
      return -std::numeric_limits<double>::infinity();

    double best = -std::numeric_limits<double>::infinity();
    const std::uint8_t first = obj_[v] >= 0.0 ? 1 : 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
      const std::uint8_t val = attempt == 0 ? first : static_cast<std::uint8_t>(1 - first);
      const std::size_t mark = trail_.size();
      if (fix(v, val) && drain_queue()) best = std::max(best, search());
      queue_.clear();
      undo_to(mark);
    }
    if (best > node_bound + kFeasEps)
      throw std::logic_error("relaxation bound fell below a value in its subtree");
    return best;
  }

  const BinaryProgram& program_;
  int n_;
  std::vector<double> obj_;  // internal max sense
  std::vector<RowState> rows_;
  std::vector<std::vector<std::pair<int, double>>> var_rows_;
  std::vector<int> branch_order_;
  std::vector<std::int8_t> fixed_;
  std::vector<int> trail_;
  std::vector<int> queue_;
  double fixed_value_ = 0.0;
  double incumbent_value_ = 0.0;
  std::vector<std::uint8_t> incumbent_;
};

}  // namespace detail

inline Solution solve(const BinaryProgram& program) {
  detail::BnbSolver solver(program);
  return solver.run();
}

struct LexResult {
  SolveStatus status = SolveStatus::Infeasible;
  double first_bound = 0.0;   // optimum of the first-stage objective
  double second_value = 0.0;  // optimum of the second objective at that bound
  std::vector<std::uint8_t> assignment;
};

// Solves `first`, then re-optimizes `second_objective` with the first-stage
// objective pinned to its optimum (a <= constraint, per the two-step scheme).
inline LexResult solve_lexicographic(const BinaryProgram& first,
                                     const std::vector<double>& second_objective,
                                     Sense second_sense) {
  if (second_objective.size() != first.objective.size())
    throw MalformedProgramError("second objective length mismatch");
  LexResult out;
  const Solution s1 = solve(first);
  if (s1.status == SolveStatus::Infeasible) return out;
  out.first_bound = s1.value;

  BinaryProgram second = first;
  second.objective = second_objective;
  second.sense = second_sense;
  LinearRow pin;
  pin.relation = Relation::LessEq;
  if (first.sense == Sense::Minimize) {
    pin.coeffs = first.objective;
    pin.rhs = s1.value + 1e-7;
  } else {
    pin.coeffs.reserve(first.objective.size());
    for (double c : first.objective) pin.coeffs.push_back(-c);
    pin.rhs = -s1.value + 1e-7;
  }
  second.rows.push_back(std::move(pin));

  const Solution s2 = solve(second);
  out.status = s2.status;
  out.second_value = s2.value;
  out.assignment = s2.assignment;
  return out;
}

}  // namespace maas
