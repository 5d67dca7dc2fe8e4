#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <vector>

#include "trigopt/milp/model.hpp"
#include "trigopt/milp/simplex.hpp"

namespace trigopt {

struct BuiltinOptions {
  double time_limit_seconds = 3600.0;
  double int_tol = 1e-6;
  double feas_tol = 1e-6;
  long max_nodes = 50'000'000;
};

namespace detail {

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& m, const BuiltinOptions& opt) : m_(m), opt_(opt) {
    lb_.reserve(m.vars.size());
    ub_.reserve(m.vars.size());
    for (const auto& v : m.vars) {
      lb_.push_back(v.lower);
      ub_.push_back(v.upper);
    }
    // vars covered by a block are branched via the block, not individually
    in_block_.assign(m.vars.size(), false);
    for (const auto& b : m.blocks)
      for (int u : b.u_ids) in_block_[static_cast<size_t>(u)] = true;
    start_ = std::chrono::steady_clock::now();
  }

  MilpSolution run() {
    MilpSolution sol;
    seed_incumbent();
    dfs(0);
    sol.solve_seconds = elapsed();
    sol.nodes = nodes_;
    if (lp_failed_) {
      sol.status = MilpStatus::Error;
      sol.message = "LP subproblem did not converge";
      return sol;
    }
    if (timed_out_) {
      sol.status = MilpStatus::TimeLimit;
      sol.best_bound = frontier_bound();
      if (have_incumbent_) {
        sol.objective = best_obj_;
        sol.values = best_x_;
      }
      return sol;
    }
    if (!have_incumbent_) {
      sol.status = MilpStatus::Infeasible;
      return sol;
    }
    sol.status = MilpStatus::Optimal;
    sol.objective = best_obj_;
    sol.best_bound = best_obj_;
    sol.values = best_x_;
    return sol;
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  /// Solves the LP with the integer structure pinned to the warm-start values
  /// and keeps the result as the initial incumbent when feasible. This only
  /// prunes the search; the returned optimum is unaffected.
  void seed_incumbent() {
    bool usable = !m_.blocks.empty() || !m_.vars.empty();
    for (size_t j = 0; j < m_.vars.size(); ++j) {
      if (m_.vars[j].integrality == Integrality::Continuous || in_block_[j]) continue;
      if (!m_.vars[j].warm_start) {
        usable = false;
        break;
      }
    }
    if (usable)
      for (const auto& b : m_.blocks)
        if (b.position_var < 0 ||
            !m_.vars[static_cast<size_t>(b.position_var)].warm_start) {
          usable = false;
          break;
        }
    if (!usable) return;

    std::vector<double> lb = lb_, ub = ub_;
    auto fix = [&](size_t j, double v) {
      if (v < lb[j] - 1e-9 || v > ub[j] + 1e-9) return false;
      lb[j] = ub[j] = v;
      return true;
    };
    for (size_t j = 0; j < m_.vars.size(); ++j) {
      if (m_.vars[j].integrality == Integrality::Continuous || in_block_[j]) continue;
      if (!fix(j, std::round(*m_.vars[j].warm_start))) return;
    }
    for (const auto& b : m_.blocks) {
      const double x = *m_.vars[static_cast<size_t>(b.position_var)].warm_start;
      for (size_t k = 0; k < b.u_ids.size(); ++k) {
        const double v = x > b.cuts[k] ? 1.0 : 0.0;
        if (!fix(static_cast<size_t>(b.u_ids[k]), v)) return;
      }
    }
    const LpResult lp = solve_lp(m_, lb, ub);
    if (lp.status != LpStatus::Optimal) return;
    if (max_violation(m_, lp.x) > opt_.feas_tol * 10 + 1e-9) return;
    // all integers are fixed, so the point is integral by construction
    have_incumbent_ = true;
    best_obj_ = lp.objective;
    best_x_ = lp.x;
  }

  double frontier_bound() const {
    double b = have_incumbent_ ? best_obj_ : kInf;
    if (!open_bounds_.empty()) b = std::min(b, *open_bounds_.begin());
    return b;
  }

  // fractional integer (non-block) variable, preferring branch priority then
  // largest fractionality
  int pick_int_var(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = opt_.int_tol;
    int best_prio = std::numeric_limits<int>::min();
    for (size_t j = 0; j < m_.vars.size(); ++j) {
      if (m_.vars[j].integrality == Integrality::Continuous || in_block_[j]) continue;
      if (ub_[j] - lb_[j] < 0.5) continue;
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f <= opt_.int_tol) continue;
      const int prio = m_.vars[j].branch_priority;
      const double score = std::min(f, 1.0 - f);
      if (prio > best_prio || (prio == best_prio && score > best_frac)) {
        best_prio = prio;
        best_frac = score;
        best = static_cast<int>(j);
      }
    }
    return best;
  }

  int pick_block(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = opt_.int_tol;
    for (size_t b = 0; b < m_.blocks.size(); ++b) {
      for (int u : m_.blocks[b].u_ids) {
        const double v = x[static_cast<size_t>(u)];
        const double f = std::min(v - std::floor(v), std::ceil(v) - v);
        if (f > best_frac) {
          best_frac = f;
          best = static_cast<int>(b);
        }
      }
    }
    return best;
  }

  void dfs(int depth) {
    if (timed_out_ || lp_failed_) return;
    if (elapsed() > opt_.time_limit_seconds) {
      timed_out_ = true;
      return;
    }
    if (++nodes_ > opt_.max_nodes) {
      timed_out_ = true;
      return;
    }
    const LpResult lp = solve_lp(m_, lb_, ub_);
    if (lp.status == LpStatus::Infeasible) return;
    if (lp.status != LpStatus::Optimal) {
      lp_failed_ = true;
      return;
    }
    if (have_incumbent_ && lp.objective >= best_obj_ - 1e-9) return;

    const int jint = pick_int_var(lp.x);
    const int blk = jint >= 0 ? -1 : pick_block(lp.x);
    if (jint < 0 && blk < 0) {
      // integral: candidate incumbent
      if (max_violation(m_, lp.x) <= opt_.feas_tol * 10 + 1e-9) {
        if (!have_incumbent_ || lp.objective < best_obj_) {
          have_incumbent_ = true;
          best_obj_ = lp.objective;
          best_x_ = lp.x;
        }
      }
      return;
    }

    if (jint >= 0) {
      branch_integer(static_cast<size_t>(jint), lp, depth);
    } else {
      branch_block(static_cast<size_t>(blk), lp, depth);
    }
  }

  void branch_integer(size_t j, const LpResult& lp, int depth) {
    const double xv = lp.x[j];
    const double save_lo = lb_[j], save_hi = ub_[j];
    const long range = static_cast<long>(save_hi - save_lo);
    if (range <= 8) {
      // enumerate the values, nearest to the LP value first (warm start, when
      // present, is tried first; it only reorders the search)
      std::vector<double> vals;
      for (double v = save_lo; v <= save_hi + 0.5; v += 1.0) vals.push_back(v);
      std::stable_sort(vals.begin(), vals.end(), [&](double a, double b) {
        return std::abs(a - xv) < std::abs(b - xv);
      });
      if (m_.vars[j].warm_start) {
        const double wv = std::round(*m_.vars[j].warm_start);
        auto it = std::find(vals.begin(), vals.end(), wv);
        if (it != vals.end()) std::rotate(vals.begin(), it, it + 1);
      }
      for (size_t c = 1; c < vals.size(); ++c) open_bounds_.insert(lp.objective);
      for (size_t c = 0; c < vals.size(); ++c) {
        if (c > 0) open_bounds_.erase(open_bounds_.find(lp.objective));
        lb_[j] = ub_[j] = vals[c];
        dfs(depth + 1);
        if (timed_out_ || lp_failed_) break;
      }
    } else {
      const double fl = std::floor(xv);
      const bool down_first = xv - fl <= 0.5;
      open_bounds_.insert(lp.objective);
      for (int c = 0; c < 2; ++c) {
        if (c == 1) open_bounds_.erase(open_bounds_.find(lp.objective));
        const bool down = (c == 0) == down_first;
        lb_[j] = save_lo;
        ub_[j] = save_hi;
        if (down)
          ub_[j] = fl;
        else
          lb_[j] = fl + 1.0;
        dfs(depth + 1);
        if (timed_out_ || lp_failed_) break;
      }
    }
    lb_[j] = save_lo;
    ub_[j] = save_hi;
  }

  void branch_block(size_t b, const LpResult& lp, int depth) {
    const auto& blk = m_.blocks[b];
    const int mcells = blk.num_cells;
    std::vector<std::pair<double, double>> save;
    save.reserve(blk.u_ids.size());
    for (int u : blk.u_ids)
      save.emplace_back(lb_[static_cast<size_t>(u)], ub_[static_cast<size_t>(u)]);

    // fractional cell position from the staircase sum
    double pos = 1.0;
    for (int u : blk.u_ids) pos += lp.x[static_cast<size_t>(u)];
    std::vector<int> order;
    for (int c = 1; c <= mcells; ++c) order.push_back(c);
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
      return std::abs(a - pos) < std::abs(c - pos);
    });

    for (size_t i = 1; i < order.size(); ++i) open_bounds_.insert(lp.objective);
    for (size_t i = 0; i < order.size(); ++i) {
      if (i > 0) open_bounds_.erase(open_bounds_.find(lp.objective));
      const int cell = order[i];
      bool consistent = true;
      for (int k = 0; k < mcells - 1; ++k) {
        const size_t u = static_cast<size_t>(blk.u_ids[static_cast<size_t>(k)]);
        const double fix = k < cell - 1 ? 1.0 : 0.0;
        if (fix < save[static_cast<size_t>(k)].first - 0.5 ||
            fix > save[static_cast<size_t>(k)].second + 0.5) {
          consistent = false;  // earlier branching already fixed u differently
          break;
        }
        lb_[u] = ub_[u] = fix;
      }
      if (consistent) dfs(depth + 1);
      for (size_t k = 0; k < save.size(); ++k) {
        const size_t u = static_cast<size_t>(blk.u_ids[k]);
        lb_[u] = save[k].first;
        ub_[u] = save[k].second;
      }
      if (timed_out_ || lp_failed_) break;
    }
  }

  const MilpModel& m_;
  BuiltinOptions opt_;
  std::vector<double> lb_, ub_;
  std::vector<bool> in_block_;
  std::chrono::steady_clock::time_point start_;
  long nodes_ = 0;
  bool have_incumbent_ = false, timed_out_ = false, lp_failed_ = false;
  double best_obj_ = kInf;
  std::vector<double> best_x_;
  std::multiset<double> open_bounds_;
};

}  // namespace detail

/// Exact depth-first branch-and-bound over per-block cell choices and integer
/// values, with LP bounding. Deterministic.
inline MilpSolution solve_milp_builtin(const MilpModel& m, const BuiltinOptions& opt = {}) {
  detail::BranchAndBound bb(m, opt);
  return bb.run();
}

}  // namespace trigopt
