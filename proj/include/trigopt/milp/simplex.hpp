#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "trigopt/milp/model.hpp"

namespace trigopt {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
  LpStatus status = LpStatus::IterLimit;
  double objective = 0.0;
  std::vector<double> x;  // structural variables only
};

namespace detail {

/// Dense bounded-variable primal simplex with a phase-1 artificial basis.
/// Columns: [0, n) structural, [n, n+m) slacks, [n+m, n+2m) artificials.
class Simplex {
 public:
  Simplex(const MilpModel& model, const std::vector<double>& lb, const std::vector<double>& ub)
      : n_(static_cast<int>(model.vars.size())), m_(static_cast<int>(model.rows.size())) {
    a_.assign(static_cast<size_t>(m_) * static_cast<size_t>(n_), 0.0);
    b_.resize(static_cast<size_t>(m_));
    lo_.assign(static_cast<size_t>(n_ + 2 * m_), 0.0);
    up_.assign(static_cast<size_t>(n_ + 2 * m_), 0.0);
    cost_.assign(static_cast<size_t>(n_ + 2 * m_), 0.0);
    art_sign_.assign(static_cast<size_t>(m_), 1.0);
    for (int j = 0; j < n_; ++j) {
      lo_[static_cast<size_t>(j)] = lb[static_cast<size_t>(j)];
      up_[static_cast<size_t>(j)] = ub[static_cast<size_t>(j)];
    }
    for (int i = 0; i < m_; ++i) {
      const auto& r = model.rows[static_cast<size_t>(i)];
      for (const auto& [j, v] : r.coeffs) at(i, j) += v;
      b_[static_cast<size_t>(i)] = r.rhs;
      // slack bounds: row + s = b with s >= 0 (<=), s <= 0 (>=), s = 0 (=)
      const int s = n_ + i;
      if (r.sense == Sense::LessEqual) {
        lo_[static_cast<size_t>(s)] = 0.0;
        up_[static_cast<size_t>(s)] = kInf;
      } else if (r.sense == Sense::GreaterEqual) {
        lo_[static_cast<size_t>(s)] = -kInf;
        up_[static_cast<size_t>(s)] = 0.0;
      } else {
        lo_[static_cast<size_t>(s)] = 0.0;
        up_[static_cast<size_t>(s)] = 0.0;
      }
    }
    for (const auto& [j, v] : model.objective) cost_[static_cast<size_t>(j)] = v;
    obj_constant_ = model.objective_constant;
  }

  LpResult solve() {
    LpResult res;
    if (!init_basis()) {
      res.status = LpStatus::Infeasible;  // inconsistent fixed bounds
      return res;
    }
    // phase 1: minimize sum of artificials
    std::vector<double> real_cost = cost_;
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int i = 0; i < m_; ++i) cost_[static_cast<size_t>(n_ + m_ + i)] = 1.0;
    const LpStatus ph1 = iterate();
    if (ph1 == LpStatus::IterLimit) {
      res.status = ph1;
      return res;
    }
    if (phase_objective() > 1e-7) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    // fix artificials at zero and restore the real objective
    for (int i = 0; i < m_; ++i) {
      const size_t aj = static_cast<size_t>(n_ + m_ + i);
      lo_[aj] = up_[aj] = 0.0;
    }
    cost_ = real_cost;
    const LpStatus ph2 = iterate();
    res.status = ph2;
    if (ph2 == LpStatus::Optimal) {
      res.x = structural_values();
      res.objective = obj_constant_;
      for (int j = 0; j < n_; ++j)
        res.objective += cost_[static_cast<size_t>(j)] * res.x[static_cast<size_t>(j)];
    }
    return res;
  }

 private:
  double& at(int i, int j) { return a_[static_cast<size_t>(i) * static_cast<size_t>(n_) + j]; }
  double col(int i, int j) const {  // G[i][j] over the extended column space
    if (j < n_) return a_[static_cast<size_t>(i) * static_cast<size_t>(n_) + j];
    if (j < n_ + m_) return j - n_ == i ? 1.0 : 0.0;
    return j - n_ - m_ == i ? art_sign_[static_cast<size_t>(i)] : 0.0;
  }

  bool init_basis() {
    const int total = n_ + 2 * m_;
    val_.assign(static_cast<size_t>(total), 0.0);
    at_upper_.assign(static_cast<size_t>(total), false);
    in_basis_.assign(static_cast<size_t>(total), false);
    for (int j = 0; j < n_ + m_; ++j) {
      const size_t sj = static_cast<size_t>(j);
      if (lo_[sj] > up_[sj] + 1e-9) return false;
      if (std::isfinite(lo_[sj])) {
        val_[sj] = lo_[sj];
      } else if (std::isfinite(up_[sj])) {
        val_[sj] = up_[sj];
        at_upper_[sj] = true;
      } else {
        val_[sj] = 0.0;  // free
      }
    }
    // residuals define the artificial signs; artificial basis is feasible
    basis_.resize(static_cast<size_t>(m_));
    binv_.assign(static_cast<size_t>(m_) * static_cast<size_t>(m_), 0.0);
    xb_.resize(static_cast<size_t>(m_));
    for (int i = 0; i < m_; ++i) {
      double r = b_[static_cast<size_t>(i)];
      for (int j = 0; j < n_ + m_; ++j) r -= col(i, j) * val_[static_cast<size_t>(j)];
      art_sign_[static_cast<size_t>(i)] = r >= 0 ? 1.0 : -1.0;
      const int aj = n_ + m_ + i;
      lo_[static_cast<size_t>(aj)] = 0.0;
      up_[static_cast<size_t>(aj)] = kInf;
      basis_[static_cast<size_t>(i)] = aj;
      in_basis_[static_cast<size_t>(aj)] = true;
      binv_[static_cast<size_t>(i) * static_cast<size_t>(m_) + static_cast<size_t>(i)] =
          art_sign_[static_cast<size_t>(i)];
      xb_[static_cast<size_t>(i)] = std::abs(r);
      val_[static_cast<size_t>(aj)] = std::abs(r);
    }
    return true;
  }

  double phase_objective() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) {
      const int bj = basis_[static_cast<size_t>(i)];
      if (bj >= n_ + m_) s += xb_[static_cast<size_t>(i)];
    }
    return s;
  }

  std::vector<double> structural_values() const {
    std::vector<double> x(static_cast<size_t>(n_));
    for (int j = 0; j < n_; ++j) x[static_cast<size_t>(j)] = val_[static_cast<size_t>(j)];
    for (int i = 0; i < m_; ++i)
      if (basis_[static_cast<size_t>(i)] < n_)
        x[static_cast<size_t>(basis_[static_cast<size_t>(i)])] = xb_[static_cast<size_t>(i)];
    return x;
  }

  void compute_duals(std::vector<double>& y) const {
    y.assign(static_cast<size_t>(m_), 0.0);
    for (int k = 0; k < m_; ++k) {
      const double cb = cost_[static_cast<size_t>(basis_[static_cast<size_t>(k)])];
      if (cb == 0.0) continue;
      const double* row = binv_.data() + static_cast<size_t>(k) * static_cast<size_t>(m_);
      for (int i = 0; i < m_; ++i) y[static_cast<size_t>(i)] += cb * row[i];
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = cost_[static_cast<size_t>(j)];
    if (j < n_) {
      for (int i = 0; i < m_; ++i) {
        const double g = col(i, j);
        if (g != 0.0) d -= y[static_cast<size_t>(i)] * g;
      }
    } else if (j < n_ + m_) {
      d -= y[static_cast<size_t>(j - n_)];
    } else {
      d -= y[static_cast<size_t>(j - n_ - m_)] * art_sign_[static_cast<size_t>(j - n_ - m_)];
    }
    return d;
  }

  void ftran(int j, std::vector<double>& w) const {  // w = Binv * A_j
    w.assign(static_cast<size_t>(m_), 0.0);
    if (j >= n_) {
      const int i0 = j < n_ + m_ ? j - n_ : j - n_ - m_;
      const double s = j < n_ + m_ ? 1.0 : art_sign_[static_cast<size_t>(i0)];
      for (int k = 0; k < m_; ++k)
        w[static_cast<size_t>(k)] =
            s * binv_[static_cast<size_t>(k) * static_cast<size_t>(m_) + static_cast<size_t>(i0)];
      return;
    }
    for (int i = 0; i < m_; ++i) {
      const double g = col(i, j);
      if (g == 0.0) continue;
      for (int k = 0; k < m_; ++k)
        w[static_cast<size_t>(k)] +=
            g * binv_[static_cast<size_t>(k) * static_cast<size_t>(m_) + static_cast<size_t>(i)];
    }
  }

  void reinvert() {
    // rebuild Binv from the basis via Gauss-Jordan, then recompute xb
    const size_t mm = static_cast<size_t>(m_);
    std::vector<double> mat(mm * mm, 0.0), inv(mm * mm, 0.0);
    for (int k = 0; k < m_; ++k) {
      for (int i = 0; i < m_; ++i)
        mat[static_cast<size_t>(i) * mm + static_cast<size_t>(k)] =
            col(i, basis_[static_cast<size_t>(k)]);
      inv[static_cast<size_t>(k) * mm + static_cast<size_t>(k)] = 1.0;
    }
    // invert mat in place onto inv (partial pivoting); basis stays nonsingular
    std::vector<int> perm(mm);
    for (size_t i = 0; i < mm; ++i) perm[i] = static_cast<int>(i);
    for (size_t c = 0; c < mm; ++c) {
      size_t piv = c;
      for (size_t r = c + 1; r < mm; ++r)
        if (std::abs(mat[r * mm + c]) > std::abs(mat[piv * mm + c])) piv = r;
      if (piv != c) {
        for (size_t k = 0; k < mm; ++k) {
          std::swap(mat[c * mm + k], mat[piv * mm + k]);
          std::swap(inv[c * mm + k], inv[piv * mm + k]);
        }
      }
      const double p = mat[c * mm + c];
      if (std::abs(p) < 1e-12) continue;  // keep going; drift handled by caller
      const double ip = 1.0 / p;
      for (size_t k = 0; k < mm; ++k) {
        mat[c * mm + k] *= ip;
        inv[c * mm + k] *= ip;
      }
      for (size_t r = 0; r < mm; ++r) {
        if (r == c) continue;
        const double f = mat[r * mm + c];
        if (f == 0.0) continue;
        for (size_t k = 0; k < mm; ++k) {
          mat[r * mm + k] -= f * mat[c * mm + k];
          inv[r * mm + k] -= f * inv[c * mm + k];
        }
      }
    }
    // binv rows correspond to basis order: Binv = (B)^-1, B columns in basis order
    binv_ = inv;
    recompute_xb();
  }

  void recompute_xb() {
    std::vector<double> rhs = b_;
    for (int j = 0; j < n_ + 2 * m_; ++j) {
      if (in_basis_[static_cast<size_t>(j)]) continue;
      const double v = val_[static_cast<size_t>(j)];
      if (v == 0.0) continue;
      if (j < n_) {
        for (int i = 0; i < m_; ++i) rhs[static_cast<size_t>(i)] -= col(i, j) * v;
      } else if (j < n_ + m_) {
        rhs[static_cast<size_t>(j - n_)] -= v;
      } else {
        rhs[static_cast<size_t>(j - n_ - m_)] -= art_sign_[static_cast<size_t>(j - n_ - m_)] * v;
      }
    }
    for (int k = 0; k < m_; ++k) {
      double s = 0.0;
      const double* row = binv_.data() + static_cast<size_t>(k) * static_cast<size_t>(m_);
      for (int i = 0; i < m_; ++i) s += row[i] * rhs[static_cast<size_t>(i)];
      xb_[static_cast<size_t>(k)] = s;
    }
  }

  LpStatus iterate() {
    const int total = n_ + 2 * m_;
    const int max_iter = 2000 + 200 * total;
    std::vector<double> y, w;
    int stall = 0;
    bool bland = false;
    double last_obj = kInf;
    for (int it = 0; it < max_iter; ++it) {
      if (it > 0 && it % 256 == 0) reinvert();
      compute_duals(y);
      // entering variable
      int enter = -1;
      double enter_dir = 1.0, best = bland ? 0.0 : 1e-9;
      for (int j = 0; j < total; ++j) {
        const size_t sj = static_cast<size_t>(j);
        if (in_basis_[sj]) continue;
        if (up_[sj] - lo_[sj] <= 1e-13 && std::isfinite(lo_[sj])) continue;  // fixed
        const double d = reduced_cost(j, y);
        const bool at_lo = !at_upper_[sj];
        const bool free_var = !std::isfinite(lo_[sj]) && !std::isfinite(up_[sj]);
        double viol = 0.0, dir = 1.0;
        if (free_var) {
          viol = std::abs(d);
          dir = d < 0 ? 1.0 : -1.0;
        } else if (at_lo && d < 0) {
          viol = -d;
          dir = 1.0;
        } else if (!at_lo && d > 0) {
          viol = d;
          dir = -1.0;
        }
        if (viol > 1e-9) {
          if (bland) {
            enter = j;
            enter_dir = dir;
            break;
          }
          if (viol > best) {
            best = viol;
            enter = j;
            enter_dir = dir;
          }
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      ftran(enter, w);
      // ratio test: x_enter moves by enter_dir * theta
      double theta = kInf;
      int leave = -1;        // basis position
      double leave_to = 0.0; // bound the leaving variable lands on
      const size_t se = static_cast<size_t>(enter);
      const double self_range = up_[se] - lo_[se];
      if (std::isfinite(self_range)) theta = self_range;
      for (int k = 0; k < m_; ++k) {
        const double g = -enter_dir * w[static_cast<size_t>(k)];
        if (std::abs(g) < 1e-11) continue;
        const size_t bj = static_cast<size_t>(basis_[static_cast<size_t>(k)]);
        const double xk = xb_[static_cast<size_t>(k)];
        double cap;
        double to;
        if (g > 0) {
          if (!std::isfinite(up_[bj])) continue;
          cap = (up_[bj] - xk) / g;
          to = up_[bj];
        } else {
          if (!std::isfinite(lo_[bj])) continue;
          cap = (lo_[bj] - xk) / g;
          to = lo_[bj];
        }
        if (cap < 0) cap = 0.0;  // tolerate tiny infeasibility of the basis
        if (cap < theta - 1e-12 || (bland && cap <= theta && leave >= 0 &&
                                    basis_[static_cast<size_t>(k)] <
                                        basis_[static_cast<size_t>(leave)])) {
          theta = cap;
          leave = k;
          leave_to = to;
        }
      }
      if (!std::isfinite(theta)) return LpStatus::Unbounded;
      if (theta < 0) theta = 0;

      // apply step
      for (int k = 0; k < m_; ++k)
        xb_[static_cast<size_t>(k)] -= enter_dir * theta * w[static_cast<size_t>(k)];
      if (leave < 0) {
        // bound flip
        val_[se] = at_upper_[se] ? lo_[se] : up_[se];
        at_upper_[se] = !at_upper_[se];
      } else {
        const int out = basis_[static_cast<size_t>(leave)];
        const size_t so = static_cast<size_t>(out);
        // entering value
        double enter_val;
        if (!std::isfinite(lo_[se]) && !std::isfinite(up_[se]))
          enter_val = val_[se] + enter_dir * theta;
        else
          enter_val = (at_upper_[se] ? up_[se] : lo_[se]) + enter_dir * theta;
        val_[so] = leave_to;
        at_upper_[so] = std::isfinite(up_[so]) && leave_to == up_[so];
        in_basis_[so] = false;
        in_basis_[se] = true;
        basis_[static_cast<size_t>(leave)] = enter;
        xb_[static_cast<size_t>(leave)] = enter_val;
        // rank-1 update of Binv
        const double piv = w[static_cast<size_t>(leave)];
        if (std::abs(piv) < 1e-12) {
          reinvert();
        } else {
          double* prow = binv_.data() + static_cast<size_t>(leave) * static_cast<size_t>(m_);
          const double ip = 1.0 / piv;
          for (int i = 0; i < m_; ++i) prow[i] *= ip;
          for (int k = 0; k < m_; ++k) {
            if (k == leave) continue;
            const double f = w[static_cast<size_t>(k)];
            if (f == 0.0) continue;
            double* row = binv_.data() + static_cast<size_t>(k) * static_cast<size_t>(m_);
            for (int i = 0; i < m_; ++i) row[i] -= f * prow[i];
          }
        }
      }

      // stall detection -> Bland's rule
      double obj = 0.0;
      for (int k = 0; k < m_; ++k)
        obj += cost_[static_cast<size_t>(basis_[static_cast<size_t>(k)])] *
               xb_[static_cast<size_t>(k)];
      for (int j = 0; j < total; ++j)
        if (!in_basis_[static_cast<size_t>(j)])
          obj += cost_[static_cast<size_t>(j)] * val_[static_cast<size_t>(j)];
      if (obj < last_obj - 1e-12) {
        last_obj = obj;
        stall = 0;
      } else if (++stall > 2 * (m_ + n_) + 200) {
        bland = true;
      }
    }
    return LpStatus::IterLimit;
  }

  int n_, m_;
  std::vector<double> a_, b_, lo_, up_, cost_, art_sign_;
  double obj_constant_ = 0.0;
  std::vector<int> basis_;
  std::vector<bool> in_basis_, at_upper_;
  std::vector<double> val_, xb_, binv_;
};

}  // namespace detail

/// Solves the LP relaxation of the model with overriding bounds (integrality
/// ignored). Dense bounded-variable two-phase primal simplex.
inline LpResult solve_lp(const MilpModel& model, const std::vector<double>& lb,
                         const std::vector<double>& ub) {
  detail::Simplex s(model, lb, ub);
  return s.solve();
}

inline LpResult solve_lp(const MilpModel& model) {
  std::vector<double> lb, ub;
  lb.reserve(model.vars.size());
  ub.reserve(model.vars.size());
  for (const auto& v : model.vars) {
    lb.push_back(v.lower);
    ub.push_back(v.upper);
  }
  return solve_lp(model, lb, ub);
}

}  // namespace trigopt
