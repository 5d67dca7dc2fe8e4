#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "trigopt/model.hpp"

namespace trigopt {

namespace detail {

struct Interval {
  double lo, hi;
  bool empty(double tol = 1e-9) const { return lo > hi + tol; }
  bool contains_zero() const { return lo <= 0.0 && hi >= 0.0; }
};

inline Interval imul(Interval a, Interval b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  double lo = c[0], hi = c[0];
  for (double v : c) {
    if (std::isnan(v)) continue;  // 0 * inf
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

// a / b over corner cases; identity interval when b straddles zero (division
// would be unbounded, which never tightens anything).
inline Interval idiv(Interval a, Interval b) {
  if (b.contains_zero()) return {-kInf, kInf};
  const double c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return {std::min({c[0], c[1], c[2], c[3]}), std::max({c[0], c[1], c[2], c[3]})};
}

/// Exact range of amplitude*sin(frequency*x + phase) over [lo, hi]:
/// endpoint values plus interior stationary points of the argument.
inline Interval sinusoid_range(double amplitude, double frequency, double phase, double lo,
                               double hi, bool cosine) {
  const double shift = cosine ? std::numbers::pi / 2.0 : 0.0;
  auto eval = [&](double x) { return amplitude * std::sin(frequency * x + phase + shift); };
  double mn = std::min(eval(lo), eval(hi));
  double mx = std::max(eval(lo), eval(hi));
  // stationary points: frequency*x + phase + shift = pi/2 + k*pi
  const double w = frequency, p = phase + shift;
  const double t_lo = std::min(w * lo, w * hi) + p, t_hi = std::max(w * lo, w * hi) + p;
  const double pi = std::numbers::pi;
  const long k0 = static_cast<long>(std::ceil((t_lo - pi / 2) / pi - 1e-12));
  const long k1 = static_cast<long>(std::floor((t_hi - pi / 2) / pi + 1e-12));
  for (long k = k0; k <= k1; ++k) {
    const double v = amplitude * std::sin(pi / 2 + static_cast<double>(k) * pi);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  return {mn, mx};
}

}  // namespace detail

struct FbbtResult {
  FactoredModel model;
  bool infeasible = false;
  std::string infeasible_var;
  int rounds_used = 0;
  bool reached_fixpoint = false;
};

/// Feasibility-based bounds tightening: interval propagation through the
/// linear rows, forward range images of trigonometric terms, and bilinear
/// interval arithmetic (product and corner-case division). Inverse
/// propagation through trig terms is not performed (multivalued).
/// Conservative: no feasible point of the model is cut off.
inline FbbtResult fbbt_tighten(const FactoredModel& input, int max_rounds = 10) {
  FbbtResult res;
  res.model = input;
  auto& vars = res.model.variables;
  constexpr double kChangeTol = 1e-12;
  constexpr double kEmptyTol = 1e-9;

  auto dom = [&](VarId v) -> detail::Interval {
    return {vars[static_cast<size_t>(v)].lower, vars[static_cast<size_t>(v)].upper};
  };
  bool changed_any = false;
  auto apply = [&](VarId v, detail::Interval iv) -> bool {
    auto& d = vars[static_cast<size_t>(v)];
    double lo = std::max(d.lower, iv.lo), hi = std::min(d.upper, iv.hi);
    if (d.integrality != Integrality::Continuous) {
      if (std::isfinite(lo)) lo = std::ceil(lo - 1e-9);
      if (std::isfinite(hi)) hi = std::floor(hi + 1e-9);
    }
    if (lo > hi + kEmptyTol) {
      res.infeasible = true;
      if (res.infeasible_var.empty()) res.infeasible_var = d.name;
      return false;
    }
    // collapse numerically-empty rounding artifacts
    if (lo > hi) hi = lo;
    if (lo > d.lower + kChangeTol || hi < d.upper - kChangeTol) changed_any = true;
    d.lower = lo;
    d.upper = hi;
    return true;
  };

  for (int round = 0; round < max_rounds && !res.infeasible; ++round) {
    changed_any = false;
    res.rounds_used = round + 1;

    for (const auto& c : res.model.constraints) {
      // row as sum(a_j x_j) in [row_lo, row_hi]
      double row_lo = c.sense == Sense::LessEqual ? -kInf : c.rhs;
      double row_hi = c.sense == Sense::GreaterEqual ? kInf : c.rhs;
      for (const auto& [k, ak] : c.coeffs) {
        if (ak == 0.0) continue;
        // residual activity of the other terms
        double act_lo = 0.0, act_hi = 0.0;
        for (const auto& [j, aj] : c.coeffs) {
          if (j == k || aj == 0.0) continue;
          const auto iv = detail::imul({aj, aj}, dom(j));
          act_lo += iv.lo;
          act_hi += iv.hi;
        }
        // a_k x_k in [row_lo - act_hi, row_hi - act_lo]
        const detail::Interval target{row_lo - act_hi, row_hi - act_lo};
        detail::Interval xk;
        if (ak > 0)
          xk = {target.lo / ak, target.hi / ak};
        else
          xk = {target.hi / ak, target.lo / ak};
        if (std::isnan(xk.lo)) xk.lo = -kInf;
        if (std::isnan(xk.hi)) xk.hi = kInf;
        if (!apply(k, xk)) break;
      }
      if (res.infeasible) break;
    }
    if (res.infeasible) break;

    for (const auto& t : res.model.trig_terms) {
      const auto xd = dom(t.input);
      if (!std::isfinite(xd.lo) || !std::isfinite(xd.hi)) continue;
      detail::Interval range;
      if (t.kind == TrigKind::User) continue;  // no sound range oracle for user curves
      range = detail::sinusoid_range(t.amplitude, t.frequency, t.phase, xd.lo, xd.hi,
                                     t.kind == TrigKind::Cos);
      if (!apply(t.output, range)) break;
    }
    if (res.infeasible) break;

    for (const auto& b : res.model.bilinear_terms) {
      if (!apply(b.output, detail::imul(dom(b.left), dom(b.right)))) break;
      if (!apply(b.left, detail::idiv(dom(b.output), dom(b.right)))) break;
      if (!apply(b.right, detail::idiv(dom(b.output), dom(b.left)))) break;
    }

    if (!changed_any) {
      res.reached_fixpoint = true;
      break;
    }
  }
  return res;
}

}  // namespace trigopt
