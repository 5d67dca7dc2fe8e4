#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trigopt/model.hpp"

namespace trigopt {

/// Folding of a periodic term's argument onto a width-T principal domain:
/// hat = x - alpha*T with an integer offset alpha.
struct PrincipalReformulation {
  VarId original_var = -1;
  VarId hat_var = -1;
  VarId alpha_var = -1;
  double period = 0.0;
  double hat_lo = 0.0, hat_hi = 0.0;
  long alpha_lo = 0, alpha_hi = 0;
  int mapping_row = -1;             // index into FactoredModel::constraints
  std::vector<int> term_indices;    // trig terms re-pointed to hat_var
};

/// Integer bound row on alpha2 - alpha1 implied by a bounded linking
/// constraint between two folded angles.
struct AlphaLink {
  VarId alpha1 = -1, alpha2 = -1;
  long lower = 0, upper = 0;
  bool has_lower = true, has_upper = true;
};

namespace detail {

inline long floor_tol(double v) { return static_cast<long>(std::floor(v + 1e-9)); }
inline long ceil_tol(double v) { return static_cast<long>(std::ceil(v - 1e-9)); }

}  // namespace detail

/// Offset range needed to cover [orig] by T-shifted copies of [principal],
/// clamped to offsets whose shifted window actually intersects the original
/// domain (the shift case where the principal domain is not contained).
inline std::pair<long, long> alpha_bounds(double orig_lo, double orig_hi, double hat_lo,
                                          double hat_hi, double period) {
  if (std::abs((hat_hi - hat_lo) - period) > 1e-9)
    throw std::invalid_argument("alpha_bounds: principal width must equal the period");
  long lo = detail::floor_tol((orig_lo - hat_lo) / period);
  long hi = detail::ceil_tol((orig_hi - hat_hi) / period);
  lo = std::max(lo, detail::ceil_tol((orig_lo - hat_hi) / period));
  hi = std::min(hi, detail::floor_tol((orig_hi - hat_lo) / period));
  if (lo > hi) throw std::invalid_argument("alpha_bounds: empty offset range");
  return {lo, hi};
}

/// Rewrites every sinusoid on `var` (all must share one period) onto the
/// principal domain: adds hat and alpha variables and the mapping row
/// hat = x - alpha*T, and re-points the terms' input to hat.
inline PrincipalReformulation reformulate_periodic_var(FactoredModel& m, VarId var, double hat_lo,
                                                       double hat_hi) {
  std::vector<int> terms;
  double period = 0.0;
  for (size_t i = 0; i < m.trig_terms.size(); ++i) {
    const auto& t = m.trig_terms[i];
    if (t.input != var) continue;
    const double T = t.period();
    if (T <= 0.0) throw std::invalid_argument("reformulate: term is not periodic");
    if (period == 0.0) period = T;
    if (std::abs(period - T) > 1e-9)
      throw std::invalid_argument("reformulate: terms on one variable differ in period");
    terms.push_back(static_cast<int>(i));
  }
  if (terms.empty()) throw std::invalid_argument("reformulate: no trig terms on variable");
  if (std::abs((hat_hi - hat_lo) - period) > 1e-9)
    throw std::invalid_argument("reformulate: principal width must equal the period");

  const VarDomain d = m.variables[static_cast<size_t>(var)];  // copy: add_variable reallocates
  PrincipalReformulation ref;
  ref.original_var = var;
  ref.period = period;
  ref.hat_lo = hat_lo;
  ref.hat_hi = hat_hi;
  std::tie(ref.alpha_lo, ref.alpha_hi) = alpha_bounds(d.lower, d.upper, hat_lo, hat_hi, period);
  ref.hat_var = m.add_variable("hat_" + d.name, hat_lo, hat_hi);
  ref.alpha_var =
      m.add_variable("alpha_" + d.name, static_cast<double>(ref.alpha_lo),
                     static_cast<double>(ref.alpha_hi), Integrality::Integer);
  LinearConstraint map;
  map.name = "fold_" + d.name;
  map.coeffs = {{ref.hat_var, 1.0}, {var, -1.0}, {ref.alpha_var, period}};
  map.sense = Sense::Equal;
  map.rhs = 0.0;
  m.constraints.push_back(std::move(map));
  ref.mapping_row = static_cast<int>(m.constraints.size()) - 1;
  for (int ti : terms) m.trig_terms[static_cast<size_t>(ti)].input = ref.hat_var;
  ref.term_indices = terms;
  return ref;
}

/// Spec-level convenience: reformulates the variable feeding one term.
inline PrincipalReformulation reformulate_periodic_term(FactoredModel& m, int term_index,
                                                        double hat_lo, double hat_hi) {
  return reformulate_periodic_var(m, m.trig_terms[static_cast<size_t>(term_index)].input, hat_lo,
                                  hat_hi);
}

/// Link of Eq-form theta2 = h(theta1) with h in [K1, K2]. Requires nested
/// original domains (I1 inside I2) and both reformulations on one principal
/// domain; a K bound outside theta2's domain drops that side.
inline std::optional<AlphaLink> link_alphas(const FactoredModel& m,
                                            const PrincipalReformulation& r1,
                                            const PrincipalReformulation& r2, double K1,
                                            double K2) {
  if (std::abs(r1.period - r2.period) > 1e-9 || std::abs(r1.hat_lo - r2.hat_lo) > 1e-9 ||
      std::abs(r1.hat_hi - r2.hat_hi) > 1e-9)
    return std::nullopt;
  const auto& d1 = m.variables[static_cast<size_t>(r1.original_var)];
  const auto& d2 = m.variables[static_cast<size_t>(r2.original_var)];
  if (d1.lower < d2.lower - 1e-9 || d1.upper > d2.upper + 1e-9) return std::nullopt;
  const double T = r1.period;
  AlphaLink link;
  link.alpha1 = r1.alpha_var;
  link.alpha2 = r2.alpha_var;
  link.has_upper = K2 <= d2.upper + 1e-9;
  link.has_lower = K1 >= d2.lower - 1e-9;
  if (link.has_upper) {
    const double gamma_u = K2 - d1.upper;
    link.upper = detail::ceil_tol(gamma_u / T);
  }
  if (link.has_lower) {
    const double gamma_l = d1.lower - K1;
    link.lower = -detail::ceil_tol(gamma_l / T);
  }
  if (!link.has_lower && !link.has_upper) return std::nullopt;
  return link;
}

/// Appends the alpha-link rows to the model.
inline void emit_alpha_link(FactoredModel& m, const AlphaLink& link) {
  const std::string base = "alink_" + m.variables[static_cast<size_t>(link.alpha1)].name + "_" +
                           m.variables[static_cast<size_t>(link.alpha2)].name;
  if (link.has_upper) {
    LinearConstraint c;
    c.name = base + "_u";
    c.coeffs = {{link.alpha2, 1.0}, {link.alpha1, -1.0}};
    c.sense = Sense::LessEqual;
    c.rhs = static_cast<double>(link.upper);
    m.constraints.push_back(std::move(c));
  }
  if (link.has_lower) {
    LinearConstraint c;
    c.name = base + "_l";
    c.coeffs = {{link.alpha2, 1.0}, {link.alpha1, -1.0}};
    c.sense = Sense::GreaterEqual;
    c.rhs = static_cast<double>(link.lower);
    m.constraints.push_back(std::move(c));
  }
}

/// Orders the alpha variables of sequentially linked reformulations along the
/// link chains (roots first), appending unlinked ones in declaration order.
/// Returns the ordered alpha var ids; `chained` reports whether each returned
/// alpha was part of a chain.
inline std::vector<VarId> branching_order(const std::vector<PrincipalReformulation>& refs,
                                          const std::vector<AlphaLink>& links,
                                          std::vector<bool>* chained = nullptr) {
  std::vector<VarId> order;
  std::vector<bool> used(refs.size(), false);
  auto index_of_alpha = [&](VarId a) {
    for (size_t i = 0; i < refs.size(); ++i)
      if (refs[i].alpha_var == a) return static_cast<int>(i);
    return -1;
  };
  std::vector<int> next(refs.size(), -1), indeg(refs.size(), 0);
  for (const auto& l : links) {
    const int a = index_of_alpha(l.alpha1), b = index_of_alpha(l.alpha2);
    if (a < 0 || b < 0) continue;
    next[static_cast<size_t>(a)] = b;
    indeg[static_cast<size_t>(b)]++;
  }
  std::vector<bool> in_chain(refs.size(), false);
  for (const auto& l : links) {
    const int a = index_of_alpha(l.alpha1), b = index_of_alpha(l.alpha2);
    if (a >= 0) in_chain[static_cast<size_t>(a)] = true;
    if (b >= 0) in_chain[static_cast<size_t>(b)] = true;
  }
  if (chained) chained->clear();
  for (size_t i = 0; i < refs.size(); ++i) {
    if (indeg[i] != 0 || !in_chain[i]) continue;
    int cur = static_cast<int>(i);
    while (cur >= 0 && !used[static_cast<size_t>(cur)]) {
      used[static_cast<size_t>(cur)] = true;
      order.push_back(refs[static_cast<size_t>(cur)].alpha_var);
      if (chained) chained->push_back(true);
      cur = next[static_cast<size_t>(cur)];
    }
  }
  for (size_t i = 0; i < refs.size(); ++i) {
    if (used[i]) continue;
    order.push_back(refs[i].alpha_var);
    if (chained) chained->push_back(in_chain[i]);
  }
  return order;
}

}  // namespace trigopt
