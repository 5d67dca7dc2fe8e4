#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "trigopt/assemble.hpp"
#include "trigopt/fbbt.hpp"
#include "trigopt/milp/solve.hpp"
#include "trigopt/model.hpp"
#include "trigopt/principal_domain.hpp"
#include "trigopt/refinement.hpp"

namespace trigopt {

struct SolveConfig {
  double gap_tolerance = 0.01;
  double time_limit_seconds = 3600.0;
  long max_iterations = 10000;
  RefinementConfig refinement;
  StrategyConfig strategy;
  bool principal_domain = true;
  double principal_lo = 0.0;  // default window [0, 2pi) scaled by each period
  std::map<std::string, std::pair<double, double>> principal_overrides;
  SolverBackend backend;
  int fbbt_rounds = 10;
  bool warm_start = true;
};

struct IterationRecord {
  int iteration = 0;
  double lower_bound = -kInf;
  double upper_bound = kInf;
  double rel_gap = kInf;
  long binaries_added = 0;
  double wall_seconds = 0.0;
};

enum class SolveStatus { Optimal, TimeLimit, IterationLimit, NoRefinement, Infeasible, Error };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NoRefinement: return "no_refinement";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Error: return "error";
  }
  return "?";
}

/// Feasible-point callback: given the (reformulated) model and the relaxation
/// solution, return an upper bound and, optionally, warm-start values for the
/// model variables (empty vector = no warm start).
using UpperBoundHeuristic = std::function<std::optional<std::pair<double, std::vector<double>>>(
    const FactoredModel&, const std::vector<double>&)>;

struct GlobalResult {
  SolveStatus status = SolveStatus::Error;
  double lower_bound = -kInf;
  double upper_bound = kInf;
  std::vector<double> best_values;  // over final_model's variables
  std::vector<IterationRecord> log;
  std::string message;
  FactoredModel final_model;  // tightened + reformulated model the loop ran on
  std::vector<PrincipalReformulation> reformulations;
  int iterations = 0;
  long binaries_added = 0;
  double wall_seconds = 0.0;
};

/// (ub - lb) / max(|ub|, 1e-9); +inf while no upper bound exists.
inline double relative_gap(double lb, double ub) {
  if (ub == kInf) return kInf;
  if (lb > ub + 1e-9) throw std::logic_error("relative_gap: bound crossing (lb > ub)");
  const double num = std::max(0.0, ub - lb);
  return num / std::max(std::abs(ub), 1e-9);
}

namespace detail {

struct PrincipalPlan {
  std::vector<PrincipalReformulation> refs;
  std::vector<AlphaLink> links;
};

/// Folds wide periodic arguments onto principal domains and adds alpha-link
/// rows derived from two-angle linear rows with bounded remainders.
inline PrincipalPlan apply_principal_domains(FactoredModel& m, const SolveConfig& cfg) {
  std::vector<PrincipalReformulation> refs;
  std::vector<VarId> inputs;
  for (const auto& t : m.trig_terms)
    if (std::find(inputs.begin(), inputs.end(), t.input) == inputs.end())
      inputs.push_back(t.input);
  for (VarId v : inputs) {
    double period = 0.0;
    bool uniform_period = true;
    for (const auto& t : m.trig_terms) {
      if (t.input != v) continue;
      const double T = t.period();
      if (T <= 0.0) uniform_period = false;
      if (period == 0.0) period = T;
      if (std::abs(period - T) > 1e-9) uniform_period = false;
    }
    if (!uniform_period || period <= 0.0) continue;
    const auto& dom = m.variables[static_cast<size_t>(v)];
    if (!dom.bounded() || dom.width() <= period + 1e-9) continue;  // nothing to gain
    double lo = cfg.principal_lo, hi = cfg.principal_lo + period;
    const auto it = cfg.principal_overrides.find(dom.name);
    if (it != cfg.principal_overrides.end()) {
      lo = it->second.first;
      hi = it->second.second;
    }
    refs.push_back(reformulate_periodic_var(m, v, lo, hi));
  }

  // alpha links from rows of the shape cb*(vb - va) + sum c_k v_k = rhs
  std::vector<AlphaLink> links;
  auto ref_of = [&](VarId v) -> const PrincipalReformulation* {
    for (const auto& r : refs)
      if (r.original_var == v) return &r;
    return nullptr;
  };
  const size_t num_core_rows = m.constraints.size();
  for (size_t ci = 0; ci < num_core_rows; ++ci) {
    const auto& c = m.constraints[ci];
    if (c.sense != Sense::Equal) continue;
    const PrincipalReformulation *ra = nullptr, *rb = nullptr;
    double ca = 0, cb = 0;
    bool rest_bounded = true;
    double rest_lo = 0, rest_hi = 0;
    for (const auto& [id, coef] : c.coeffs) {
      if (coef == 0.0) continue;
      const auto* r = ref_of(id);
      if (r && !ra) {
        ra = r;
        ca = coef;
      } else if (r && !rb) {
        rb = r;
        cb = coef;
      } else if (r) {
        rest_bounded = false;  // three folded angles in one row: skip
      } else {
        const auto& d = m.variables[static_cast<size_t>(id)];
        if (!d.bounded()) {
          rest_bounded = false;
          continue;
        }
        const double a = coef * d.lower, b = coef * d.upper;
        rest_lo += std::min(a, b);
        rest_hi += std::max(a, b);
      }
    }
    if (!ra || !rb || !rest_bounded) continue;
    if (std::abs(ca + cb) > 1e-12) continue;  // need the form vb = va + g
    // scale the row by 1/cb: vb = va + g with g = (rhs - rest)/cb
    const double s = 1.0 / cb;
    double g_lo = (c.rhs - rest_hi) * s, g_hi = (c.rhs - rest_lo) * s;
    if (g_lo > g_hi) std::swap(g_lo, g_hi);
    const PrincipalReformulation* from = ra;
    const PrincipalReformulation* to = rb;
    const auto& dfrom = m.variables[static_cast<size_t>(from->original_var)];
    const double K1 = dfrom.lower + g_lo, K2 = dfrom.upper + g_hi;
    const auto link = link_alphas(m, *from, *to, K1, K2);
    if (link) {
      links.push_back(*link);
      emit_alpha_link(m, *link);
    }
  }

  return PrincipalPlan{std::move(refs), std::move(links)};
}

inline void set_branch_priorities(MilpModel& milp,
                                  const std::vector<PrincipalReformulation>& refs,
                                  const std::vector<VarId>& order) {
  int prio = 1000 + static_cast<int>(order.size());
  for (VarId a : order) milp.vars[static_cast<size_t>(a)].branch_priority = prio--;
  (void)refs;
}

/// Projects the relaxation point onto the term curves and accepts it as an
/// incumbent when the projected point still satisfies the linear core.
inline std::optional<double> project_to_curves(const FactoredModel& m,
                                               std::vector<double>& vals) {
  for (const auto& t : m.trig_terms)
    vals[static_cast<size_t>(t.output)] = t.value(vals[static_cast<size_t>(t.input)]);
  for (const auto& b : m.bilinear_terms)
    vals[static_cast<size_t>(b.output)] =
        vals[static_cast<size_t>(b.left)] * vals[static_cast<size_t>(b.right)];
  for (size_t i = 0; i < m.variables.size(); ++i) {
    if (vals[i] < m.variables[i].lower - 1e-6 || vals[i] > m.variables[i].upper + 1e-6)
      return std::nullopt;
  }
  for (const auto& c : m.constraints) {
    double a = 0;
    for (const auto& [id, coef] : c.coeffs) a += coef * vals[static_cast<size_t>(id)];
    if (c.sense == Sense::LessEqual && a > c.rhs + 1e-6) return std::nullopt;
    if (c.sense == Sense::GreaterEqual && a < c.rhs - 1e-6) return std::nullopt;
    if (c.sense == Sense::Equal && std::abs(a - c.rhs) > 1e-6) return std::nullopt;
  }
  return m.objective.evaluate(vals);
}

}  // namespace detail

/// The outer iterative algorithm: relax, solve, bound, refine, repeat until
/// the relative gap closes. Expects a validated model; FBBT runs here.
inline GlobalResult solve_global(const FactoredModel& input, const SolveConfig& cfg,
                                 const UpperBoundHeuristic& heuristic = nullptr) {
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };
  GlobalResult res;

  const auto rep = validate_model(input);
  if (!rep.ok()) {
    res.status = SolveStatus::Error;
    res.message = "invalid model: " + rep.to_string();
    return res;
  }
  FactoredModel model = input;
  choose_partitioned_sides(model);
  auto fb = fbbt_tighten(model, cfg.fbbt_rounds);
  if (fb.infeasible) {
    res.status = SolveStatus::Infeasible;
    res.message = "FBBT proved infeasibility via " + fb.infeasible_var;
    return res;
  }
  model = std::move(fb.model);

  detail::PrincipalPlan plan;
  if (cfg.principal_domain) plan = detail::apply_principal_domains(model, cfg);
  const auto& refs = plan.refs;
  const auto alpha_order = branching_order(refs, plan.links);  // chain order, stage-major
  res.reformulations = refs;

  auto entries = build_base_partitions(model);

  double lb = -kInf, ub = kInf;
  std::vector<double> best_values;
  std::vector<double> warm;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    auto assembly = assemble_relaxation(model, entries);
    detail::set_branch_priorities(assembly.milp, refs, alpha_order);
    if (cfg.warm_start && !warm.empty()) {
      for (size_t i = 0; i < model.variables.size(); ++i)
        assembly.milp.vars[i].warm_start = warm[i];
    }
    SolverBackend backend = cfg.backend;
    backend.time_limit_seconds =
        std::max(1e-3, cfg.time_limit_seconds - elapsed());
    // the dual bound is the lower bound, so the inner solve may stop well
    // before proving exact optimality
    backend.mip_rel_gap = std::max(cfg.backend.mip_rel_gap,
                                   std::min(1e-3, 0.05 * cfg.gap_tolerance));
    if (cfg.backend.backend == Backend::Subprocess && ub < kInf) {
      // incumbent cutoff: the relaxation optimum is <= the MINLP optimum <= ub
      MilpRow cut;
      cut.name = "incumbent_cutoff";
      cut.coeffs = assembly.milp.objective;
      cut.sense = Sense::LessEqual;
      cut.rhs = ub - assembly.milp.objective_constant + 1e-4 * std::max(1.0, std::abs(ub));
      assembly.milp.add_row(std::move(cut));
    }
    const auto sol = solve_milp(assembly.milp, backend);
    res.iterations = iter;

    if (sol.status == MilpStatus::Infeasible) {
      res.status = SolveStatus::Infeasible;
      res.message = "MILP relaxation infeasible";
      break;
    }
    if (sol.status == MilpStatus::Error) {
      res.status = SolveStatus::Error;
      res.message = "backend failure: " + sol.message;
      break;
    }
    if (sol.status == MilpStatus::TimeLimit) {
      lb = std::max(lb, sol.best_bound);
      res.status = SolveStatus::TimeLimit;
      break;
    }
    lb = std::max(lb, std::min(sol.best_bound, sol.objective));

    // upper bound: heuristic, else projection of the relaxation point
    std::vector<double> relax_vals(sol.values.begin(),
                                   sol.values.begin() + static_cast<long>(model.variables.size()));
    if (heuristic) {
      const auto h = heuristic(model, relax_vals);
      if (h && h->first < ub) {
        ub = h->first;
        if (!h->second.empty()) {
          best_values = h->second;
          best_values.resize(model.variables.size(), 0.0);
          // complete the fold variables of the incumbent
          for (const auto& r : refs) {
            const double x = best_values[static_cast<size_t>(r.original_var)];
            long a = static_cast<long>(std::floor((x - r.hat_lo) / r.period + 1e-12));
            a = std::clamp(a, r.alpha_lo, r.alpha_hi);
            best_values[static_cast<size_t>(r.alpha_var)] = static_cast<double>(a);
            best_values[static_cast<size_t>(r.hat_var)] = x - static_cast<double>(a) * r.period;
          }
          warm = best_values;
        }
      }
    } else {
      std::vector<double> projected = relax_vals;
      const auto obj = detail::project_to_curves(model, projected);
      if (obj && *obj < ub) {
        ub = *obj;
        best_values = projected;
        warm = projected;
      }
    }

    long bin = 0;
    for (const auto& e : entries) bin += e.points_added();
    res.binaries_added = bin;
    const double gap = relative_gap(std::min(lb, ub), ub);  // guard tiny crossings
    res.log.push_back(IterationRecord{iter, lb, ub, gap, bin, elapsed()});

    if (gap <= cfg.gap_tolerance) {
      res.status = SolveStatus::Optimal;
      break;
    }
    if (elapsed() > cfg.time_limit_seconds) {
      res.status = SolveStatus::TimeLimit;
      break;
    }
    if (iter == cfg.max_iterations) {
      res.status = SolveStatus::IterationLimit;
      break;
    }

    // measures and selection
    std::vector<double> measures(entries.size(), 0.0);
    for (size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      const double x_star = relax_vals[static_cast<size_t>(e.var)];
      if (e.partition.point_index(x_star, cfg.refinement.on_point_tol) >= 0) continue;
      measures[i] = partition_measure(e.partition, model, relax_vals, e.var);
    }
    const auto selected = select_for_refinement(measures, cfg.strategy);
    if (selected.empty()) {
      res.status = SolveStatus::NoRefinement;
      res.message = "no partition eligible for refinement (gap " + std::to_string(gap) + ")";
      break;
    }
    for (int idx : selected) {
      auto& e = entries[static_cast<size_t>(idx)];
      const double x_star = relax_vals[static_cast<size_t>(e.var)];
      e.partition = refine_partition(e.partition, x_star, cfg.refinement);
    }
  }

  res.lower_bound = lb;
  res.upper_bound = ub;
  res.best_values = best_values;
  res.final_model = std::move(model);
  res.wall_seconds = elapsed();
  if (!res.log.empty()) {
    res.binaries_added = res.log.back().binaries_added;
  }
  return res;
}

/// Appendix-style per-instance result row.
struct RunSummary {
  std::string instance;
  SolveStatus status = SolveStatus::Error;
  double wall_seconds = 0.0;
  int iterations = 0;
  long binaries = 0;
  double lower_bound = -kInf;
  double upper_bound = kInf;
};

/// CSV with columns instance,t,iter,bin; "**" in the t column marks runs that
/// hit the time limit. Times are whole seconds, keeping repeated exports of
/// deterministic runs byte-identical.
inline void export_results_csv(const std::vector<RunSummary>& runs, std::ostream& os) {
  os << "instance,t,iter,bin\n";
  for (const auto& r : runs) {
    os << r.instance << ",";
    if (r.status == SolveStatus::TimeLimit)
      os << "**";
    else
      os << static_cast<long>(r.wall_seconds);
    os << "," << r.iterations << "," << r.binaries << "\n";
  }
}

/// JSON sibling of the CSV export, with the bounds included.
inline nlohmann::json export_results_json(const std::vector<RunSummary>& runs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : runs) {
    j.push_back({{"instance", r.instance},
                 {"status", to_string(r.status)},
                 {"t", static_cast<long>(r.wall_seconds)},
                 {"timed_out", r.status == SolveStatus::TimeLimit},
                 {"iter", r.iterations},
                 {"bin", r.binaries},
                 {"lower_bound", r.lower_bound},
                 {"upper_bound", r.upper_bound < kInf ? r.upper_bound : -1.0}});
  }
  return j;
}

}  // namespace trigopt
