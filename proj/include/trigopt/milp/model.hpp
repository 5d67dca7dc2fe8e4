#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trigopt/model.hpp"

namespace trigopt {

struct MilpVar {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
  Integrality integrality = Integrality::Continuous;
  int branch_priority = 0;  // higher branches earlier (hint)
  std::optional<double> warm_start;
};

struct MilpRow {
  std::string name;
  std::map<int, double> coeffs;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// Identifies one incremental-formulation block: the ordered binaries
/// u_1 >= ... >= u_{m-1} walking through m cells. The builtin solver branches
/// on the active cell of a block instead of on individual binaries.
struct BlockInfo {
  std::vector<int> u_ids;  // may be shared between blocks over one partition
  int num_cells = 1;
  int position_var = -1;      // the partitioned variable
  std::vector<double> cuts;   // interior cell boundaries (num_cells - 1)
};

struct MilpModel {
  std::vector<MilpVar> vars;
  std::vector<MilpRow> rows;
  std::map<int, double> objective;  // minimized
  double objective_constant = 0.0;
  std::vector<BlockInfo> blocks;

  int add_var(std::string name, double lo, double hi,
              Integrality integ = Integrality::Continuous) {
    vars.push_back(MilpVar{std::move(name), lo, hi, integ, 0, std::nullopt});
    return static_cast<int>(vars.size()) - 1;
  }
  int add_row(MilpRow row) {
    rows.push_back(std::move(row));
    return static_cast<int>(rows.size()) - 1;
  }
};

enum class MilpStatus { Optimal, Infeasible, TimeLimit, Error };

struct MilpSolution {
  MilpStatus status = MilpStatus::Error;
  double objective = 0.0;
  double best_bound = -kInf;  // valid lower bound on the optimum
  std::vector<double> values;
  double solve_seconds = 0.0;
  long nodes = 0;
  std::string message;
};

/// Max violation of rows and bounds at a point.
inline double max_violation(const MilpModel& m, const std::vector<double>& x) {
  double viol = 0.0;
  for (size_t i = 0; i < m.vars.size(); ++i) {
    viol = std::max(viol, m.vars[i].lower - x[i]);
    viol = std::max(viol, x[i] - m.vars[i].upper);
  }
  for (const auto& r : m.rows) {
    double a = 0.0;
    for (const auto& [j, c] : r.coeffs) a += c * x[static_cast<size_t>(j)];
    if (r.sense == Sense::LessEqual) viol = std::max(viol, a - r.rhs);
    else if (r.sense == Sense::GreaterEqual) viol = std::max(viol, r.rhs - a);
    else viol = std::max(viol, std::abs(a - r.rhs));
  }
  return viol;
}

inline double eval_objective(const MilpModel& m, const std::vector<double>& x) {
  double v = m.objective_constant;
  for (const auto& [j, c] : m.objective) v += c * x[static_cast<size_t>(j)];
  return v;
}

}  // namespace trigopt
