#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trigopt/milp/lp_format.hpp"
#include "trigopt/milp/model.hpp"
#include "trigopt/milp/solver.hpp"

namespace trigopt {

enum class Backend { Builtin, Subprocess };

struct SolverBackend {
  Backend backend = Backend::Builtin;
  double time_limit_seconds = 3600.0;
  /// Subprocess: executable invoked as `cmd <model.lp> <solution> <limit_s>`.
  /// Empty means the TRIGOPT_SOLVER_CMD environment variable.
  std::string solver_cmd;
  /// Solution-file dialect: "json" ({status, objective, values{name: v}}) or
  /// "lines" (one `name value` pair per line after `status` / `objective`).
  std::string dialect = "json";
  /// Relative MIP gap the subprocess solver may stop at; its reported dual
  /// bound is used as the valid lower bound.
  double mip_rel_gap = 1e-6;
};

namespace detail {

inline MilpSolution parse_solution_file(const MilpModel& m, const std::string& path,
                                        const std::string& dialect) {
  MilpSolution sol;
  std::ifstream in(path);
  if (!in) {
    sol.status = MilpStatus::Error;
    sol.message = "solver wrote no solution file";
    return sol;
  }
  const auto names = lp_var_names(m);
  std::map<std::string, int> index;
  for (size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
  sol.values.assign(m.vars.size(), 0.0);

  std::string status_word;
  if (dialect == "lines") {
    std::string key;
    double v;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      if (!(ls >> key)) continue;
      if (key == "status") {
        ls >> status_word;
      } else if (key == "objective") {
        ls >> sol.objective;
      } else if (ls >> v) {
        auto it = index.find(key);
        if (it != index.end()) sol.values[static_cast<size_t>(it->second)] = v;
      }
    }
  } else {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      sol.status = MilpStatus::Error;
      sol.message = std::string("bad solution json: ") + e.what();
      return sol;
    }
    status_word = j.value("status", "error");
    sol.objective = j.value("objective", 0.0);
    sol.best_bound = j.value("bound", sol.objective);
    if (j.contains("values"))
      for (auto it = j["values"].begin(); it != j["values"].end(); ++it) {
        auto f = index.find(it.key());
        if (f != index.end()) sol.values[static_cast<size_t>(f->second)] = it.value().get<double>();
      }
  }

  if (status_word == "optimal")
    sol.status = MilpStatus::Optimal;
  else if (status_word == "infeasible")
    sol.status = MilpStatus::Infeasible;
  else if (status_word == "time_limit")
    sol.status = MilpStatus::TimeLimit;
  else {
    sol.status = MilpStatus::Error;
    sol.message = "solver status: " + status_word;
  }
  if (sol.status == MilpStatus::Optimal) {
    const double viol = max_violation(m, sol.values);
    if (viol > 1e-5) {
      sol.status = MilpStatus::Error;
      sol.message = "subprocess solution violates rows by " + std::to_string(viol);
    } else {
      const double bound = sol.best_bound;
      sol.objective = eval_objective(m, sol.values);
      sol.best_bound = std::min(bound, sol.objective);
    }
  }
  return sol;
}

inline MilpSolution solve_milp_subprocess(const MilpModel& m, const SolverBackend& cfg) {
  MilpSolution sol;
  std::string cmd = cfg.solver_cmd;
  if (cmd.empty()) {
    const char* env = std::getenv("TRIGOPT_SOLVER_CMD");
    if (env) cmd = env;
  }
  if (cmd.empty()) {
    sol.status = MilpStatus::Error;
    sol.message = "no solver command (set TRIGOPT_SOLVER_CMD or --solver-cmd)";
    return sol;
  }
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path();
  const std::string stem =
      "trigopt_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
  const std::string lp_path = (dir / (stem + ".lp")).string();
  const std::string sol_path = (dir / (stem + ".sol")).string();
  serialize_lp(m, lp_path);

  std::ostringstream full;
  full << cmd << " \"" << lp_path << "\" \"" << sol_path << "\" " << cfg.time_limit_seconds
       << " " << cfg.mip_rel_gap;
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = std::system(full.str().c_str());
  sol = parse_solution_file(m, sol_path, cfg.dialect);
  sol.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rc != 0 && sol.status == MilpStatus::Error)
    sol.message += " (exit code " + std::to_string(rc) + ": " + full.str() + ")";
  std::error_code ec;
  std::filesystem::remove(lp_path, ec);
  std::filesystem::remove(sol_path, ec);
  return sol;
}

}  // namespace detail

/// Solves the MILP with the selected backend. Optimal status implies row
/// feasibility within 1e-6 (builtin) / 1e-5 (subprocess, re-verified here).
inline MilpSolution solve_milp(const MilpModel& m, const SolverBackend& cfg = {}) {
  if (cfg.backend == Backend::Subprocess) return detail::solve_milp_subprocess(m, cfg);
  BuiltinOptions opt;
  opt.time_limit_seconds = cfg.time_limit_seconds;
  return solve_milp_builtin(m, opt);
}

}  // namespace trigopt
