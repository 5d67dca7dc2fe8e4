// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code = number of
// failures.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "trigopt/driver.hpp"
#include "trigopt/mdppp.hpp"
#include "trigopt/model_json.hpp"

using namespace trigopt;

namespace {

constexpr double pi = std::numbers::pi;

std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64{seed}; }
double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(g() >> 11) * 0x1.0p-53);
}

TrigTerm sin_term(VarId out, VarId in) {
  TrigTerm t;
  t.output = out;
  t.input = in;
  t.kind = TrigKind::Sin;
  return t;
}

Curve sin_curve() { return make_curve(sin_term(0, 1)); }
Curve cos_curve() {
  TrigTerm t = sin_term(0, 1);
  t.kind = TrigKind::Cos;
  return make_curve(t);
}

FactoredModel sin_toy(double lo, double hi) {
  FactoredModel m;
  const VarId x = m.add_variable("x", lo, hi);
  const VarId y = m.add_variable("y", -1.0, 1.0);
  m.objective.coeffs[y] = 1.0;
  m.trig_terms.push_back(sin_term(y, x));
  return m;
}

bool scipy_available() {
  return std::system("python3 -c 'import scipy.optimize' >/dev/null 2>&1") == 0;
}

SolverBackend subprocess_backend() {
  SolverBackend be;
  be.backend = Backend::Subprocess;
  be.solver_cmd = "python3 " + std::string(TRIGOPT_SOURCE_DIR) + "/tools/scipy_milp_solve.py";
  return be;
}

// collected iteration logs for the monotonicity criterion
std::vector<std::pair<std::string, std::vector<IterationRecord>>> g_logs;
std::mutex g_logs_mutex;

void collect_log(const std::string& tag, const GlobalResult& r) {
  std::lock_guard<std::mutex> lock(g_logs_mutex);
  g_logs.emplace_back(tag, r.log);
}

// ---- criterion bodies: return "" on pass, else the failure reason ----

std::string criterion_variable_counts() {
  {
    const auto p = base_partition({sin_curve(), cos_curve()}, -4 * pi, 4 * pi);
    if (p.num_cells() != 16) return "expected 16 cells on [-4pi, 4pi]";
    MilpModel m;
    const int x = m.add_var("x", -4 * pi, 4 * pi);
    const int ys = m.add_var("ys", -1, 1);
    const int yc = m.add_var("yc", -1, 1);
    const auto bs = build_trig_block(m, triangle_cells(sin_curve(), p), x, ys, "s");
    const auto bc = build_trig_block(m, triangle_cells(cos_curve(), p), x, yc, "c", &bs.u_ids);
    int binaries = 0;
    for (const auto& v : m.vars)
      if (v.integrality == Integrality::Binary) ++binaries;
    if (binaries != 15) return "wide relaxation has " + std::to_string(binaries) + " binaries";
    if (bs.num_deltas() != 32 || bc.num_deltas() != 32)
      return "wide relaxation deltas per term: " + std::to_string(bs.num_deltas());
  }
  {
    const auto p = base_partition({sin_curve(), cos_curve()}, 0.0, 2 * pi);
    MilpModel m;
    const int x = m.add_var("x", 0, 2 * pi);
    const int ys = m.add_var("ys", -1, 1);
    const int yc = m.add_var("yc", -1, 1);
    const auto bs = build_trig_block(m, triangle_cells(sin_curve(), p), x, ys, "s");
    const auto bc = build_trig_block(m, triangle_cells(cos_curve(), p), x, yc, "c", &bs.u_ids);
    int binaries = 0;
    for (const auto& v : m.vars)
      if (v.integrality == Integrality::Binary) ++binaries;
    if (binaries != 3) return "principal relaxation has " + std::to_string(binaries) + " binaries";
    if (bs.num_deltas() != 8 || bc.num_deltas() != 8)
      return "principal relaxation deltas per term: " + std::to_string(bs.num_deltas());
  }
  return "";
}

std::string criterion_containment() {
  auto g = rng(20260810);
  for (int it = 0; it < 50; ++it) {
    const double lo = uniform(g, -9.0, 5.0);
    const double hi = lo + uniform(g, 1.0, 9.0);
    const bool use_cos = g() % 2 == 0;
    const auto curve = use_cos ? cos_curve() : sin_curve();
    Partition p = base_partition({curve}, lo, hi);
    const int refinements = static_cast<int>(g() % 11);
    RefinementConfig rc;
    for (int r = 0; r < refinements; ++r) {
      rc.scheme = static_cast<Scheme>(g() % 4);
      const double x_star = uniform(g, lo + 1e-6, hi - 1e-6);
      p = refine_partition(p, x_star, rc);
    }
    const auto cells = triangle_cells(curve, p);
    for (const auto& cell : cells) {
      for (int k = 0; k <= 100; ++k) {
        const double x = cell.x_lo + (cell.x_hi - cell.x_lo) * k / 100.0;
        if (!cell_membership(cell, x, curve.value(x), 1e-9))
          return "curve point escaped its cell at x=" + std::to_string(x);
      }
    }
  }
  return "";
}

std::string criterion_cutoff() {
  auto g = rng(31337);
  int tested = 0, failures = 0;
  while (tested < 200) {
    const double lo = uniform(g, -7.0, 4.0);
    const double hi = lo + uniform(g, 1.0, 8.0);
    const auto curve = (g() % 2 == 0) ? sin_curve() : cos_curve();
    Partition p = base_partition({curve}, lo, hi);
    const double x_star = uniform(g, lo + 1e-4, hi - 1e-4);
    if (p.point_index(x_star, 1e-6) >= 0) continue;
    const auto cells = triangle_cells(curve, p);
    const auto& cell = cells[static_cast<size_t>(p.cell_index(x_star))];
    const double y_curve = curve.value(x_star);
    const double dir = cell.v_apex[1] > y_curve ? 1.0 : -1.0;
    const double y_star = y_curve + dir * uniform(g, 1e-3, 0.3);
    if (!cell_membership(cell, x_star, y_star)) continue;
    ++tested;
    for (Scheme s : {Scheme::Direct, Scheme::NU3}) {
      RefinementConfig rc;
      rc.scheme = s;
      const auto q = refine_partition(p, x_star, rc);
      for (const auto& nc : triangle_cells(curve, q))
        if (cell_membership(nc, x_star, y_star, 1e-12)) ++failures;
    }
  }
  if (failures > 0) return std::to_string(failures) + " cut-off failures";
  return "";
}

std::string criterion_envelope() {
  auto g = rng(4242);
  for (int rect = 0; rect < 50; ++rect) {
    const double xa = uniform(g, -4, 3), xb = xa + uniform(g, 0.05, 5);
    const double ya = uniform(g, -4, 3), yb = ya + uniform(g, 0.05, 5);
    const double bound = (xb - xa) * (yb - ya) / 4.0;
    double worst = 0.0;
    for (int s = 0; s < 10000; ++s) {
      const double x = uniform(g, xa, xb);
      const double y = uniform(g, ya, yb);
      const double wlo = std::max(xa * y + x * ya - xa * ya, xb * y + x * yb - xb * yb);
      const double whi = std::min(xb * y + x * ya - xb * ya, x * yb + xa * y - xa * yb);
      worst = std::max({worst, whi - x * y, x * y - wlo});
    }
    if (worst > bound + 1e-12)
      return "gap " + std::to_string(worst) + " exceeds bound " + std::to_string(bound);
  }
  return "";
}

std::string criterion_principal_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = sin_toy(-4 * pi, 4 * pi);
  SolveConfig cfg;
  cfg.gap_tolerance = 1e-7;  // tighter than the required 1%
  cfg.refinement.scheme = Scheme::NU2;
  cfg.strategy.kind = StrategyConfig::Kind::Complete;
  cfg.time_limit_seconds = 30;
  auto cfg_off = cfg;
  cfg_off.principal_domain = false;
  const auto on = solve_global(m, cfg);
  const auto off = solve_global(m, cfg_off);
  collect_log("equiv_on", on);
  collect_log("equiv_off", off);
  if (on.status != SolveStatus::Optimal || off.status != SolveStatus::Optimal)
    return "a run did not converge";
  if (relative_gap(on.lower_bound, on.upper_bound) > 0.01) return "reformulated gap above 1%";
  if (relative_gap(off.lower_bound, off.upper_bound) > 0.01) return "original gap above 1%";
  if (std::abs(on.upper_bound - (-1.0)) > 1e-4) return "reformulated optimum not -1";
  if (std::abs(off.upper_bound - (-1.0)) > 1e-4) return "original optimum not -1";
  if (std::abs(on.upper_bound - off.upper_bound) > 1e-4) return "upper bounds disagree";
  if (std::abs(on.lower_bound - off.lower_bound) > 1e-4) return "lower bounds disagree";
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > 30) return "runtime " + std::to_string(secs) + "s exceeds 30s";
  return "";
}

std::string criterion_trivial_mdppp() {
  MdpppInstance inst;
  inst.points = {{0, 0}, {10, 0}};
  inst.rho = 1.0;
  inst.theta_start = 0.0;
  inst.theta_end = 0.0;
  auto mm = build_mdppp_model(inst);
  apply_optimality_cuts(mm);
  SolveConfig cfg;
  cfg.gap_tolerance = 1e-9;
  cfg.refinement.scheme = Scheme::NU2;
  cfg.strategy.kind = StrategyConfig::Kind::Complete;
  cfg.time_limit_seconds = 900;
  const auto res = solve_global(mm.model, cfg, make_mdppp_heuristic(mm));
  collect_log("trivial_mdppp", res);
  if (res.status != SolveStatus::Optimal) return std::string("status ") + to_string(res.status);
  if (std::abs(res.upper_bound - 10.0) > 1e-4)
    return "length " + std::to_string(res.upper_bound);
  if (relative_gap(res.lower_bound, res.upper_bound) > 1e-9)
    return "gap " + std::to_string(relative_gap(res.lower_bound, res.upper_bound));
  if (res.iterations > 5) return std::to_string(res.iterations) + " iterations";
  return "";
}

struct OracleRun {
  int n = 0;
  uint64_t seed = 0;
  double oracle = 0;
  GlobalResult result;
};

std::string criterion_oracle_crosscheck(bool have_scipy) {
  std::vector<std::pair<int, uint64_t>> cases;
  for (uint64_t s = 1; s <= 5; ++s) cases.emplace_back(3, s);
  for (uint64_t s = 1; s <= 5; ++s) cases.emplace_back(4, s);
  std::vector<OracleRun> runs(cases.size());
  std::mutex mtx;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t w;
      {
        std::lock_guard<std::mutex> lock(mtx);
        if (next >= cases.size()) return;
        w = next++;
      }
      const auto [n, seed] = cases[w];
      const auto inst = generate_instance(n, seed);
      auto mm = build_mdppp_model(inst);
      apply_optimality_cuts(mm);
      SolveConfig cfg;
      cfg.gap_tolerance = 0.01;
      cfg.refinement.scheme = Scheme::NU2;
      cfg.strategy.kind = StrategyConfig::Kind::KWorst;
      cfg.strategy.k = 50;
      cfg.time_limit_seconds = have_scipy ? 600 : 1800;
      if (have_scipy) cfg.backend = subprocess_backend();
      OracleRun run;
      run.n = n;
      run.seed = seed;
      run.result = solve_global(mm.model, cfg, make_mdppp_heuristic(mm));
      run.oracle = mdppp_oracle(inst, 256);
      runs[w] = std::move(run);
    }
  };
  std::thread t1(worker), t2(worker);
  t1.join();
  t2.join();

  std::ostringstream fails;
  for (const auto& run : runs) {
    const std::string tag =
        "oracle_" + std::to_string(run.n) + "-" + std::to_string(run.seed);
    collect_log(tag, run.result);
    if (run.result.status != SolveStatus::Optimal) {
      fails << tag << " status " << to_string(run.result.status) << "; ";
      continue;
    }
    const double slack = (run.n - 2) * 2.0 * (2 * pi / 256.0) * 1.0;
    if (run.result.upper_bound > run.oracle * 1.01 + slack)
      fails << tag << " ub " << run.result.upper_bound << " vs oracle " << run.oracle << "; ";
    if (run.result.lower_bound > run.oracle + 1e-4)
      fails << tag << " lb " << run.result.lower_bound << " above oracle " << run.oracle << "; ";
  }
  return fails.str();
}

std::string criterion_monotonicity() {
  std::lock_guard<std::mutex> lock(g_logs_mutex);
  if (g_logs.empty()) return "no collected runs";
  for (const auto& [tag, log] : g_logs) {
    for (size_t i = 1; i < log.size(); ++i) {
      if (log[i].lower_bound < log[i - 1].lower_bound - 1e-6)
        return tag + ": lower bound decreased at iteration " + std::to_string(i + 1);
      if (log[i].upper_bound > log[i - 1].upper_bound + 1e-9)
        return tag + ": upper bound increased at iteration " + std::to_string(i + 1);
    }
  }
  return "";
}

std::string criterion_scheme_ordering(bool have_scipy) {
  struct Cell {
    double t_nu2 = 0, t_bis = 0;
  };
  std::vector<Cell> cells(10);
  std::mutex mtx;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t w;
      {
        std::lock_guard<std::mutex> lock(mtx);
        if (next >= cells.size()) return;
        w = next++;
      }
      const auto inst = generate_instance(4, 100 + w);
      for (int variant = 0; variant < 2; ++variant) {
        auto mm = build_mdppp_model(inst);
        apply_optimality_cuts(mm);
        SolveConfig cfg;
        cfg.gap_tolerance = 0.01;
        cfg.time_limit_seconds = 300;
        if (have_scipy) cfg.backend = subprocess_backend();
        if (variant == 0) {
          cfg.refinement.scheme = Scheme::NU2;
          cfg.strategy.kind = StrategyConfig::Kind::KWorst;
          cfg.strategy.k = 50;
        } else {
          cfg.refinement.scheme = Scheme::Bisection;
          cfg.strategy.kind = StrategyConfig::Kind::Complete;
        }
        const auto res = solve_global(mm.model, cfg, make_mdppp_heuristic(mm));
        const double t = res.status == SolveStatus::Optimal ? res.wall_seconds
                                                            : cfg.time_limit_seconds;
        std::lock_guard<std::mutex> lock(mtx);
        (variant == 0 ? cells[w].t_nu2 : cells[w].t_bis) = t;
      }
    }
  };
  std::thread t1(worker), t2(worker);
  t1.join();
  t2.join();

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  std::vector<double> nu2, bis;
  for (const auto& c : cells) {
    nu2.push_back(c.t_nu2);
    bis.push_back(c.t_bis);
  }
  const double m_nu2 = median(nu2), m_bis = median(bis);
  std::printf("        median solve time: nu2(k=50%%) %.1fs vs bisection(complete) %.1fs\n",
              m_nu2, m_bis);
  if (m_nu2 > m_bis)
    return "median nu2 " + std::to_string(m_nu2) + "s exceeds bisection " +
           std::to_string(m_bis) + "s";
  return "";
}

std::string criterion_dubins_integrity() {
  auto g = rng(9090);
  int checked_far = 0;
  for (int it = 0; it < 1000; ++it) {
    const Configuration q0{uniform(g, -10, 10), uniform(g, -10, 10), uniform(g, 0, 2 * pi)};
    const Configuration q1{uniform(g, -10, 10), uniform(g, -10, 10), uniform(g, 0, 2 * pi)};
    const double rho = uniform(g, 0.3, 2.0);
    const auto p = dubins_shortest_path(q0, q1, rho);
    const auto e = reconstruct_endpoint(q0, p);
    double dh = std::abs(normalize_angle(e.heading) - normalize_angle(q1.heading));
    dh = std::min(dh, 2 * pi - dh);
    const double err = std::hypot(e.x - q1.x, e.y - q1.y) + dh;
    if (err > 1e-6) return "endpoint error " + std::to_string(err);
    const double euclid = std::hypot(q1.x - q0.x, q1.y - q0.y);
    if (p.total_length < euclid - 1e-9) return "length below euclidean distance";
    if (euclid >= 4 * rho) {
      ++checked_far;
      if (p.word == DubinsWord::LRL || p.word == DubinsWord::RLR)
        return "CCC word optimal at distance " + std::to_string(euclid / rho) + " rho";
    }
  }
  if (checked_far < 100) return "too few far pairs sampled";
  return "";
}

std::string criterion_csv_stability() {
  // two identical deterministic sub-second runs plus a forced timeout
  auto run_once = [&]() {
    std::vector<RunSummary> rows;
    {
      const auto res = solve_global(sin_toy(0.0, 2 * pi), SolveConfig{});
      RunSummary s;
      s.instance = "toy-1";
      s.status = res.status;
      s.wall_seconds = res.wall_seconds;
      s.iterations = res.iterations;
      s.binaries = res.binaries_added;
      rows.push_back(s);
    }
    {
      MdpppInstance inst;
      inst.points = {{0, 0}, {10, 0}};
      inst.rho = 1;
      inst.theta_start = 0;
      inst.theta_end = 0;
      auto mm = build_mdppp_model(inst);
      apply_optimality_cuts(mm);
      SolveConfig cfg;
      cfg.gap_tolerance = 1e-12;
      cfg.time_limit_seconds = 1e-3;  // forced timeout
      const auto res = solve_global(mm.model, cfg, make_mdppp_heuristic(mm));
      RunSummary s;
      s.instance = "toy-2";
      s.status = res.status;
      s.wall_seconds = res.wall_seconds;
      s.iterations = res.iterations;
      s.binaries = res.binaries_added;
      rows.push_back(s);
    }
    std::ostringstream os;
    export_results_csv(rows, os);
    return os.str();
  };
  const std::string a = run_once();
  const std::string b = run_once();
  if (a != b) return "repeated exports differ:\n" + a + "---\n" + b;
  if (a.find("instance,t,iter,bin\n") != 0) return "missing header";
  if (a.find("toy-2,**,") == std::string::npos) return "timeout not marked with **";
  return "";
}

}  // namespace

int main() {
  const bool have_scipy = scipy_available();
  std::printf("backend for instance sweeps: %s\n",
              have_scipy ? "subprocess (scipy/HiGHS)" : "builtin");

  struct Criterion {
    int id;
    const char* name;
    std::function<std::string()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "variable-count reproduction", criterion_variable_counts},
      {2, "containment suite", criterion_containment},
      {3, "cut-off guarantee", criterion_cutoff},
      {4, "bilinear envelope bound", criterion_envelope},
      {5, "principal-domain equivalence", criterion_principal_equivalence},
      {6, "trivial MDPPP", criterion_trivial_mdppp},
      {7, "oracle cross-check", [&] { return criterion_oracle_crosscheck(have_scipy); }},
      {8, "bound monotonicity", criterion_monotonicity},
      {9, "scheme ordering (soft)", [&] { return criterion_scheme_ordering(have_scipy); }},
      {10, "dubins oracle integrity", criterion_dubins_integrity},
      {11, "csv export byte stability", criterion_csv_stability},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string reason;
    try {
      reason = c.run();
    } catch (const std::exception& e) {
      reason = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (reason.empty()) {
      std::printf("PASS criterion %2d: %s (%.1fs)\n", c.id, c.name, secs);
    } else {
      std::printf("FAIL criterion %2d: %s (%.1fs) -- %s\n", c.id, c.name, secs, reason.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures;
}
