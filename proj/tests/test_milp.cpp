#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <sstream>

#include "trigopt/milp/lp_format.hpp"
#include "trigopt/milp/simplex.hpp"
#include "trigopt/milp/solve.hpp"
#include "trigopt/relaxation.hpp"

#include "test_helpers.hpp"

using namespace trigopt;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("simplex: basic two-variable LP") {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0 -> (1.6, 1.2), obj 2.8
  MilpModel m;
  const int x = m.add_var("x", 0, kInf);
  const int y = m.add_var("y", 0, kInf);
  m.objective = {{x, -1.0}, {y, -1.0}};  // minimize the negation
  m.add_row(MilpRow{"c1", {{x, 1.0}, {y, 2.0}}, Sense::LessEqual, 4.0});
  m.add_row(MilpRow{"c2", {{x, 3.0}, {y, 1.0}}, Sense::LessEqual, 6.0});
  const auto r = solve_lp(m);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(r.objective == Approx(-2.8));
  REQUIRE(r.x[0] == Approx(1.6));
  REQUIRE(r.x[1] == Approx(1.2));
}

TEST_CASE("simplex: equality rows and negative bounds") {
  MilpModel m;
  const int x = m.add_var("x", -5, 5);
  const int y = m.add_var("y", -5, 5);
  m.objective = {{x, 2.0}, {y, 1.0}};
  m.add_row(MilpRow{"eq", {{x, 1.0}, {y, 1.0}}, Sense::Equal, 1.0});
  const auto r = solve_lp(m);
  REQUIRE(r.status == LpStatus::Optimal);
  // min 2x + y with x + y = 1: push x to -5, y = 6 > 5 infeasible; optimum
  // x = -4, y = 5 -> obj -3
  REQUIRE(r.objective == Approx(-3.0));
}

TEST_CASE("simplex: infeasible and unbounded detection") {
  MilpModel m;
  const int x = m.add_var("x", 0, kInf);
  m.add_row(MilpRow{"a", {{x, 1.0}}, Sense::LessEqual, 0.0});
  m.add_row(MilpRow{"b", {{x, 1.0}}, Sense::GreaterEqual, 1.0});
  m.objective = {{x, 1.0}};
  REQUIRE(solve_lp(m).status == LpStatus::Infeasible);

  MilpModel u;
  const int y = u.add_var("y", -kInf, kInf);
  u.objective = {{y, 1.0}};
  REQUIRE(solve_lp(u).status == LpStatus::Unbounded);
}

TEST_CASE("simplex: free variables and degenerate rows") {
  MilpModel m;
  const int x = m.add_var("x", -kInf, kInf);
  const int y = m.add_var("y", -kInf, kInf);
  m.objective = {{x, 1.0}, {y, 1.0}};
  m.add_row(MilpRow{"r1", {{x, 1.0}, {y, -1.0}}, Sense::Equal, 2.0});
  m.add_row(MilpRow{"r2", {{x, 1.0}, {y, 1.0}}, Sense::GreaterEqual, 4.0});
  m.add_row(MilpRow{"r3", {{x, 2.0}, {y, -2.0}}, Sense::Equal, 4.0});  // redundant copy of r1
  const auto r = solve_lp(m);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(r.objective == Approx(4.0));
  REQUIRE(r.x[0] == Approx(3.0));
  REQUIRE(r.x[1] == Approx(1.0));
}

TEST_CASE("simplex agrees with corner enumeration on random box LPs") {
  auto g = test::rng(42);
  for (int it = 0; it < 60; ++it) {
    MilpModel m;
    const int n = 3;
    for (int j = 0; j < n; ++j)
      m.add_var("x" + std::to_string(j), test::uniform(g, -3, 0), test::uniform(g, 0.1, 3));
    for (int j = 0; j < n; ++j) m.objective[j] = test::uniform(g, -2, 2);
    // a couple of loose rows keeping the box optimum valid
    m.add_row(MilpRow{"r", {{0, 1.0}, {1, 1.0}, {2, 1.0}}, Sense::LessEqual, 12.0});
    const auto r = solve_lp(m);
    REQUIRE(r.status == LpStatus::Optimal);
    double best = kInf;
    for (int mask = 0; mask < (1 << n); ++mask) {
      double v = 0;
      for (int j = 0; j < n; ++j)
        v += m.objective[j] * (mask & (1 << j) ? m.vars[static_cast<size_t>(j)].upper
                                               : m.vars[static_cast<size_t>(j)].lower);
      best = std::min(best, v);
    }
    REQUIRE(r.objective == Approx(best).margin(1e-8));
  }
}

TEST_CASE("builtin MILP: trig block minimum hits the deepest apex") {
  // oracle: enumerate both cells' vertex sets; min y = -pi/2 at (3pi/2, -pi/2)
  const auto p = base_partition({test::sin_curve()}, 0.0, 2 * pi);
  const auto cells = triangle_cells(test::sin_curve(), p);
  MilpModel m;
  const int x = m.add_var("x", 0, 2 * pi);
  const int y = m.add_var("y", -kInf, kInf);
  build_trig_block(m, cells, x, y, "s");
  m.objective = {{y, 1.0}};
  const auto sol = solve_milp_builtin(m);
  REQUIRE(sol.status == MilpStatus::Optimal);
  double oracle = kInf;
  for (const auto& c : cells)
    oracle = std::min({oracle, c.v_left[1], c.v_apex[1], c.v_right[1]});
  REQUIRE(oracle == Approx(-pi / 2));
  REQUIRE(sol.objective == Approx(oracle).margin(1e-9));
  REQUIRE(sol.values[static_cast<size_t>(x)] == Approx(3 * pi / 2));
}

TEST_CASE("builtin MILP: infeasible toy") {
  MilpModel m;
  const int x = m.add_var("x", 0, 5);
  m.add_row(MilpRow{"a", {{x, 1.0}}, Sense::LessEqual, 0.0});
  m.add_row(MilpRow{"b", {{x, 1.0}}, Sense::GreaterEqual, 1.0});
  REQUIRE(solve_milp_builtin(m).status == MilpStatus::Infeasible);
}

TEST_CASE("builtin MILP: single-cell bilinear minimum at a vertex") {
  Partition p;
  p.points = {PartitionPoint::real(-1.0), PartitionPoint::real(1.0)};
  MilpModel m;
  const int x = m.add_var("x", -1, 1);
  const int y = m.add_var("y", -1, 1);
  const int z = m.add_var("z", -kInf, kInf);
  build_bilinear_block(m, tetra_cells(p, -1.0, 1.0), x, y, z, "b");
  m.objective = {{z, 1.0}};
  const auto sol = solve_milp_builtin(m);
  REQUIRE(sol.status == MilpStatus::Optimal);
  REQUIRE(sol.objective == Approx(-1.0).margin(1e-9));
}

TEST_CASE("builtin MILP matches exhaustive binary enumeration on random blocks") {
  auto g = test::rng(2024);
  for (int it = 0; it < 12; ++it) {
    MilpModel m;
    std::vector<RelaxationBlock> blocks;
    const int nblocks = 1 + static_cast<int>(g() % 3);
    std::vector<int> outs;
    for (int bidx = 0; bidx < nblocks; ++bidx) {
      const double lo = test::uniform(g, -6, 2);
      const double hi = lo + test::uniform(g, 2.0, 8.0);
      const bool use_cos = g() % 2 == 0;
      const auto curve = use_cos ? test::cos_curve() : test::sin_curve();
      auto part = base_partition({curve}, lo, hi);
      // refine randomly to m <= 6 cells
      while (part.num_cells() < 6 && g() % 2 == 0) {
        const int c = static_cast<int>(g() % static_cast<uint64_t>(part.num_cells()));
        auto mid = PartitionPoint::midpoint(part.points[static_cast<size_t>(c)],
                                            part.points[static_cast<size_t>(c) + 1]);
        part.points.insert(part.points.begin() + c + 1, mid);
      }
      const int x = m.add_var("x" + std::to_string(bidx), lo, hi);
      const int y = m.add_var("y" + std::to_string(bidx), -kInf, kInf);
      blocks.push_back(build_trig_block(m, triangle_cells(curve, part), x, y,
                                        "t" + std::to_string(bidx)));
      m.objective[y] = test::uniform(g, -1, 1);
      m.objective[x] = test::uniform(g, -0.3, 0.3);
      outs.push_back(y);
    }
    const auto sol = solve_milp_builtin(m);
    REQUIRE(sol.status == MilpStatus::Optimal);

    // oracle: enumerate every binary pattern, solve the remaining LP
    double oracle = kInf;
    std::vector<int> all_u;
    for (const auto& b : blocks) all_u.insert(all_u.end(), b.u_ids.begin(), b.u_ids.end());
    std::vector<double> lb, ub;
    for (const auto& v : m.vars) {
      lb.push_back(v.lower);
      ub.push_back(v.upper);
    }
    REQUIRE(all_u.size() <= 14);
    for (long mask = 0; mask < (1L << all_u.size()); ++mask) {
      for (size_t k = 0; k < all_u.size(); ++k) {
        const double v = (mask >> k) & 1 ? 1.0 : 0.0;
        lb[static_cast<size_t>(all_u[k])] = v;
        ub[static_cast<size_t>(all_u[k])] = v;
      }
      const auto r = solve_lp(m, lb, ub);
      if (r.status == LpStatus::Optimal) oracle = std::min(oracle, r.objective);
    }
    REQUIRE(sol.objective == Approx(oracle).margin(1e-7));

    // ordering property: u_1 >= u_2 >= ... within integrality tolerance
    for (const auto& b : blocks)
      for (size_t k = 0; k + 1 < b.u_ids.size(); ++k)
        REQUIRE(sol.values[static_cast<size_t>(b.u_ids[k])] >=
                sol.values[static_cast<size_t>(b.u_ids[k + 1])] - 1e-6);
  }
}

TEST_CASE("warm start ordering does not change the optimum") {
  const auto p = base_partition({test::sin_curve(), test::cos_curve()}, 0.0, 2 * pi);
  MilpModel m;
  const int x = m.add_var("x", 0, 2 * pi);
  const int ys = m.add_var("ys", -kInf, kInf);
  const int yc = m.add_var("yc", -kInf, kInf);
  const auto bs = build_trig_block(m, triangle_cells(test::sin_curve(), p), x, ys, "s");
  build_trig_block(m, triangle_cells(test::cos_curve(), p), x, yc, "c", &bs.u_ids);
  m.objective = {{ys, 1.0}, {yc, 0.7}};
  const auto plain = solve_milp_builtin(m);
  MilpModel warm = m;
  warm.vars[static_cast<size_t>(x)].warm_start = 0.3;
  for (int u : bs.u_ids) warm.vars[static_cast<size_t>(u)].warm_start = 0.0;
  const auto warmed = solve_milp_builtin(warm);
  REQUIRE(plain.status == MilpStatus::Optimal);
  REQUIRE(warmed.status == MilpStatus::Optimal);
  REQUIRE(plain.objective == Approx(warmed.objective).margin(1e-12));
}

TEST_CASE("LP format round trip is exact") {
  MilpModel m;
  const int x = m.add_var("x", 0.25, 7.5);
  const int y = m.add_var("y_free", -kInf, kInf);
  const int k = m.add_var("k", -3, 9, Integrality::Integer);
  const int b = m.add_var("b", 0, 1, Integrality::Binary);
  m.objective = {{x, 1.0 / 3.0}, {y, -2.25}, {k, 1e-7}};
  m.objective_constant = 0.125;
  m.add_row(MilpRow{"r0", {{x, pi}, {y, -1.0}}, Sense::LessEqual, 10.0});
  m.add_row(MilpRow{"r1", {{k, 1.0}, {b, -5.0}}, Sense::GreaterEqual, -2.0});
  m.add_row(MilpRow{"r2", {{x, 1.0}, {y, 1.0}, {k, 1.0}}, Sense::Equal, 1.0 / 7.0});

  std::ostringstream ss;
  serialize_lp(m, ss);
  const auto m2 = parse_lp(ss.str());
  REQUIRE(m2.vars.size() == m.vars.size());
  REQUIRE(m2.rows.size() == m.rows.size());
  for (size_t i = 0; i < m.vars.size(); ++i) {
    REQUIRE(m2.vars[i].lower == m.vars[i].lower);
    REQUIRE(m2.vars[i].upper == m.vars[i].upper);
    REQUIRE(m2.vars[i].integrality == m.vars[i].integrality);
  }
  for (size_t i = 0; i < m.rows.size(); ++i) {
    REQUIRE(m2.rows[i].coeffs == m.rows[i].coeffs);
    REQUIRE(m2.rows[i].sense == m.rows[i].sense);
    REQUIRE(m2.rows[i].rhs == m.rows[i].rhs);
  }
  REQUIRE(m2.objective == m.objective);
  REQUIRE(m2.objective_constant == m.objective_constant);

  // serialization is byte-stable
  std::ostringstream ss2;
  serialize_lp(m2, ss2);
  REQUIRE(ss.str() == ss2.str());
}

TEST_CASE("subprocess backend solves a small MILP when available") {
  if (std::system("python3 -c 'import scipy.optimize' >/dev/null 2>&1") != 0) {
    SUCCEED("scipy unavailable; subprocess backend not exercised here");
    return;
  }
  MilpModel m;
  const int x = m.add_var("x", 0, 10);
  const int k = m.add_var("k", 0, 10, Integrality::Integer);
  m.objective = {{x, 1.0}, {k, 1.0}};
  m.add_row(MilpRow{"r", {{x, 1.0}, {k, 2.0}}, Sense::GreaterEqual, 7.3});
  SolverBackend cfg;
  cfg.backend = Backend::Subprocess;
  cfg.solver_cmd = "python3 " + std::string(TRIGOPT_SOURCE_DIR) + "/tools/scipy_milp_solve.py";
  const auto sol = solve_milp(m, cfg);
  REQUIRE(sol.status == MilpStatus::Optimal);
  const auto ref = solve_milp_builtin(m);
  REQUIRE(sol.objective == Approx(ref.objective).margin(1e-6));
}

TEST_CASE("LP serialization sections for a one-variable model") {
  MilpModel m;
  const int x = m.add_var("x", 0, 5);
  m.objective = {{x, 2.0}};
  std::ostringstream ss;
  serialize_lp(m, ss);
  const std::string text = ss.str();
  REQUIRE(text.find("Minimize") != std::string::npos);
  REQUIRE(text.find("Bounds") != std::string::npos);
  REQUIRE(text.find("0 <= x <= 5") != std::string::npos);
  REQUIRE(text.find("End") != std::string::npos);
  REQUIRE(text.find("Subject To") != std::string::npos);
}

TEST_CASE("binaries are listed in the integrality section") {
  MilpModel m;
  m.add_var("x", 0, 5);
  const int b = m.add_var("pick", 0, 1, Integrality::Binary);
  m.objective = {{b, 1.0}};
  std::ostringstream ss;
  serialize_lp(m, ss);
  const auto text = ss.str();
  const auto at = text.find("Binaries");
  REQUIRE(at != std::string::npos);
  REQUIRE(text.find("pick", at) != std::string::npos);
}
