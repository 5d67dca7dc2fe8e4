#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "trigopt/refinement.hpp"
#include "trigopt/relaxation.hpp"

#include "test_helpers.hpp"

using namespace trigopt;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;

Partition sin_0_pi() { return base_partition({test::sin_curve()}, 0.0, pi); }

RefinementConfig with(Scheme s) {
  RefinementConfig c;
  c.scheme = s;
  return c;
}

bool matches(const Partition& p, const std::vector<double>& expect, double tol = 1e-12) {
  if (p.points.size() != expect.size()) return false;
  for (size_t i = 0; i < expect.size(); ++i)
    if (std::abs(p.points[i].value() - expect[i]) > tol) return false;
  return true;
}

}  // namespace

TEST_CASE("bisection refinement at x* = 1 on (0, pi)") {
  const auto q = refine_partition(sin_0_pi(), 1.0, with(Scheme::Bisection));
  REQUIRE(matches(q, {0.0, pi / 2, pi}));
}

TEST_CASE("direct refinement adds x* itself") {
  const auto q = refine_partition(sin_0_pi(), 1.0, with(Scheme::Direct));
  REQUIRE(matches(q, {0.0, 1.0, pi}));
}

TEST_CASE("nu2 at x* = pi/3 with delta 2") {
  const auto q = refine_partition(sin_0_pi(), pi / 3, with(Scheme::NU2));
  REQUIRE(matches(q, {0.0, pi / 6, 2 * pi / 3, pi}));
}

TEST_CASE("nu3 also adds x*") {
  const auto q = refine_partition(sin_0_pi(), pi / 3, with(Scheme::NU3));
  REQUIRE(matches(q, {0.0, pi / 6, pi / 3, 2 * pi / 3, pi}));
}

TEST_CASE("x* on a partition point leaves the partition unchanged") {
  const auto p = base_partition({test::sin_curve()}, 0.0, 2 * pi);
  const auto q = refine_partition(p, pi, with(Scheme::NU3));
  REQUIRE(q.points.size() == p.points.size());
}

TEST_CASE("x* outside the interval is rejected") {
  REQUIRE_THROWS_AS(refine_partition(sin_0_pi(), 4.0, with(Scheme::Direct)),
                    std::invalid_argument);
}

TEST_CASE("rule 1: tiny containing cell bisects the largest instead") {
  Partition p = sin_0_pi();
  RefinementConfig cfg = with(Scheme::Direct);
  cfg.epsilon_len_frac = 0.2;  // threshold 0.2*pi
  // make a small cell near 0
  p = refine_partition(p, 0.3, cfg);  // cell [0, pi] big enough -> adds 0.3
  REQUIRE(matches(p, {0.0, 0.3, pi}));
  const auto q = refine_partition(p, 0.15, cfg);  // cell [0, 0.3] below eps
  // largest cell [0.3, pi] bisected instead
  REQUIRE(matches(q, {0.0, 0.3, (0.3 + pi) / 2, pi}));
}

TEST_CASE("refinements are valid refinements") {
  auto g = test::rng(55);
  for (Scheme s : {Scheme::Bisection, Scheme::Direct, Scheme::NU2, Scheme::NU3}) {
    Partition p = base_partition({test::sin_curve()}, 0.0, 2 * pi);
    for (int it = 0; it < 10; ++it) {
      const double x = test::uniform(g, 1e-3, 2 * pi - 1e-3);
      const auto q = refine_partition(p, x, with(s));
      if (q.points.size() == p.points.size()) continue;  // landed on a point
      REQUIRE(check_refinement(p, q, {test::sin_curve()}));
      p = q;
    }
  }
}

TEST_CASE("cut-off: direct and nu3 remove the off-curve relaxation point") {
  auto g = test::rng(123);
  int tested = 0;
  while (tested < 200) {
    const double lo = test::uniform(g, -6.0, 3.0);
    const double hi = lo + test::uniform(g, 1.0, 9.0);
    const auto curve = (g() % 2 == 0) ? test::sin_curve() : test::cos_curve();
    Partition p = base_partition({curve}, lo, hi);
    const double x_star = test::uniform(g, lo + 1e-4, hi - 1e-4);
    if (p.point_index(x_star, 1e-6) >= 0) continue;
    // off-curve y* inside the cell containing x*
    const auto cells = triangle_cells(curve, p);
    const auto& cell = cells[static_cast<size_t>(p.cell_index(x_star))];
    const double y_curve = curve.value(x_star);
    const double y_apex_dir = cell.v_apex[1] > y_curve ? 1.0 : -1.0;
    const double y_star = y_curve + y_apex_dir * test::uniform(g, 1e-3, 0.2);
    if (!cell_membership(cell, x_star, y_star)) continue;
    ++tested;
    for (Scheme s : {Scheme::Direct, Scheme::NU3}) {
      const auto q = refine_partition(p, x_star, with(s));
      const auto new_cells = triangle_cells(curve, q);
      for (const auto& nc : new_cells) {
        REQUIRE_FALSE(cell_membership(nc, x_star, y_star, 1e-12));
      }
    }
  }
}

TEST_CASE("rule 1 drives the maximum cell width to zero") {
  // 200 adversarial refinements always targeting the same tiny cell
  Partition p = base_partition({test::sin_curve()}, 0.0, 2 * pi);
  RefinementConfig cfg = with(Scheme::Direct);
  cfg.epsilon_len_frac = 0.02;
  const double eps_abs = cfg.epsilon_len_frac * 2 * pi;
  p = refine_partition(p, 1e-3, cfg);
  for (int it = 0; it < 200; ++it) {
    // adversary always points just inside the first (tiny) cell
    const double target = p.points[0].value() * 0.3 + p.points[1].value() * 0.7;
    p = refine_partition(p, target, cfg);
  }
  double max_w = 0.0;
  for (size_t i = 0; i + 1 < p.points.size(); ++i)
    max_w = std::max(max_w, p.points[i + 1].value() - p.points[i].value());
  REQUIRE(max_w <= std::max(eps_abs, 2 * pi / 64.0));
}

TEST_CASE("partition measure formula") {
  FactoredModel m;
  const VarId x = m.add_variable("x", 0.0, 2 * pi);
  const VarId ys = m.add_variable("ys", -1, 1);
  const VarId yc = m.add_variable("yc", -1, 1);
  m.trig_terms.push_back(test::sin_term(ys, x));
  m.trig_terms.push_back(test::cos_term(yc, x));

  Partition p;
  p.points = {PartitionPoint::real(0.0), PartitionPoint::real(2 * pi)};
  p.owners = {TermRef{TermRef::Kind::Trig, 0}};

  SECTION("single owner sin") {
    std::vector<double> vals(m.variables.size(), 0.0);
    vals[static_cast<size_t>(x)] = pi / 2;
    vals[static_cast<size_t>(ys)] = 0.8;
    REQUIRE(partition_measure(p, m, vals, x) == Approx(0.2));
  }
  SECTION("solution on the curve has measure zero") {
    std::vector<double> vals(m.variables.size(), 0.0);
    vals[static_cast<size_t>(x)] = 1.234;
    vals[static_cast<size_t>(ys)] = std::sin(1.234);
    REQUIRE(partition_measure(p, m, vals, x) == Approx(0.0).margin(1e-15));
  }
  SECTION("shared owners take the max deviation") {
    p.owners = {TermRef{TermRef::Kind::Trig, 0}, TermRef{TermRef::Kind::Trig, 1}};
    std::vector<double> vals(m.variables.size(), 0.0);
    vals[static_cast<size_t>(x)] = 0.0;
    vals[static_cast<size_t>(ys)] = 0.1;
    vals[static_cast<size_t>(yc)] = 0.95;
    REQUIRE(partition_measure(p, m, vals, x) == Approx(0.1));
  }
}

TEST_CASE("bilinear partition measure uses the product deviation") {
  FactoredModel m;
  const VarId x = m.add_variable("x", 0.0, 2.0);
  const VarId y = m.add_variable("y", 0.0, 3.0);
  const VarId z = m.add_variable("z", 0.0, 6.0);
  BilinearTerm b;
  b.output = z;
  b.left = x;
  b.right = y;
  b.partitioned = BilinearTerm::Side::Left;
  m.bilinear_terms.push_back(b);
  Partition p;
  p.points = {PartitionPoint::real(0.0), PartitionPoint::real(2.0)};
  p.owners = {TermRef{TermRef::Kind::Bilinear, 0}};
  std::vector<double> vals = {1.5, 2.0, 2.4};
  REQUIRE(partition_measure(p, m, vals, x) == Approx(0.6));
}

TEST_CASE("selection strategies") {
  StrategyConfig complete;
  complete.kind = StrategyConfig::Kind::Complete;
  REQUIRE(select_for_refinement({0.3, 0.0, 0.25}, complete) == std::vector<int>{0, 2});

  StrategyConfig k2;
  k2.kind = StrategyConfig::Kind::KWorst;
  k2.k = 2;
  k2.k_is_percent = false;
  REQUIRE(select_for_refinement({0.3, 0.1, 0.25}, k2) == std::vector<int>{0, 2});

  StrategyConfig pct50;
  pct50.kind = StrategyConfig::Kind::KWorst;
  pct50.k = 50.0;
  pct50.k_is_percent = true;
  // ceil(0.5 * 3) = 2 partitions
  REQUIRE(select_for_refinement({0.3, 0.1, 0.25}, pct50) == std::vector<int>{0, 2});

  REQUIRE(select_for_refinement({0.0, 0.0, 0.0}, complete).empty());
  REQUIRE(select_for_refinement({0.0, 0.0, 0.0}, k2).empty());

  // ties broken by lowest index
  StrategyConfig k1 = k2;
  k1.k = 1;
  REQUIRE(select_for_refinement({0.2, 0.2}, k1) == std::vector<int>{0});
}
