#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "trigopt/partition.hpp"

#include "test_helpers.hpp"

using namespace trigopt;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;

bool matches(const Partition& p, const std::vector<double>& expect, double tol = 1e-12) {
  if (p.points.size() != expect.size()) return false;
  for (size_t i = 0; i < expect.size(); ++i)
    if (std::abs(p.points[i].value() - expect[i]) > tol) return false;
  return true;
}

// mock user curve with derivative (x-3)^2: the slopes at 2 and 4 coincide, a
// midpoint at 3 separates them
Curve bent_curve() {
  Curve c;
  c.label = "bent";
  c.value = [](double x) { return std::pow(x - 3.0, 3) / 3.0; };
  c.deriv = [](double x) { return (x - 3.0) * (x - 3.0); };
  c.inflections = [](double, double) { return std::vector<PartitionPoint>{}; };
  return c;
}

Curve flagged_curve(double inflection_at) {
  Curve c;
  c.label = "flag";
  c.value = [](double x) { return std::sin(x); };
  c.deriv = [](double x) { return std::cos(x); };
  c.inflections = [inflection_at](double lo, double hi) {
    std::vector<PartitionPoint> v;
    if (inflection_at > lo && inflection_at < hi)
      v.push_back(PartitionPoint::real(inflection_at));
    return v;
  };
  return c;
}

}  // namespace

TEST_CASE("pi-rational points are exact and ordered") {
  const auto a = PartitionPoint::pi_rational(1, 2);
  const auto b = PartitionPoint::pi_rational(2, 4);
  REQUIRE(a.same_as(b));
  REQUIRE(a.value() == Approx(pi / 2));
  const auto c = PartitionPoint::midpoint(a, PartitionPoint::pi_rational(1, 1));
  REQUIRE(c.exact);
  REQUIRE(c.num == 3);
  REQUIRE(c.den == 4);
  REQUIRE(PartitionPoint::pi_rational(-1, 3) < a);
}

TEST_CASE("base partition of sin on [0, 2pi]") {
  const auto p = base_partition({test::sin_curve()}, 0.0, 2 * pi);
  REQUIRE(matches(p, {0.0, pi, 2 * pi}));
}

TEST_CASE("base partition of {sin, cos} on [0, 2pi]") {
  const auto p = base_partition({test::sin_curve(), test::cos_curve()}, 0.0, 2 * pi);
  REQUIRE(matches(p, {0.0, pi / 2, pi, 3 * pi / 2, 2 * pi}));
}

TEST_CASE("base partition of sin on [0, pi]") {
  const auto p = base_partition({test::sin_curve()}, 0.0, pi);
  REQUIRE(matches(p, {0.0, pi}));
}

TEST_CASE("shared sin/cos base partition on [-4pi, 4pi] has 17 points") {
  const auto p = base_partition({test::sin_curve(), test::cos_curve()}, -4 * pi, 4 * pi);
  REQUIRE(p.points.size() == 17);
  for (int k = 0; k <= 16; ++k)
    REQUIRE(p.points[static_cast<size_t>(k)].value() == Approx((-8 + k) * pi / 2).margin(1e-12));
}

TEST_CASE("merge of sin and cos base partitions") {
  const auto ps = base_partition({test::sin_curve()}, 0.0, 2 * pi);
  const auto pc = base_partition({test::cos_curve()}, 0.0, 2 * pi);
  REQUIRE(matches(pc, {0.0, pi / 2, 3 * pi / 2, 2 * pi}));
  const auto merged = merge_partitions(ps, pc, {test::sin_curve(), test::cos_curve()});
  REQUIRE(matches(merged, {0.0, pi / 2, pi, 3 * pi / 2, 2 * pi}));
}

TEST_CASE("merge with itself is idempotent") {
  const auto p = base_partition({test::sin_curve()}, 0.0, 2 * pi);
  const auto m = merge_partitions(p, p, {test::sin_curve()});
  REQUIRE(matches(m, {0.0, pi, 2 * pi}));
}

TEST_CASE("merge interval mismatch is rejected") {
  const auto a = base_partition({test::sin_curve()}, 0.0, pi);
  const auto b = base_partition({test::sin_curve()}, 0.0, 2 * pi);
  REQUIRE_THROWS_AS(merge_partitions(a, b, {test::sin_curve()}), std::invalid_argument);
}

TEST_CASE("merge inserts a midpoint where the slope condition fails") {
  // bent curve: f' = (x-3)^2, equal slopes at 2 and 4; partner partition
  // contributes the point 2, creating the offending pair (2, 4)
  const auto bent = bent_curve();
  const auto flag = flagged_curve(2.0);
  const auto pa = base_partition({bent}, 0.0, 4.0);
  REQUIRE(pa.points.size() == 2);  // no inflections reported, slopes 9 and 1 differ
  const auto pb = base_partition({flag}, 0.0, 4.0);
  REQUIRE(pb.points.size() == 3);
  const auto merged = merge_partitions(pa, pb, {bent, flag});
  REQUIRE(matches(merged, {0.0, 2.0, 3.0, 4.0}));
  // brute-force slope check over all sub-intervals for all owners
  for (size_t i = 0; i + 1 < merged.points.size(); ++i) {
    for (const auto& c : {bent, flag}) {
      REQUIRE(std::abs(c.deriv(merged.points[i].value()) -
                       c.deriv(merged.points[i + 1].value())) > kSlopeTol);
    }
  }
}

TEST_CASE("check_refinement accepts the bisected partition") {
  const auto p = base_partition({test::sin_curve()}, 0.0, 2 * pi);
  Partition q = p;
  q.points = {PartitionPoint::pi_rational(0, 1), PartitionPoint::pi_rational(1, 2),
              PartitionPoint::pi_rational(1, 1), PartitionPoint::pi_rational(3, 2),
              PartitionPoint::pi_rational(2, 1)};
  REQUIRE(check_refinement(p, q, {test::sin_curve()}));
  REQUIRE_FALSE(check_refinement(p, p, {test::sin_curve()}));
  Partition missing = q;
  missing.points.erase(missing.points.begin() + 2);  // drop pi, a point of p
  REQUIRE_FALSE(check_refinement(p, missing, {test::sin_curve()}));
}

TEST_CASE("admissible partitions have constant curvature sign per cell") {
  auto curves = std::vector<Curve>{test::sin_curve(), test::cos_curve()};
  const auto p = base_partition(curves, -4 * pi, 4 * pi);
  for (const auto& c : curves) {
    for (size_t i = 0; i + 1 < p.points.size(); ++i) {
      const double a = p.points[i].value(), b = p.points[i + 1].value();
      int sign = 0;
      for (int k = 1; k <= 100; ++k) {
        const double x = a + (b - a) * k / 101.0;
        // second derivative sign via the derivative's slope
        const double h = 1e-6;
        const double d2 = (c.deriv(x + h) - c.deriv(x - h)) / (2 * h);
        if (std::abs(d2) < 1e-6) continue;
        const int s = d2 > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        REQUIRE(s == sign);
      }
    }
  }
}

TEST_CASE("base partition minimality") {
  auto curves = std::vector<Curve>{test::sin_curve(), test::cos_curve()};
  const auto p = base_partition(curves, 0.0, 2 * pi);
  // removing any interior point must lose an inflection point or break the
  // slope condition
  for (size_t drop = 1; drop + 1 < p.points.size(); ++drop) {
    Partition q = p;
    q.points.erase(q.points.begin() + static_cast<long>(drop));
    bool lost_inflection = false;
    for (const auto& c : curves) {
      for (const auto& ip : c.inflections(p.lo(), p.hi())) {
        bool present = false;
        for (const auto& qp : q.points)
          if (qp.same_as(ip)) present = true;
        if (!present) lost_inflection = true;
      }
    }
    bool slope_broken = false;
    for (size_t i = 0; i + 1 < q.points.size(); ++i)
      for (const auto& c : curves)
        if (std::abs(c.deriv(q.points[i].value()) - c.deriv(q.points[i + 1].value())) <= kSlopeTol)
          slope_broken = true;
    REQUIRE((lost_inflection || slope_broken));
  }
}

TEST_CASE("base partition with affine stretch fails loudly") {
  Curve affine;
  affine.label = "affine";
  affine.value = [](double x) { return 2.0 * x + 1.0; };
  affine.deriv = [](double) { return 2.0; };
  affine.inflections = [](double, double) { return std::vector<PartitionPoint>{}; };
  REQUIRE_THROWS(base_partition({affine}, 0.0, 1.0));
}
