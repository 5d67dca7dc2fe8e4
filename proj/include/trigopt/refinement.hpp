#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "trigopt/model.hpp"
#include "trigopt/partition.hpp"

namespace trigopt {

enum class Scheme { Bisection, Direct, NU2, NU3 };

struct RefinementConfig {
  Scheme scheme = Scheme::NU2;
  double delta1 = 2.0;  // contraction factors of the non-uniform schemes
  double delta2 = 2.0;
  /// Rule-1 threshold as a fraction of the partition interval width.
  double epsilon_len_frac = 1e-4;
  /// x* within this distance of a partition point means "do not refine".
  double on_point_tol = 1e-8;
};

struct StrategyConfig {
  enum class Kind { Complete, KWorst };
  Kind kind = Kind::KWorst;
  double k = 50.0;
  bool k_is_percent = true;
  /// Partitions whose measure is at or below this are never selected.
  double on_curve_tol = 1e-8;
};

namespace detail {

inline void insert_sorted(Partition& p, PartitionPoint pt, double on_point_tol) {
  const double v = pt.value();
  if (p.point_index(v, on_point_tol) >= 0) return;  // collides with an existing point
  auto it = std::upper_bound(p.points.begin(), p.points.end(), pt);
  p.points.insert(it, pt);
}

inline void bisect_largest(Partition& p) {
  size_t best = 0;
  double best_w = -1.0;
  for (size_t i = 0; i + 1 < p.points.size(); ++i) {
    const double w = p.points[i + 1].value() - p.points[i].value();
    if (w > best_w + 1e-15) {
      best_w = w;
      best = i;
    }
  }
  insert_sorted(p, PartitionPoint::midpoint(p.points[best], p.points[best + 1]), 0.0);
}

}  // namespace detail

/// Applies the configured refinement scheme at the relaxation point x*.
/// Returns p unchanged when x* sits on a partition point; falls back to
/// bisecting the largest sub-interval (consistency Rule 1) when the
/// containing sub-interval is already shorter than the epsilon threshold.
inline Partition refine_partition(const Partition& p, double x_star,
                                  const RefinementConfig& cfg) {
  if (!p.contains(x_star, 1e-9))
    throw std::invalid_argument("refine_partition: x* outside the partition interval");
  if (p.point_index(x_star, cfg.on_point_tol) >= 0) return p;

  Partition q = p;
  const int cell = p.cell_index(x_star);
  const double xi = p.points[static_cast<size_t>(cell)].value();
  const double xj = p.points[static_cast<size_t>(cell) + 1].value();
  const double eps_len = cfg.epsilon_len_frac * (p.hi() - p.lo());
  if (xj - xi < eps_len) {
    detail::bisect_largest(q);
    return q;
  }
  switch (cfg.scheme) {
    case Scheme::Bisection:
      detail::insert_sorted(q,
                            PartitionPoint::midpoint(p.points[static_cast<size_t>(cell)],
                                                     p.points[static_cast<size_t>(cell) + 1]),
                            cfg.on_point_tol);
      break;
    case Scheme::Direct:
      detail::insert_sorted(q, PartitionPoint::real(x_star), cfg.on_point_tol);
      break;
    case Scheme::NU2:
    case Scheme::NU3: {
      const double x1 = x_star - (x_star - xi) / cfg.delta1;
      const double x2 = x_star + (xj - x_star) / cfg.delta2;
      detail::insert_sorted(q, PartitionPoint::real(x1), cfg.on_point_tol);
      if (cfg.scheme == Scheme::NU3)
        detail::insert_sorted(q, PartitionPoint::real(x_star), cfg.on_point_tol);
      detail::insert_sorted(q, PartitionPoint::real(x2), cfg.on_point_tol);
      break;
    }
  }
  return q;
}

/// Measure of a partition given a relaxation solution: the largest deviation
/// between an owner term's true value at x* and its relaxation value.
inline double partition_measure(const Partition& p, const FactoredModel& m,
                                const std::vector<double>& values, VarId partition_var) {
  const double x_star = values[static_cast<size_t>(partition_var)];
  double mu = 0.0;
  for (const auto& o : p.owners) {
    if (o.kind == TermRef::Kind::Trig) {
      const auto& t = m.trig_terms[static_cast<size_t>(o.index)];
      mu = std::max(mu, std::abs(t.value(x_star) - values[static_cast<size_t>(t.output)]));
    } else {
      const auto& b = m.bilinear_terms[static_cast<size_t>(o.index)];
      const double prod = values[static_cast<size_t>(b.left)] *
                          values[static_cast<size_t>(b.right)];
      mu = std::max(mu, std::abs(prod - values[static_cast<size_t>(b.output)]));
    }
  }
  return mu;
}

/// Complete strategy: every partition with a positive measure. k-worst: the k
/// partitions with the highest measures, ties broken by lowest index.
/// On-curve partitions (measure <= tolerance) are never selected.
inline std::vector<int> select_for_refinement(const std::vector<double>& measures,
                                              const StrategyConfig& cfg) {
  std::vector<int> eligible;
  for (size_t i = 0; i < measures.size(); ++i)
    if (measures[i] > cfg.on_curve_tol) eligible.push_back(static_cast<int>(i));
  if (cfg.kind == StrategyConfig::Kind::Complete) return eligible;
  size_t k;
  if (cfg.k_is_percent)
    k = static_cast<size_t>(std::ceil(cfg.k / 100.0 * static_cast<double>(measures.size())));
  else
    k = static_cast<size_t>(cfg.k);
  k = std::max<size_t>(k, 1);
  std::stable_sort(eligible.begin(), eligible.end(), [&](int a, int b) {
    return measures[static_cast<size_t>(a)] > measures[static_cast<size_t>(b)];
  });
  if (eligible.size() > k) eligible.resize(k);
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

}  // namespace trigopt
