#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trigopt/model.hpp"

namespace trigopt {

/// Tolerance below which two tangent slopes count as equal (the slope
/// condition of the base-partition definition fails).
inline constexpr double kSlopeTol = 1e-9;
/// Tolerance for identifying coincident partition points when merging.
inline constexpr double kPointMatchTol = 1e-12;

/// A partition point: either an exact rational multiple of pi (kept exact so
/// that base partitions of sinusoids merge without rounding) or a plain
/// double produced by refinement.
struct PartitionPoint {
  bool exact = false;
  long long num = 0;
  long long den = 1;
  double raw = 0.0;

  double value() const {
    return exact ? (static_cast<double>(num) / static_cast<double>(den)) * std::numbers::pi : raw;
  }

  static PartitionPoint pi_rational(long long num, long long den) {
    if (den == 0) throw std::invalid_argument("pi_rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    PartitionPoint p;
    p.exact = true;
    p.num = g ? num / g : num;
    p.den = g ? den / g : den;
    return p;
  }

  static PartitionPoint real(double v) {
    PartitionPoint p;
    p.raw = v;
    return p;
  }

  /// Midpoint; stays exact when both operands are exact and the arithmetic
  /// fits in 64 bits.
  static PartitionPoint midpoint(const PartitionPoint& a, const PartitionPoint& b) {
    if (a.exact && b.exact && a.den < (1LL << 28) && b.den < (1LL << 28) &&
        std::abs(a.num) < (1LL << 28) && std::abs(b.num) < (1LL << 28)) {
      return pi_rational(a.num * b.den + b.num * a.den, 2 * a.den * b.den);
    }
    return real(0.5 * (a.value() + b.value()));
  }

  bool same_as(const PartitionPoint& o, double tol = kPointMatchTol) const {
    if (exact && o.exact) return num * o.den == o.num * den;
    return std::abs(value() - o.value()) <= tol;
  }
};

inline bool operator<(const PartitionPoint& a, const PartitionPoint& b) {
  if (a.exact && b.exact) return a.num * b.den < b.num * a.den;
  return a.value() < b.value();
}

/// Reference to a nonlinear term owning (sharing) a partition.
struct TermRef {
  enum class Kind { Trig, Bilinear };
  Kind kind = Kind::Trig;
  int index = 0;
  bool operator==(const TermRef&) const = default;
};

/// A univariate curve as seen by the partitioning machinery: value, first
/// derivative, and a generator for the inflection points strictly inside a
/// query interval.
struct Curve {
  std::string label;
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<std::vector<PartitionPoint>(double, double)> inflections;
};

/// Ordered point sequence over a closed interval, possibly shared by several
/// nonlinear terms. Immutable value; refinement produces new partitions.
struct Partition {
  std::vector<PartitionPoint> points;  // strictly increasing, >= 2 points
  std::vector<TermRef> owners;

  double lo() const { return points.front().value(); }
  double hi() const { return points.back().value(); }
  int num_cells() const { return static_cast<int>(points.size()) - 1; }
  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.value());
    return v;
  }
  bool contains(double x, double tol = 0.0) const { return x >= lo() - tol && x <= hi() + tol; }
  /// Index of a partition point within tol of x, or -1.
  int point_index(double x, double tol) const {
    for (size_t i = 0; i < points.size(); ++i)
      if (std::abs(points[i].value() - x) <= tol) return static_cast<int>(i);
    return -1;
  }
  /// Index i of the sub-interval [x_i, x_{i+1}] containing x.
  int cell_index(double x) const {
    for (size_t i = 0; i + 1 < points.size(); ++i)
      if (x <= points[i + 1].value()) return static_cast<int>(i);
    return num_cells() - 1;
  }
};

namespace detail {

/// Best rational approximation p/q of v with q <= max_den, via continued
/// fractions; empty when no exact-enough representation exists.
inline std::optional<std::pair<long long, long long>> rationalize(double v, long long max_den,
                                                                  double tol) {
  if (!std::isfinite(v)) return std::nullopt;
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = v;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(x);
    if (std::abs(fl) > 1e17) return std::nullopt;
    const long long a = static_cast<long long>(fl);
    const long long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den || q2 < 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double rem = x - fl;
    if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - v) <= tol) break;
    if (rem < 1e-15) break;
    x = 1.0 / rem;
  }
  if (q1 <= 0) return std::nullopt;
  if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - v) > tol) return std::nullopt;
  return std::make_pair(p1, q1);
}

/// Inflection points of amplitude*sin(wx+phi) (or cos) strictly inside
/// (lo, hi): the roots of the base sinusoid. Exact pi-rationals when the
/// frequency and phase/pi are small rationals.
inline std::vector<PartitionPoint> sinusoid_inflections(double frequency, double phase,
                                                        bool cosine, double lo, double hi) {
  std::vector<PartitionPoint> out;
  const double pi = std::numbers::pi;
  // roots of sin(wx + p + shift) where shift = pi/2 for cosine's second
  // derivative (-cos), i.e. wx + p = k*pi (sin) or pi/2 + k*pi (cos)
  const double off = cosine ? 0.5 : 0.0;
  const double w = frequency, p = phase;
  // x = ((k + off)*pi - p) / w
  const auto wr = rationalize(w, 720, 1e-12);
  const auto pr = rationalize(p / pi, 720, 1e-12);
  const double t_lo = std::min(w * lo, w * hi) + p;
  const double t_hi = std::max(w * lo, w * hi) + p;
  const long long k0 = static_cast<long long>(std::ceil(t_lo / pi - off - 1e-9));
  const long long k1 = static_cast<long long>(std::floor(t_hi / pi - off + 1e-9));
  if (k1 - k0 > 200000) throw std::invalid_argument("sinusoid has too many inflection points");
  for (long long k = k0; k <= k1; ++k) {
    PartitionPoint pt;
    if (wr && pr) {
      // ((2k + 2*off)/2 - pn/pd) / (wn/wd) * pi
      const long long pn = pr->first, pd = pr->second, wn = wr->first, wd = wr->second;
      pt = PartitionPoint::pi_rational(((2 * k + (cosine ? 1 : 0)) * pd - 2 * pn) * wd,
                                       2 * pd * wn);
    } else {
      pt = PartitionPoint::real(((static_cast<double>(k) + off) * pi - p) / w);
    }
    const double v = pt.value();
    if (v > lo + kPointMatchTol && v < hi - kPointMatchTol) out.push_back(pt);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// View of a trig term as a partition curve.
inline Curve make_curve(const TrigTerm& t) {
  Curve c;
  c.label = t.kind == TrigKind::Sin ? "sin" : (t.kind == TrigKind::Cos ? "cos" : "user");
  c.value = [t](double x) { return t.value(x); };
  c.deriv = [t](double x) { return t.deriv(x); };
  if (t.kind == TrigKind::User) {
    auto user = t.user;
    c.inflections = [user](double lo, double hi) {
      std::vector<PartitionPoint> out;
      for (double v : user->inflections(lo, hi))
        if (v > lo + kPointMatchTol && v < hi - kPointMatchTol)
          out.push_back(PartitionPoint::real(v));
      std::sort(out.begin(), out.end());
      if (out.size() > 200000) throw std::invalid_argument("too many inflection points");
      return out;
    };
  } else {
    const double w = t.frequency, p = t.phase;
    const bool cosine = t.kind == TrigKind::Cos;
    c.inflections = [w, p, cosine](double lo, double hi) {
      return detail::sinusoid_inflections(w, p, cosine, lo, hi);
    };
  }
  return c;
}

namespace detail {

inline void sort_dedup(std::vector<PartitionPoint>& pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<PartitionPoint> out;
  for (const auto& p : pts) {
    if (!out.empty() && out.back().same_as(p)) {
      // prefer keeping the exact representation
      if (p.exact && !out.back().exact) out.back() = p;
      continue;
    }
    out.push_back(p);
  }
  pts = std::move(out);
}

inline bool slope_ok(const Curve& c, double a, double b) {
  return std::abs(c.deriv(a) - c.deriv(b)) > kSlopeTol;
}

/// Inserts midpoints until the slope condition holds on every sub-interval
/// for every curve. Bounded: repeated failure on the same shrinking
/// sub-interval means some curve is (near-)affine there, which no number of
/// points can fix.
inline void repair_slope(std::vector<PartitionPoint>& pts, const std::vector<Curve>& curves) {
  for (int pass = 0; pass < 40; ++pass) {
    bool inserted = false;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      for (const auto& c : curves) {
        if (!slope_ok(c, pts[i].value(), pts[i + 1].value())) {
          const auto mid = PartitionPoint::midpoint(pts[i], pts[i + 1]);
          if (mid.same_as(pts[i]) || mid.same_as(pts[i + 1]))
            throw std::runtime_error("slope condition unsatisfiable on degenerate sub-interval");
          if (slope_ok(c, pts[i].value(), mid.value()) ||
              slope_ok(c, mid.value(), pts[i + 1].value())) {
            pts.insert(pts.begin() + static_cast<long>(i) + 1, mid);
            inserted = true;
            break;
          }
          throw std::runtime_error("slope condition unsatisfiable (curve affine on [" +
                                   std::to_string(pts[i].value()) + ", " +
                                   std::to_string(pts[i + 1].value()) + "])");
        }
      }
      if (inserted) break;
    }
    if (!inserted) return;
  }
  throw std::runtime_error("slope repair did not converge");
}

}  // namespace detail

/// Builds a base partition for a set of curves sharing one interval: all
/// interior inflection points of every curve, both endpoints, plus the
/// minimum number of extra points needed for the slope condition.
inline Partition base_partition(const std::vector<Curve>& curves, PartitionPoint lo,
                                PartitionPoint hi) {
  if (!(lo.value() < hi.value())) throw std::invalid_argument("base_partition: empty interval");
  if (!std::isfinite(lo.value()) || !std::isfinite(hi.value()))
    throw std::invalid_argument("base_partition: unbounded interval");
  std::vector<PartitionPoint> pts{lo, hi};
  for (const auto& c : curves) {
    auto infl = c.inflections(lo.value(), hi.value());
    pts.insert(pts.end(), infl.begin(), infl.end());
  }
  detail::sort_dedup(pts);
  detail::repair_slope(pts, curves);
  Partition p;
  p.points = std::move(pts);
  return p;
}

inline Partition base_partition(const std::vector<Curve>& curves, double lo, double hi) {
  auto wrap = [](double v) {
    const auto r = detail::rationalize(v / std::numbers::pi, 720, 1e-12);
    return r ? PartitionPoint::pi_rational(r->first, r->second) : PartitionPoint::real(v);
  };
  return base_partition(curves, wrap(lo), wrap(hi));
}

/// Union of two partitions over the same interval, with midpoints inserted
/// only where the slope condition fails for some owner curve.
inline Partition merge_partitions(const Partition& a, const Partition& b,
                                  const std::vector<Curve>& curves) {
  if (std::abs(a.lo() - b.lo()) > 1e-9 || std::abs(a.hi() - b.hi()) > 1e-9)
    throw std::invalid_argument("merge_partitions: interval mismatch");
  std::vector<PartitionPoint> pts = a.points;
  pts.insert(pts.end(), b.points.begin(), b.points.end());
  detail::sort_dedup(pts);
  detail::repair_slope(pts, curves);
  Partition p;
  p.points = std::move(pts);
  p.owners = a.owners;
  for (const auto& o : b.owners)
    if (std::find(p.owners.begin(), p.owners.end(), o) == p.owners.end()) p.owners.push_back(o);
  return p;
}

/// True iff q is a valid refinement of p: strict point superset over the same
/// interval and the slope condition holds on q for every owner curve.
inline bool check_refinement(const Partition& p, const Partition& q,
                             const std::vector<Curve>& curves) {
  if (std::abs(p.lo() - q.lo()) > 1e-9 || std::abs(p.hi() - q.hi()) > 1e-9) return false;
  if (q.points.size() <= p.points.size()) return false;
  for (const auto& pp : p.points) {
    bool found = false;
    for (const auto& qp : q.points)
      if (qp.same_as(pp, 1e-12)) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  for (size_t i = 0; i + 1 < q.points.size(); ++i)
    for (const auto& c : curves)
      if (!detail::slope_ok(c, q.points[i].value(), q.points[i + 1].value())) return false;
  return true;
}

}  // namespace trigopt
