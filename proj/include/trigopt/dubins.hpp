#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace trigopt {

/// Planar pose; heading normalized to [0, 2pi) at the API boundary.
struct Configuration {
  double x = 0.0, y = 0.0, heading = 0.0;
};

inline double normalize_angle(double a) {
  const double twopi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, twopi);
  if (r < 0) r += twopi;
  if (r >= twopi) r = 0.0;
  return r;
}

enum class DubinsWord { LSL, RSR, LSR, RSL, LRL, RLR };

inline const char* to_string(DubinsWord w) {
  switch (w) {
    case DubinsWord::LSL: return "LSL";
    case DubinsWord::RSR: return "RSR";
    case DubinsWord::LSR: return "LSR";
    case DubinsWord::RSL: return "RSL";
    case DubinsWord::LRL: return "LRL";
    case DubinsWord::RLR: return "RLR";
  }
  return "?";
}

struct DubinsPath {
  DubinsWord word = DubinsWord::LSL;
  std::array<double, 3> segment_lengths{};  // actual lengths (radius applied)
  double radius = 1.0;
  double total_length = 0.0;
};

namespace detail {

inline double mod2pi(double a) {
  const double twopi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, twopi);
  if (r < 0) r += twopi;
  return r;
}

struct WordParams {
  double t, p, q;
};

// normalized word solutions for start (0,0,alpha), goal (d,0,beta), rho = 1
inline std::optional<WordParams> word_lsl(double d, double a, double b) {
  const double p_sq = 2 + d * d - 2 * std::cos(a - b) + 2 * d * (std::sin(a) - std::sin(b));
  if (p_sq < 0) return std::nullopt;
  const double tmp = std::atan2(std::cos(b) - std::cos(a), d + std::sin(a) - std::sin(b));
  return WordParams{mod2pi(tmp - a), std::sqrt(p_sq), mod2pi(b - tmp)};
}

inline std::optional<WordParams> word_rsr(double d, double a, double b) {
  const double p_sq = 2 + d * d - 2 * std::cos(a - b) + 2 * d * (std::sin(b) - std::sin(a));
  if (p_sq < 0) return std::nullopt;
  const double tmp = std::atan2(std::cos(a) - std::cos(b), d - std::sin(a) + std::sin(b));
  return WordParams{mod2pi(a - tmp), std::sqrt(p_sq), mod2pi(tmp - b)};
}

inline std::optional<WordParams> word_lsr(double d, double a, double b) {
  const double p_sq = -2 + d * d + 2 * std::cos(a - b) + 2 * d * (std::sin(a) + std::sin(b));
  if (p_sq < 0) return std::nullopt;
  const double p = std::sqrt(p_sq);
  const double tmp =
      std::atan2(-std::cos(a) - std::cos(b), d + std::sin(a) + std::sin(b)) - std::atan2(-2.0, p);
  return WordParams{mod2pi(tmp - a), p, mod2pi(tmp - b)};
}

inline std::optional<WordParams> word_rsl(double d, double a, double b) {
  const double p_sq = -2 + d * d + 2 * std::cos(a - b) - 2 * d * (std::sin(a) + std::sin(b));
  if (p_sq < 0) return std::nullopt;
  const double p = std::sqrt(p_sq);
  const double tmp =
      std::atan2(std::cos(a) + std::cos(b), d - std::sin(a) - std::sin(b)) - std::atan2(2.0, p);
  return WordParams{mod2pi(a - tmp), p, mod2pi(b - tmp)};
}

inline std::optional<WordParams> word_rlr(double d, double a, double b) {
  const double tmp =
      (6.0 - d * d + 2 * std::cos(a - b) + 2 * d * (std::sin(a) - std::sin(b))) / 8.0;
  if (std::abs(tmp) > 1) return std::nullopt;
  const double p = mod2pi(2 * std::numbers::pi - std::acos(tmp));
  const double t =
      mod2pi(a - std::atan2(std::cos(a) - std::cos(b), d - std::sin(a) + std::sin(b)) + p / 2);
  return WordParams{t, p, mod2pi(a - b - t + p)};
}

inline std::optional<WordParams> word_lrl(double d, double a, double b) {
  const double tmp =
      (6.0 - d * d + 2 * std::cos(a - b) + 2 * d * (std::sin(b) - std::sin(a))) / 8.0;
  if (std::abs(tmp) > 1) return std::nullopt;
  const double p = mod2pi(2 * std::numbers::pi - std::acos(tmp));
  const double t =
      mod2pi(-a - std::atan2(std::cos(a) - std::cos(b), d + std::sin(a) - std::sin(b)) + p / 2);
  return WordParams{t, p, mod2pi(b - a - t + p)};
}

inline std::optional<WordParams> solve_word(DubinsWord w, double d, double a, double b) {
  switch (w) {
    case DubinsWord::LSL: return word_lsl(d, a, b);
    case DubinsWord::RSR: return word_rsr(d, a, b);
    case DubinsWord::LSR: return word_lsr(d, a, b);
    case DubinsWord::RSL: return word_rsl(d, a, b);
    case DubinsWord::LRL: return word_lrl(d, a, b);
    case DubinsWord::RLR: return word_rlr(d, a, b);
  }
  return std::nullopt;
}

inline char segment_kind(DubinsWord w, int seg) {
  static constexpr const char* kinds[6] = {"LSL", "RSR", "LSR", "RSL", "LRL", "RLR"};
  return kinds[static_cast<int>(w)][seg];
}

}  // namespace detail

/// Integrates the path's segments from q0; the result must match the target
/// configuration (the path invariant, tested to 1e-6).
inline Configuration reconstruct_endpoint(const Configuration& q0, const DubinsPath& path) {
  double x = q0.x, y = q0.y, h = q0.heading;
  for (int s = 0; s < 3; ++s) {
    const double len = path.segment_lengths[static_cast<size_t>(s)];
    if (len <= 0) continue;
    const char k = detail::segment_kind(path.word, s);
    if (k == 'S') {
      x += len * std::cos(h);
      y += len * std::sin(h);
    } else if (k == 'L') {
      const double h2 = h + len / path.radius;
      x += path.radius * (std::sin(h2) - std::sin(h));
      y += path.radius * (std::cos(h) - std::cos(h2));
      h = h2;
    } else {
      const double h2 = h - len / path.radius;
      x += path.radius * (std::sin(h) - std::sin(h2));
      y += path.radius * (std::cos(h2) - std::cos(h));
      h = h2;
    }
  }
  return Configuration{x, y, normalize_angle(h)};
}

/// Length of a specific word between two configurations, when the word admits
/// a solution.
inline std::optional<DubinsPath> dubins_word_path(const Configuration& q0,
                                                  const Configuration& q1, double rho,
                                                  DubinsWord w) {
  const double dx = q1.x - q0.x, dy = q1.y - q0.y;
  const double D = std::hypot(dx, dy);
  const double d = D / rho;
  const double phi = std::atan2(dy, dx);
  const double a = detail::mod2pi(q0.heading - phi);
  const double b = detail::mod2pi(q1.heading - phi);
  const auto params = detail::solve_word(w, d, a, b);
  if (!params) return std::nullopt;
  DubinsPath p;
  p.word = w;
  p.radius = rho;
  for (int s = 0; s < 3; ++s) {
    double len = (s == 0 ? params->t : s == 1 ? params->p : params->q) * rho;
    if (len < 1e-12) len = 0.0;  // clamp degenerate segments
    p.segment_lengths[static_cast<size_t>(s)] = len;
  }
  p.total_length = p.segment_lengths[0] + p.segment_lengths[1] + p.segment_lengths[2];
  return p;
}

/// Shortest Dubins path among all six candidate words.
inline DubinsPath dubins_shortest_path(const Configuration& q0_in, const Configuration& q1_in,
                                       double rho) {
  if (!(rho > 0)) throw std::invalid_argument("dubins: rho must be positive");
  Configuration q0 = q0_in, q1 = q1_in;
  q0.heading = normalize_angle(q0.heading);
  q1.heading = normalize_angle(q1.heading);
  std::optional<DubinsPath> best;
  for (DubinsWord w : {DubinsWord::LSL, DubinsWord::RSR, DubinsWord::LSR, DubinsWord::RSL,
                       DubinsWord::RLR, DubinsWord::LRL}) {
    const auto p = dubins_word_path(q0, q1, rho, w);
    if (!p) continue;
    // discard numerically invalid candidates
    const auto end = reconstruct_endpoint(q0, *p);
    const double err = std::hypot(end.x - q1.x, end.y - q1.y) +
                       std::abs(detail::mod2pi(end.heading - q1.heading + std::numbers::pi) -
                                std::numbers::pi);
    if (err > 1e-6) continue;
    if (!best || p->total_length < best->total_length) best = p;
  }
  if (!best) throw std::runtime_error("dubins: no word admits a solution (unexpected)");
  return *best;
}

/// Uniform arc-length samples of the path, starting at q0, spacing <= ds.
inline std::vector<Configuration> sample_path(const Configuration& q0, const DubinsPath& path,
                                              double ds = 0.05) {
  std::vector<Configuration> out;
  const int n = std::max(2, static_cast<int>(std::ceil(path.total_length / ds)) + 1);
  for (int i = 0; i < n; ++i) {
    double s = path.total_length * i / (n - 1);
    DubinsPath partial = path;
    for (int k = 0; k < 3; ++k) {
      const double len = path.segment_lengths[static_cast<size_t>(k)];
      partial.segment_lengths[static_cast<size_t>(k)] = std::min(s, len);
      s -= std::min(s, len);
    }
    out.push_back(reconstruct_endpoint(q0, partial));
  }
  return out;
}

}  // namespace trigopt
