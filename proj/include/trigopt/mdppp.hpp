#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "trigopt/dubins.hpp"
#include "trigopt/model.hpp"

namespace trigopt {

/// An ordered waypoint sequence for a Dubins vehicle with fixed boundary
/// headings.
struct MdpppInstance {
  std::vector<std::array<double, 2>> points;
  double rho = 1.0;
  double theta_start = 0.0;
  double theta_end = 0.0;

  int num_stages() const { return static_cast<int>(points.size()) - 1; }
  double stage_distance(int i) const {
    const auto& a = points[static_cast<size_t>(i)];
    const auto& b = points[static_cast<size_t>(i) + 1];
    return std::hypot(b[0] - a[0], b[1] - a[1]);
  }
};

inline nlohmann::json instance_to_json(const MdpppInstance& inst) {
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const auto& p : inst.points) j["points"].push_back({p[0], p[1]});
  j["rho"] = inst.rho;
  j["theta_start"] = inst.theta_start;
  j["theta_end"] = inst.theta_end;
  return j;
}

inline MdpppInstance instance_from_json(const nlohmann::json& j) {
  MdpppInstance inst;
  for (const auto& p : j.at("points"))
    inst.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  inst.rho = j.at("rho").get<double>();
  inst.theta_start = j.at("theta_start").get<double>();
  inst.theta_end = j.at("theta_end").get<double>();
  if (inst.points.size() < 2) throw std::invalid_argument("instance needs at least 2 points");
  if (!(inst.rho > 0)) throw std::invalid_argument("instance needs rho > 0");
  return inst;
}

inline MdpppInstance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  in >> j;
  return instance_from_json(j);
}

inline void write_instance(const MdpppInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << instance_to_json(inst).dump(2) << "\n";
}

/// Variable ids of one stage of the LRSLR decomposition. Segment slots are
/// 1-based in names (xi1..xi5); theta slot 3 does not exist (the straight
/// segment keeps heading theta_2).
struct StageVars {
  std::array<VarId, 5> xi{-1, -1, -1, -1, -1};
  std::array<VarId, 6> theta{-1, -1, -1, -1, -1, -1};  // index j, j != 3
  std::array<VarId, 6> w{-1, -1, -1, -1, -1, -1};
  std::array<VarId, 6> z{-1, -1, -1, -1, -1, -1};
  VarId mu = -1, nu = -1;
  std::array<VarId, 5> beta{-1, -1, -1, -1, -1};
  std::array<double, 5> big_m{};
};

struct MdpppModel {
  FactoredModel model;
  std::vector<StageVars> stages;
  MdpppInstance instance;
};

namespace detail {

inline const int kThetaSlots[5] = {0, 1, 2, 4, 5};

}  // namespace detail

/// Builds the factored MINLP of the waypoint path-planning problem: per stage
/// the five segment lengths, six headings with sine/cosine outputs, the two
/// straight-displacement bilinear terms sharing the xi_3 partition, the turn
/// chaining rows, plus cross-stage heading continuity and boundary rows.
inline MdpppModel build_mdppp_model(const MdpppInstance& inst) {
  if (inst.points.size() < 2) throw std::invalid_argument("mdppp: need at least 2 points");
  if (!(inst.rho > 0)) throw std::invalid_argument("mdppp: rho must be positive");
  const double pi = std::numbers::pi;
  const double rho = inst.rho;
  MdpppModel out;
  out.instance = inst;
  FactoredModel& m = out.model;
  const int N = inst.num_stages();

  for (int i = 0; i < N; ++i) {
    StageVars s;
    const std::string si = std::to_string(i + 1);
    for (int j = 0; j < 5; ++j) {
      s.big_m[static_cast<size_t>(j)] =
          j == 2 ? inst.stage_distance(i) + 4 * rho : 2 * pi * rho;
      s.xi[static_cast<size_t>(j)] = m.add_variable("xi" + si + "_" + std::to_string(j + 1), 0.0,
                                                     s.big_m[static_cast<size_t>(j)]);
    }
    for (int j : detail::kThetaSlots) {
      double lo, hi;
      if (j == 0) {
        lo = 0;
        hi = 2 * pi;
      } else if (j == 1) {
        lo = 0;
        hi = 4 * pi;
      } else if (j == 5) {
        lo = -4 * pi;
        hi = 4 * pi;
      } else {
        lo = -2 * pi;
        hi = 4 * pi;
      }
      s.theta[static_cast<size_t>(j)] =
          m.add_variable("th" + si + "_" + std::to_string(j), lo, hi);
      s.w[static_cast<size_t>(j)] =
          m.add_variable("w" + si + "_" + std::to_string(j), -1.0, 1.0);
      s.z[static_cast<size_t>(j)] =
          m.add_variable("z" + si + "_" + std::to_string(j), -1.0, 1.0);
    }
    const double m3 = s.big_m[2];
    s.mu = m.add_variable("mu" + si, -m3, m3);
    s.nu = m.add_variable("nu" + si, -m3, m3);
    out.stages.push_back(s);
  }

  // objective: total path length
  for (const auto& s : out.stages)
    for (VarId xi : s.xi) m.objective.coeffs[xi] = 1.0;

  for (int i = 0; i < N; ++i) {
    const auto& s = out.stages[static_cast<size_t>(i)];
    const std::string si = std::to_string(i + 1);
    // trig terms w_j = sin(theta_j), z_j = cos(theta_j)
    for (int j : detail::kThetaSlots) {
      TrigTerm ts;
      ts.output = s.w[static_cast<size_t>(j)];
      ts.input = s.theta[static_cast<size_t>(j)];
      ts.kind = TrigKind::Sin;
      m.trig_terms.push_back(ts);
      TrigTerm tc = ts;
      tc.output = s.z[static_cast<size_t>(j)];
      tc.kind = TrigKind::Cos;
      m.trig_terms.push_back(tc);
    }
    // bilinear straight-segment displacements, partitioned on xi_3 (shared)
    BilinearTerm bm;
    bm.output = s.mu;
    bm.left = s.xi[2];
    bm.right = s.z[2];
    bm.partitioned = BilinearTerm::Side::Left;
    m.bilinear_terms.push_back(bm);
    BilinearTerm bn = bm;
    bn.output = s.nu;
    bn.right = s.w[2];
    m.bilinear_terms.push_back(bn);

    // displacement rows
    const auto& p0 = inst.points[static_cast<size_t>(i)];
    const auto& p1 = inst.points[static_cast<size_t>(i) + 1];
    LinearConstraint dx;
    dx.name = "dx" + si;
    dx.coeffs = {{s.w[0], -rho}, {s.w[1], 2 * rho}, {s.w[2], -2 * rho},
                 {s.w[4], 2 * rho}, {s.w[5], -rho}, {s.mu, 1.0}};
    dx.sense = Sense::Equal;
    dx.rhs = p1[0] - p0[0];
    m.constraints.push_back(std::move(dx));
    LinearConstraint dy;
    dy.name = "dy" + si;
    dy.coeffs = {{s.z[0], rho}, {s.z[1], -2 * rho}, {s.z[2], 2 * rho},
                 {s.z[4], -2 * rho}, {s.z[5], rho}, {s.nu, 1.0}};
    dy.sense = Sense::Equal;
    dy.rhs = p1[1] - p0[1];
    m.constraints.push_back(std::move(dy));

    // turn chaining: each turn advances or retreats the heading by xi_j / rho
    const double ir = 1.0 / rho;
    auto chain = [&](const char* name, VarId to, VarId from, VarId xi, double sign) {
      LinearConstraint c;
      c.name = name + si;
      c.coeffs = {{to, 1.0}, {from, -1.0}, {xi, -sign * ir}};
      c.sense = Sense::Equal;
      c.rhs = 0.0;
      m.constraints.push_back(std::move(c));
    };
    chain("turn1_", s.theta[1], s.theta[0], s.xi[0], +1.0);
    chain("turn2_", s.theta[2], s.theta[1], s.xi[1], -1.0);
    chain("turn4_", s.theta[4], s.theta[2], s.xi[3], +1.0);
    chain("turn5_", s.theta[5], s.theta[4], s.xi[4], -1.0);
  }

  // continuity between consecutive stages (slope equality via sin/cos)
  for (int i = 0; i + 1 < N; ++i) {
    const auto& a = out.stages[static_cast<size_t>(i)];
    const auto& b = out.stages[static_cast<size_t>(i) + 1];
    LinearConstraint cw;
    cw.name = "contw" + std::to_string(i + 1);
    cw.coeffs = {{b.w[0], 1.0}, {a.w[5], -1.0}};
    cw.sense = Sense::Equal;
    m.constraints.push_back(std::move(cw));
    LinearConstraint cz;
    cz.name = "contz" + std::to_string(i + 1);
    cz.coeffs = {{b.z[0], 1.0}, {a.z[5], -1.0}};
    cz.sense = Sense::Equal;
    m.constraints.push_back(std::move(cz));
  }

  // boundary: initial heading fixed; final heading fixed through sine/cosine
  {
    auto& th0 = m.variables[static_cast<size_t>(out.stages.front().theta[0])];
    const double t0 = normalize_angle(inst.theta_start);
    th0.lower = th0.upper = t0;
    const auto& last = out.stages.back();
    auto& wN = m.variables[static_cast<size_t>(last.w[5])];
    auto& zN = m.variables[static_cast<size_t>(last.z[5])];
    wN.lower = wN.upper = std::sin(inst.theta_end);
    zN.lower = zN.upper = std::cos(inst.theta_end);
  }
  return out;
}

/// Adds the segment-count binaries and the CSC structure cuts: at most three
/// segments per stage, big-M activation of every segment, the single-stage
/// CSC rows when waypoints are at least 4*rho apart, and the consecutive-CSC
/// turn matching of the corollary.
inline void apply_optimality_cuts(MdpppModel& mm) {
  FactoredModel& m = mm.model;
  const double rho = mm.instance.rho;
  const double pi = std::numbers::pi;
  const int N = mm.instance.num_stages();
  std::vector<bool> csc(static_cast<size_t>(N), false);
  for (int i = 0; i < N; ++i)
    csc[static_cast<size_t>(i)] = mm.instance.stage_distance(i) >= 4 * rho - 1e-9;

  for (int i = 0; i < N; ++i) {
    auto& s = mm.stages[static_cast<size_t>(i)];
    const std::string si = std::to_string(i + 1);
    LinearConstraint card;
    card.name = "card" + si;
    card.sense = Sense::LessEqual;
    card.rhs = 3.0;
    for (int j = 0; j < 5; ++j) {
      s.beta[static_cast<size_t>(j)] = m.add_variable(
          "beta" + si + "_" + std::to_string(j + 1), 0.0, 1.0, Integrality::Binary);
      card.coeffs[s.beta[static_cast<size_t>(j)]] = 1.0;
      LinearConstraint act;
      act.name = "act" + si + "_" + std::to_string(j + 1);
      act.coeffs = {{s.xi[static_cast<size_t>(j)], 1.0},
                    {s.beta[static_cast<size_t>(j)], -s.big_m[static_cast<size_t>(j)]}};
      act.sense = Sense::LessEqual;
      act.rhs = 0.0;
      m.constraints.push_back(std::move(act));
    }
    m.constraints.push_back(std::move(card));

    if (csc[static_cast<size_t>(i)]) {
      LinearConstraint first;
      first.name = "csc_first" + si;
      first.coeffs = {{s.beta[0], 1.0}, {s.beta[1], 1.0}};
      first.sense = Sense::LessEqual;
      first.rhs = 1.0;
      m.constraints.push_back(std::move(first));
      LinearConstraint straight;
      straight.name = "csc_straight" + si;
      straight.coeffs = {{s.beta[2], 1.0}};
      straight.sense = Sense::Equal;
      straight.rhs = 1.0;  // a straight segment is used (possibly zero length)
      m.constraints.push_back(std::move(straight));
      LinearConstraint second;
      second.name = "csc_second" + si;
      second.coeffs = {{s.beta[3], 1.0}, {s.beta[4], 1.0}};
      second.sense = Sense::LessEqual;
      second.rhs = 1.0;
      m.constraints.push_back(std::move(second));
    }
  }

  for (int i = 0; i + 1 < N; ++i) {
    if (!csc[static_cast<size_t>(i)] || !csc[static_cast<size_t>(i) + 1]) continue;
    const auto& a = mm.stages[static_cast<size_t>(i)];
    const auto& b = mm.stages[static_cast<size_t>(i) + 1];
    const std::string si = std::to_string(i + 1);
    auto eq = [&](const char* name, VarId va, VarId vb) {
      LinearConstraint c;
      c.name = name + si;
      c.coeffs = {{va, 1.0}, {vb, -1.0}};
      c.sense = Sense::Equal;
      c.rhs = 0.0;
      m.constraints.push_back(std::move(c));
    };
    eq("link_b4_", a.beta[3], b.beta[0]);
    eq("link_b5_", a.beta[4], b.beta[1]);
    eq("link_x4_", a.xi[3], b.xi[0]);
    eq("link_x5_", a.xi[4], b.xi[1]);
    LinearConstraint cap;
    cap.name = "firstturn_cap" + si;
    cap.coeffs = {{b.xi[0], 1.0}, {b.xi[1], 1.0}};
    cap.sense = Sense::LessEqual;
    cap.rhs = pi * rho;
    m.constraints.push_back(std::move(cap));
  }
}

/// Deterministic random instance: n points in the 10 x 10 grid, consecutive
/// spacing at least 4*rho with rho = 1, boundary headings uniform in
/// [0, 2pi].
inline MdpppInstance generate_instance(int n, uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_instance: n >= 2 required");
  std::mt19937_64 gen(seed);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
  };
  MdpppInstance inst;
  inst.rho = 1.0;
  for (long attempt = 0; attempt < 100000; ++attempt) {
    inst.points.clear();
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      bool placed = false;
      for (int tries = 0; tries < 200 && !placed; ++tries) {
        const double x = uniform(0.0, 10.0), y = uniform(0.0, 10.0);
        if (i == 0 || std::hypot(x - inst.points.back()[0], y - inst.points.back()[1]) >=
                          4 * inst.rho) {
          inst.points.push_back({x, y});
          placed = true;
        }
      }
      if (!placed) {
        ok = false;
        break;
      }
    }
    if (ok) {
      inst.theta_start = uniform(0.0, 2 * std::numbers::pi);
      inst.theta_end = uniform(0.0, 2 * std::numbers::pi);
      return inst;
    }
  }
  throw std::runtime_error("generate_instance: rejection sampling failed");
}

/// Headings the feasible-point heuristic drives through: the extracted
/// theta_0 of each stage plus the final heading recovered from (w_5, z_5) of
/// the last stage.
inline std::vector<double> heuristic_headings(const MdpppModel& mm,
                                              const std::vector<double>& values) {
  std::vector<double> h;
  for (const auto& s : mm.stages)
    h.push_back(normalize_angle(values[static_cast<size_t>(s.theta[0])]));
  const auto& last = mm.stages.back();
  h.push_back(normalize_angle(std::atan2(values[static_cast<size_t>(last.w[5])],
                                         values[static_cast<size_t>(last.z[5])])));
  return h;
}

struct MdpppSolution {
  double length = kInf;
  std::vector<DubinsPath> stage_paths;
  std::vector<double> headings;  // at p_1..p_n
};

/// Concatenated shortest Dubins paths through the waypoints at the given
/// headings; always a feasible solution, hence an upper bound.
inline MdpppSolution mdppp_path_from_headings(const MdpppInstance& inst,
                                              const std::vector<double>& headings) {
  MdpppSolution sol;
  sol.headings = headings;
  sol.length = 0.0;
  for (int i = 0; i < inst.num_stages(); ++i) {
    const Configuration a{inst.points[static_cast<size_t>(i)][0],
                          inst.points[static_cast<size_t>(i)][1],
                          headings[static_cast<size_t>(i)]};
    const Configuration b{inst.points[static_cast<size_t>(i) + 1][0],
                          inst.points[static_cast<size_t>(i) + 1][1],
                          headings[static_cast<size_t>(i) + 1]};
    sol.stage_paths.push_back(dubins_shortest_path(a, b, inst.rho));
    sol.length += sol.stage_paths.back().total_length;
  }
  return sol;
}

/// Maps a per-stage Dubins decomposition onto the model variables (warm-start
/// vector over the core variables; relaxation variables are left unset).
/// Values always satisfy the displacement, chaining, continuity, and trig /
/// bilinear equations; box or cut rows may reject them, which only costs the
/// warm start.
inline std::vector<double> mdppp_values_from_solution(const MdpppModel& mm,
                                                      const MdpppSolution& sol) {
  std::vector<double> v(mm.model.variables.size(), 0.0);
  const double rho = mm.instance.rho;
  for (size_t i = 0; i < mm.stages.size(); ++i) {
    const auto& s = mm.stages[i];
    const auto& path = sol.stage_paths[i];
    std::array<double, 5> xi{0, 0, 0, 0, 0};
    const double t = path.segment_lengths[0], p = path.segment_lengths[1],
                 q = path.segment_lengths[2];
    switch (path.word) {
      case DubinsWord::LSL: xi = {t, 0, p, q, 0}; break;
      case DubinsWord::RSR: xi = {0, t, p, 0, q}; break;
      case DubinsWord::LSR: xi = {t, 0, p, 0, q}; break;
      case DubinsWord::RSL: xi = {0, t, p, q, 0}; break;
      case DubinsWord::LRL: xi = {t, p, 0, q, 0}; break;
      case DubinsWord::RLR: xi = {0, t, 0, p, q}; break;
    }
    for (int j = 0; j < 5; ++j) v[static_cast<size_t>(s.xi[static_cast<size_t>(j)])] =
        xi[static_cast<size_t>(j)];
    const double th0 = sol.headings[i];
    const double th1 = th0 + xi[0] / rho;
    const double th2 = th1 - xi[1] / rho;
    const double th4 = th2 + xi[3] / rho;
    const double th5 = th4 - xi[4] / rho;
    const std::array<double, 6> th{th0, th1, th2, 0.0, th4, th5};
    for (int j : detail::kThetaSlots) {
      v[static_cast<size_t>(s.theta[static_cast<size_t>(j)])] = th[static_cast<size_t>(j)];
      v[static_cast<size_t>(s.w[static_cast<size_t>(j)])] = std::sin(th[static_cast<size_t>(j)]);
      v[static_cast<size_t>(s.z[static_cast<size_t>(j)])] = std::cos(th[static_cast<size_t>(j)]);
    }
    v[static_cast<size_t>(s.mu)] = xi[2] * std::cos(th2);
    v[static_cast<size_t>(s.nu)] = xi[2] * std::sin(th2);
    for (int j = 0; j < 5; ++j)
      if (s.beta[static_cast<size_t>(j)] >= 0)
        v[static_cast<size_t>(s.beta[static_cast<size_t>(j)])] =
            (j == 2 || xi[static_cast<size_t>(j)] > 1e-12) ? 1.0 : 0.0;
  }
  return v;
}

/// Upper-bound heuristic for the driver: extracts the stage headings from the
/// relaxation solution, runs the Dubins concatenation, and returns the length
/// together with warm-start values for the core variables.
inline std::function<std::optional<std::pair<double, std::vector<double>>>(
    const FactoredModel&, const std::vector<double>&)>
make_mdppp_heuristic(const MdpppModel& mm_in) {
  return [mm = mm_in](const FactoredModel&, const std::vector<double>& values)
             -> std::optional<std::pair<double, std::vector<double>>> {
    const auto headings = heuristic_headings(mm, values);
    const auto sol = mdppp_path_from_headings(mm.instance, headings);
    return std::make_pair(sol.length, mdppp_values_from_solution(mm, sol));
  };
}

/// Discretized dynamic program over headings at the interior waypoints
/// (boundary headings fixed): an independent optimum oracle up to the grid
/// slack 2*(2pi/grid)*rho per junction.
inline double mdppp_oracle(const MdpppInstance& inst, int grid = 256) {
  const int N = inst.num_stages();
  const double pi = std::numbers::pi;
  auto config = [&](int point, double heading) {
    return Configuration{inst.points[static_cast<size_t>(point)][0],
                         inst.points[static_cast<size_t>(point)][1], heading};
  };
  std::vector<double> cost(static_cast<size_t>(grid), 0.0);
  // cost[h] = best length from p_0 to p_i arriving with heading h
  for (int i = 0; i < N; ++i) {
    const bool first = i == 0;
    const bool last = i == N - 1;
    std::vector<double> next(static_cast<size_t>(last ? 1 : grid), kInf);
    const int out_count = last ? 1 : grid;
    const int in_count = first ? 1 : grid;
    for (int hi = 0; hi < in_count; ++hi) {
      const double h_in = first ? normalize_angle(inst.theta_start)
                                : 2 * pi * hi / grid;
      if (!first && cost[static_cast<size_t>(hi)] == kInf) continue;
      const double base = first ? 0.0 : cost[static_cast<size_t>(hi)];
      for (int ho = 0; ho < out_count; ++ho) {
        const double h_out = last ? normalize_angle(inst.theta_end) : 2 * pi * ho / grid;
        const double len =
            dubins_shortest_path(config(i, h_in), config(i + 1, h_out), inst.rho).total_length;
        next[static_cast<size_t>(ho)] = std::min(next[static_cast<size_t>(ho)], base + len);
      }
    }
    cost = std::move(next);
  }
  return cost[0];
}

}  // namespace trigopt
