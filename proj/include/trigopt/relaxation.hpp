#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "trigopt/milp/model.hpp"
#include "trigopt/partition.hpp"

namespace trigopt {

/// Triangle containing the curve over one sub-interval: the two curve points
/// and the intersection of the tangents at them.
struct TriangleCell {
  std::array<double, 2> v_left;   // (x_i, f(x_i))
  std::array<double, 2> v_apex;   // tangent intersection
  std::array<double, 2> v_right;  // (x_{i+1}, f(x_{i+1}))
  double x_lo = 0.0, x_hi = 0.0;
  bool convex = false;
};

/// Tetrahedron (McCormick hull) of z = xy over [x_i, x_{i+1}] x [yL, yU].
struct TetraCell {
  std::array<std::array<double, 3>, 4> v;  // (x, y, z), z = xy at each vertex
  double x_lo = 0.0, x_hi = 0.0;
  double y_lo = 0.0, y_hi = 0.0;
};

/// One emitted incremental-formulation fragment: the (possibly shared)
/// binaries, this term's delta variables and rows.
struct RelaxationBlock {
  std::vector<int> u_ids;                      // m-1 binaries
  std::vector<std::vector<int>> delta_ids;     // per cell: 2 (triangle) or 3 (tetra)
  std::vector<int> row_ids;
  int x_row = -1, y_row = -1, z_row = -1;      // defining rows (z_row only for bilinear)
  int num_cells() const { return static_cast<int>(delta_ids.size()); }
  int num_deltas() const {
    int n = 0;
    for (const auto& d : delta_ids) n += static_cast<int>(d.size());
    return n;
  }
};

/// One triangle per sub-interval of an admissible partition satisfying the
/// slope condition. Throws when tangents are (near-)parallel, which an
/// admissible partition rules out.
inline std::vector<TriangleCell> triangle_cells(const Curve& f, const Partition& p) {
  std::vector<TriangleCell> cells;
  const auto xs = p.values();
  cells.reserve(xs.size() - 1);
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const double xa = xs[i], xb = xs[i + 1];
    const double fa = f.value(xa), fb = f.value(xb);
    const double da = f.deriv(xa), db = f.deriv(xb);
    if (std::abs(da - db) <= kSlopeTol)
      throw std::runtime_error("triangle_cells: parallel tangents on [" + std::to_string(xa) +
                               ", " + std::to_string(xb) + "] (slope condition violated)");
    // h_a(x) = fa + da (x - xa), h_b(x) = fb + db (x - xb)
    const double xi = (fb - fa + da * xa - db * xb) / (da - db);
    const double yi = fa + da * (xi - xa);
    TriangleCell c;
    c.v_left = {xa, fa};
    c.v_apex = {xi, yi};
    c.v_right = {xb, fb};
    c.x_lo = xa;
    c.x_hi = xb;
    // apex below the chord <=> tangents under-estimate <=> convex
    const double chord_at_apex = fa + (fb - fa) / (xb - xa) * (xi - xa);
    c.convex = yi < chord_at_apex;
    cells.push_back(c);
  }
  return cells;
}

/// One tetrahedron per sub-rectangle [x_i, x_{i+1}] x [yL, yU]; the vertices
/// lie on z = xy exactly.
inline std::vector<TetraCell> tetra_cells(const Partition& p_x, double y_lo, double y_hi) {
  if (!(y_hi - y_lo > 1e-12))
    throw std::invalid_argument("tetra_cells: degenerate y domain (term is linear)");
  std::vector<TetraCell> cells;
  const auto xs = p_x.values();
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const double xa = xs[i], xb = xs[i + 1];
    TetraCell c;
    c.v[0] = {xa, y_lo, xa * y_lo};
    c.v[1] = {xa, y_hi, xa * y_hi};
    c.v[2] = {xb, y_hi, xb * y_hi};
    c.v[3] = {xb, y_lo, xb * y_lo};
    c.x_lo = xa;
    c.x_hi = xb;
    c.y_lo = y_lo;
    c.y_hi = y_hi;
    cells.push_back(c);
  }
  return cells;
}

namespace detail {

// Gaussian elimination with partial pivoting on an n x (n+1) augmented matrix.
template <int N>
inline bool solve_dense(std::array<std::array<double, N + 1>, N>& a, std::array<double, N>& x) {
  for (int col = 0; col < N; ++col) {
    int piv = col;
    for (int r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-14) return false;
    std::swap(a[col], a[piv]);
    for (int r = 0; r < N; ++r) {
      if (r == col) continue;
      const double m = a[r][col] / a[col][col];
      if (m == 0.0) continue;
      for (int c = col; c <= N; ++c) a[r][c] -= m * a[col][c];
    }
  }
  for (int i = 0; i < N; ++i) x[i] = a[i][N] / a[i][i];
  return true;
}

}  // namespace detail

/// Convex-hull membership via barycentric coordinates, tolerance 1e-9.
inline bool cell_membership(const TriangleCell& c, double x, double y, double tol = 1e-9) {
  // lam0*v_left + lam1*v_apex + lam2*v_right = (x, y), sum lam = 1
  std::array<std::array<double, 4>, 3> a{{{c.v_left[0], c.v_apex[0], c.v_right[0], x},
                                          {c.v_left[1], c.v_apex[1], c.v_right[1], y},
                                          {1.0, 1.0, 1.0, 1.0}}};
  std::array<double, 3> lam{};
  if (!detail::solve_dense<3>(a, lam)) return false;
  return lam[0] >= -tol && lam[1] >= -tol && lam[2] >= -tol;
}

inline bool cell_membership(const TetraCell& c, double x, double y, double z,
                            double tol = 1e-9) {
  std::array<std::array<double, 5>, 4> a{{{c.v[0][0], c.v[1][0], c.v[2][0], c.v[3][0], x},
                                          {c.v[0][1], c.v[1][1], c.v[2][1], c.v[3][1], y},
                                          {c.v[0][2], c.v[1][2], c.v[2][2], c.v[3][2], z},
                                          {1.0, 1.0, 1.0, 1.0, 1.0}}};
  std::array<double, 4> lam{};
  if (!detail::solve_dense<4>(a, lam)) return false;
  return lam[0] >= -tol && lam[1] >= -tol && lam[2] >= -tol && lam[3] >= -tol;
}

namespace detail {

inline std::vector<int> make_block_binaries(MilpModel& m, const std::string& tag, int num_cells,
                                            const std::vector<int>* shared_u, int position_var,
                                            std::vector<double> cuts) {
  if (shared_u) {
    if (static_cast<int>(shared_u->size()) != num_cells - 1)
      throw std::invalid_argument("shared binaries do not match cell count");
    return *shared_u;
  }
  std::vector<int> u;
  for (int i = 1; i < num_cells; ++i)
    u.push_back(m.add_var(tag + "_u" + std::to_string(i), 0.0, 1.0, Integrality::Binary));
  if (num_cells > 1) m.blocks.push_back(BlockInfo{u, num_cells, position_var, std::move(cuts)});
  return u;
}

}  // namespace detail

/// Incremental formulation of the disjunctive union of triangles. New
/// binaries are allocated unless shared ones are supplied; delta variables
/// and rows are always per term.
inline RelaxationBlock build_trig_block(MilpModel& m, const std::vector<TriangleCell>& cells,
                                        int x_var, int y_var, const std::string& tag,
                                        const std::vector<int>* shared_u = nullptr) {
  if (cells.empty()) throw std::invalid_argument("build_trig_block: no cells");
  const int mc = static_cast<int>(cells.size());
  RelaxationBlock blk;
  std::vector<double> cuts;
  for (int i = 0; i + 1 < mc; ++i) cuts.push_back(cells[static_cast<size_t>(i)].x_hi);
  blk.u_ids = detail::make_block_binaries(m, tag, mc, shared_u, x_var, std::move(cuts));
  for (int i = 0; i < mc; ++i) {
    const std::string base = tag + "_d" + std::to_string(i + 1);
    blk.delta_ids.push_back({m.add_var(base + "_1", 0.0, 1.0), m.add_var(base + "_2", 0.0, 1.0)});
  }

  // x = v0x + sum_i d1_i (apex_i - v_{i-1})_x + d2_i (v_i - v_{i-1})_x ; same for y
  MilpRow xr{tag + "_x", {}, Sense::Equal, 0.0};
  MilpRow yr{tag + "_y", {}, Sense::Equal, 0.0};
  xr.coeffs[x_var] = 1.0;
  yr.coeffs[y_var] = 1.0;
  xr.rhs = cells.front().v_left[0];
  yr.rhs = cells.front().v_left[1];
  for (int i = 0; i < mc; ++i) {
    const auto& c = cells[static_cast<size_t>(i)];
    xr.coeffs[blk.delta_ids[i][0]] = -(c.v_apex[0] - c.v_left[0]);
    xr.coeffs[blk.delta_ids[i][1]] = -(c.v_right[0] - c.v_left[0]);
    yr.coeffs[blk.delta_ids[i][0]] = -(c.v_apex[1] - c.v_left[1]);
    yr.coeffs[blk.delta_ids[i][1]] = -(c.v_right[1] - c.v_left[1]);
  }
  blk.x_row = m.add_row(std::move(xr));
  blk.y_row = m.add_row(std::move(yr));
  blk.row_ids = {blk.x_row, blk.y_row};

  // d1_1 + d2_1 <= 1 ; d1_i + d2_i <= u_{i-1} <= d2_{i-1}
  {
    MilpRow first{tag + "_cap1", {}, Sense::LessEqual, 1.0};
    first.coeffs[blk.delta_ids[0][0]] = 1.0;
    first.coeffs[blk.delta_ids[0][1]] = 1.0;
    blk.row_ids.push_back(m.add_row(std::move(first)));
  }
  for (int i = 1; i < mc; ++i) {
    MilpRow cap{tag + "_cap" + std::to_string(i + 1), {}, Sense::LessEqual, 0.0};
    cap.coeffs[blk.delta_ids[i][0]] = 1.0;
    cap.coeffs[blk.delta_ids[i][1]] = 1.0;
    cap.coeffs[blk.u_ids[static_cast<size_t>(i - 1)]] = -1.0;
    blk.row_ids.push_back(m.add_row(std::move(cap)));
    // u_{i-1} <= d2_{i-1} (emitted once per term; for shared u the repeats
    // tighten identically)
    MilpRow link{tag + "_lnk" + std::to_string(i), {}, Sense::LessEqual, 0.0};
    link.coeffs[blk.u_ids[static_cast<size_t>(i - 1)]] = 1.0;
    link.coeffs[blk.delta_ids[i - 1][1]] = -1.0;
    blk.row_ids.push_back(m.add_row(std::move(link)));
  }
  return blk;
}

/// Incremental formulation of the disjunctive union of tetrahedra.
inline RelaxationBlock build_bilinear_block(MilpModel& m, const std::vector<TetraCell>& cells,
                                            int x_var, int y_var, int z_var,
                                            const std::string& tag,
                                            const std::vector<int>* shared_u = nullptr) {
  if (cells.empty()) throw std::invalid_argument("build_bilinear_block: no cells");
  const int mc = static_cast<int>(cells.size());
  RelaxationBlock blk;
  std::vector<double> cuts;
  for (int i = 0; i + 1 < mc; ++i) cuts.push_back(cells[static_cast<size_t>(i)].x_hi);
  blk.u_ids = detail::make_block_binaries(m, tag, mc, shared_u, x_var, std::move(cuts));
  for (int i = 0; i < mc; ++i) {
    const std::string base = tag + "_d" + std::to_string(i + 1);
    blk.delta_ids.push_back({m.add_var(base + "_1", 0.0, 1.0), m.add_var(base + "_2", 0.0, 1.0),
                             m.add_var(base + "_3", 0.0, 1.0)});
  }

  const double yL = cells.front().y_lo, yU = cells.front().y_hi;
  MilpRow xr{tag + "_x", {}, Sense::Equal, cells.front().x_lo};
  MilpRow yr{tag + "_y", {}, Sense::Equal, yL};
  MilpRow zr{tag + "_z", {}, Sense::Equal, cells.front().x_lo * yL};
  xr.coeffs[x_var] = 1.0;
  yr.coeffs[y_var] = 1.0;
  zr.coeffs[z_var] = 1.0;
  for (int i = 0; i < mc; ++i) {
    const auto& c = cells[static_cast<size_t>(i)];
    const double xa = c.x_lo, xb = c.x_hi;
    xr.coeffs[blk.delta_ids[i][1]] = -(xb - xa);
    xr.coeffs[blk.delta_ids[i][2]] = -(xb - xa);
    yr.coeffs[blk.delta_ids[i][0]] = -(yU - yL);
    yr.coeffs[blk.delta_ids[i][1]] = -(yU - yL);
    zr.coeffs[blk.delta_ids[i][0]] = -(xa * yU - xa * yL);
    zr.coeffs[blk.delta_ids[i][1]] = -(xb * yU - xa * yL);
    zr.coeffs[blk.delta_ids[i][2]] = -(xb * yL - xa * yL);
  }
  blk.x_row = m.add_row(std::move(xr));
  blk.y_row = m.add_row(std::move(yr));
  blk.z_row = m.add_row(std::move(zr));
  blk.row_ids = {blk.x_row, blk.y_row, blk.z_row};

  {
    MilpRow first{tag + "_cap1", {}, Sense::LessEqual, 1.0};
    for (int k = 0; k < 3; ++k) first.coeffs[blk.delta_ids[0][static_cast<size_t>(k)]] = 1.0;
    blk.row_ids.push_back(m.add_row(std::move(first)));
  }
  for (int i = 1; i < mc; ++i) {
    MilpRow cap{tag + "_cap" + std::to_string(i + 1), {}, Sense::LessEqual, 0.0};
    for (int k = 0; k < 3; ++k) cap.coeffs[blk.delta_ids[i][static_cast<size_t>(k)]] = 1.0;
    cap.coeffs[blk.u_ids[static_cast<size_t>(i - 1)]] = -1.0;
    blk.row_ids.push_back(m.add_row(std::move(cap)));
    MilpRow link{tag + "_lnk" + std::to_string(i), {}, Sense::LessEqual, 0.0};
    link.coeffs[blk.u_ids[static_cast<size_t>(i - 1)]] = 1.0;
    link.coeffs[blk.delta_ids[i - 1][2]] = -1.0;
    blk.row_ids.push_back(m.add_row(std::move(link)));
  }
  return blk;
}

}  // namespace trigopt
