#pragma once

#include <map>
#include <string>
#include <vector>

#include "trigopt/milp/model.hpp"
#include "trigopt/model.hpp"
#include "trigopt/partition.hpp"
#include "trigopt/relaxation.hpp"

namespace trigopt {

/// One partitioned variable: its partition, the owner terms, and the curves
/// of the trig owners (index-aligned with the trig TermRefs in owners).
struct PartitionEntry {
  VarId var = -1;
  Partition partition;
  std::vector<Curve> trig_curves;  // aligned with the trig owners in partition.owners
  int base_points = 2;

  long points_added() const {
    return static_cast<long>(partition.points.size()) - base_points;
  }
};

/// Groups the model's nonlinear terms into per-variable partition entries:
/// trig terms share one partition per input variable (base = union of base
/// partitions), bilinear terms attach to their partitioned variable (base =
/// the tightened domain as a single interval). Fixed variables get no entry;
/// their terms are emitted as linear rows at assembly time.
inline std::vector<PartitionEntry> build_base_partitions(const FactoredModel& m) {
  std::map<VarId, PartitionEntry> by_var;
  for (size_t i = 0; i < m.trig_terms.size(); ++i) {
    const auto& t = m.trig_terms[i];
    const auto& dom = m.variables[static_cast<size_t>(t.input)];
    if (dom.fixed()) continue;
    auto& e = by_var[t.input];
    e.var = t.input;
    e.partition.owners.push_back(TermRef{TermRef::Kind::Trig, static_cast<int>(i)});
    e.trig_curves.push_back(make_curve(t));
  }
  for (size_t i = 0; i < m.bilinear_terms.size(); ++i) {
    const auto& b = m.bilinear_terms[i];
    const VarId pv = b.partitioned_var();
    if (m.variables[static_cast<size_t>(pv)].fixed()) continue;
    if (m.variables[static_cast<size_t>(b.other_var())].fixed()) continue;  // emitted linear
    auto& e = by_var[pv];
    e.var = pv;
    e.partition.owners.push_back(TermRef{TermRef::Kind::Bilinear, static_cast<int>(i)});
  }
  std::vector<PartitionEntry> entries;
  for (auto& [var, e] : by_var) {
    const auto& dom = m.variables[static_cast<size_t>(var)];
    const auto owners = e.partition.owners;
    if (e.trig_curves.empty()) {
      e.partition.points = {PartitionPoint::real(dom.lower), PartitionPoint::real(dom.upper)};
    } else {
      e.partition = base_partition(e.trig_curves, dom.lower, dom.upper);
    }
    e.partition.owners = owners;
    e.base_points = static_cast<int>(e.partition.points.size());
    entries.push_back(std::move(e));
  }
  return entries;
}

struct Assembly {
  MilpModel milp;
  /// milp var ids of each entry's shared block binaries (empty for one cell)
  std::vector<std::vector<int>> entry_binaries;
};

/// Emits the MILP relaxation: the linear core verbatim plus one incremental
/// block per nonlinear term, sharing binaries across all terms on one
/// partition. Degenerate terms (fixed input or collapsed second factor)
/// become exact linear rows.
inline Assembly assemble_relaxation(const FactoredModel& m,
                                    const std::vector<PartitionEntry>& entries) {
  Assembly out;
  MilpModel& milp = out.milp;
  for (const auto& v : m.variables) {
    milp.add_var(v.name, v.lower, v.upper, v.integrality);
  }
  for (const auto& [id, c] : m.objective.coeffs) milp.objective[id] = c;
  milp.objective_constant = m.objective.constant;
  for (const auto& c : m.constraints) {
    MilpRow row;
    row.name = c.name;
    for (const auto& [id, v] : c.coeffs) row.coeffs[id] = v;
    row.sense = c.sense;
    row.rhs = c.rhs;
    milp.add_row(std::move(row));
  }

  std::vector<bool> term_emitted_trig(m.trig_terms.size(), false);
  std::vector<bool> term_emitted_bilin(m.bilinear_terms.size(), false);

  for (const auto& e : entries) {
    std::vector<int> shared_u;
    bool have_u = false;
    int curve_idx = 0;
    for (const auto& o : e.partition.owners) {
      if (o.kind == TermRef::Kind::Trig) {
        const auto& t = m.trig_terms[static_cast<size_t>(o.index)];
        const auto& curve = e.trig_curves[static_cast<size_t>(curve_idx++)];
        const std::string tag = "t_" + m.variables[static_cast<size_t>(t.output)].name;
        const auto cells = triangle_cells(curve, e.partition);
        const auto blk = build_trig_block(milp, cells, t.input, t.output, tag,
                                          have_u ? &shared_u : nullptr);
        if (!have_u) {
          shared_u = blk.u_ids;
          have_u = true;
        }
        term_emitted_trig[static_cast<size_t>(o.index)] = true;
      } else {
        const auto& b = m.bilinear_terms[static_cast<size_t>(o.index)];
        const auto& other = m.variables[static_cast<size_t>(b.other_var())];
        const std::string tag = "b_" + m.variables[static_cast<size_t>(b.output)].name;
        const auto cells = tetra_cells(e.partition, other.lower, other.upper);
        const auto blk = build_bilinear_block(milp, cells, b.partitioned_var(), b.other_var(),
                                              b.output, tag, have_u ? &shared_u : nullptr);
        if (!have_u) {
          shared_u = blk.u_ids;
          have_u = true;
        }
        term_emitted_bilin[static_cast<size_t>(o.index)] = true;
      }
    }
    out.entry_binaries.push_back(shared_u);
  }

  // degenerate terms: exact linear rows
  for (size_t i = 0; i < m.trig_terms.size(); ++i) {
    if (term_emitted_trig[i]) continue;
    const auto& t = m.trig_terms[i];
    const auto& in = m.variables[static_cast<size_t>(t.input)];
    MilpRow row;
    row.name = "fix_" + m.variables[static_cast<size_t>(t.output)].name;
    row.coeffs[t.output] = 1.0;
    row.sense = Sense::Equal;
    row.rhs = t.value(0.5 * (in.lower + in.upper));
    milp.add_row(std::move(row));
  }
  for (size_t i = 0; i < m.bilinear_terms.size(); ++i) {
    if (term_emitted_bilin[i]) continue;
    const auto& b = m.bilinear_terms[i];
    const auto& left = m.variables[static_cast<size_t>(b.left)];
    const auto& right = m.variables[static_cast<size_t>(b.right)];
    MilpRow row;
    row.name = "fix_" + m.variables[static_cast<size_t>(b.output)].name;
    row.sense = Sense::Equal;
    if (left.fixed()) {
      const double c = 0.5 * (left.lower + left.upper);
      row.coeffs[b.output] = 1.0;
      row.coeffs[b.right] = -c;
      // z = c * y; when both fixed this still pins z correctly
      if (right.fixed()) {
        row.coeffs.erase(b.right);
        row.rhs = c * 0.5 * (right.lower + right.upper);
      } else {
        row.rhs = 0.0;
      }
    } else {
      const double c = 0.5 * (right.lower + right.upper);
      row.coeffs[b.output] = 1.0;
      row.coeffs[b.left] = -c;
      row.rhs = 0.0;
    }
    milp.add_row(std::move(row));
  }
  return out;
}

}  // namespace trigopt
