#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace trigopt {

using VarId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Integrality { Continuous, Integer, Binary };
enum class Sense { LessEqual, Equal, GreaterEqual };

/// Closed (possibly unbounded) variable domain with an integrality mark.
struct VarDomain {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
  Integrality integrality = Integrality::Continuous;

  double width() const { return upper - lower; }
  bool bounded() const { return std::isfinite(lower) && std::isfinite(upper); }
  bool fixed(double tol = 1e-12) const { return bounded() && upper - lower <= tol; }
};

/// Sparse linear expression; also used for the (minimized) objective.
struct LinearForm {
  std::map<VarId, double> coeffs;
  double constant = 0.0;

  double evaluate(const std::vector<double>& x) const {
    double v = constant;
    for (const auto& [id, c] : coeffs) v += c * x[static_cast<size_t>(id)];
    return v;
  }
};

struct LinearConstraint {
  std::string name;
  std::map<VarId, double> coeffs;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

enum class TrigKind { Sin, Cos, User };

/// Callbacks describing a user-supplied univariate curve: value, first
/// derivative, and a generator listing the interior inflection points of the
/// curve inside a query interval.
struct UserCurve {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<std::vector<double>(double, double)> inflections;
};

/// y = amplitude * sin/cos(frequency * x + phase), or a user curve.
struct TrigTerm {
  VarId output = -1;
  VarId input = -1;
  TrigKind kind = TrigKind::Sin;
  double amplitude = 1.0;
  double frequency = 1.0;
  double phase = 0.0;
  std::shared_ptr<const UserCurve> user;

  double value(double x) const {
    switch (kind) {
      case TrigKind::Sin: return amplitude * std::sin(frequency * x + phase);
      case TrigKind::Cos: return amplitude * std::cos(frequency * x + phase);
      case TrigKind::User: return user->value(x);
    }
    return 0.0;
  }
  double deriv(double x) const {
    switch (kind) {
      case TrigKind::Sin: return amplitude * frequency * std::cos(frequency * x + phase);
      case TrigKind::Cos: return -amplitude * frequency * std::sin(frequency * x + phase);
      case TrigKind::User: return user->deriv(x);
    }
    return 0.0;
  }
  /// Period of the sinusoid; user curves report 0 (not necessarily periodic).
  double period() const {
    if (kind == TrigKind::User) return 0.0;
    return 2.0 * std::numbers::pi / std::abs(frequency);
  }
};

struct BilinearTerm {
  VarId output = -1;
  VarId left = -1;
  VarId right = -1;
  enum class Side { Auto, Left, Right };
  Side partitioned = Side::Auto;

  VarId partitioned_var() const { return partitioned == Side::Right ? right : left; }
  VarId other_var() const { return partitioned == Side::Right ? left : right; }
};

/// The factored MINLP: a linear core plus isolated trigonometric and bilinear
/// term definitions. Treated as an immutable value after construction;
/// transformations return new models.
struct FactoredModel {
  std::vector<VarDomain> variables;
  LinearForm objective;
  std::vector<LinearConstraint> constraints;
  std::vector<TrigTerm> trig_terms;
  std::vector<BilinearTerm> bilinear_terms;

  VarId add_variable(std::string name, double lo, double hi,
                     Integrality integ = Integrality::Continuous) {
    if (name.empty()) name = "v" + std::to_string(variables.size());
    variables.push_back(VarDomain{std::move(name), lo, hi, integ});
    return static_cast<VarId>(variables.size() - 1);
  }

  /// Index of the named variable, or -1.
  VarId find_variable(const std::string& name) const {
    for (size_t i = 0; i < variables.size(); ++i)
      if (variables[i].name == name) return static_cast<VarId>(i);
    return -1;
  }

  bool valid_var(VarId v) const {
    return v >= 0 && static_cast<size_t>(v) < variables.size();
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v << "\n";
    return os.str();
  }
};

namespace detail {

inline void check_refs(const FactoredModel& m, const std::map<VarId, double>& coeffs,
                       const std::string& where, ValidationReport& rep) {
  for (const auto& [id, c] : coeffs) {
    (void)c;
    if (!m.valid_var(id))
      rep.violations.push_back(where + ": references unknown variable id " + std::to_string(id));
  }
}

}  // namespace detail

/// Checks every structural invariant of the factored model and reports all
/// violations; an empty report means the model is well formed.
inline ValidationReport validate_model(const FactoredModel& m) {
  ValidationReport rep;
  for (size_t i = 0; i < m.variables.size(); ++i) {
    const auto& v = m.variables[i];
    const std::string tag = "variable " + v.name;
    if (!(v.lower <= v.upper))
      rep.violations.push_back(tag + ": empty domain [" + std::to_string(v.lower) + ", " +
                               std::to_string(v.upper) + "]");
    if (v.integrality == Integrality::Binary && (v.lower != 0.0 || v.upper != 1.0))
      rep.violations.push_back(tag + ": binary variable must have bounds [0, 1]");
    for (size_t j = 0; j < i; ++j)
      if (m.variables[j].name == v.name)
        rep.violations.push_back(tag + ": duplicate variable name");
  }

  detail::check_refs(m, m.objective.coeffs, "objective", rep);
  for (const auto& c : m.constraints) {
    const std::string tag = "constraint " + c.name;
    detail::check_refs(m, c.coeffs, tag, rep);
    bool any = false;
    for (const auto& [id, a] : c.coeffs) {
      (void)id;
      if (a != 0.0) any = true;
    }
    if (!any) rep.violations.push_back(tag + ": no nonzero coefficient");
  }

  std::map<VarId, int> output_defs;
  auto check_output = [&](VarId out, const std::string& tag) {
    if (++output_defs[out] == 2)
      rep.violations.push_back(tag + ": duplicate definition of output variable");
  };

  for (size_t i = 0; i < m.trig_terms.size(); ++i) {
    const auto& t = m.trig_terms[i];
    const std::string tag = "trig term " + std::to_string(i);
    if (!m.valid_var(t.output) || !m.valid_var(t.input)) {
      rep.violations.push_back(tag + ": references unknown variable");
      continue;
    }
    check_output(t.output, tag);
    if (t.output == t.input) rep.violations.push_back(tag + ": output equals input");
    if (!m.variables[static_cast<size_t>(t.input)].bounded())
      rep.violations.push_back(tag + ": unbounded trig input " +
                               m.variables[static_cast<size_t>(t.input)].name);
    if (t.kind == TrigKind::User) {
      if (!t.user || !t.user->value || !t.user->deriv || !t.user->inflections)
        rep.violations.push_back(tag + ": user curve callbacks missing");
    } else {
      if (t.amplitude == 0.0) rep.violations.push_back(tag + ": zero amplitude");
      if (t.frequency == 0.0) rep.violations.push_back(tag + ": zero frequency");
    }
  }

  for (size_t i = 0; i < m.bilinear_terms.size(); ++i) {
    const auto& b = m.bilinear_terms[i];
    const std::string tag = "bilinear term " + std::to_string(i);
    if (!m.valid_var(b.output) || !m.valid_var(b.left) || !m.valid_var(b.right)) {
      rep.violations.push_back(tag + ": references unknown variable");
      continue;
    }
    check_output(b.output, tag);
    if (b.output == b.left || b.output == b.right)
      rep.violations.push_back(tag + ": output equals input");
    for (VarId in : {b.left, b.right})
      if (!m.variables[static_cast<size_t>(in)].bounded())
        rep.violations.push_back(tag + ": unbounded bilinear input " +
                                 m.variables[static_cast<size_t>(in)].name);
  }
  return rep;
}

/// Resolves Side::Auto for every bilinear term: prefer the variable shared
/// with another bilinear term (it can then share one partition), otherwise
/// the variable with the larger domain width.
inline void choose_partitioned_sides(FactoredModel& m) {
  std::map<VarId, int> uses;
  for (const auto& b : m.bilinear_terms) {
    uses[b.left]++;
    uses[b.right]++;
  }
  for (auto& b : m.bilinear_terms) {
    if (b.partitioned != BilinearTerm::Side::Auto) continue;
    const int ul = uses[b.left], ur = uses[b.right];
    if (ul != ur) {
      b.partitioned = ul > ur ? BilinearTerm::Side::Left : BilinearTerm::Side::Right;
    } else {
      const double wl = m.variables[static_cast<size_t>(b.left)].width();
      const double wr = m.variables[static_cast<size_t>(b.right)].width();
      b.partitioned = wl >= wr ? BilinearTerm::Side::Left : BilinearTerm::Side::Right;
    }
  }
}

}  // namespace trigopt
