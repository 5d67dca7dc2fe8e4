#pragma once

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "trigopt/model.hpp"

namespace trigopt {

// JSON document schema (see docs/model_schema.md): coefficient maps are keyed
// by variable name; infinities are encoded as the strings "inf" / "-inf".

namespace detail {

inline nlohmann::json bound_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

inline double bound_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("bad bound string: " + s);
  }
  return j.get<double>();
}

inline nlohmann::json coeffs_to_json(const FactoredModel& m, const std::map<VarId, double>& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, v] : c) j[m.variables[static_cast<size_t>(id)].name] = v;
  return j;
}

inline std::map<VarId, double> coeffs_from_json(const FactoredModel& m, const nlohmann::json& j) {
  std::map<VarId, double> c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const VarId id = m.find_variable(it.key());
    if (id < 0) throw std::invalid_argument("unknown variable in coefficients: " + it.key());
    c[id] = it.value().get<double>();
  }
  return c;
}

}  // namespace detail

inline nlohmann::json model_to_json(const FactoredModel& m) {
  nlohmann::json j;
  j["variables"] = nlohmann::json::array();
  for (const auto& v : m.variables) {
    nlohmann::json jv;
    jv["name"] = v.name;
    jv["lower"] = detail::bound_to_json(v.lower);
    jv["upper"] = detail::bound_to_json(v.upper);
    jv["integrality"] = v.integrality == Integrality::Continuous ? "continuous"
                        : v.integrality == Integrality::Integer  ? "integer"
                                                                 : "binary";
    j["variables"].push_back(jv);
  }
  j["objective"] = {{"coefficients", detail::coeffs_to_json(m, m.objective.coeffs)},
                    {"constant", m.objective.constant}};
  j["constraints"] = nlohmann::json::array();
  for (const auto& c : m.constraints) {
    j["constraints"].push_back(
        {{"name", c.name},
         {"coefficients", detail::coeffs_to_json(m, c.coeffs)},
         {"sense", c.sense == Sense::LessEqual ? "<=" : (c.sense == Sense::Equal ? "=" : ">=")},
         {"rhs", c.rhs}});
  }
  j["trig_terms"] = nlohmann::json::array();
  for (const auto& t : m.trig_terms) {
    if (t.kind == TrigKind::User)
      throw std::invalid_argument("user trig terms are not serializable");
    j["trig_terms"].push_back({{"output", m.variables[static_cast<size_t>(t.output)].name},
                               {"input", m.variables[static_cast<size_t>(t.input)].name},
                               {"kind", t.kind == TrigKind::Sin ? "sin" : "cos"},
                               {"amplitude", t.amplitude},
                               {"frequency", t.frequency},
                               {"phase", t.phase}});
  }
  j["bilinear_terms"] = nlohmann::json::array();
  for (const auto& b : m.bilinear_terms) {
    j["bilinear_terms"].push_back(
        {{"output", m.variables[static_cast<size_t>(b.output)].name},
         {"left", m.variables[static_cast<size_t>(b.left)].name},
         {"right", m.variables[static_cast<size_t>(b.right)].name},
         {"partitioned", b.partitioned == BilinearTerm::Side::Left    ? "left"
                         : b.partitioned == BilinearTerm::Side::Right ? "right"
                                                                      : "auto"}});
  }
  return j;
}

inline FactoredModel model_from_json(const nlohmann::json& j) {
  FactoredModel m;
  for (const auto& jv : j.at("variables")) {
    const std::string integ = jv.value("integrality", "continuous");
    m.add_variable(jv.at("name").get<std::string>(), detail::bound_from_json(jv.at("lower")),
                   detail::bound_from_json(jv.at("upper")),
                   integ == "continuous" ? Integrality::Continuous
                   : integ == "integer"  ? Integrality::Integer
                                         : Integrality::Binary);
  }
  if (j.contains("objective")) {
    m.objective.coeffs = detail::coeffs_from_json(m, j["objective"].at("coefficients"));
    m.objective.constant = j["objective"].value("constant", 0.0);
  }
  for (const auto& jc : j.value("constraints", nlohmann::json::array())) {
    LinearConstraint c;
    c.name = jc.value("name", "");
    c.coeffs = detail::coeffs_from_json(m, jc.at("coefficients"));
    const std::string s = jc.at("sense").get<std::string>();
    c.sense = s == "<=" ? Sense::LessEqual : (s == "=" ? Sense::Equal : Sense::GreaterEqual);
    c.rhs = jc.at("rhs").get<double>();
    m.constraints.push_back(std::move(c));
  }
  for (const auto& jt : j.value("trig_terms", nlohmann::json::array())) {
    TrigTerm t;
    t.output = m.find_variable(jt.at("output").get<std::string>());
    t.input = m.find_variable(jt.at("input").get<std::string>());
    if (t.output < 0 || t.input < 0) throw std::invalid_argument("trig term: unknown variable");
    t.kind = jt.at("kind").get<std::string>() == "sin" ? TrigKind::Sin : TrigKind::Cos;
    t.amplitude = jt.value("amplitude", 1.0);
    t.frequency = jt.value("frequency", 1.0);
    t.phase = jt.value("phase", 0.0);
    m.trig_terms.push_back(t);
  }
  for (const auto& jb : j.value("bilinear_terms", nlohmann::json::array())) {
    BilinearTerm b;
    b.output = m.find_variable(jb.at("output").get<std::string>());
    b.left = m.find_variable(jb.at("left").get<std::string>());
    b.right = m.find_variable(jb.at("right").get<std::string>());
    if (b.output < 0 || b.left < 0 || b.right < 0)
      throw std::invalid_argument("bilinear term: unknown variable");
    const std::string side = jb.value("partitioned", "auto");
    b.partitioned = side == "left"    ? BilinearTerm::Side::Left
                    : side == "right" ? BilinearTerm::Side::Right
                                      : BilinearTerm::Side::Auto;
    m.bilinear_terms.push_back(b);
  }
  return m;
}

inline void write_model(const FactoredModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << model_to_json(m).dump(2) << "\n";
}

inline FactoredModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace trigopt
