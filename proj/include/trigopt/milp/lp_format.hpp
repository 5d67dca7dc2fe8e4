#pragma once

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trigopt/milp/model.hpp"

namespace trigopt {

namespace detail {

inline std::string lp_num(double v) {
  if (v == kInf) return "infinity";
  if (v == -kInf) return "-infinity";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string lp_name(const std::string& raw, size_t index) {
  std::string s;
  for (char c : raw) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
      s.push_back(c);
    else
      s.push_back('_');
  }
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])))
    s = "v" + std::to_string(index) + "_" + s;
  return s;
}

inline void write_terms(std::ostream& os, const MilpModel& m, const std::map<int, double>& coeffs,
                        const std::vector<std::string>& names, double constant) {
  bool first = true;
  for (const auto& [j, c] : coeffs) {
    if (c == 0.0) continue;
    if (first) {
      os << (c < 0 ? "- " : "") << lp_num(std::abs(c)) << " " << names[static_cast<size_t>(j)];
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ") << lp_num(std::abs(c)) << " "
         << names[static_cast<size_t>(j)];
    }
  }
  (void)m;
  if (constant != 0.0) {
    if (first)
      os << lp_num(constant);
    else
      os << (constant < 0 ? " - " : " + ") << lp_num(std::abs(constant));
  } else if (first) {
    os << "0 " << names[0];
  }
}

}  // namespace detail

/// Deterministic variable names used in LP export: sanitized model names,
/// uniquified by index when needed.
inline std::vector<std::string> lp_var_names(const MilpModel& m) {
  std::vector<std::string> names;
  std::map<std::string, int> seen;
  names.reserve(m.vars.size());
  for (size_t i = 0; i < m.vars.size(); ++i) {
    std::string s = detail::lp_name(m.vars[i].name, i);
    if (++seen[s] > 1) s += "__" + std::to_string(i);
    names.push_back(s);
  }
  return names;
}

/// Writes the model as an industry-standard LP-format file. Deterministic and
/// bit-exact for a fixed model; every variable is listed in the Bounds
/// section in declaration order so a round-trip parse reproduces the model
/// (branching priorities, warm starts, and block structure are not part of
/// the format).
inline void serialize_lp(const MilpModel& m, std::ostream& os) {
  const auto names = lp_var_names(m);
  os << "\\ trigopt LP export\n";
  os << "Minimize\n obj: ";
  detail::write_terms(os, m, m.objective, names, m.objective_constant);
  os << "\nSubject To\n";
  for (size_t i = 0; i < m.rows.size(); ++i) {
    const auto& r = m.rows[i];
    const std::string rn = detail::lp_name(r.name.empty() ? "r" + std::to_string(i) : r.name, i);
    os << " " << rn << ": ";
    detail::write_terms(os, m, r.coeffs, names, 0.0);
    os << (r.sense == Sense::LessEqual ? " <= " : r.sense == Sense::Equal ? " = " : " >= ")
       << detail::lp_num(r.rhs) << "\n";
  }
  os << "Bounds\n";
  for (size_t i = 0; i < m.vars.size(); ++i) {
    const auto& v = m.vars[i];
    if (!std::isfinite(v.lower) && !std::isfinite(v.upper))
      os << " " << names[i] << " free\n";
    else
      os << " " << detail::lp_num(v.lower) << " <= " << names[i] << " <= "
         << detail::lp_num(v.upper) << "\n";
  }
  bool any_gen = false, any_bin = false;
  for (const auto& v : m.vars) {
    any_gen |= v.integrality == Integrality::Integer;
    any_bin |= v.integrality == Integrality::Binary;
  }
  if (any_gen) {
    os << "Generals\n";
    for (size_t i = 0; i < m.vars.size(); ++i)
      if (m.vars[i].integrality == Integrality::Integer) os << " " << names[i] << "\n";
  }
  if (any_bin) {
    os << "Binaries\n";
    for (size_t i = 0; i < m.vars.size(); ++i)
      if (m.vars[i].integrality == Integrality::Binary) os << " " << names[i] << "\n";
  }
  os << "End\n";
}

inline void serialize_lp(const MilpModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  serialize_lp(m, out);
}

namespace detail {

struct LpToken {
  enum class Kind { Name, Number, Op, Colon, Newline } kind;
  std::string text;
  double num = 0.0;
};

inline std::vector<LpToken> lp_tokenize(const std::string& text) {
  std::vector<LpToken> toks;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (c == '\\') {  // comment to end of line
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') {
      toks.push_back({LpToken::Kind::Newline, "\n", 0});
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == ':') {
      toks.push_back({LpToken::Kind::Colon, ":", 0});
      ++i;
      continue;
    }
    if (c == '<' || c == '>' || c == '=' || c == '+' || c == '-') {
      std::string op(1, c);
      ++i;
      if ((c == '<' || c == '>') && i < n && text[i] == '=') {
        op.push_back('=');
        ++i;
      }
      toks.push_back({LpToken::Kind::Op, op, 0});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t j = i;
      while (j < n && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.' ||
                       text[j] == 'e' || text[j] == 'E' ||
                       ((text[j] == '+' || text[j] == '-') && j > i &&
                        (text[j - 1] == 'e' || text[j - 1] == 'E'))))
        ++j;
      const std::string s = text.substr(i, j - i);
      toks.push_back({LpToken::Kind::Number, s, std::strtod(s.c_str(), nullptr)});
      i = j;
      continue;
    }
    // name
    size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != ':' &&
           text[j] != '+' && text[j] != '-' && text[j] != '<' && text[j] != '>' && text[j] != '=')
      ++j;
    toks.push_back({LpToken::Kind::Name, text.substr(i, j - i), 0});
    i = j;
  }
  return toks;
}

inline bool lp_keyword(const std::string& s, std::initializer_list<const char*> kws) {
  std::string lo;
  for (char c : s) lo.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const char* k : kws)
    if (lo == k) return true;
  return false;
}

}  // namespace detail

/// Parses the LP dialect produced by serialize_lp (a standard subset:
/// Minimize/Maximize, Subject To, Bounds, Generals, Binaries, End).
/// Variables are registered in Bounds-section order, so parsing a file we
/// wrote reproduces variable indexing exactly.
inline MilpModel parse_lp(const std::string& text) {
  using detail::LpToken;
  auto toks = detail::lp_tokenize(text);
  // strip newlines into a flat stream but remember line breaks for bounds
  enum class Section { None, Objective, Rows, Bounds, Generals, Binaries, Done };

  // pass 1: register variables from the Bounds section in order
  MilpModel m;
  std::map<std::string, int> index;
  {
    Section sec = Section::None;
    for (size_t i = 0; i < toks.size(); ++i) {
      const auto& t = toks[i];
      if (t.kind == LpToken::Kind::Name) {
        if (detail::lp_keyword(t.text, {"bounds"})) {
          sec = Section::Bounds;
          continue;
        }
        if (detail::lp_keyword(t.text, {"generals", "general", "gen", "binaries", "binary", "bin",
                                        "end", "minimize", "maximize", "min", "max"})) {
          if (sec == Section::Bounds) sec = Section::Done;
          continue;
        }
        if (sec == Section::Bounds && !detail::lp_keyword(t.text, {"free", "infinity", "inf"})) {
          if (!index.count(t.text)) {
            index[t.text] = m.add_var(t.text, -kInf, kInf);
          }
        }
      }
    }
  }
  auto var_of = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) {
      index[name] = m.add_var(name, -kInf, kInf);
      return index[name];
    }
    return it->second;
  };

  // pass 2
  Section sec = Section::None;
  double obj_sign = 1.0;
  size_t i = 0;
  auto peek_name = [&](size_t k) {
    return k < toks.size() && toks[k].kind == LpToken::Kind::Name;
  };

  // parse a linear expression into coeffs/constant until a sense op or newline
  // boundary followed by a section keyword
  auto parse_expr = [&](size_t& k, std::map<int, double>& coeffs, double& constant) {
    double sign = 1.0;
    bool have_coef = false;
    double coef = 1.0;
    while (k < toks.size()) {
      const auto& t = toks[k];
      if (t.kind == LpToken::Kind::Newline) {
        ++k;
        continue;
      }
      if (t.kind == LpToken::Kind::Op) {
        if (t.text == "+" || t.text == "-") {
          if (have_coef) {  // dangling number becomes a constant
            constant += sign * coef;
            have_coef = false;
            coef = 1.0;
          }
          sign = t.text == "-" ? -sign : sign;
          ++k;
          continue;
        }
        break;  // sense operator ends the expression
      }
      if (t.kind == LpToken::Kind::Number) {
        if (have_coef) {
          constant += sign * coef;
          sign = 1.0;
        }
        coef = t.num;
        have_coef = true;
        ++k;
        continue;
      }
      if (t.kind == LpToken::Kind::Name) {
        if (detail::lp_keyword(t.text,
                               {"subject", "st", "s.t.", "bounds", "generals", "general", "gen",
                                "binaries", "binary", "bin", "end", "minimize", "maximize"}))
          break;
        if (k + 1 < toks.size() && toks[k + 1].kind == LpToken::Kind::Colon)
          break;  // label of the next row
        if (detail::lp_keyword(t.text, {"infinity", "inf"})) {
          coef = have_coef ? coef * kInf : kInf;
          have_coef = true;
          ++k;
          continue;
        }
        coeffs[var_of(t.text)] += sign * (have_coef ? coef : 1.0);
        sign = 1.0;
        have_coef = false;
        coef = 1.0;
        ++k;
        continue;
      }
      ++k;  // stray colon
    }
    if (have_coef) constant += sign * coef;
  };

  while (i < toks.size()) {
    const auto& t = toks[i];
    if (t.kind == LpToken::Kind::Newline) {
      ++i;
      continue;
    }
    if (t.kind == LpToken::Kind::Name) {
      if (detail::lp_keyword(t.text, {"minimize", "min"})) {
        sec = Section::Objective;
        obj_sign = 1.0;
        ++i;
        continue;
      }
      if (detail::lp_keyword(t.text, {"maximize", "max"})) {
        sec = Section::Objective;
        obj_sign = -1.0;
        ++i;
        continue;
      }
      if (detail::lp_keyword(t.text, {"subject", "st", "s.t."})) {
        ++i;
        if (peek_name(i) && detail::lp_keyword(toks[i].text, {"to"})) ++i;
        sec = Section::Rows;
        continue;
      }
      if (detail::lp_keyword(t.text, {"bounds"})) {
        sec = Section::Bounds;
        ++i;
        continue;
      }
      if (detail::lp_keyword(t.text, {"generals", "general", "gen"})) {
        sec = Section::Generals;
        ++i;
        continue;
      }
      if (detail::lp_keyword(t.text, {"binaries", "binary", "bin"})) {
        sec = Section::Binaries;
        ++i;
        continue;
      }
      if (detail::lp_keyword(t.text, {"end"})) break;
    }

    if (sec == Section::Objective) {
      // optional label
      if (t.kind == LpToken::Kind::Name && i + 1 < toks.size() &&
          toks[i + 1].kind == LpToken::Kind::Colon)
        i += 2;
      std::map<int, double> coeffs;
      double constant = 0.0;
      parse_expr(i, coeffs, constant);
      for (auto& [j, c] : coeffs) m.objective[j] += obj_sign * c;
      m.objective_constant += obj_sign * constant;
      sec = Section::None;
      continue;
    }
    if (sec == Section::Rows) {
      MilpRow row;
      if (t.kind == LpToken::Kind::Name && i + 1 < toks.size() &&
          toks[i + 1].kind == LpToken::Kind::Colon) {
        row.name = t.text;
        i += 2;
      }
      double lhs_const = 0.0;
      parse_expr(i, row.coeffs, lhs_const);
      if (i >= toks.size() || toks[i].kind != LpToken::Kind::Op)
        throw std::invalid_argument("LP parse: expected sense in row " + row.name);
      const std::string op = toks[i].text;
      row.sense = op == "<=" || op == "<"
                      ? Sense::LessEqual
                      : (op == ">=" || op == ">" ? Sense::GreaterEqual : Sense::Equal);
      ++i;
      std::map<int, double> rhs_coeffs;
      double rhs_const = 0.0;
      parse_expr(i, rhs_coeffs, rhs_const);
      for (auto& [j, c] : rhs_coeffs) row.coeffs[j] -= c;
      row.rhs = rhs_const - lhs_const;
      m.add_row(std::move(row));
      continue;
    }
    if (sec == Section::Bounds) {
      // forms: "lb <= x <= ub", "x free", "x <= ub", "x >= lb", "x = v"
      double sign = 1.0;
      size_t k = i;
      auto read_value = [&](size_t& kk) -> double {
        double s = 1.0;
        while (kk < toks.size() && toks[kk].kind == LpToken::Kind::Op &&
               (toks[kk].text == "+" || toks[kk].text == "-")) {
          if (toks[kk].text == "-") s = -s;
          ++kk;
        }
        if (kk < toks.size() && toks[kk].kind == LpToken::Kind::Number) {
          const double v = s * toks[kk].num;
          ++kk;
          return v;
        }
        if (kk < toks.size() && toks[kk].kind == LpToken::Kind::Name &&
            detail::lp_keyword(toks[kk].text, {"infinity", "inf"})) {
          ++kk;
          return s * kInf;
        }
        throw std::invalid_argument("LP parse: expected bound value");
      };
      (void)sign;
      if (t.kind == LpToken::Kind::Name && !detail::lp_keyword(t.text, {"infinity", "inf"})) {
        const int v = var_of(t.text);
        ++k;
        if (peek_name(k) && detail::lp_keyword(toks[k].text, {"free"})) {
          m.vars[static_cast<size_t>(v)].lower = -kInf;
          m.vars[static_cast<size_t>(v)].upper = kInf;
          ++k;
        } else if (k < toks.size() && toks[k].kind == LpToken::Kind::Op) {
          const std::string op = toks[k].text;
          ++k;
          const double val = read_value(k);
          if (op == "<=" || op == "<")
            m.vars[static_cast<size_t>(v)].upper = val;
          else if (op == ">=" || op == ">")
            m.vars[static_cast<size_t>(v)].lower = val;
          else {
            m.vars[static_cast<size_t>(v)].lower = val;
            m.vars[static_cast<size_t>(v)].upper = val;
          }
        }
        i = k;
        continue;
      }
      // numeric lower bound first
      const double lb = read_value(k);
      if (k >= toks.size() || toks[k].kind != LpToken::Kind::Op)
        throw std::invalid_argument("LP parse: malformed bound line");
      ++k;  // <=
      if (k >= toks.size() || toks[k].kind != LpToken::Kind::Name)
        throw std::invalid_argument("LP parse: malformed bound line");
      const int v = var_of(toks[k].text);
      ++k;
      m.vars[static_cast<size_t>(v)].lower = lb;
      if (k < toks.size() && toks[k].kind == LpToken::Kind::Op &&
          (toks[k].text == "<=" || toks[k].text == "<")) {
        ++k;
        m.vars[static_cast<size_t>(v)].upper = read_value(k);
      }
      i = k;
      continue;
    }
    if (sec == Section::Generals || sec == Section::Binaries) {
      if (t.kind == LpToken::Kind::Name) {
        const int v = var_of(t.text);
        m.vars[static_cast<size_t>(v)].integrality =
            sec == Section::Generals ? Integrality::Integer : Integrality::Binary;
      }
      ++i;
      continue;
    }
    ++i;
  }
  return m;
}

inline MilpModel parse_lp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_lp(ss.str());
}

}  // namespace trigopt
