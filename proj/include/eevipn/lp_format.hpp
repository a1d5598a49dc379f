#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "eevipn/format.hpp"
#include "eevipn/milp.hpp"

namespace eevipn {

// LP text form (docs/formats.md documents the exact dialect subset):
//  - fixed section order: Maximize/Minimize, Subject To, Bounds, Binary, End
//  - every coefficient explicit (including 1), every term signed
//  - every variable listed in the Bounds section, in model order
//  - shortest round-trip decimals
// Exports are deterministic: write(parse(write(m))) == write(m) byte for byte.

namespace detail {

inline void write_terms(std::ostream& os, const MilpModel& m,
                        std::vector<LinTerm> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const LinTerm& a, const LinTerm& b) { return a.var < b.var; });
  // merge duplicates, drop zeros
  std::vector<LinTerm> canon;
  for (const LinTerm& t : terms) {
    if (!canon.empty() && canon.back().var == t.var)
      canon.back().coeff += t.coeff;
    else
      canon.push_back(t);
  }
  for (const LinTerm& t : canon) {
    if (t.coeff == 0) continue;
    os << (t.coeff < 0 ? " - " : " + ") << format_double(std::abs(t.coeff)) << ' '
       << m.vars[t.var].name;
  }
}

}  // namespace detail

inline void write_lp(const MilpModel& m, std::ostream& os) {
  os << "\\ eevipn lp format 1\n";
  os << (m.maximize ? "Maximize\n" : "Minimize\n");
  os << " obj:";
  {
    std::vector<LinTerm> obj;
    for (int v = 0; v < static_cast<int>(m.vars.size()); ++v)
      if (m.vars[v].obj != 0) obj.push_back({v, m.vars[v].obj});
    detail::write_terms(os, m, obj);
  }
  os << "\nSubject To\n";
  for (const MilpRow& row : m.rows) {
    if (row.lo != row.up && row.lo != -kInf && row.up != kInf)
      throw StructuralError("ranged rows are not part of the dialect: " + row.name);
    os << ' ' << row.name << ':';
    detail::write_terms(os, m, row.terms);
    if (row.lo == row.up)
      os << " = " << format_double(row.up);
    else if (row.up != kInf)
      os << " <= " << format_double(row.up);
    else
      os << " >= " << format_double(row.lo);
    os << '\n';
  }
  os << "Bounds\n";
  for (const MilpVar& v : m.vars) {
    if (v.lo == -kInf && v.up == kInf)
      os << ' ' << v.name << " free\n";
    else if (v.up == kInf)
      os << ' ' << v.name << " >= " << format_double(v.lo) << '\n';
    else
      os << ' ' << format_double(v.lo) << " <= " << v.name << " <= "
         << format_double(v.up) << '\n';
  }
  bool any_binary = false;
  for (const MilpVar& v : m.vars) any_binary |= v.is_binary;
  if (any_binary) {
    os << "Binary\n";
    for (const MilpVar& v : m.vars)
      if (v.is_binary) os << ' ' << v.name << '\n';
  }
  os << "End\n";
}

inline std::string write_lp_string(const MilpModel& m) {
  std::ostringstream os;
  write_lp(m, os);
  return os.str();
}

/// Parses the dialect emitted by write_lp back into a model (no instance
/// binding). Intended for round-trip verification and external interchange.
inline MilpModel parse_lp(std::istream& is) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '\\') continue;  // comment
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }

  std::size_t pos = 0;
  auto peek = [&]() -> const std::string& {
    static const std::string empty;
    return pos < tokens.size() ? tokens[pos] : empty;
  };
  auto next = [&]() -> std::string {
    if (pos >= tokens.size()) throw StructuralError("lp parse: unexpected end");
    return tokens[pos++];
  };
  auto is_section = [](const std::string& t) {
    return t == "Maximize" || t == "Minimize" || t == "Subject" || t == "Bounds" ||
           t == "Binary" || t == "End";
  };
  auto parse_number = [](const std::string& t) {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw StructuralError("lp parse: bad number '" + t + "'");
    return v;
  };

  MilpModel m;
  const std::string sense = next();
  if (sense != "Maximize" && sense != "Minimize")
    throw StructuralError("lp parse: expected Maximize/Minimize");
  m.maximize = sense == "Maximize";

  struct RawTerm {
    double coeff;
    std::string var;
  };
  auto parse_terms = [&](std::vector<RawTerm>& out) -> std::string {
    // returns the token that terminated the expression (relop or section)
    for (;;) {
      const std::string& t = peek();
      if (t.empty() || is_section(t) || t == "<=" || t == ">=" || t == "=")
        return t.empty() ? std::string() : t;
      // also stop at the start of the next row ("name:")
      if (t != "+" && t != "-" && t.back() == ':') return t;
      const std::string sign = next();
      if (sign != "+" && sign != "-")
        throw StructuralError("lp parse: expected sign, got '" + sign + "'");
      const double coeff = parse_number(next());
      std::string var = next();
      out.push_back({sign == "-" ? -coeff : coeff, std::move(var)});
    }
  };

  std::string obj_label = next();
  if (obj_label.back() != ':') throw StructuralError("lp parse: objective label");
  std::vector<RawTerm> obj_terms;
  parse_terms(obj_terms);

  if (next() != "Subject" || next() != "To")
    throw StructuralError("lp parse: expected 'Subject To'");

  struct RawRow {
    std::string name;
    std::vector<RawTerm> terms;
    double lo, up;
  };
  std::vector<RawRow> raw_rows;
  while (!peek().empty() && peek() != "Bounds") {
    std::string name = next();
    if (name.back() != ':')
      throw StructuralError("lp parse: expected row label, got '" + name + "'");
    name.pop_back();
    RawRow row;
    row.name = std::move(name);
    const std::string stop = parse_terms(row.terms);
    if (stop != "<=" && stop != ">=" && stop != "=")
      throw StructuralError("lp parse: row '" + row.name + "' has no relation");
    next();  // consume relop
    const double rhs = parse_number(next());
    row.lo = stop == "<=" ? -kInf : rhs;
    row.up = stop == ">=" ? kInf : rhs;
    raw_rows.push_back(std::move(row));
  }

  if (next() != "Bounds") throw StructuralError("lp parse: expected Bounds");
  std::map<std::string, int> var_index;
  while (!peek().empty() && peek() != "Binary" && peek() != "End") {
    // forms: "lo <= name <= up" | "name >= lo" | "name free"
    const std::string first = next();
    MilpVar v;
    if (!peek().empty() && peek() == "<=") {
      v.lo = parse_number(first);
      next();
      v.name = next();
      if (next() != "<=") throw StructuralError("lp parse: malformed bound");
      v.up = parse_number(next());
    } else {
      v.name = first;
      const std::string op = next();
      if (op == "free") {
        v.lo = -kInf;
        v.up = kInf;
      } else if (op == ">=") {
        v.lo = parse_number(next());
        v.up = kInf;
      } else {
        throw StructuralError("lp parse: malformed bound for " + v.name);
      }
    }
    var_index[v.name] = static_cast<int>(m.vars.size());
    m.vars.push_back(std::move(v));
  }

  if (peek() == "Binary") {
    next();
    while (!peek().empty() && peek() != "End") {
      const std::string name = next();
      auto it = var_index.find(name);
      if (it == var_index.end())
        throw StructuralError("lp parse: Binary lists unknown variable " + name);
      m.vars[it->second].is_binary = true;
    }
  }
  if (next() != "End") throw StructuralError("lp parse: expected End");

  auto lookup = [&](const std::string& name) {
    auto it = var_index.find(name);
    if (it == var_index.end())
      throw StructuralError("lp parse: variable '" + name + "' has no bound entry");
    return it->second;
  };
  for (const RawTerm& t : obj_terms) m.vars[lookup(t.var)].obj += t.coeff;
  for (RawRow& raw : raw_rows) {
    MilpRow row;
    row.name = std::move(raw.name);
    row.lo = raw.lo;
    row.up = raw.up;
    for (const RawTerm& t : raw.terms) row.terms.push_back({lookup(t.var), t.coeff});
    m.rows.push_back(std::move(row));
  }
  return m;
}

inline MilpModel parse_lp_string(const std::string& text) {
  std::istringstream is(text);
  return parse_lp(is);
}

/// Counts variables and rows per name family (prefix before the first '_').
struct Census {
  std::map<std::string, long> variables;
  std::map<std::string, long> constraints;
  long total_variables = 0;
  long total_constraints = 0;
  long binaries = 0;
};

inline Census census(const MilpModel& m) {
  Census c;
  auto family = [](const std::string& name) {
    const auto us = name.find('_');
    return us == std::string::npos ? name : name.substr(0, us);
  };
  for (const MilpVar& v : m.vars) {
    ++c.variables[family(v.name)];
    ++c.total_variables;
    if (v.is_binary) ++c.binaries;
  }
  for (const MilpRow& r : m.rows) {
    ++c.constraints[family(r.name)];
    ++c.total_constraints;
  }
  return c;
}

}  // namespace eevipn
