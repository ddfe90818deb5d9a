#include "qml/problem.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "qml/parse.hpp"

namespace qml {

namespace {

struct Line {
  std::size_t number = 0;
  std::string directive;
  std::string rest;
};

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto sp = s.find_first_of(" \t");
    Line l{n, s.substr(0, sp), sp == std::string::npos ? "" : trim(s.substr(sp))};
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

ParseError at(const Line& l, const std::string& msg) { return ParseError(msg, l.number, 1); }

long number(const Line& l, const std::string& text, long lo, long hi) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used, 0);
  } catch (const std::exception&) {
    throw at(l, "expected a number, got '" + text + "'");
  }
  if (used != text.size() || v < lo || v > hi) throw at(l, "number '" + text + "' out of range");
  return v;
}

// key=value pairs of a bounds line.
std::vector<std::pair<std::string, long>> pairs(const Line& l) {
  std::vector<std::pair<std::string, long>> out;
  for (const auto& w : words(l.rest)) {
    const auto eq = w.find('=');
    if (eq == std::string::npos) throw at(l, "expected key=value, got '" + w + "'");
    out.emplace_back(w.substr(0, eq), number(l, w.substr(eq + 1), 0, 1 << 20));
  }
  return out;
}

ProblemFormula formula_at(const Line& l, const Signature& sig) {
  if (l.rest.empty()) throw at(l, l.directive + " needs a formula");
  try {
    return {l.number, l.rest, parse_formula(l.rest, sig)};
  } catch (const ParseError& e) {
    // Column within the directive line.
    throw ParseError(e.detail(), l.number, e.column() + (l.directive.size() + 1));
  } catch (const SortError& e) {
    throw ParseError(e.what(), l.number, 1);
  } catch (const ModeError& e) {
    throw ParseError(e.what(), l.number, 1);
  }
}

Expectation expectation(const Line& l) {
  if (l.rest == "unsat") return Expectation::Unsat;
  if (l.rest == "sat") return Expectation::Sat;
  if (l.rest == "valid") return Expectation::Valid;
  if (l.rest == "countermodel") return Expectation::Countermodel;
  throw at(l, "unknown expectation '" + l.rest + "'");
}

}  // namespace

std::string to_string(Expectation e) {
  switch (e) {
    case Expectation::Unsat: return "unsat";
    case Expectation::Sat: return "sat";
    case Expectation::Valid: return "valid";
    case Expectation::Countermodel: return "countermodel";
  }
  return "?";
}

std::vector<Formula> Problem::premise_formulas() const {
  std::vector<Formula> out;
  for (const auto& p : premises) out.push_back(p.formula);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Problem parse_problem(const std::string& text, const std::string& name) {
  Problem p;
  p.name = name;
  p.sig = std::make_shared<Signature>(Signature::classical(Logic::S5Total));
  const std::vector<Line> lines = split_lines(text);
  // Declarations first, so formulas see the whole signature.
  for (const Line& l : lines) {
    if (l.directive == "sig") {
      for (const auto& decl : words(l.rest)) {
        const auto colon = decl.rfind(':');
        if (colon == std::string::npos || colon == 0) throw at(l, "expected name:sort, got '" + decl + "'");
        const std::string n = decl.substr(0, colon), s = decl.substr(colon + 1);
        try {
          if (s == "so")
            p.sig->add_second_order(n);
          else if (s == "o")
            p.sig->add_proposition(n);
          else if (s == "i")
            p.sig->add_individual(n);
          else
            p.sig->add_relation(n, static_cast<int>(number(l, s, 1, 8)));
        } catch (const SortError& e) {
          throw at(l, e.what());
        }
      }
    } else if (l.directive == "logic") {
      try {
        p.sig->logic = parse_logic(l.rest);
      } catch (const ParseError& e) {
        throw at(l, e.detail());
      }
    } else if (l.directive == "rigid") {
      if (!l.rest.empty()) throw at(l, "rigid takes no arguments");
      p.sig->rigid_properties = true;
    } else if (l.directive == "bounds") {
      for (const auto& [k, v] : pairs(l)) {
        if (k == "worlds")
          p.bounds.max_worlds = static_cast<int>(v);
        else if (k == "individuals")
          p.bounds.max_individuals = static_cast<int>(v);
        else if (k == "cap")
          p.bounds.relspace_cap = static_cast<std::size_t>(v);
        else if (k == "nesting")
          p.bounds.quantifier_nesting = static_cast<int>(v);
        else
          throw at(l, "unknown bound '" + k + "'");
      }
      if (p.bounds.max_worlds < 1 || p.bounds.max_individuals < 1) throw at(l, "bounds must be positive");
    } else if (l.directive == "expect") {
      const Expectation e = expectation(l);
      auto& slot = (e == Expectation::Sat || e == Expectation::Unsat) ? p.sat_expectation : p.check_expectation;
      if (slot) throw at(l, "expectation of this kind given twice");
      slot = e;
    } else if (l.directive != "premise" && l.directive != "conjecture") {
      throw at(l, "unknown directive '" + l.directive + "'");
    }
  }
  for (const Line& l : lines) {
    if (l.directive == "premise") p.premises.push_back(formula_at(l, *p.sig));
    if (l.directive == "conjecture") p.conjectures.push_back(formula_at(l, *p.sig));
  }
  return p;
}

Problem load_problem(const std::string& path) { return parse_problem(read_file(path), path); }

AczelConfig parse_aot_config(const std::string& text) {
  AczelConfig c;
  for (const Line& l : split_lines(text)) {
    if (l.directive == "bounds") {
      for (const auto& [k, v] : pairs(l)) {
        if (k == "worlds")
          c.worlds = static_cast<int>(v);
        else if (k == "ordinary")
          c.ordinary = static_cast<int>(v);
        else if (k == "special")
          c.special = static_cast<int>(v);
        else if (k == "cap")
          c.relspace_cap = static_cast<std::size_t>(v);
        else if (k == "nesting")
          c.full_scan_nesting = static_cast<int>(v);
        else
          throw at(l, "unknown bound '" + k + "'");
      }
      if (c.worlds < 1 || c.ordinary < 1 || c.special < 1) throw at(l, "bounds must be positive");
    } else if (l.directive == "sigma") {
      if (l.rest == "constant")
        c.sigma = SigmaRule::Constant;
      else if (l.rest == "parity")
        c.sigma = SigmaRule::Parity;
      else
        throw at(l, "unknown sigma rule '" + l.rest + "'");
    } else if (l.directive == "ebang" || l.directive == "q0") {
      const auto v = static_cast<std::uint32_t>(number(l, l.rest, 0, 0xFFFFFFFFL));
      (l.directive == "ebang" ? c.e_bang : c.q0) = v;
    } else if (l.directive == "sig") {
      const auto w = words(l.rest);
      if (w.size() < 3 || w[1] != "=") throw at(l, "expected 'sig name:sort = value'");
      const auto colon = w[0].rfind(':');
      if (colon == std::string::npos || colon == 0) throw at(l, "expected name:sort, got '" + w[0] + "'");
      const std::string n = w[0].substr(0, colon), s = w[0].substr(colon + 1);
      if (c.constants.count(n) || n == "E!" || n == "q0") throw at(l, "constant '" + n + "' declared twice");
      if (s == "i") {
        if (w.size() != 4 || (w[2] != "ordinary" && w[2] != "abstract"))
          throw at(l, "individuals are 'ordinary <u>' or 'abstract <bits>'");
        const auto v = static_cast<std::uint32_t>(number(l, w[3], 0, 0xFFFFFFFFL));
        c.constants[n] = w[2] == "ordinary" ? AotValue::ordinary(static_cast<int>(v)) : AotValue::abstract(v);
      } else if (s == "1" || s == "o") {
        if (w.size() != 3) throw at(l, "expected one value");
        const auto v = static_cast<std::uint32_t>(number(l, w[2], 0, 0xFFFFFFFFL));
        c.constants[n] = s == "1" ? AotValue::relation(v) : AotValue::proposition(v);
      } else {
        throw at(l, "AOT constants have sort i, 1 or o");
      }
    } else {
      throw at(l, "unknown directive '" + l.directive + "'");
    }
  }
  return c;
}

AczelConfig load_aot_config(const std::string& path) { return parse_aot_config(read_file(path)); }

}  // namespace qml
