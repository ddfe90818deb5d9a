#pragma once

// Problem files and AOT model configs.
//
// Problem file, one directive per line, '#' starts a comment:
//   sig P:so q:o a:i R:2     constants (so second-order, o proposition,
//                            i individual, N relation of arity N)
//   logic K|KB|S5
//   rigid                    relation quantifiers range over rigid properties
//   premise <formula>
//   conjecture <formula>
//   bounds worlds=N individuals=M [cap=C] [nesting=K]
//   expect unsat|sat|valid|countermodel
//
// Declarations may follow the formulas that use them; formulas are parsed
// against the completed signature. Bounds default to (3,2).
//
// AOT config, same layout:
//   bounds worlds=N ordinary=M special=K [cap=C] [nesting=K]
//   sigma constant|parity
//   ebang <mask>   q0 <mask>
//   sig a:i = ordinary 0 | abstract <bits>    sig R:1 = <mask>    sig p:o = <mask>

#include <optional>
#include <string>
#include <vector>

#include "qml/aot.hpp"
#include "qml/modelfind.hpp"

namespace qml {

enum class Expectation { Unsat, Sat, Valid, Countermodel };

std::string to_string(Expectation e);

struct ProblemFormula {
  std::size_t line = 0;
  std::string text;
  Formula formula;
};

struct Problem {
  std::string name;
  std::shared_ptr<Signature> sig;
  std::vector<ProblemFormula> premises;
  std::vector<ProblemFormula> conjectures;
  Bounds bounds;
  std::optional<Expectation> sat_expectation;    // sat / unsat
  std::optional<Expectation> check_expectation;  // valid / countermodel

  std::vector<Formula> premise_formulas() const;
};

Problem parse_problem(const std::string& text, const std::string& name = "<input>");
Problem load_problem(const std::string& path);

AczelConfig parse_aot_config(const std::string& text);
AczelConfig load_aot_config(const std::string& path);

// Whole file contents; Error when unreadable.
std::string read_file(const std::string& path);

}  // namespace qml
