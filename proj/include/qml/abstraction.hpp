#pragma once

// Axiom schemas, proof scripts and their checker, and a harness that
// validates a layer against the finite semantics.
//
// Schema metavariables are free variables of the template: propositions
// (p, q, r) stand for formulas, individual and relation variables for terms.
// The checker never evaluates formulas in a model.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qml/modelfind.hpp"

namespace qml {

struct Schema {
  std::string name;
  Formula tmpl;
  std::vector<FreeVar> metas;
};

// Built-in schemas: ax_pl_1, ax_pl_2, ax_pl_3, ax_K, ax_T, ax_5, ax_B,
// ax_refl, ax_eqsub. The "ax_" prefix is optional.
Schema schema(const std::string& name);
Schema make_schema(const std::string& name, const std::string& template_text);

struct Layer {
  std::string name;
  Logic logic = Logic::K;
  std::vector<Schema> schemas;
  // Derived rules on top of MP, Nec and deduction: taut (propositional
  // tautologies), gen, inst, conv, exp.
  bool derived_rules = true;

  const Schema* find(const std::string& name) const;
};

// K: propositional base + ax_K + identity. KB adds ax_B, S5 adds ax_T, ax_5.
Layer layer_for(Logic logic);

using Binding = std::variant<Formula, Term>;
using Substitution = std::map<std::string, Binding>;

Formula apply_substitution(const Schema& s, const Substitution& sub);
std::optional<Substitution> match_schema(const Schema& s, const Formula& f);

// Propositional tautology check over the truth-functional skeleton; maximal
// non-truth-functional subformulas are atoms, identified up to alpha
// equivalence.
bool is_tautology(const Formula& f);

// Conversion: equality after unfolding macros and derived connectives and
// beta reduction.
bool convertible(const Formula& a, const Formula& b);

enum class StepKind { Axiom, MP, Nec, Hyp, Qed, Premise, Exp, Taut, Gen, Inst, Conv };

struct Step {
  StepKind kind = StepKind::Axiom;
  std::size_t line = 0;
  std::string label;
  std::string schema;       // Axiom
  Substitution sub;         // Axiom with explicit substitution
  Formula formula;          // Axiom instance, Hyp, Taut, Conv target
  std::vector<int> refs;    // 0-based earlier steps
  int premise = -1;         // 0-based
  std::string var;          // Gen
  Term term;                // Inst
};

struct ProofScript {
  std::shared_ptr<const Signature> sig;
  std::vector<Step> steps;
};

// One step per line:
//   ax <schema> {m := ...; ...}   ax <schema> <formula>
//   mp i j   nec i   hyp <formula>   qed i   premise k   exp i
//   taut <formula>   gen i <var>   inst i <term>   conv i <formula>
// Steps count from 1; `name:` before a step labels it, and labels may be
// cited in place of numbers. '#' starts a comment.
ProofScript parse_proof(const std::string& text, std::shared_ptr<const Signature> sig);

struct Verdict {
  bool accepted = false;
  Formula conclusion;
  int step = -1;  // 1-based failing step
  std::string reason;
};

Verdict check_proof(const ProofScript& ps, const Layer& layer, const std::vector<Formula>& premises);

struct SoundnessCounterexample {
  std::string schema;
  std::string instance;
  std::string model;
  int world = 0;
};

struct SoundnessReport {
  std::string layer;
  Logic frames = Logic::K;
  std::uint64_t models = 0;
  std::uint64_t assignments = 0;
  std::size_t generators = 0;
  std::vector<SoundnessCounterexample> counterexamples;
  std::vector<std::string> rule_failures;
  bool sound() const { return counterexamples.empty() && rule_failures.empty(); }
  std::string text() const;
};

struct ValidateOptions {
  int atoms = 2;
  int depth = 3;
  std::optional<Logic> frames;  // defaults to the layer's logic
  int workers = 1;
};

SoundnessReport validate_layer(const Layer& layer, const Bounds& b, ValidateOptions opt = {});

// All formulas of depth <= depth over the given proposition constants,
// built from falsum-free atoms with ~, -> and []. Subformulas are shared.
std::vector<Formula> generate_formulas(const std::vector<std::string>& atoms, int depth);

}  // namespace qml
