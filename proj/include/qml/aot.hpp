#pragma once

// Aczel models for second-order AOT with monadic encoding.
//
// Urelements are numbered ordinary first, then special. A unary relation is
// a mask over urelement x world with bit w * |U| + u, so relspace1 is every
// mask below 2^(|U| |W|). An abstract object is a set of relations, stored
// as a bitmask over relation masks; two abstract objects with the same set
// are the same object. sigma sends each abstract object to a special
// urelement, and exemplification goes through that urelement.
//
// Accessibility is total. Terms may fail to denote; atoms with a
// non-denoting argument are false.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qml/kripke.hpp"

namespace qml {

enum class SigmaRule {
  Constant,  // every abstract object goes to the first special urelement
  Parity,    // number of encoded relations modulo |specialU|
};

struct AotValue {
  enum class Kind : std::uint8_t { Ordinary, Abstract, Relation, Proposition };
  Kind kind = Kind::Ordinary;
  std::uint32_t bits = 0;  // urelement, encoded set, relation mask, or world mask

  static AotValue ordinary(int u) { return {Kind::Ordinary, static_cast<std::uint32_t>(u)}; }
  static AotValue abstract(std::uint32_t encoded) { return {Kind::Abstract, encoded}; }
  static AotValue relation(std::uint32_t mask) { return {Kind::Relation, mask}; }
  static AotValue proposition(std::uint32_t mask) { return {Kind::Proposition, mask}; }
  bool is_individual() const { return kind == Kind::Ordinary || kind == Kind::Abstract; }
  bool operator==(const AotValue&) const = default;
};

struct Denotation {
  bool denotes = false;
  AotValue value;
  static Denotation none() { return {}; }
  static Denotation of(AotValue v) { return {true, v}; }
  bool operator==(const Denotation&) const = default;
};

using AotAssignment = std::map<std::string, AotValue>;

struct AczelConfig {
  int ordinary = 1;
  int special = 1;
  int worlds = 2;
  SigmaRule sigma = SigmaRule::Constant;
  // Defaults: E! holds of the first ordinary urelement at the last world
  // only when there are at least two worlds (everywhere otherwise); q0 is
  // the proposition "something is concrete but not actually concrete".
  std::optional<std::uint32_t> e_bang;
  std::optional<std::uint32_t> q0;
  // Extra constants of the signature: unary relations, propositions,
  // individuals.
  std::map<std::string, AotValue> constants;
  std::size_t relspace_cap = 16;
  // Individual quantifiers that must scan every abstract object may nest
  // this deep.
  int full_scan_nesting = 1;
};

struct AczelModel {
  std::shared_ptr<const Signature> sig;
  AczelConfig config;
  int ordinary = 1;
  int special = 1;
  int worlds = 2;
  int urelements = 2;
  std::uint32_t relations = 16;  // |relspace1|
  std::uint32_t e_bang = 0;
  std::uint32_t q0 = 0;
  std::map<std::string, AotValue> constants;

  std::uint32_t all_worlds() const { return (1u << worlds) - 1u; }
  std::uint32_t propositions() const { return 1u << worlds; }
  std::uint64_t abstract_objects() const { return std::uint64_t{1} << relations; }
  int sigma(std::uint32_t encoded) const;
  int urelement(const AotValue& individual) const;
  bool exemplifies(std::uint32_t relation, int urelement, int world) const;
  // The propositional property [\x p]: p's truth at each world, for every urelement.
  std::uint32_t propositional_property(std::uint32_t prop) const;
  std::string urelement_name(int u) const;
  std::string relation_text(std::uint32_t mask) const;
  std::string individual_text(const AotValue& v) const;
};

AczelModel build_aczel(const AczelConfig& config = {});

// Whether the model satisfies the two contingency axioms:
//   <>exists x. E!x & ~@E!x   and   exists x. <>E!x & ~@E!x
bool satisfies_contingency(const AczelModel& m);

bool eval_aot(const Formula& f, const AczelModel& m, const AotAssignment& a, int world);
std::uint32_t eval_aot_mask(const Formula& f, const AczelModel& m, const AotAssignment& a = {});
Denotation denote(const Term& t, const AczelModel& m, const AotAssignment& a = {});
// The defined existence claim, evaluated at the actual world.
bool exists_term(const Term& t, const AczelModel& m, const AotAssignment& a = {});
// The defined identity, evaluated at the actual world.
bool identity_holds(const Term& a, const Term& b, const AczelModel& m, const AotAssignment& asg = {});

struct NamedRelation {
  std::string name;
  std::string text;  // AOT-mode term
  std::uint32_t mask = 0;
  bool historical = false;
};

struct PairWitness {
  int i = 0, j = 0;
  int urelement = 0;
  int world = 0;
};

struct MinimalModelReport {
  int worlds = 0;
  std::uint32_t propositions = 0;
  std::uint32_t relations = 0;
  bool contingency = false;  // both contingency axioms hold
  std::vector<NamedRelation> named;
  std::vector<PairWitness> witnesses;  // one per distinguished pair
  std::size_t pairs = 0;
  bool historical_distinct = false;
  bool all_named_distinct = false;
  bool covers_relspace = false;
  std::vector<std::string> two_individuals;  // transcript lines
  bool two_individuals_ok = false;
  std::string text() const;
};

MinimalModelReport minimal_model_report(const AczelModel& m);

struct SyntacticWorld {
  std::uint32_t encoded = 0;                // abstract object
  std::vector<std::uint32_t> propositions;  // p with [\x p] encoded
  std::vector<int> semantic;                // semantic worlds making all of them true
};

struct WorldTheoryReport {
  std::vector<SyntacticWorld> worlds;
  std::uint32_t candidates = 0;
  bool bijective = false;
  struct Check {
    std::string proposition;
    std::uint32_t mask = 0;
    bool necessary = false;
    bool true_in_all_worlds = false;
    bool holds() const { return necessary == true_in_all_worlds; }
  };
  std::vector<Check> checks;
  bool fundamental_theorem = false;
  std::string text() const;
};

WorldTheoryReport world_theory_report(const AczelModel& m);

// AOT-mode signature of a model: E!, q0 and the configured constants.
std::shared_ptr<Signature> aot_signature(const AczelConfig& config);

}  // namespace qml
