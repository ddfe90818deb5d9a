#pragma once

// Finite Kripke interpretations and the three-valued evaluator used both for
// model checking (complete interpretations) and for pruning during model
// search (partial interpretations, unknown entries stored as -1).
//
// Relation values of arity n are bitmasks: bit w * |D|^n + tuple, where
// tuple = d1 + |D| d2 + ... . Propositions are the n = 0 case, so their bit
// index is the world.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "qml/syntax.hpp"
#include "qml/translate.hpp"

namespace qml {

using WorldMask = std::uint32_t;
using RelValue = std::uint64_t;

inline constexpr int kMaxWorlds = 32;

struct KripkeInterpretation {
  std::shared_ptr<const Signature> sig;
  int worlds = 1;
  int individuals = 1;
  int actual = 0;
  std::vector<WorldMask> succ;  // successors of each world

  // One table per signature constant, in signature order.
  //   Relation n:   |D|^n * |W| entries, index w * |D|^n + tuple
  //   SecondOrder:  |W| * |relspace| entries, index w * |relspace| + member
  //   Individual:   one entry holding the individual
  // Entries are 0/1 (or an individual), -1 when not yet fixed.
  std::vector<std::vector<std::int8_t>> table;

  // Range of unary relation quantifiers and index set of second-order
  // tables. Sorted. With the signature's rigid flag these are the rigid
  // relations; otherwise the full space when it fits the cap.
  std::vector<RelValue> relspace;
  bool relspace_available = true;
  std::size_t cap = 16;

  static KripkeInterpretation blank(std::shared_ptr<const Signature> sig, int worlds, int individuals,
                                    std::size_t relspace_cap = 16);

  WorldMask all_worlds() const { return worlds >= 32 ? ~0u : ((1u << worlds) - 1u); }
  int tuples(int arity) const;
  bool complete() const;
  int relspace_index(RelValue v) const;  // -1 when not a member

  // Convenience setters for building models by hand.
  void set_access(int from, int to, bool on = true);
  void set_total_access();
  void set_proposition(const std::string& name, WorldMask truth);
  void set_relation(const std::string& name, RelValue mask);
  void set_individual(const std::string& name, int d);
  void set_second_order(const std::string& name, int world, RelValue member, bool value);

  RelValue relation_mask(const std::string& name) const;  // must be fully fixed
};

RelValue rigid_relation(int worlds, int individuals, std::uint32_t extension);
bool is_rigid_value(RelValue v, int worlds, int individuals);
// Extension at world w, replicated to every world.
RelValue rigidify(RelValue v, int w, int worlds, int individuals);

std::string describe(const KripkeInterpretation& m);

struct Value {
  Sort sort = Sort::individual();
  RelValue bits = 0;  // individual index, or relation mask
};

using Assignment = std::map<std::string, Value>;

struct Truth {
  WorldMask t = 0;
  WorldMask f = 0;
  bool operator==(const Truth&) const = default;
};

// Evaluates formulas over one interpretation and assignment, caching the
// world vectors of closed subformulas. Call reset() after mutating the
// interpretation.
class Evaluator {
 public:
  explicit Evaluator(const KripkeInterpretation& m, Assignment a = {});

  Truth eval(const Formula& f);
  void reset();
  void rebind(const KripkeInterpretation& m);
  void set_assignment(Assignment a);

 private:
  struct Val {
    bool known = true;
    RelValue bits = 0;
  };

  const KripkeInterpretation* m_;
  Assignment assignment_;
  std::vector<Val> env_;
  std::uint32_t epoch_ = 1;
  std::vector<std::uint32_t> stamp_;
  std::vector<Truth> cache_;
  std::vector<std::uint32_t> lam_stamp_;
  std::vector<Val> lam_cache_;
  std::unordered_map<std::uint32_t, Formula> expanded_;

  Truth eval_node(const Formula& f);
  Truth exemplify(const Formula& f);
  Truth second_order(const Formula& f);
  Truth quantify(const Formula& f, bool universal);
  Val term_value(const Term& t);
  Val extension(const Term& lambda);
  Truth apply_lambda(const Term& lambda, const std::vector<Val>& args);
  Term expand_relation_macro(const Term& t);
  std::vector<RelValue> range(Sort s) const;
};

bool eval(const Formula& f, const KripkeInterpretation& m, const Assignment& a, int world);
std::vector<bool> proposition_of(const Formula& f, const KripkeInterpretation& m, const Assignment& a = {});
WorldMask proposition_mask(const Formula& f, const KripkeInterpretation& m, const Assignment& a = {});

enum class Validity { Necessary, Actual };
bool validity(const Formula& f, const KripkeInterpretation& m, Validity mode);

bool frame_check(const KripkeInterpretation& m, Logic tag);

// Meta-language evaluation of a standard translation at a world.
class MetaEvaluator {
 public:
  explicit MetaEvaluator(const KripkeInterpretation& m, Assignment a = {});
  bool holds(const MetaTerm& lambda, int world);
  // Truth at every world. Subterms whose loose variables are all worlds are
  // evaluated once per interpretation as tables over those variables;
  // anything else goes through holds().
  WorldMask mask(const MetaTerm& lambda);
  void rebind(const KripkeInterpretation& m);

 private:
  struct Slot {
    std::uint32_t stamp = 0;
    std::uint32_t known = 0;
    std::uint32_t value = 0;
  };
  const KripkeInterpretation* m_;
  Assignment assignment_;
  std::vector<RelValue> env_;
  std::vector<MetaSort> env_sort_;
  std::uint32_t epoch_ = 1;
  std::vector<Slot> cache_;
  struct Table {
    std::uint32_t stamp = 0;
    bool ok = false;
    std::uint32_t bits = 0;  // entry sum_i v_i |W|^i for loose variables v_0, v_1, ...
  };
  std::vector<Table> tables_;

  bool ev(const MetaTerm& t);
  bool table(const MetaTerm& t, std::uint32_t& bits);
  std::uint32_t widen(std::uint32_t bits, int from, int to) const;
  RelValue value(const MetaTerm& t);
};

bool meta_eval(const MetaTerm& lambda, const KripkeInterpretation& m, int world, const Assignment& a = {});

}  // namespace qml
