#pragma once

// World-explicit meta-language and the two translations out of the modal
// language: the standard translation (worlds become an explicit argument)
// and the sorted first-order export for propositional modal schemas.

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "qml/syntax.hpp"

namespace qml {

enum class MetaSort : std::uint8_t { World, Individual, Relation };

enum class MetaKind : std::uint8_t {
  Var,      // de Bruijn index into enclosing meta binders
  Name,     // free variable or constant of the object language, by name
  Actual,   // the distinguished world w0
  Access,   // kids[0] R kids[1]
  Apply,    // kids[0] head, kids[1..n] individuals, kids.back() world
  Eq,       // individual identity
  Top,
  Bottom,
  Not,
  Implies,
  And,
  Or,
  Iff,
  ForAll,
  Exists,
  Lambda,   // one world binder, top level only
};

struct MetaNode;

class MetaTerm {
 public:
  MetaTerm() = default;
  explicit MetaTerm(std::shared_ptr<const MetaNode> n) : node_(std::move(n)) {}
  const MetaNode& operator*() const { return *node_; }
  const MetaNode* operator->() const { return node_.get(); }
  const MetaNode* get() const { return node_.get(); }
  explicit operator bool() const { return node_ != nullptr; }

 private:
  std::shared_ptr<const MetaNode> node_;
};

struct MetaNode {
  MetaKind kind = MetaKind::Top;
  MetaSort sort = MetaSort::World;  // Var/Name, and binder sort of ForAll/Exists/Lambda
  int arity = 0;                    // relation arity for Relation-sorted vars and binders
  int index = 0;                    // Var
  std::string name;                 // Name, or binder hint
  std::vector<MetaTerm> kids;
  int loose = 0;
  std::uint32_t id = 0;
};

MetaTerm meta_node(MetaNode n);
// One past the largest MetaNode::id handed out so far.
std::uint32_t meta_id_limit();

// Translates a Classical formula. Relation macros and lambda
// exemplification are unfolded first; encoding atoms, descriptions and
// second-order constants raise Unsupported.
class StandardTranslator {
 public:
  MetaTerm operator()(const Formula& f);

 private:
  struct Ctx;
  MetaTerm st(const Formula& f, Ctx& c);
  MetaTerm term(const Term& t, Ctx& c);
  std::unordered_map<std::uint32_t, MetaTerm> cache_;
};

MetaTerm standard_translation(const Formula& f);

// `\w. forall v x. R w v -> P x v`
std::string print_meta(const MetaTerm& t);

// Prover9-style sorted first-order text for a propositional modal schema.
std::string export_first_order(const Formula& schema);

}  // namespace qml
