#pragma once

// Abstract syntax of second-order quantified modal logic with
// exemplification and encoding predication.
//
// Bound variables are de Bruijn indices; the binder keeps a name only as a
// printing hint. Free variables and constants are referenced by name.
// Nodes are immutable and shared.

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qml/error.hpp"

namespace qml {

class Sort {
 public:
  static constexpr Sort individual() { return Sort(-1); }
  static constexpr Sort relation(int arity) { return Sort(arity); }
  static constexpr Sort proposition() { return Sort(0); }

  constexpr bool is_individual() const { return arity_ < 0; }
  constexpr bool is_relation() const { return arity_ >= 0; }
  constexpr bool is_proposition() const { return arity_ == 0; }
  constexpr int arity() const { return arity_ < 0 ? 0 : arity_; }

  constexpr auto operator<=>(const Sort&) const = default;

 private:
  constexpr explicit Sort(int arity) : arity_(arity) {}
  int arity_;
};

std::string to_string(Sort s);

enum class Mode : std::uint8_t { Classical, Aot };
enum class Logic : std::uint8_t { K, KB, S5Total };

std::string to_string(Logic l);
Logic parse_logic(const std::string& text);

enum class ConstKind : std::uint8_t { Relation, SecondOrder, Individual };

struct ConstDecl {
  std::string name;
  ConstKind kind = ConstKind::Relation;
  int arity = 0;  // Relation only; 0 declares a proposition constant

  Sort sort() const;
};

struct Signature {
  Mode mode = Mode::Classical;
  Logic logic = Logic::S5Total;
  std::vector<ConstDecl> constants;
  // Relation quantifiers range over rigid properties only, and arguments of
  // second-order constants are rigidified at the evaluation world.
  bool rigid_properties = false;

  static Signature classical(Logic logic = Logic::S5Total);
  // AOT signatures always declare E! of arity 1.
  static Signature aot();

  Signature& add_relation(const std::string& name, int arity);
  Signature& add_proposition(const std::string& name) { return add_relation(name, 0); }
  Signature& add_second_order(const std::string& name);
  Signature& add_individual(const std::string& name);

  const ConstDecl* find(const std::string& name) const;
  int index_of(const std::string& name) const;  // -1 when absent
};

class Term;
class Formula;
struct TermNode;
struct FormulaNode;

enum class TermKind : std::uint8_t { Bound, Free, Const, Macro, Lambda, Description };

enum class FormulaKind : std::uint8_t {
  // primitive
  Falsum,
  Exemplify,    // terms[0] predicate, terms[1..] arguments
  Encode,       // terms[0] individual, terms[1] unary relation
  SecondOrder,  // name = constant, terms[0] unary relation
  Eq,           // classical primitive identity, terms[0] = terms[1]
  Not,
  Implies,
  Box,
  Actually,
  ForAll,  // name = binder hint, binder_sort
  // derived
  Verum,
  Dia,
  And,
  Or,
  Iff,
  Xor,
  Exists,
  Macro,  // name from the closed macro table, terms = arguments
};

bool is_primitive(FormulaKind k);

// One past the largest FormulaNode::id handed out so far.
std::uint32_t formula_id_limit();

class Term {
 public:
  Term() = default;
  explicit Term(std::shared_ptr<const TermNode> node) : node_(std::move(node)) {}

  const TermNode& operator*() const { return *node_; }
  const TermNode* operator->() const { return node_.get(); }
  const TermNode* get() const { return node_.get(); }
  explicit operator bool() const { return node_ != nullptr; }

  TermKind kind() const;
  Sort sort() const;

 private:
  std::shared_ptr<const TermNode> node_;
};

class Formula {
 public:
  Formula() = default;
  explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}

  const FormulaNode& operator*() const { return *node_; }
  const FormulaNode* operator->() const { return node_.get(); }
  const FormulaNode* get() const { return node_.get(); }
  explicit operator bool() const { return node_ != nullptr; }

  FormulaKind kind() const;

 private:
  std::shared_ptr<const FormulaNode> node_;
};

struct TermNode {
  TermKind kind = TermKind::Free;
  Sort sort = Sort::individual();
  std::string name;                  // Free, Const, Macro
  int index = 0;                     // Bound
  std::vector<std::string> binders;  // Lambda (x1..xn), Description (x)
  std::vector<Sort> binder_sorts;
  Formula body;                      // Lambda, Description
  int loose = 0;                     // 1 + highest loose bound index, 0 if none
  bool has_macro = false;
};

struct FormulaNode {
  FormulaKind kind = FormulaKind::Falsum;
  std::string name;
  Sort binder_sort = Sort::individual();
  std::vector<Formula> subs;
  std::vector<Term> terms;
  int loose = 0;
  bool has_macro = false;
  std::uint32_t id = 0;  // unique per node, used as a cache key
};

// ---- term construction ----------------------------------------------------

Term bound_var(int index, Sort sort, const std::string& hint = "");
Term free_var(const std::string& name, Sort sort);
Term constant(const std::string& name, Sort sort);
// O!, A!, God, God*, NE, NEs, NE*.
Term macro_relation(const std::string& name);
// Body must already refer to the binders by de Bruijn index (x_n is 0).
Term lambda_raw(std::vector<std::string> names, std::vector<Sort> sorts, Formula body);
Term description_raw(const std::string& name, Formula body);
// Abstract the named free individual variables of body.
Term lambda(const std::vector<Term>& vars, const Formula& body);
Term description(const Term& var, const Formula& body);

// ---- formula construction -------------------------------------------------

Formula falsum();
Formula verum();
Formula exemplify(const Term& pred, std::vector<Term> args);
Formula prop_atom(const Term& p);
Formula encode(const Term& ind, const Term& rel);
Formula second_order(const std::string& q, const Term& rel);
Formula equals(const Term& a, const Term& b);
Formula neg(const Formula& f);
Formula implies(const Formula& a, const Formula& b);
Formula box(const Formula& f);
Formula actually(const Formula& f);
Formula dia(const Formula& f);
Formula conj(const Formula& a, const Formula& b);
Formula disj(const Formula& a, const Formula& b);
Formula iff(const Formula& a, const Formula& b);
Formula exclusive_or(const Formula& a, const Formula& b);
Formula forall_raw(const std::string& hint, Sort sort, const Formula& body);
Formula exists_raw(const std::string& hint, Sort sort, const Formula& body);
// Binds the free variable `var` in body.
Formula forall(const Term& var, const Formula& body);
Formula exists(const Term& var, const Formula& body);
Formula macro(const std::string& name, std::vector<Term> args);

// Generic rebuild used by transformations: same kind and names, new children.
Formula rebuild(const FormulaNode& n, std::vector<Formula> subs, std::vector<Term> terms);
Term rebuild(const TermNode& n, Formula body);

// ---- the closed macro table -----------------------------------------------

bool is_formula_macro(const std::string& name);
bool is_relation_macro(const std::string& name);
// Argument sorts of a formula macro; "down" and "=" accept any sort and
// report std::nullopt.
std::optional<std::vector<Sort>> macro_signature(const std::string& name);

// ---- structural operations --------------------------------------------------

// Raise loose bound indices >= cutoff by d.
Term shift(const Term& t, int d, int cutoff = 0);
Formula shift(const Formula& f, int d, int cutoff = 0);

// Replace bound index 0 of a binder body by `value`, lowering the other
// loose indices.
Formula instantiate(const Formula& body, const Term& value);
// Multi-binder form used for lambdas: values[i] replaces binder i (x1..xn).
Formula instantiate_all(const Formula& body, const std::vector<Term>& values);

// Turn free occurrences of `name` into a bound index at the current depth.
Formula abstract_free(const Formula& f, const std::string& name);

struct FreeVar {
  std::string name;
  Sort sort;
  auto operator<=>(const FreeVar&) const = default;
};
std::vector<FreeVar> free_variables(const Formula& f);
std::vector<FreeVar> free_variables(const Term& t);
bool occurs_free(const Formula& f, const std::string& name);

// Capture-avoiding substitution of a free variable.
Formula substitute(const Formula& f, const Term& var, const Term& value);

// Structural equality modulo binder names.
bool alpha_equivalent(const Formula& a, const Formula& b);
bool alpha_equivalent(const Term& a, const Term& b);

// Unfold every derived connective, quantifier, and macro into the
// primitive constructors. Idempotent.
Formula expand_derived(const Formula& f);
Term expand_derived(const Term& t);
// Unfold only the macro table, keeping derived connectives.
Formula expand_macros(const Formula& f);
Term expand_macros(const Term& t);

// Beta-reduce exemplifications of lambda terms (classical reading).
Formula beta_normalize(const Formula& f);

// Number of nested Box/Dia operators.
int modal_depth(const Formula& f);
int formula_depth(const Formula& f);

// Every constant mentioned, by name.
std::vector<std::string> constants_of(const Formula& f);

}  // namespace qml
