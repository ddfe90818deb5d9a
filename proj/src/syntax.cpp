#include "qml/syntax.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <set>

namespace qml {

std::string to_string(Sort s) {
  if (s.is_individual()) return "i";
  if (s.is_proposition()) return "o";
  return std::to_string(s.arity());
}

std::string to_string(Logic l) {
  switch (l) {
    case Logic::K: return "K";
    case Logic::KB: return "KB";
    case Logic::S5Total: return "S5";
  }
  return "?";
}

Logic parse_logic(const std::string& text) {
  if (text == "K") return Logic::K;
  if (text == "KB") return Logic::KB;
  if (text == "S5" || text == "S5Total") return Logic::S5Total;
  throw ParseError("unknown logic '" + text + "'", 0, 0);
}

Sort ConstDecl::sort() const {
  switch (kind) {
    case ConstKind::Relation: return Sort::relation(arity);
    case ConstKind::SecondOrder: return Sort::relation(1);
    case ConstKind::Individual: return Sort::individual();
  }
  return Sort::individual();
}

Signature Signature::classical(Logic logic) {
  Signature s;
  s.mode = Mode::Classical;
  s.logic = logic;
  return s;
}

Signature Signature::aot() {
  Signature s;
  s.mode = Mode::Aot;
  s.logic = Logic::S5Total;
  s.add_relation("E!", 1);
  return s;
}

Signature& Signature::add_relation(const std::string& name, int arity) {
  if (arity < 0) throw SortError("negative arity for '" + name + "'");
  if (find(name)) throw SortError("constant '" + name + "' declared twice");
  constants.push_back({name, ConstKind::Relation, arity});
  return *this;
}

Signature& Signature::add_second_order(const std::string& name) {
  if (find(name)) throw SortError("constant '" + name + "' declared twice");
  constants.push_back({name, ConstKind::SecondOrder, 1});
  return *this;
}

Signature& Signature::add_individual(const std::string& name) {
  if (find(name)) throw SortError("constant '" + name + "' declared twice");
  constants.push_back({name, ConstKind::Individual, 0});
  return *this;
}

const ConstDecl* Signature::find(const std::string& name) const {
  for (const auto& c : constants)
    if (c.name == name) return &c;
  return nullptr;
}

int Signature::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < constants.size(); ++i)
    if (constants[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {
std::atomic<std::uint32_t> g_next_id{1};
}  // namespace

bool is_primitive(FormulaKind k) { return k <= FormulaKind::ForAll; }

std::uint32_t formula_id_limit() { return g_next_id.load(std::memory_order_relaxed); }

TermKind Term::kind() const { return node_->kind; }
Sort Term::sort() const { return node_->sort; }
FormulaKind Formula::kind() const { return node_->kind; }

namespace {

Term make(TermNode n) {
  int loose = 0;
  bool has_macro = n.kind == TermKind::Macro;
  if (n.kind == TermKind::Bound) loose = n.index + 1;
  if (n.body) {
    loose = std::max(0, n.body->loose - static_cast<int>(n.binders.size()));
    has_macro = has_macro || n.body->has_macro;
  }
  n.loose = loose;
  n.has_macro = has_macro;
  return Term(std::make_shared<const TermNode>(std::move(n)));
}

bool binds(FormulaKind k) { return k == FormulaKind::ForAll || k == FormulaKind::Exists; }

Formula make(FormulaNode n) {
  int loose = 0;
  bool has_macro = n.kind == FormulaKind::Macro;
  for (const auto& s : n.subs) {
    loose = std::max(loose, s->loose);
    has_macro = has_macro || s->has_macro;
  }
  if (binds(n.kind)) loose = std::max(0, loose - 1);
  for (const auto& t : n.terms) {
    loose = std::max(loose, t->loose);
    has_macro = has_macro || t->has_macro;
  }
  n.loose = loose;
  n.has_macro = has_macro;
  n.id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return Formula(std::make_shared<const FormulaNode>(std::move(n)));
}

Formula node(FormulaKind k, std::vector<Formula> subs, std::vector<Term> terms = {},
             std::string name = {}, Sort bs = Sort::individual()) {
  FormulaNode n;
  n.kind = k;
  n.subs = std::move(subs);
  n.terms = std::move(terms);
  n.name = std::move(name);
  n.binder_sort = bs;
  return make(std::move(n));
}

const Sort kInd = Sort::individual();
const Sort kRel1 = Sort::relation(1);

}  // namespace

// ---- terms -----------------------------------------------------------------

Term bound_var(int index, Sort sort, const std::string& hint) {
  TermNode n;
  n.kind = TermKind::Bound;
  n.index = index;
  n.sort = sort;
  n.name = hint;
  return make(std::move(n));
}

Term free_var(const std::string& name, Sort sort) {
  TermNode n;
  n.kind = TermKind::Free;
  n.name = name;
  n.sort = sort;
  return make(std::move(n));
}

Term constant(const std::string& name, Sort sort) {
  TermNode n;
  n.kind = TermKind::Const;
  n.name = name;
  n.sort = sort;
  return make(std::move(n));
}

Term macro_relation(const std::string& name) {
  if (!is_relation_macro(name)) throw SortError("unknown relation macro '" + name + "'");
  TermNode n;
  n.kind = TermKind::Macro;
  n.name = name;
  n.sort = kRel1;
  return make(std::move(n));
}

Term lambda_raw(std::vector<std::string> names, std::vector<Sort> sorts, Formula body) {
  if (names.size() != sorts.size()) throw SortError("lambda binder/sort count mismatch");
  for (const auto& s : sorts)
    if (!s.is_individual()) throw SortError("lambda binds individual variables only");
  TermNode n;
  n.kind = TermKind::Lambda;
  n.sort = Sort::relation(static_cast<int>(names.size()));
  n.binders = std::move(names);
  n.binder_sorts = std::move(sorts);
  n.body = std::move(body);
  return make(std::move(n));
}

Term description_raw(const std::string& name, Formula body) {
  TermNode n;
  n.kind = TermKind::Description;
  n.sort = kInd;
  n.binders = {name};
  n.binder_sorts = {kInd};
  n.body = std::move(body);
  return make(std::move(n));
}

namespace {

// names[i] becomes bound index (n-1-i) relative to the binder block.
Formula abstract_many(const Formula& f, const std::vector<std::string>& names, int depth);

Term abstract_many(const Term& t, const std::vector<std::string>& names, int depth) {
  const int n = static_cast<int>(names.size());
  switch (t.kind()) {
    case TermKind::Free:
      for (int i = 0; i < n; ++i)
        if (names[i] == t->name) return bound_var(depth + n - 1 - i, t.sort(), t->name);
      return t;
    case TermKind::Bound:
      return t->index >= depth ? bound_var(t->index + n, t.sort(), t->name) : t;
    case TermKind::Lambda:
    case TermKind::Description:
      return rebuild(*t, abstract_many(t->body, names, depth + static_cast<int>(t->binders.size())));
    default:
      return t;
  }
}

Formula abstract_many(const Formula& f, const std::vector<std::string>& names, int depth) {
  std::vector<Formula> subs;
  const int inner = depth + (binds(f.kind()) ? 1 : 0);
  for (const auto& s : f->subs) subs.push_back(abstract_many(s, names, inner));
  std::vector<Term> terms;
  for (const auto& t : f->terms) terms.push_back(abstract_many(t, names, depth));
  return rebuild(*f, std::move(subs), std::move(terms));
}

}  // namespace

Term lambda(const std::vector<Term>& vars, const Formula& body) {
  std::vector<std::string> names;
  std::vector<Sort> sorts;
  for (const auto& v : vars) {
    if (v.kind() != TermKind::Free || !v.sort().is_individual())
      throw SortError("lambda binds free individual variables");
    names.push_back(v->name);
    sorts.push_back(kInd);
  }
  return lambda_raw(names, sorts, abstract_many(body, names, 0));
}

Term description(const Term& var, const Formula& body) {
  if (var.kind() != TermKind::Free || !var.sort().is_individual())
    throw SortError("description binds a free individual variable");
  return description_raw(var->name, abstract_many(body, {var->name}, 0));
}

Term rebuild(const TermNode& n, Formula body) {
  TermNode c = n;
  c.body = std::move(body);
  return make(std::move(c));
}

// ---- formulas --------------------------------------------------------------

Formula falsum() { return node(FormulaKind::Falsum, {}); }
Formula verum() { return node(FormulaKind::Verum, {}); }

Formula exemplify(const Term& pred, std::vector<Term> args) {
  if (!pred.sort().is_relation())
    throw SortError("'" + pred->name + "' is not a relation term");
  if (static_cast<int>(args.size()) != pred.sort().arity())
    throw SortError("relation '" + pred->name + "' expects " + std::to_string(pred.sort().arity()) +
                    " argument(s), got " + std::to_string(args.size()));
  for (const auto& a : args)
    if (!a.sort().is_individual())
      throw SortError("argument '" + a->name + "' of '" + pred->name + "' is not an individual");
  std::vector<Term> terms{pred};
  terms.insert(terms.end(), args.begin(), args.end());
  return node(FormulaKind::Exemplify, {}, std::move(terms));
}

Formula prop_atom(const Term& p) { return exemplify(p, {}); }

Formula encode(const Term& ind, const Term& rel) {
  if (!ind.sort().is_individual()) throw SortError("encoder '" + ind->name + "' is not an individual");
  if (rel.sort() != kRel1) throw SortError("encoded term '" + rel->name + "' is not a unary relation");
  return node(FormulaKind::Encode, {}, {ind, rel});
}

Formula second_order(const std::string& q, const Term& rel) {
  if (rel.sort() != kRel1) throw SortError("argument of '" + q + "' is not a unary relation");
  return node(FormulaKind::SecondOrder, {}, {rel}, q);
}

Formula equals(const Term& a, const Term& b) {
  if (a.sort() != b.sort()) throw SortError("identity between terms of different sorts");
  return node(FormulaKind::Eq, {}, {a, b});
}

Formula neg(const Formula& f) { return node(FormulaKind::Not, {f}); }
Formula implies(const Formula& a, const Formula& b) { return node(FormulaKind::Implies, {a, b}); }
Formula box(const Formula& f) { return node(FormulaKind::Box, {f}); }
Formula actually(const Formula& f) { return node(FormulaKind::Actually, {f}); }
Formula dia(const Formula& f) { return node(FormulaKind::Dia, {f}); }
Formula conj(const Formula& a, const Formula& b) { return node(FormulaKind::And, {a, b}); }
Formula disj(const Formula& a, const Formula& b) { return node(FormulaKind::Or, {a, b}); }
Formula iff(const Formula& a, const Formula& b) { return node(FormulaKind::Iff, {a, b}); }
Formula exclusive_or(const Formula& a, const Formula& b) { return node(FormulaKind::Xor, {a, b}); }

Formula forall_raw(const std::string& hint, Sort sort, const Formula& body) {
  return node(FormulaKind::ForAll, {body}, {}, hint, sort);
}

Formula exists_raw(const std::string& hint, Sort sort, const Formula& body) {
  return node(FormulaKind::Exists, {body}, {}, hint, sort);
}

Formula forall(const Term& var, const Formula& body) {
  if (var.kind() != TermKind::Free) throw SortError("quantifier must bind a variable");
  return forall_raw(var->name, var.sort(), abstract_free(body, var->name));
}

Formula exists(const Term& var, const Formula& body) {
  if (var.kind() != TermKind::Free) throw SortError("quantifier must bind a variable");
  return exists_raw(var->name, var.sort(), abstract_free(body, var->name));
}

Formula macro(const std::string& name, std::vector<Term> args) {
  if (!is_formula_macro(name)) throw SortError("unknown macro '" + name + "'");
  auto sig = macro_signature(name);
  if (sig) {
    if (sig->size() != args.size())
      throw SortError("macro '" + name + "' expects " + std::to_string(sig->size()) + " arguments");
    for (std::size_t i = 0; i < args.size(); ++i)
      if (args[i].sort() != (*sig)[i])
        throw SortError("argument " + std::to_string(i + 1) + " of '" + name + "' has sort " +
                        to_string(args[i].sort()) + ", expected " + to_string((*sig)[i]));
  } else if (name == "down") {
    if (args.size() != 1) throw SortError("'down' takes one term");
  } else if (args.size() != 2 || args[0].sort() != args[1].sort()) {
    throw SortError("identity between terms of different sorts");
  }
  return node(FormulaKind::Macro, {}, std::move(args), name);
}

Formula rebuild(const FormulaNode& n, std::vector<Formula> subs, std::vector<Term> terms) {
  FormulaNode c;
  c.kind = n.kind;
  c.name = n.name;
  c.binder_sort = n.binder_sort;
  c.subs = std::move(subs);
  c.terms = std::move(terms);
  return make(std::move(c));
}

// ---- macro table -------------------------------------------------------------

bool is_formula_macro(const std::string& name) {
  static const std::set<std::string> kNames{"ess", "sess", "ess*", "entails", "rigid", "down", "="};
  return kNames.count(name) > 0;
}

bool is_relation_macro(const std::string& name) {
  static const std::set<std::string> kNames{"O!", "A!", "God", "God*", "NE", "NEs", "NE*"};
  return kNames.count(name) > 0;
}

std::optional<std::vector<Sort>> macro_signature(const std::string& name) {
  if (name == "ess" || name == "sess" || name == "ess*") return std::vector<Sort>{kRel1, kInd};
  if (name == "entails") return std::vector<Sort>{kRel1, kRel1};
  if (name == "rigid") return std::vector<Sort>{kRel1};
  return std::nullopt;
}

// ---- de Bruijn plumbing -------------------------------------------------------

Term shift(const Term& t, int d, int cutoff) {
  if (d == 0 || t->loose <= cutoff) return t;
  switch (t.kind()) {
    case TermKind::Bound:
      return t->index >= cutoff ? bound_var(t->index + d, t.sort(), t->name) : t;
    case TermKind::Lambda:
    case TermKind::Description:
      return rebuild(*t, shift(t->body, d, cutoff + static_cast<int>(t->binders.size())));
    default:
      return t;
  }
}

Formula shift(const Formula& f, int d, int cutoff) {
  if (d == 0 || f->loose <= cutoff) return f;
  const int inner = cutoff + (binds(f.kind()) ? 1 : 0);
  std::vector<Formula> subs;
  for (const auto& s : f->subs) subs.push_back(shift(s, d, inner));
  std::vector<Term> terms;
  for (const auto& t : f->terms) terms.push_back(shift(t, d, cutoff));
  return rebuild(*f, std::move(subs), std::move(terms));
}

namespace {

// Replace loose indices depth..depth+n-1 by values (values[n-1-k] for
// index depth+k); lower higher indices by n.
Formula inst(const Formula& f, const std::vector<Term>& values, int depth);

Term inst(const Term& t, const std::vector<Term>& values, int depth) {
  if (t->loose <= depth) return t;
  const int n = static_cast<int>(values.size());
  switch (t.kind()) {
    case TermKind::Bound: {
      const int k = t->index - depth;
      if (k < n) return shift(values[n - 1 - k], depth);
      return bound_var(t->index - n, t.sort(), t->name);
    }
    case TermKind::Lambda:
    case TermKind::Description:
      return rebuild(*t, inst(t->body, values, depth + static_cast<int>(t->binders.size())));
    default:
      return t;
  }
}

Formula inst(const Formula& f, const std::vector<Term>& values, int depth) {
  if (f->loose <= depth) return f;
  const int inner = depth + (binds(f.kind()) ? 1 : 0);
  std::vector<Formula> subs;
  for (const auto& s : f->subs) subs.push_back(inst(s, values, inner));
  std::vector<Term> terms;
  for (const auto& t : f->terms) terms.push_back(inst(t, values, depth));
  return rebuild(*f, std::move(subs), std::move(terms));
}

}  // namespace

Formula instantiate(const Formula& body, const Term& value) { return inst(body, {value}, 0); }

Formula instantiate_all(const Formula& body, const std::vector<Term>& values) {
  return inst(body, values, 0);
}

Formula abstract_free(const Formula& f, const std::string& name) {
  return abstract_many(f, {name}, 0);
}

namespace {

void collect_free(const Formula& f, std::set<FreeVar>& out);

void collect_free(const Term& t, std::set<FreeVar>& out) {
  if (t.kind() == TermKind::Free) out.insert({t->name, t.sort()});
  if (t->body) collect_free(t->body, out);
}

void collect_free(const Formula& f, std::set<FreeVar>& out) {
  for (const auto& s : f->subs) collect_free(s, out);
  for (const auto& t : f->terms) collect_free(t, out);
}

}  // namespace

std::vector<FreeVar> free_variables(const Formula& f) {
  std::set<FreeVar> out;
  collect_free(f, out);
  return {out.begin(), out.end()};
}

std::vector<FreeVar> free_variables(const Term& t) {
  std::set<FreeVar> out;
  collect_free(t, out);
  return {out.begin(), out.end()};
}

bool occurs_free(const Formula& f, const std::string& name) {
  for (const auto& v : free_variables(f))
    if (v.name == name) return true;
  return false;
}

namespace {

Formula subst(const Formula& f, const std::string& name, const Term& value, int depth);

Term subst(const Term& t, const std::string& name, const Term& value, int depth) {
  switch (t.kind()) {
    case TermKind::Free:
      return t->name == name ? shift(value, depth) : t;
    case TermKind::Lambda:
    case TermKind::Description:
      return rebuild(*t, subst(t->body, name, value, depth + static_cast<int>(t->binders.size())));
    default:
      return t;
  }
}

Formula subst(const Formula& f, const std::string& name, const Term& value, int depth) {
  const int inner = depth + (binds(f.kind()) ? 1 : 0);
  std::vector<Formula> subs;
  for (const auto& s : f->subs) subs.push_back(subst(s, name, value, inner));
  std::vector<Term> terms;
  for (const auto& t : f->terms) terms.push_back(subst(t, name, value, depth));
  return rebuild(*f, std::move(subs), std::move(terms));
}

}  // namespace

Formula substitute(const Formula& f, const Term& var, const Term& value) {
  if (var.kind() != TermKind::Free) throw SortError("substitution target must be a free variable");
  if (var.sort() != value.sort())
    throw SortError("cannot substitute a term of sort " + to_string(value.sort()) + " for '" +
                    var->name + "' of sort " + to_string(var.sort()));
  for (const auto& fv : free_variables(f))
    if (fv.name == var->name && fv.sort != var.sort())
      throw SortError("variable '" + var->name + "' occurs with sort " + to_string(fv.sort));
  return subst(f, var->name, value, 0);
}

// ---- alpha equivalence ------------------------------------------------------------

bool alpha_equivalent(const Term& a, const Term& b) {
  if (a.get() == b.get()) return true;
  if (a.kind() != b.kind() || a.sort() != b.sort()) return false;
  switch (a.kind()) {
    case TermKind::Bound:
      return a->index == b->index;
    case TermKind::Free:
    case TermKind::Const:
    case TermKind::Macro:
      return a->name == b->name;
    case TermKind::Lambda:
    case TermKind::Description:
      return a->binder_sorts == b->binder_sorts && alpha_equivalent(a->body, b->body);
  }
  return false;
}

bool alpha_equivalent(const Formula& a, const Formula& b) {
  if (a.get() == b.get()) return true;
  if (a.kind() != b.kind() || a->subs.size() != b->subs.size() ||
      a->terms.size() != b->terms.size())
    return false;
  if (binds(a.kind())) {
    if (a->binder_sort != b->binder_sort) return false;
  } else if (a->name != b->name) {
    return false;
  }
  for (std::size_t i = 0; i < a->subs.size(); ++i)
    if (!alpha_equivalent(a->subs[i], b->subs[i])) return false;
  for (std::size_t i = 0; i < a->terms.size(); ++i)
    if (!alpha_equivalent(a->terms[i], b->terms[i])) return false;
  return true;
}

// ---- macro expansion -----------------------------------------------------------------

namespace {

Term b(int i, Sort s, const std::string& hint) { return bound_var(i, s, hint); }

Formula ex(const Term& pred, std::vector<Term> args) { return exemplify(pred, std::move(args)); }

// Definitions below are written against the derived connectives; the
// expansion pass re-walks its output so nested macros unfold as well.
Formula macro_body(const std::string& name, const std::vector<Term>& args) {
  if (name == "entails") {
    // Y => Z  :=  [] forall x (Y x -> Z x)
    const Term y = shift(args[0], 1), z = shift(args[1], 1);
    return box(forall_raw("x", kInd, implies(ex(y, {b(0, kInd, "x")}), ex(z, {b(0, kInd, "x")}))));
  }
  if (name == "ess") {
    // forall Z (Z x -> Y => Z)
    const Term y = shift(args[0], 1), x = shift(args[1], 1);
    const Term z = b(0, kRel1, "Z");
    return forall_raw("Z", kRel1, implies(ex(z, {x}), macro("entails", {y, z})));
  }
  if (name == "sess") {
    return conj(ex(args[0], {args[1]}), macro("ess", {args[0], args[1]}));
  }
  if (name == "ess*") {
    // forall Z ([]Z x <-> Y => Z)
    const Term y = shift(args[0], 1), x = shift(args[1], 1);
    const Term z = b(0, kRel1, "Z");
    return forall_raw("Z", kRel1, iff(box(ex(z, {x})), macro("entails", {y, z})));
  }
  if (name == "rigid") {
    const Term y = shift(args[0], 1);
    const Term x = b(0, kInd, "x");
    return forall_raw("x", kInd, iff(ex(y, {x}), box(ex(y, {x}))));
  }
  if (name == "down") {
    const Term& t = args[0];
    if (t.sort().is_individual()) {
      return exists_raw("F", kRel1, ex(b(0, kRel1, "F"), {shift(t, 1)}));
    }
    if (t.sort() == kRel1) {
      return exists_raw("x", kInd, encode(b(0, kInd, "x"), shift(t, 1)));
    }
    if (t.sort().is_proposition()) {
      return macro("down", {lambda_raw({"x"}, {kInd}, prop_atom(shift(t, 1)))});
    }
    throw SortError("existence of " + std::to_string(t.sort().arity()) +
                    "-place relation terms needs n-ary encoding, which is not supported");
  }
  if (name == "=") {
    const Term& l = args[0];
    const Term& r = args[1];
    if (l.sort().is_individual()) {
      const Term f = b(0, kRel1, "F");
      const Formula ordinary =
          conj(conj(ex(macro_relation("O!"), {l}), ex(macro_relation("O!"), {r})),
               box(forall_raw("F", kRel1, iff(ex(f, {shift(l, 1)}), ex(f, {shift(r, 1)})))));
      const Formula abstract =
          conj(conj(ex(macro_relation("A!"), {l}), ex(macro_relation("A!"), {r})),
               box(forall_raw("F", kRel1, iff(encode(shift(l, 1), f), encode(shift(r, 1), f)))));
      return disj(ordinary, abstract);
    }
    if (l.sort() == kRel1) {
      const Term x = b(0, kInd, "x");
      return conj(conj(macro("down", {l}), macro("down", {r})),
                  box(forall_raw("x", kInd, iff(encode(x, shift(l, 1)), encode(x, shift(r, 1))))));
    }
    if (l.sort().is_proposition()) {
      return macro("=", {lambda_raw({"x"}, {kInd}, prop_atom(shift(l, 1))),
                         lambda_raw({"x"}, {kInd}, prop_atom(shift(r, 1)))});
    }
    throw SortError("identity of " + std::to_string(l.sort().arity()) +
                    "-place relations is not supported");
  }
  throw SortError("unknown macro '" + name + "'");
}

Term relation_macro_body(const std::string& name) {
  const Term e = constant("E!", kRel1);
  const Term x0 = b(0, kInd, "x");
  if (name == "O!") return lambda_raw({"x"}, {kInd}, dia(ex(e, {x0})));
  if (name == "A!") return lambda_raw({"x"}, {kInd}, neg(dia(ex(e, {x0}))));
  // Inside the lambda x is 0; under one more binder Y is 0 and x is 1.
  const Term y = b(0, kRel1, "Y");
  const Term x1 = b(1, kInd, "x");
  if (name == "God")
    return lambda_raw({"x"}, {kInd},
                      forall_raw("Y", kRel1, implies(second_order("P", y), ex(y, {x1}))));
  if (name == "God*")
    return lambda_raw({"x"}, {kInd},
                      forall_raw("Y", kRel1, iff(second_order("P", y), box(ex(y, {x1})))));
  std::string essence;
  if (name == "NE") essence = "ess";
  if (name == "NEs") essence = "sess";
  if (name == "NE*") essence = "ess*";
  if (essence.empty()) throw SortError("unknown relation macro '" + name + "'");
  // [\x forall Y (essence(Y, x) -> [] exists y Y y)]
  const Term y2 = b(1, kRel1, "Y");
  return lambda_raw(
      {"x"}, {kInd},
      forall_raw("Y", kRel1,
                 implies(macro(essence, {y, x1}),
                         box(exists_raw("y", kInd, ex(y2, {b(0, kInd, "y")}))))));
}

Formula expand(const Formula& f, bool connectives);

Term expand(const Term& t, bool connectives) {
  if (t.kind() == TermKind::Macro) return expand(relation_macro_body(t->name), connectives);
  if (!t->body) return t;
  if (!connectives && !t->body->has_macro) return t;
  return rebuild(*t, expand(t->body, connectives));
}

Formula expand(const Formula& f, bool connectives) {
  if (!connectives && !f->has_macro) return f;
  if (f.kind() == FormulaKind::Macro) return expand(macro_body(f->name, f->terms), connectives);
  std::vector<Formula> subs;
  for (const auto& s : f->subs) subs.push_back(expand(s, connectives));
  std::vector<Term> terms;
  for (const auto& t : f->terms) terms.push_back(expand(t, connectives));
  if (!connectives) return rebuild(*f, std::move(subs), std::move(terms));
  switch (f.kind()) {
    case FormulaKind::Verum: return neg(falsum());
    case FormulaKind::Dia: return neg(box(neg(subs[0])));
    case FormulaKind::And: return neg(implies(subs[0], neg(subs[1])));
    case FormulaKind::Or: return implies(neg(subs[0]), subs[1]);
    case FormulaKind::Iff: {
      // (a -> b) & (b -> a)
      return neg(implies(implies(subs[0], subs[1]), neg(implies(subs[1], subs[0]))));
    }
    case FormulaKind::Xor: {
      return neg(neg(implies(implies(subs[0], subs[1]), neg(implies(subs[1], subs[0])))));
    }
    case FormulaKind::Exists:
      return neg(forall_raw(f->name, f->binder_sort, neg(subs[0])));
    default:
      return rebuild(*f, std::move(subs), std::move(terms));
  }
}

}  // namespace

Formula expand_derived(const Formula& f) { return expand(f, true); }
Term expand_derived(const Term& t) { return expand(t, true); }
Formula expand_macros(const Formula& f) { return expand(f, false); }
Term expand_macros(const Term& t) { return expand(t, false); }

namespace {

Term beta(const Term& t);

// Unchanged subtrees are returned as-is so that callers keying caches on
// node identity keep their hits.
Formula beta(const Formula& f) {
  bool changed = false;
  std::vector<Formula> subs;
  for (const auto& s : f->subs) {
    subs.push_back(beta(s));
    changed = changed || subs.back().get() != s.get();
  }
  std::vector<Term> terms;
  for (const auto& t : f->terms) {
    terms.push_back(beta(t));
    changed = changed || terms.back().get() != t.get();
  }
  if (f.kind() == FormulaKind::Exemplify && terms[0].kind() == TermKind::Lambda) {
    std::vector<Term> args(terms.begin() + 1, terms.end());
    return beta(instantiate_all(terms[0]->body, args));
  }
  if (!changed) return f;
  return rebuild(*f, std::move(subs), std::move(terms));
}

Term beta(const Term& t) {
  if (!t->body) return t;
  Formula b = beta(t->body);
  if (b.get() == t->body.get()) return t;
  return rebuild(*t, b);
}

}  // namespace

Formula beta_normalize(const Formula& f) { return beta(f); }

namespace {

int term_modal_depth(const Term& t);

int md(const Formula& f) {
  int d = 0;
  for (const auto& s : f->subs) d = std::max(d, md(s));
  for (const auto& t : f->terms) d = std::max(d, term_modal_depth(t));
  if (f.kind() == FormulaKind::Box || f.kind() == FormulaKind::Dia) ++d;
  return d;
}

int term_modal_depth(const Term& t) { return t->body ? md(t->body) : 0; }

}  // namespace

int modal_depth(const Formula& f) { return md(f); }

int formula_depth(const Formula& f) {
  int d = 0;
  for (const auto& s : f->subs) d = std::max(d, formula_depth(s));
  return f->subs.empty() ? 0 : d + 1;
}

namespace {

void collect_consts(const Formula& f, std::set<std::string>& out);

void collect_consts(const Term& t, std::set<std::string>& out) {
  if (t.kind() == TermKind::Const) out.insert(t->name);
  if (t->body) collect_consts(t->body, out);
}

void collect_consts(const Formula& f, std::set<std::string>& out) {
  if (f.kind() == FormulaKind::SecondOrder) out.insert(f->name);
  for (const auto& s : f->subs) collect_consts(s, out);
  for (const auto& t : f->terms) collect_consts(t, out);
}

}  // namespace

std::vector<std::string> constants_of(const Formula& f) {
  std::set<std::string> out;
  collect_consts(expand_macros(f), out);
  return {out.begin(), out.end()};
}

}  // namespace qml
