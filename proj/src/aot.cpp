#include "qml/aot.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <type_traits>
#include <unordered_map>

#include "qml/abstraction.hpp"
#include "qml/data.hpp"
#include "qml/parse.hpp"

namespace qml {

// ---- the model --------------------------------------------------------------

int AczelModel::sigma(std::uint32_t encoded) const {
  if (config.sigma == SigmaRule::Parity) return std::popcount(encoded) % special;
  return 0;
}

int AczelModel::urelement(const AotValue& v) const {
  if (v.kind == AotValue::Kind::Ordinary) return static_cast<int>(v.bits);
  if (v.kind == AotValue::Kind::Abstract) return ordinary + sigma(v.bits);
  throw SortError("urelement of a non-individual");
}

bool AczelModel::exemplifies(std::uint32_t relation, int u, int w) const {
  return (relation >> (w * urelements + u)) & 1u;
}

std::uint32_t AczelModel::propositional_property(std::uint32_t prop) const {
  std::uint32_t mask = 0;
  for (int w = 0; w < worlds; ++w)
    if ((prop >> w) & 1u)
      for (int u = 0; u < urelements; ++u) mask |= 1u << (w * urelements + u);
  return mask;
}

std::string AczelModel::urelement_name(int u) const {
  return u < ordinary ? "u" + std::to_string(u) : "s" + std::to_string(u - ordinary);
}

std::string AczelModel::relation_text(std::uint32_t mask) const {
  std::string s = "{";
  bool first = true;
  for (int w = 0; w < worlds; ++w)
    for (int u = 0; u < urelements; ++u)
      if (exemplifies(mask, u, w)) {
        if (!first) s += ",";
        s += urelement_name(u) + "@w" + std::to_string(w);
        first = false;
      }
  return s + "}";
}

std::string AczelModel::individual_text(const AotValue& v) const {
  switch (v.kind) {
    case AotValue::Kind::Ordinary:
      return urelement_name(static_cast<int>(v.bits));
    case AotValue::Kind::Abstract: {
      std::string s = "abstract[";
      bool first = true;
      for (std::uint32_t r = 0; r < relations; ++r)
        if ((v.bits >> r) & 1u) {
          if (!first) s += " ";
          s += relation_text(r);
          first = false;
        }
      return s + "]";
    }
    case AotValue::Kind::Relation:
      return relation_text(v.bits);
    case AotValue::Kind::Proposition: {
      std::string s = "{";
      for (int w = 0; w < worlds; ++w)
        if ((v.bits >> w) & 1u) s += (s.size() > 1 ? ",w" : "w") + std::to_string(w);
      return s + "}";
    }
  }
  return "?";
}

std::shared_ptr<Signature> aot_signature(const AczelConfig& config) {
  auto sig = std::make_shared<Signature>(Signature::aot());
  sig->add_proposition("q0");
  for (const auto& [name, v] : config.constants) {
    if (v.is_individual())
      sig->add_individual(name);
    else
      sig->add_relation(name, v.kind == AotValue::Kind::Relation ? 1 : 0);
  }
  return sig;
}

AczelModel build_aczel(const AczelConfig& config) {
  if (config.ordinary < 1 || config.special < 1 || config.worlds < 1)
    throw Error("Aczel model sizes must be at least 1");
  AczelModel m;
  m.config = config;
  m.ordinary = config.ordinary;
  m.special = config.special;
  m.worlds = config.worlds;
  m.urelements = config.ordinary + config.special;
  const int bits = m.urelements * m.worlds;
  if (bits > 30 || (std::size_t{1} << bits) > config.relspace_cap || (std::size_t{1} << bits) > 32)
    throw BudgetError("relation space of 2^" + std::to_string(bits) + " exceeds the cap " +
                      std::to_string(config.relspace_cap));
  m.relations = 1u << bits;

  m.e_bang = config.e_bang.value_or(1u << ((m.worlds - 1) * m.urelements));
  if (m.e_bang >= m.relations) throw Error("E! mask outside the relation space");
  for (int w = 0; w < m.worlds; ++w)
    for (int u = m.ordinary; u < m.urelements; ++u)
      if (m.exemplifies(m.e_bang, u, w)) throw Error("E! must be false on special urelements");

  std::uint32_t q0 = 0;
  for (int w = 0; w < m.worlds; ++w)
    for (int u = 0; u < m.ordinary; ++u)
      if (m.exemplifies(m.e_bang, u, w) && !m.exemplifies(m.e_bang, u, 0)) q0 |= 1u << w;
  m.q0 = config.q0.value_or(q0);
  if (m.q0 > m.all_worlds()) throw Error("q0 mask outside the proposition space");

  for (const auto& [name, v] : config.constants) {
    const bool ok = (v.kind == AotValue::Kind::Ordinary && v.bits < static_cast<std::uint32_t>(m.ordinary)) ||
                    (v.kind == AotValue::Kind::Abstract && (m.relations >= 32 || v.bits < (1u << m.relations))) ||
                    (v.kind == AotValue::Kind::Relation && v.bits < m.relations) ||
                    (v.kind == AotValue::Kind::Proposition && v.bits <= m.all_worlds());
    if (!ok) throw Error("constant '" + name + "' is outside the model");
  }
  m.constants = config.constants;
  m.sig = aot_signature(config);
  return m;
}

// ---- evaluation -------------------------------------------------------------

namespace {

// How a bound individual variable is used inside its scope: the relation
// terms it encodes (as terms over the enclosing context), or `full` when
// one of them depends on something bound inside the scope.
struct Usage {
  bool full = false;
  std::vector<Term> relations;
};

bool loose_below(const Term& t, int limit, int depth = 0);

bool loose_below(const Formula& f, int limit, int depth) {
  if (f->loose <= depth) return false;
  const int inner = depth + (f.kind() == FormulaKind::ForAll || f.kind() == FormulaKind::Exists ? 1 : 0);
  for (const auto& s : f->subs)
    if (loose_below(s, limit, inner)) return true;
  for (const auto& t : f->terms)
    if (loose_below(t, limit, depth)) return true;
  return false;
}

// Whether t has a loose index i (relative to depth) with depth <= i < depth + limit.
bool loose_below(const Term& t, int limit, int depth) {
  if (t->loose <= depth) return false;
  switch (t.kind()) {
    case TermKind::Bound:
      return t->index >= depth && t->index < depth + limit;
    case TermKind::Lambda:
    case TermKind::Description:
      return loose_below(t->body, limit, depth + static_cast<int>(t->binders.size()));
    default:
      return false;
  }
}

bool is_var(const Term& t, int index) { return t.kind() == TermKind::Bound && t->index == index; }

void scan(const Term& t, int depth, Usage& u);

// depth: binders between the quantified variable (index depth here) and f.
void scan(const Formula& f, int depth, Usage& u) {
  if (u.full || f->loose <= depth) return;
  if (f.kind() == FormulaKind::Encode && is_var(f->terms[0], depth)) {
    const Term& rel = f->terms[1];
    if (loose_below(rel, depth + 1))
      u.full = true;
    else
      u.relations.push_back(shift(rel, -(depth + 1)));
    return;
  }
  if (f.kind() == FormulaKind::Eq)
    for (const auto& t : f->terms)
      if (is_var(t, depth)) u.full = true;
  const int inner = depth + (f.kind() == FormulaKind::ForAll || f.kind() == FormulaKind::Exists ? 1 : 0);
  for (const auto& s : f->subs) scan(s, inner, u);
  for (const auto& t : f->terms) scan(t, depth, u);
}

void scan(const Term& t, int depth, Usage& u) {
  if (u.full || t->loose <= depth) return;
  if (t.kind() == TermKind::Description) {
    // The description could pick out the variable itself.
    u.full = true;
    return;
  }
  if (t.kind() == TermKind::Lambda) scan(t->body, depth + static_cast<int>(t->binders.size()), u);
}

struct Representative {
  AotValue value;
  std::uint64_t size = 1;  // individuals in its class
};

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

class AotEvaluator {
 public:
  AotEvaluator(const AczelModel& m, const AotAssignment& a) : m_(m), a_(a) {}

  std::uint32_t mask(const Formula& f) {
    if (f->loose == 0) {
      auto it = cache_.find(f->id);
      if (it != cache_.end()) return it->second;
      const std::uint32_t r = once([&] { return compute(f); });
      cache_.emplace(f->id, r);
      return r;
    }
    // Quantifiers and boxes over at most two loose relation or proposition
    // variables are memoized on their values.
    if (f->loose <= 2 && (f.kind() == FormulaKind::ForAll || f.kind() == FormulaKind::Box) && relational(f->loose)) {
      std::uint64_t key = f->id;
      for (int i = 0; i < f->loose; ++i) key = key * 1000003u ^ pack(env_[env_.size() - 1 - static_cast<std::size_t>(i)]);
      auto it = memo_.find(key);
      if (it != memo_.end() && it->second.id == f->id && it->second.a == pack_at(0, f) && it->second.b == pack_at(1, f))
        return it->second.value;
      const std::uint32_t r = compute(f);
      memo_[key] = {f->id, pack_at(0, f), pack_at(1, f), r};
      return r;
    }
    return compute(f);
  }

  Denotation term(const Term& t) {
    switch (t.kind()) {
      case TermKind::Bound:
        return env_[env_.size() - 1 - static_cast<std::size_t>(t->index)];
      case TermKind::Free:
      case TermKind::Const: {
        if (auto it = terms_.find(t.get()); it != terms_.end()) return it->second;
        const Denotation d = atomic(t);
        terms_.emplace(t.get(), d);
        return d;
      }
      case TermKind::Macro:
        return term(expand_derived(t));
      case TermKind::Lambda:
      case TermKind::Description: {
        const bool closed = t->loose == 0;
        if (closed)
          if (auto it = terms_.find(t.get()); it != terms_.end()) return it->second;
        auto eval = [&] { return t.kind() == TermKind::Lambda ? lambda(t) : description(t); };
        const Denotation d = closed ? once(eval) : eval();
        if (closed) terms_.emplace(t.get(), d);
        return d;
      }
    }
    return Denotation::none();
  }

  // Representatives of the classes of individuals the body cannot tell
  // apart, given the current environment.
  std::vector<Representative> classes(const Formula& body, bool& full) {
    auto it = usage_.find(body->id);
    if (it == usage_.end()) {
      Usage u;
      scan(body, 0, u);
      it = usage_.emplace(body->id, std::move(u)).first;
    }
    const Usage& u = it->second;
    std::vector<Representative> out;
    for (int o = 0; o < m_.ordinary; ++o) out.push_back({AotValue::ordinary(o), 1});
    full = u.full;
    if (u.full) {
      for (std::uint64_t e = 0; e < m_.abstract_objects(); ++e)
        out.push_back({AotValue::abstract(static_cast<std::uint32_t>(e)), 1});
      return out;
    }
    std::uint32_t support = 0;
    std::vector<std::uint32_t> rels;
    for (const auto& r : u.relations) {
      const Denotation d = term(r);
      if (d.denotes) support |= 1u << d.value.bits;
    }
    const std::uint32_t universe = m_.relations >= 32 ? ~0u : (1u << m_.relations) - 1u;
    const std::uint32_t rest = universe & ~support;
    const int free_bits = std::popcount(rest);
    // Enumerate patterns over the support (submasks, ascending).
    std::vector<std::uint32_t> patterns;
    for (std::uint32_t p = support;; p = (p - 1) & support) {
      patterns.push_back(p);
      if (p == 0) break;
    }
    std::reverse(patterns.begin(), patterns.end());
    for (std::uint32_t p : patterns) {
      if (m_.config.sigma == SigmaRule::Constant) {
        out.push_back({AotValue::abstract(p), std::uint64_t{1} << free_bits});
        continue;
      }
      for (int s = 0; s < m_.special; ++s) {
        // Extra bits from `rest` so that the encoded count lands in class s.
        const int need = ((s - std::popcount(p)) % m_.special + m_.special) % m_.special;
        std::uint64_t size = 0;
        for (int j = need; j <= free_bits; j += m_.special) size += binomial(free_bits, j);
        if (size == 0) continue;
        std::uint32_t extra = 0, r = rest;
        for (int k = 0; k < need; ++k) {
          const std::uint32_t low = r & (~r + 1u);
          extra |= low;
          r &= ~low;
        }
        out.push_back({AotValue::abstract(p | extra), size});
      }
    }
    return out;
  }

 private:
  Denotation atomic(const Term& t) const {
    if (t.kind() == TermKind::Free) {
      auto it = a_.find(t->name);
      if (it == a_.end()) throw EvalError("unassigned variable '" + t->name + "'");
      return Denotation::of(it->second);
    }
    if (t->name == "E!") return Denotation::of(AotValue::relation(m_.e_bang));
    if (t->name == "q0") return Denotation::of(AotValue::proposition(m_.q0));
    if (auto it = m_.constants.find(t->name); it != m_.constants.end()) return Denotation::of(it->second);
    throw EvalError("constant '" + t->name + "' is not interpreted");
  }

  const AczelModel& m_;
  const AotAssignment& a_;
  std::vector<Denotation> env_;
  int full_depth_ = 0;
  std::unordered_map<std::uint32_t, std::uint32_t> cache_;
  std::unordered_map<const TermNode*, Denotation> terms_;
  std::unordered_map<std::uint32_t, Usage> usage_;
  struct Memo {
    std::uint32_t id;
    std::uint64_t a, b;
    std::uint32_t value;
  };
  std::unordered_map<std::uint64_t, Memo> memo_;

  static std::uint64_t pack(const Denotation& d) {
    return d.denotes ? (std::uint64_t{1} << 40) | (std::uint64_t(d.value.kind) << 32) | d.value.bits : 0;
  }
  bool relational(int loose) const {
    for (int i = 0; i < loose; ++i) {
      const Denotation& d = env_[env_.size() - 1 - static_cast<std::size_t>(i)];
      if (d.denotes && d.value.is_individual()) return false;
    }
    return true;
  }
  std::uint64_t pack_at(int i, const Formula& f) const {
    return i < f->loose ? pack(env_[env_.size() - 1 - static_cast<std::size_t>(i)]) : ~std::uint64_t{0};
  }

  std::uint32_t all() const { return m_.all_worlds(); }

  // Closed subterms are computed once and cached, so their scans do not
  // multiply with the enclosing ones.
  template <class F>
  std::invoke_result_t<F> once(F&& f) {
    const int saved = full_depth_;
    full_depth_ = 0;
    try {
      auto r = f();
      full_depth_ = saved;
      return r;
    } catch (...) {
      full_depth_ = saved;
      throw;
    }
  }

  struct FullScan {
    AotEvaluator& e;
    bool on;
    FullScan(AotEvaluator& ev, bool full) : e(ev), on(full) {
      if (!on) return;
      if (++e.full_depth_ > e.m_.config.full_scan_nesting) {
        --e.full_depth_;
        throw BudgetError("individual quantifiers scanning every abstract object nest deeper than " +
                          std::to_string(e.m_.config.full_scan_nesting));
      }
    }
    ~FullScan() {
      if (on) --e.full_depth_;
    }
  };

  std::uint32_t with(const Denotation& d, const Formula& body) {
    env_.push_back(d);
    const std::uint32_t r = mask(body);
    env_.pop_back();
    return r;
  }

  std::uint32_t compute(const Formula& f) {
    switch (f.kind()) {
      case FormulaKind::Falsum:
        return 0;
      case FormulaKind::Exemplify:
        return exemplify(f);
      case FormulaKind::Encode: {
        const Denotation x = term(f->terms[0]);
        const Denotation r = term(f->terms[1]);
        if (!x.denotes || !r.denotes) return 0;
        return x.value.kind == AotValue::Kind::Abstract && ((x.value.bits >> r.value.bits) & 1u) ? all() : 0;
      }
      case FormulaKind::Eq: {
        const Denotation a = term(f->terms[0]);
        const Denotation b = term(f->terms[1]);
        return a.denotes && b.denotes && a.value == b.value ? all() : 0;
      }
      case FormulaKind::SecondOrder:
        throw Unsupported("second-order constants have no AOT semantics here");
      case FormulaKind::Not:
        return ~mask(f->subs[0]) & all();
      case FormulaKind::Implies: {
        const std::uint32_t a = mask(f->subs[0]);
        if (a == 0) return all();
        return (~a | mask(f->subs[1])) & all();
      }
      case FormulaKind::Box:
        return mask(f->subs[0]) == all() ? all() : 0;
      case FormulaKind::Actually:
        return mask(f->subs[0]) & 1u ? all() : 0;
      case FormulaKind::ForAll:
        return forall(f);
      default:
        return mask(expand_derived(f));
    }
  }

  std::uint32_t exemplify(const Formula& f) {
    const Denotation p = term(f->terms[0]);
    if (!p.denotes) return 0;
    if (f->terms.size() == 1) return p.value.bits;
    if (f->terms.size() != 2) throw Unsupported("exemplification of relations with more than one place");
    const Denotation x = term(f->terms[1]);
    if (!x.denotes) return 0;
    const int u = m_.urelement(x.value);
    std::uint32_t r = 0;
    for (int w = 0; w < m_.worlds; ++w)
      if (m_.exemplifies(p.value.bits, u, w)) r |= 1u << w;
    return r;
  }

  std::uint32_t forall(const Formula& f) {
    const Sort s = f->binder_sort;
    const Formula& body = f->subs[0];
    std::uint32_t r = all();
    if (s.is_individual()) {
      bool full = false;
      const auto reps = classes(body, full);
      FullScan guard(*this, full);
      for (const auto& rep : reps) {
        r &= with(Denotation::of(rep.value), body);
        if (!r) break;
      }
      return r;
    }
    if (s.is_proposition()) {
      for (std::uint32_t p = 0; p <= all() && r; ++p) r &= with(Denotation::of(AotValue::proposition(p)), body);
      return r;
    }
    if (s == Sort::relation(1)) {
      for (std::uint32_t v = 0; v < m_.relations && r; ++v) r &= with(Denotation::of(AotValue::relation(v)), body);
      return r;
    }
    throw Unsupported("quantification over " + to_string(s) + " relations");
  }

  Denotation lambda(const Term& t) {
    if (t->binders.empty()) return Denotation::of(AotValue::proposition(mask(t->body)));
    if (t->binders.size() != 1) throw Unsupported("lambda terms with more than one binder");
    // Defined only when the matrix cannot separate individuals sharing an
    // urelement.
    bool full = false;
    const auto reps = classes(t->body, full);
    FullScan guard(*this, full);
    std::vector<std::int64_t> by_urelement(static_cast<std::size_t>(m_.urelements), -1);
    for (const auto& rep : reps) {
      const auto u = static_cast<std::size_t>(m_.urelement(rep.value));
      const std::int64_t v = with(Denotation::of(rep.value), t->body);
      if (by_urelement[u] >= 0 && by_urelement[u] != v) return Denotation::none();
      by_urelement[u] = v;
    }
    std::uint32_t rel = 0;
    for (int u = 0; u < m_.urelements; ++u) {
      const std::int64_t v = by_urelement[static_cast<std::size_t>(u)];
      if (v < 0) continue;
      for (int w = 0; w < m_.worlds; ++w)
        if ((v >> w) & 1) rel |= 1u << (w * m_.urelements + u);
    }
    return Denotation::of(AotValue::relation(rel));
  }

  Denotation description(const Term& t) {
    bool full = false;
    const auto reps = classes(t->body, full);
    FullScan guard(*this, full);
    std::uint64_t count = 0;
    AotValue found;
    for (const auto& rep : reps)
      if (with(Denotation::of(rep.value), t->body) & 1u) {
        count += rep.size;
        found = rep.value;
        if (count > 1) return Denotation::none();
      }
    return count == 1 ? Denotation::of(found) : Denotation::none();
  }
};

void require_aot(const AczelModel& m) {
  if (!m.sig || m.sig->mode != Mode::Aot) throw ModeError("the model carries no AOT signature");
}

}  // namespace

std::uint32_t eval_aot_mask(const Formula& f, const AczelModel& m, const AotAssignment& a) {
  require_aot(m);
  AotEvaluator e(m, a);
  return e.mask(expand_derived(f));
}

bool eval_aot(const Formula& f, const AczelModel& m, const AotAssignment& a, int world) {
  if (world < 0 || world >= m.worlds) throw EvalError("world out of range");
  return (eval_aot_mask(f, m, a) >> world) & 1u;
}

Denotation denote(const Term& t, const AczelModel& m, const AotAssignment& a) {
  require_aot(m);
  AotEvaluator e(m, a);
  return e.term(expand_derived(t));
}

bool exists_term(const Term& t, const AczelModel& m, const AotAssignment& a) {
  return eval_aot(macro("down", {t}), m, a, 0);
}

bool identity_holds(const Term& l, const Term& r, const AczelModel& m, const AotAssignment& a) {
  if (l.sort() != r.sort()) throw SortError("identity between " + to_string(l.sort()) + " and " + to_string(r.sort()));
  return eval_aot(macro("=", {l, r}), m, a, 0);
}

bool satisfies_contingency(const AczelModel& m) {
  const Formula a = parse_formula("<>(exists x. E!x & ~@E!x)", *m.sig);
  const Formula b = parse_formula("exists x. <>E!x & ~@E!x", *m.sig);
  return eval_aot(a, m, {}, 0) && eval_aot(b, m, {}, 0);
}

}  // namespace qml

// ---- reports ----------------------------------------------------------------

namespace qml {

namespace {

struct Candidate {
  const char* name;
  const char* text;
  bool historical;
};

// E!, its negation, O!, A!, the trivial property and its negation; the
// propositional properties of q0 and its negation; and mixtures of being
// ordinary or abstract with q0 that fill the remaining relations of the
// minimal model.
const Candidate kNamed[] = {
    {"E!", "E!", true},
    {"non-E!", "[\\x ~E!x]", true},
    {"O!", "O!", true},
    {"A!", "A!", true},
    {"trivial", "[\\x E!x -> E!x]", true},
    {"non-trivial", "[\\x ~(E!x -> E!x)]", true},
    {"q0", "[\\x q0]", false},
    {"non-q0", "[\\x ~q0]", false},
    {"O! and non-q0", "[\\x O!x & ~q0]", false},
    {"A! and non-q0", "[\\x A!x & ~q0]", false},
    {"A! and q0", "[\\x A!x & q0]", false},
    {"E! or A! and non-q0", "[\\x E!x | A!x & ~q0]", false},
    {"E! or non-q0", "[\\x E!x | ~q0]", false},
    {"O! iff non-q0", "[\\x O!x <-> ~q0]", false},
    {"O! or q0", "[\\x O!x | q0]", false},
    {"A! or q0", "[\\x A!x | q0]", false},
};

std::string yesno(bool b) { return b ? "yes" : "no"; }

}  // namespace

MinimalModelReport minimal_model_report(const AczelModel& m) {
  MinimalModelReport r;
  r.worlds = m.worlds;
  r.propositions = m.propositions();
  r.relations = m.relations;
  r.contingency = satisfies_contingency(m);
  std::vector<bool> seen(m.relations, false);
  for (const auto& c : kNamed) {
    const Denotation d = denote(parse_term(c.text, *m.sig), m);
    if (!d.denotes) throw EvalError(std::string("named relation ") + c.text + " does not denote");
    r.named.push_back({c.name, c.text, d.value.bits, c.historical});
    seen[d.value.bits] = true;
  }
  r.covers_relspace = std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  r.all_named_distinct = true;
  r.historical_distinct = true;
  for (std::size_t i = 0; i < r.named.size(); ++i)
    for (std::size_t j = i + 1; j < r.named.size(); ++j) {
      ++r.pairs;
      const std::uint32_t diff = r.named[i].mask ^ r.named[j].mask;
      if (!diff) {
        r.all_named_distinct = false;
        if (r.named[i].historical && r.named[j].historical) r.historical_distinct = false;
        continue;
      }
      const int bit = std::countr_zero(diff);
      r.witnesses.push_back({static_cast<int>(i), static_cast<int>(j), bit % m.urelements, bit / m.urelements});
    }

  // Two individuals: one contingently concrete, one abstract.
  auto& t = r.two_individuals;
  const Formula concrete = parse_formula("<>E!x & ~@E!x", *m.sig);
  const Formula abstract = parse_formula("~<>E!x", *m.sig);
  std::optional<AotValue> x1, x2;
  for (int o = 0; o < m.ordinary && !x1; ++o)
    if (eval_aot(concrete, m, {{"x", AotValue::ordinary(o)}}, 0)) x1 = AotValue::ordinary(o);
  for (std::uint64_t e = 0; e < m.abstract_objects() && !x2; ++e) {
    const AotValue v = AotValue::abstract(static_cast<std::uint32_t>(e));
    if (eval_aot(abstract, m, {{"x", v}}, 0)) x2 = v;
  }
  if (!x1 || !x2) {
    t.push_back(std::string("no ") + (x1 ? "abstract" : "contingently concrete") + " individual in this model");
    return r;
  }
  const AotAssignment a{{"x1", *x1}, {"x2", *x2}};
  const bool distinct = !identity_holds(parse_term("x1", *m.sig), parse_term("x2", *m.sig), m, a);
  const int u1 = m.urelement(*x1), u2 = m.urelement(*x2);
  t.push_back("x1 = " + m.individual_text(*x1) + " satisfies <>E!x1 & ~@E!x1");
  t.push_back("x2 = " + m.individual_text(*x2) + " satisfies ~<>E!x2");
  t.push_back("x1 = x2 is " + std::string(distinct ? "false" : "true") + " in the model");
  t.push_back("urelements " + m.urelement_name(u1) + " and " + m.urelement_name(u2));
  bool derived = false;
  if (auto script = read_data("aot/two_individuals.proof")) {
    const std::vector<Formula> premises{parse_formula("<>E!x1 & ~@E!x1", *m.sig), parse_formula("~<>E!x2", *m.sig)};
    const Verdict v = check_proof(parse_proof(*script, m.sig), layer_for(Logic::S5Total), premises);
    derived = v.accepted && alpha_equivalent(v.conclusion, parse_formula("~(x1 = x2)", *m.sig));
    t.push_back(v.accepted ? "derivation accepted: " + print_formula(v.conclusion)
                           : "derivation rejected at step " + std::to_string(v.step) + ": " + v.reason);
  } else {
    t.push_back("derivation script not found at " + data_path("aot/two_individuals.proof"));
  }
  r.two_individuals_ok = distinct && u1 != u2 && derived;
  return r;
}

std::string MinimalModelReport::text() const {
  std::ostringstream out;
  out << "worlds " << worlds << "\npropositions " << propositions << "\nrelations " << relations
      << "\ncontingency axioms " << yesno(contingency) << "\n\nnamed relations\n";
  for (const auto& n : named)
    out << "  " << n.name << "  " << n.text << "  mask " << n.mask << (n.historical ? "  historical" : "") << "\n";
  out << "pairs distinguished " << witnesses.size() << "/" << pairs << "\n";
  for (const auto& w : witnesses)
    out << "  " << named[static_cast<std::size_t>(w.i)].name << " / " << named[static_cast<std::size_t>(w.j)].name
        << "  at urelement " << w.urelement << " world w" << w.world << "\n";
  out << "historical six distinct " << yesno(historical_distinct) << "\nall named distinct " << yesno(all_named_distinct)
      << "\nnamed relations cover relspace " << yesno(covers_relspace) << "\n\ntwo individuals\n";
  for (const auto& l : two_individuals) out << "  " << l << "\n";
  out << "two individuals established " << yesno(two_individuals_ok) << "\n";
  return out.str();
}

WorldTheoryReport world_theory_report(const AczelModel& m) {
  WorldTheoryReport r;
  const std::uint32_t props = m.propositions();
  if (props > 16) throw BudgetError("too many propositions to enumerate world candidates");
  const Formula encodes = parse_formula("x[[\\y p]]", *m.sig);
  // Candidates: abstract objects encoding propositional properties only.
  const std::uint32_t subsets = 1u << props;
  r.candidates = subsets;
  std::vector<int> matched(static_cast<std::size_t>(m.worlds), 0);
  for (std::uint32_t s = 0; s < subsets; ++s) {
    std::uint32_t encoded = 0;
    for (std::uint32_t p = 0; p < props; ++p)
      if ((s >> p) & 1u) encoded |= 1u << m.propositional_property(p);
    const AotValue x = AotValue::abstract(encoded);
    std::vector<std::uint32_t> in;
    for (std::uint32_t p = 0; p < props; ++p)
      if (eval_aot(encodes, m, {{"x", x}, {"p", AotValue::proposition(p)}}, 0)) in.push_back(p);
    bool maximal = true;
    for (std::uint32_t p = 0; p < props; ++p) {
      const bool has = std::binary_search(in.begin(), in.end(), p);
      const bool has_not = std::binary_search(in.begin(), in.end(), m.all_worlds() & ~p);
      if (has == has_not) maximal = false;
    }
    if (!maximal) continue;
    std::vector<int> sem;
    for (int w = 0; w < m.worlds; ++w)
      if (std::all_of(in.begin(), in.end(), [&](std::uint32_t p) { return (p >> w) & 1u; })) sem.push_back(w);
    if (sem.empty()) continue;
    for (int w : sem) ++matched[static_cast<std::size_t>(w)];
    r.worlds.push_back({encoded, in, sem});
  }
  r.bijective = static_cast<int>(r.worlds.size()) == m.worlds &&
                std::all_of(r.worlds.begin(), r.worlds.end(), [](const SyntacticWorld& w) { return w.semantic.size() == 1; }) &&
                std::all_of(matched.begin(), matched.end(), [](int c) { return c == 1; });

  // Fundamental theorem: []p iff every syntactic world encodes [\x p].
  auto check = [&](const std::string& label, std::uint32_t p) {
    WorldTheoryReport::Check c;
    c.proposition = label;
    c.mask = p;
    c.necessary = eval_aot(parse_formula("[]p", *m.sig), m, {{"p", AotValue::proposition(p)}}, 0);
    c.true_in_all_worlds = std::all_of(r.worlds.begin(), r.worlds.end(), [&](const SyntacticWorld& w) {
      return eval_aot(encodes, m, {{"x", AotValue::abstract(w.encoded)}, {"p", AotValue::proposition(p)}}, 0);
    });
    r.checks.push_back(c);
  };
  for (std::uint32_t p = 0; p < props; ++p) check("proposition " + m.individual_text(AotValue::proposition(p)), p);
  // Propositions generated by encoding formulas are necessary or impossible.
  for (const char* text : {"exists x. x[E!]", "forall x. ~x[[\\y q0]]", "exists x. x[A!] & ~x[O!]",
                           "exists x. A!x & x[E!] & ~x[[\\y E!y -> E!y]]"}) {
    const std::uint32_t p = eval_aot_mask(parse_formula(text, *m.sig), m);
    check(text, p);
  }
  r.fundamental_theorem = !r.worlds.empty() &&
                          std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.holds(); });
  return r;
}

std::string WorldTheoryReport::text() const {
  std::ostringstream out;
  out << "candidates " << candidates << "\nsyntactic worlds " << worlds.size() << "\n";
  for (const auto& w : worlds) {
    out << "  encodes";
    for (auto p : w.propositions) out << " " << p;  // world masks
    out << "  true at";
    for (int s : w.semantic) out << " w" << s;
    out << "\n";
  }
  out << "bijection with semantic worlds " << yesno(bijective) << "\n";
  for (const auto& c : checks)
    out << "  " << c.proposition << "  necessary " << yesno(c.necessary) << "  in every world "
        << yesno(c.true_in_all_worlds) << "\n";
  out << "fundamental theorem " << yesno(fundamental_theorem) << "\n";
  return out.str();
}

}  // namespace qml
