#include "qml/kripke.hpp"

#include <algorithm>
#include <sstream>

#include "qml/parse.hpp"

namespace qml {

namespace {

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

const ConstDecl& decl_of(const Signature& sig, const std::string& name, int* index) {
  const int i = sig.index_of(name);
  if (i < 0) throw EvalError("'" + name + "' is not a constant of the signature");
  *index = i;
  return sig.constants[static_cast<std::size_t>(i)];
}

}  // namespace

// ---- interpretation ------------------------------------------------------------------

RelValue rigid_relation(int worlds, int individuals, std::uint32_t extension) {
  RelValue v = 0;
  for (int w = 0; w < worlds; ++w) v |= static_cast<RelValue>(extension) << (w * individuals);
  return v;
}

bool is_rigid_value(RelValue v, int worlds, int individuals) {
  const RelValue ext = v & ((RelValue{1} << individuals) - 1);
  return v == rigid_relation(worlds, individuals, static_cast<std::uint32_t>(ext));
}

RelValue rigidify(RelValue v, int w, int worlds, int individuals) {
  const RelValue ext = (v >> (w * individuals)) & ((RelValue{1} << individuals) - 1);
  return rigid_relation(worlds, individuals, static_cast<std::uint32_t>(ext));
}

KripkeInterpretation KripkeInterpretation::blank(std::shared_ptr<const Signature> sig, int worlds,
                                                 int individuals, std::size_t relspace_cap) {
  if (worlds < 1 || worlds > kMaxWorlds) throw EvalError("world count out of range");
  if (individuals < 1) throw EvalError("empty domain");
  KripkeInterpretation m;
  m.sig = std::move(sig);
  m.worlds = worlds;
  m.individuals = individuals;
  m.cap = relspace_cap;
  m.succ.assign(static_cast<std::size_t>(worlds), 0);
  if (m.sig->logic == Logic::S5Total) m.set_total_access();

  if (m.sig->rigid_properties) {
    const std::size_t n = individuals < 63 ? std::size_t{1} << individuals : ~std::size_t{0};
    m.relspace_available = individuals < 20 && n <= relspace_cap;
    if (m.relspace_available)
      for (std::uint32_t e = 0; e < n; ++e) m.relspace.push_back(rigid_relation(worlds, individuals, e));
  } else {
    const int bits = worlds * individuals;
    m.relspace_available = bits < 20 && (std::size_t{1} << bits) <= relspace_cap;
    if (m.relspace_available)
      for (RelValue v = 0; v < (RelValue{1} << bits); ++v) m.relspace.push_back(v);
  }

  for (const auto& c : m.sig->constants) {
    std::size_t size = 1;
    if (c.kind == ConstKind::Relation) size = static_cast<std::size_t>(m.tuples(c.arity) * worlds);
    if (c.kind == ConstKind::SecondOrder) size = static_cast<std::size_t>(worlds) * m.relspace.size();
    m.table.emplace_back(size, std::int8_t{-1});
  }
  return m;
}

int KripkeInterpretation::tuples(int arity) const { return ipow(individuals, arity); }

bool KripkeInterpretation::complete() const {
  for (const auto& t : table)
    for (auto v : t)
      if (v < 0) return false;
  return true;
}

int KripkeInterpretation::relspace_index(RelValue v) const {
  auto it = std::lower_bound(relspace.begin(), relspace.end(), v);
  if (it == relspace.end() || *it != v) return -1;
  return static_cast<int>(it - relspace.begin());
}

void KripkeInterpretation::set_access(int from, int to, bool on) {
  if (on)
    succ[static_cast<std::size_t>(from)] |= 1u << to;
  else
    succ[static_cast<std::size_t>(from)] &= ~(1u << to);
}

void KripkeInterpretation::set_total_access() {
  for (auto& s : succ) s = all_worlds();
}

void KripkeInterpretation::set_proposition(const std::string& name, WorldMask truth) {
  int i;
  const ConstDecl& c = decl_of(*sig, name, &i);
  if (c.kind != ConstKind::Relation || c.arity != 0) throw EvalError("'" + name + "' is not a proposition");
  for (int w = 0; w < worlds; ++w) table[i][w] = static_cast<std::int8_t>((truth >> w) & 1u);
}

void KripkeInterpretation::set_relation(const std::string& name, RelValue mask) {
  int i;
  const ConstDecl& c = decl_of(*sig, name, &i);
  if (c.kind != ConstKind::Relation) throw EvalError("'" + name + "' is not a relation");
  const std::size_t n = table[i].size();
  for (std::size_t b = 0; b < n; ++b) table[i][b] = static_cast<std::int8_t>((mask >> b) & 1u);
}

void KripkeInterpretation::set_individual(const std::string& name, int d) {
  int i;
  const ConstDecl& c = decl_of(*sig, name, &i);
  if (c.kind != ConstKind::Individual) throw EvalError("'" + name + "' is not an individual constant");
  table[i][0] = static_cast<std::int8_t>(d);
}

void KripkeInterpretation::set_second_order(const std::string& name, int world, RelValue member, bool value) {
  int i;
  const ConstDecl& c = decl_of(*sig, name, &i);
  if (c.kind != ConstKind::SecondOrder) throw EvalError("'" + name + "' is not second-order");
  const int idx = relspace_index(member);
  if (idx < 0) throw EvalError("relation outside the relation space");
  table[i][static_cast<std::size_t>(world) * relspace.size() + static_cast<std::size_t>(idx)] = value ? 1 : 0;
}

RelValue KripkeInterpretation::relation_mask(const std::string& name) const {
  int i;
  decl_of(*sig, name, &i);
  RelValue v = 0;
  for (std::size_t b = 0; b < table[i].size(); ++b) {
    if (table[i][b] < 0) throw EvalError("relation '" + name + "' is not fully interpreted");
    if (table[i][b]) v |= RelValue{1} << b;
  }
  return v;
}

namespace {

std::string relation_text(RelValue v, int arity, int worlds, int individuals) {
  const int t = ipow(individuals, arity);
  std::string s;
  for (int w = 0; w < worlds; ++w) {
    if (w) s += "/";
    if (arity == 0) {
      s += ((v >> w) & 1u) ? "1" : "0";
      continue;
    }
    s += "{";
    bool first = true;
    for (int k = 0; k < t; ++k) {
      if (!((v >> (w * t + k)) & 1u)) continue;
      if (!first) s += ",";
      first = false;
      if (arity > 1) s += "(";
      int rest = k;
      for (int a = 0; a < arity; ++a) {
        if (a) s += ",";
        s += "d" + std::to_string(rest % individuals);
        rest /= individuals;
      }
      if (arity > 1) s += ")";
    }
    s += "}";
  }
  return s;
}

}  // namespace

std::string describe(const KripkeInterpretation& m) {
  std::ostringstream out;
  out << "worlds " << m.worlds << " individuals " << m.individuals << " actual w" << m.actual << "\n";
  for (int w = 0; w < m.worlds; ++w) {
    out << "  R w" << w << ":";
    for (int v = 0; v < m.worlds; ++v)
      if ((m.succ[w] >> v) & 1u) out << " w" << v;
    out << "\n";
  }
  for (std::size_t i = 0; i < m.sig->constants.size(); ++i) {
    const ConstDecl& c = m.sig->constants[i];
    const auto& tab = m.table[i];
    out << "  " << c.name << ":";
    if (c.kind == ConstKind::Individual) {
      out << " " << (tab[0] < 0 ? std::string("?") : "d" + std::to_string(tab[0])) << "\n";
      continue;
    }
    if (c.kind == ConstKind::Relation) {
      RelValue v = 0;
      bool known = true;
      for (std::size_t b = 0; b < tab.size(); ++b) {
        if (tab[b] < 0) known = false;
        if (tab[b] > 0) v |= RelValue{1} << b;
      }
      out << " " << (known ? relation_text(v, c.arity, m.worlds, m.individuals) : std::string("?")) << "\n";
      continue;
    }
    const std::size_t rs = m.relspace.size();
    for (int w = 0; w < m.worlds; ++w) {
      out << (w ? " |" : "") << " w" << w << " {";
      bool first = true;
      for (std::size_t k = 0; k < rs; ++k) {
        const auto e = tab[static_cast<std::size_t>(w) * rs + k];
        if (e == 0) continue;
        out << (first ? "" : ", ") << (e < 0 ? "?" : "")
            << (m.sig->rigid_properties ? relation_text(m.relspace[k], 1, 1, m.individuals)
                                        : relation_text(m.relspace[k], 1, m.worlds, m.individuals));
        first = false;
      }
      out << "}";
    }
    out << "\n";
  }
  return out.str();
}

// ---- evaluator ---------------------------------------------------------------------------

Evaluator::Evaluator(const KripkeInterpretation& m, Assignment a) : m_(&m), assignment_(std::move(a)) {}

void Evaluator::reset() {
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    std::fill(lam_stamp_.begin(), lam_stamp_.end(), 0);
    epoch_ = 1;
  }
}

void Evaluator::rebind(const KripkeInterpretation& m) {
  m_ = &m;
  reset();
}

void Evaluator::set_assignment(Assignment a) {
  assignment_ = std::move(a);
  reset();
}

Truth Evaluator::eval(const Formula& f) {
  env_.clear();
  return eval_node(f);
}

Truth Evaluator::eval_node(const Formula& f) {
  const std::uint32_t id = f->id;
  const bool cacheable = f->loose == 0;
  if (cacheable) {
    if (id >= stamp_.size()) {
      const std::size_t n = std::max<std::size_t>(formula_id_limit(), id + 1) + 1024;
      stamp_.resize(n, 0);
      cache_.resize(n);
    }
    if (stamp_[id] == epoch_) return cache_[id];
  }
  const WorldMask all = m_->all_worlds();
  Truth r;
  switch (f.kind()) {
    case FormulaKind::Falsum: r = {0, all}; break;
    case FormulaKind::Verum: r = {all, 0}; break;
    case FormulaKind::Exemplify: r = exemplify(f); break;
    case FormulaKind::Encode:
      throw EvalError("encoding atom '" + print_formula(f) + "' needs the AOT evaluator");
    case FormulaKind::SecondOrder: r = second_order(f); break;
    case FormulaKind::Eq: {
      const Val a = term_value(f->terms[0]);
      const Val b = term_value(f->terms[1]);
      if (a.known && b.known) r = a.bits == b.bits ? Truth{all, 0} : Truth{0, all};
      break;
    }
    case FormulaKind::Not: {
      const Truth s = eval_node(f->subs[0]);
      r = {s.f, s.t};
      break;
    }
    case FormulaKind::Implies: {
      const Truth a = eval_node(f->subs[0]);
      const Truth b = eval_node(f->subs[1]);
      r = {a.f | b.t, a.t & b.f};
      break;
    }
    case FormulaKind::And: {
      const Truth a = eval_node(f->subs[0]);
      const Truth b = eval_node(f->subs[1]);
      r = {a.t & b.t, a.f | b.f};
      break;
    }
    case FormulaKind::Or: {
      const Truth a = eval_node(f->subs[0]);
      const Truth b = eval_node(f->subs[1]);
      r = {a.t | b.t, a.f & b.f};
      break;
    }
    case FormulaKind::Iff:
    case FormulaKind::Xor: {
      const Truth a = eval_node(f->subs[0]);
      const Truth b = eval_node(f->subs[1]);
      r = {(a.t & b.t) | (a.f & b.f), (a.t & b.f) | (a.f & b.t)};
      if (f.kind() == FormulaKind::Xor) std::swap(r.t, r.f);
      break;
    }
    case FormulaKind::Box:
    case FormulaKind::Dia: {
      const Truth s = eval_node(f->subs[0]);
      const bool box = f.kind() == FormulaKind::Box;
      for (int w = 0; w < m_->worlds; ++w) {
        const WorldMask succ = m_->succ[w];
        const WorldMask bit = 1u << w;
        if (box) {
          if ((succ & ~s.t) == 0) r.t |= bit;
          if (succ & s.f) r.f |= bit;
        } else {
          if (succ & s.t) r.t |= bit;
          if ((succ & ~s.f) == 0) r.f |= bit;
        }
      }
      break;
    }
    case FormulaKind::Actually: {
      const Truth s = eval_node(f->subs[0]);
      const WorldMask a = 1u << m_->actual;
      r = {(s.t & a) ? all : 0, (s.f & a) ? all : 0};
      break;
    }
    case FormulaKind::ForAll: r = quantify(f, true); break;
    case FormulaKind::Exists: r = quantify(f, false); break;
    case FormulaKind::Macro: {
      auto it = expanded_.find(id);
      if (it == expanded_.end()) it = expanded_.emplace(id, expand_macros(f)).first;
      const Formula e = it->second;
      r = eval_node(e);
      break;
    }
  }
  if (cacheable) {
    if (id >= stamp_.size()) {
      stamp_.resize(static_cast<std::size_t>(formula_id_limit()) + 1024, 0);
      cache_.resize(stamp_.size());
    }
    stamp_[id] = epoch_;
    cache_[id] = r;
  }
  return r;
}

std::vector<RelValue> Evaluator::range(Sort s) const {
  if (s == Sort::relation(1)) {
    if (!m_->relspace_available)
      throw BudgetError("relation quantifier: |D|*|W| = " + std::to_string(m_->individuals * m_->worlds) +
                        " exceeds the relation-space cap of " + std::to_string(m_->cap));
    return m_->relspace;
  }
  const int bits = m_->tuples(s.arity()) * m_->worlds;
  const std::size_t limit = s.is_proposition() ? std::max<std::size_t>(m_->cap, 256) : m_->cap;
  if (bits >= 20 || (std::size_t{1} << bits) > limit)
    throw BudgetError("quantifier over sort " + to_string(s) + " ranges over 2^" + std::to_string(bits) +
                      " values, above the cap of " + std::to_string(limit));
  std::vector<RelValue> out;
  for (RelValue v = 0; v < (RelValue{1} << bits); ++v) out.push_back(v);
  return out;
}

Truth Evaluator::quantify(const Formula& f, bool universal) {
  const WorldMask all = m_->all_worlds();
  Truth acc = universal ? Truth{all, 0} : Truth{0, all};
  auto step = [&](RelValue v) {
    env_.push_back({true, v});
    const Truth r = eval_node(f->subs[0]);
    env_.pop_back();
    if (universal) {
      acc.t &= r.t;
      acc.f |= r.f;
      return acc.t == 0 && acc.f == all;
    }
    acc.t |= r.t;
    acc.f &= r.f;
    return acc.t == all && acc.f == 0;
  };
  const Sort s = f->binder_sort;
  if (s.is_individual()) {
    for (int d = 0; d < m_->individuals; ++d)
      if (step(static_cast<RelValue>(d))) break;
  } else if (s == Sort::relation(1)) {
    if (!m_->relspace_available) range(s);
    for (RelValue v : m_->relspace)
      if (step(v)) break;
  } else {
    for (RelValue v : range(s))
      if (step(v)) break;
  }
  return acc;
}

Term Evaluator::expand_relation_macro(const Term& t) { return expand_macros(t); }

Evaluator::Val Evaluator::term_value(const Term& t) {
  switch (t.kind()) {
    case TermKind::Bound: {
      if (t->index >= static_cast<int>(env_.size())) throw EvalError("loose bound variable");
      return env_[env_.size() - 1 - static_cast<std::size_t>(t->index)];
    }
    case TermKind::Free: {
      auto it = assignment_.find(t->name);
      if (it == assignment_.end()) throw EvalError("unhoused free variable '" + t->name + "'");
      if (it->second.sort != t.sort())
        throw EvalError("assignment gives '" + t->name + "' the wrong sort");
      return {true, it->second.bits};
    }
    case TermKind::Const: {
      const int i = m_->sig->index_of(t->name);
      if (i < 0) throw EvalError("'" + t->name + "' is not a constant of the signature");
      const auto& tab = m_->table[static_cast<std::size_t>(i)];
      const ConstDecl& c = m_->sig->constants[static_cast<std::size_t>(i)];
      if (c.kind == ConstKind::Individual) return tab[0] < 0 ? Val{false, 0} : Val{true, static_cast<RelValue>(tab[0])};
      if (c.kind == ConstKind::SecondOrder)
        throw EvalError("second-order constant '" + t->name + "' used as a term");
      RelValue v = 0;
      for (std::size_t b = 0; b < tab.size(); ++b) {
        if (tab[b] < 0) return {false, 0};
        if (tab[b]) v |= RelValue{1} << b;
      }
      return {true, v};
    }
    case TermKind::Macro: return extension(expand_relation_macro(t));
    case TermKind::Lambda: return extension(t);
    case TermKind::Description:
      throw EvalError("description '" + print_term(t) + "' in a classical interpretation");
  }
  return {false, 0};
}

Evaluator::Val Evaluator::extension(const Term& lam) {
  const std::uint32_t id = lam->body->id;
  const bool cacheable = lam->loose == 0;
  if (cacheable && id < lam_stamp_.size() && lam_stamp_[id] == epoch_) return lam_cache_[id];
  const int n = static_cast<int>(lam->binders.size());
  const int tuples = m_->tuples(n);
  const WorldMask all = m_->all_worlds();
  Val out{true, 0};
  std::vector<Val> args(static_cast<std::size_t>(n));
  for (int k = 0; k < tuples && out.known; ++k) {
    int rest = k;
    for (int a = 0; a < n; ++a) {
      args[static_cast<std::size_t>(a)] = {true, static_cast<RelValue>(rest % m_->individuals)};
      rest /= m_->individuals;
    }
    const Truth r = apply_lambda(lam, args);
    if ((r.t | r.f) != all) {
      out.known = false;
      break;
    }
    for (int w = 0; w < m_->worlds; ++w)
      if ((r.t >> w) & 1u) out.bits |= RelValue{1} << (w * tuples + k);
  }
  if (cacheable) {
    if (id >= lam_stamp_.size()) {
      lam_stamp_.resize(static_cast<std::size_t>(formula_id_limit()) + 1024, 0);
      lam_cache_.resize(lam_stamp_.size());
    }
    lam_stamp_[id] = epoch_;
    lam_cache_[id] = out;
  }
  return out;
}

Truth Evaluator::apply_lambda(const Term& lam, const std::vector<Val>& args) {
  for (const auto& a : args) env_.push_back(a);
  const Truth r = eval_node(lam->body);
  env_.resize(env_.size() - args.size());
  return r;
}

Truth Evaluator::exemplify(const Formula& f) {
  const Term& pred = f->terms[0];
  const int n = static_cast<int>(f->terms.size()) - 1;
  std::vector<Val> args;
  args.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    args.push_back(term_value(f->terms[static_cast<std::size_t>(i)]));
    if (!args.back().known) return {};
  }
  if (pred.kind() == TermKind::Lambda) return apply_lambda(pred, args);
  if (pred.kind() == TermKind::Macro) return apply_lambda(expand_relation_macro(pred), args);
  int tuple = 0;
  for (int i = n; i-- > 0;) tuple = tuple * m_->individuals + static_cast<int>(args[static_cast<std::size_t>(i)].bits);
  const int tuples = m_->tuples(n);
  Truth r;
  if (pred.kind() == TermKind::Const) {
    const int ci = m_->sig->index_of(pred->name);
    if (ci < 0) throw EvalError("'" + pred->name + "' is not a constant of the signature");
    const auto& tab = m_->table[static_cast<std::size_t>(ci)];
    for (int w = 0; w < m_->worlds; ++w) {
      const auto e = tab[static_cast<std::size_t>(w * tuples + tuple)];
      if (e > 0) r.t |= 1u << w;
      if (e == 0) r.f |= 1u << w;
    }
    return r;
  }
  const Val v = term_value(pred);
  if (!v.known) return {};
  for (int w = 0; w < m_->worlds; ++w) {
    if ((v.bits >> (w * tuples + tuple)) & 1u)
      r.t |= 1u << w;
    else
      r.f |= 1u << w;
  }
  return r;
}

Truth Evaluator::second_order(const Formula& f) {
  const int ci = m_->sig->index_of(f->name);
  if (ci < 0 || m_->sig->constants[static_cast<std::size_t>(ci)].kind != ConstKind::SecondOrder)
    throw EvalError("'" + f->name + "' is not a second-order constant");
  if (!m_->relspace_available)
    throw BudgetError("second-order constant '" + f->name + "' needs a relation space; |D|*|W| = " +
                      std::to_string(m_->individuals * m_->worlds) + " exceeds the cap");
  const Val arg = term_value(f->terms[0]);
  if (!arg.known) return {};
  const auto& tab = m_->table[static_cast<std::size_t>(ci)];
  const std::size_t rs = m_->relspace.size();
  Truth r;
  const int rigid_idx_mask = (1 << m_->individuals) - 1;
  const int fixed_idx = m_->sig->rigid_properties ? -1 : m_->relspace_index(arg.bits);
  if (!m_->sig->rigid_properties && fixed_idx < 0)
    throw EvalError("argument of '" + f->name + "' lies outside the relation space");
  for (int w = 0; w < m_->worlds; ++w) {
    // Rigid members are indexed by their extension.
    const int idx = m_->sig->rigid_properties
                        ? static_cast<int>((arg.bits >> (w * m_->individuals)) & static_cast<RelValue>(rigid_idx_mask))
                        : fixed_idx;
    const auto e = tab[static_cast<std::size_t>(w) * rs + static_cast<std::size_t>(idx)];
    if (e > 0) r.t |= 1u << w;
    if (e == 0) r.f |= 1u << w;
  }
  return r;
}

// ---- convenience entry points ------------------------------------------------------------------

namespace {

WorldMask two_valued(const Truth& t, const KripkeInterpretation& m) {
  if ((t.t | t.f) != m.all_worlds()) throw EvalError("formula is undetermined in a partial interpretation");
  return t.t;
}

}  // namespace

bool eval(const Formula& f, const KripkeInterpretation& m, const Assignment& a, int world) {
  Evaluator ev(m, a);
  return (two_valued(ev.eval(f), m) >> world) & 1u;
}

WorldMask proposition_mask(const Formula& f, const KripkeInterpretation& m, const Assignment& a) {
  Evaluator ev(m, a);
  return two_valued(ev.eval(f), m);
}

std::vector<bool> proposition_of(const Formula& f, const KripkeInterpretation& m, const Assignment& a) {
  const WorldMask v = proposition_mask(f, m, a);
  std::vector<bool> out(static_cast<std::size_t>(m.worlds));
  for (int w = 0; w < m.worlds; ++w) out[static_cast<std::size_t>(w)] = (v >> w) & 1u;
  return out;
}

bool validity(const Formula& f, const KripkeInterpretation& m, Validity mode) {
  if (f->loose != 0 || !free_variables(f).empty()) throw EvalError("validity of an open formula");
  const WorldMask v = proposition_mask(f, m);
  if (mode == Validity::Necessary) return v == m.all_worlds();
  return (v >> m.actual) & 1u;
}

bool frame_check(const KripkeInterpretation& m, Logic tag) {
  switch (tag) {
    case Logic::K: return true;
    case Logic::KB:
      for (int w = 0; w < m.worlds; ++w)
        for (int v = 0; v < m.worlds; ++v)
          if (((m.succ[w] >> v) & 1u) != ((m.succ[v] >> w) & 1u)) return false;
      return true;
    case Logic::S5Total:
      for (int w = 0; w < m.worlds; ++w)
        if (m.succ[w] != m.all_worlds()) return false;
      return true;
  }
  return false;
}

// ---- meta-language ------------------------------------------------------------------------------

MetaEvaluator::MetaEvaluator(const KripkeInterpretation& m, Assignment a) : m_(&m), assignment_(std::move(a)) {}

void MetaEvaluator::rebind(const KripkeInterpretation& m) {
  m_ = &m;
  if (++epoch_ == 0) {
    for (auto& s : cache_) s.stamp = 0;
    for (auto& s : tables_) s.stamp = 0;
    epoch_ = 1;
  }
}

bool MetaEvaluator::holds(const MetaTerm& lambda, int world) {
  if (lambda->kind != MetaKind::Lambda) throw EvalError("meta evaluation expects a world abstraction");
  env_.assign(1, static_cast<RelValue>(world));
  env_sort_.assign(1, MetaSort::World);
  return ev(lambda->kids[0]);
}

RelValue MetaEvaluator::value(const MetaTerm& t) {
  switch (t->kind) {
    case MetaKind::Var: return env_[env_.size() - 1 - static_cast<std::size_t>(t->index)];
    case MetaKind::Actual: return static_cast<RelValue>(m_->actual);
    case MetaKind::Name: {
      const int ci = m_->sig->index_of(t->name);
      if (ci >= 0) {
        const auto& tab = m_->table[static_cast<std::size_t>(ci)];
        if (t->sort == MetaSort::Individual) {
          if (tab[0] < 0) throw EvalError("individual constant '" + t->name + "' is uninterpreted");
          return static_cast<RelValue>(tab[0]);
        }
        return m_->relation_mask(t->name);
      }
      auto it = assignment_.find(t->name);
      if (it == assignment_.end()) throw EvalError("unhoused free variable '" + t->name + "'");
      return it->second.bits;
    }
    default: throw EvalError("meta term has no value");
  }
}

bool MetaEvaluator::ev(const MetaTerm& t) {
  Slot* slot = nullptr;
  std::uint32_t key = 0;
  if (t->loose <= 1) {
    const RelValue top = env_.empty() ? 0 : env_.back();
    if (t->loose == 0 || (env_sort_.back() != MetaSort::Relation && top < 32)) {
      key = t->loose == 0 ? 1u : 1u << top;
      if (t->id >= cache_.size()) cache_.resize(static_cast<std::size_t>(meta_id_limit()) + 1024);
      slot = &cache_[t->id];
      if (slot->stamp != epoch_) *slot = {epoch_, 0, 0};
      if (slot->known & key) return (slot->value & key) != 0;
    }
  }
  bool r = false;
  switch (t->kind) {
    case MetaKind::Top: r = true; break;
    case MetaKind::Bottom: r = false; break;
    case MetaKind::Access: {
      const auto w = value(t->kids[0]);
      const auto v = value(t->kids[1]);
      r = (m_->succ[w] >> v) & 1u;
      break;
    }
    case MetaKind::Eq: r = value(t->kids[0]) == value(t->kids[1]); break;
    case MetaKind::Apply: {
      const MetaTerm& head = t->kids[0];
      const int n = static_cast<int>(t->kids.size()) - 2;
      int tuple = 0;
      for (int i = n; i >= 1; --i) tuple = tuple * m_->individuals + static_cast<int>(value(t->kids[static_cast<std::size_t>(i)]));
      const int w = static_cast<int>(value(t->kids.back()));
      const int tuples = m_->tuples(n);
      if (head->kind == MetaKind::Name && m_->sig->index_of(head->name) >= 0) {
        const auto& tab = m_->table[static_cast<std::size_t>(m_->sig->index_of(head->name))];
        const auto e = tab[static_cast<std::size_t>(w * tuples + tuple)];
        if (e < 0) throw EvalError("relation '" + head->name + "' is uninterpreted");
        r = e > 0;
      } else {
        r = (value(head) >> (w * tuples + tuple)) & 1u;
      }
      break;
    }
    case MetaKind::Not: r = !ev(t->kids[0]); break;
    case MetaKind::Implies: r = !ev(t->kids[0]) || ev(t->kids[1]); break;
    case MetaKind::And: r = ev(t->kids[0]) && ev(t->kids[1]); break;
    case MetaKind::Or: r = ev(t->kids[0]) || ev(t->kids[1]); break;
    case MetaKind::Iff: r = ev(t->kids[0]) == ev(t->kids[1]); break;
    case MetaKind::ForAll:
    case MetaKind::Exists: {
      const bool universal = t->kind == MetaKind::ForAll;
      r = universal;
      if (t->sort == MetaSort::World) {
        env_sort_.push_back(t->sort);
        for (int w = 0; w < m_->worlds; ++w) {
          env_.push_back(static_cast<RelValue>(w));
          const bool b = ev(t->kids[0]);
          env_.pop_back();
          if (b != universal) {
            r = !universal;
            break;
          }
        }
        env_sort_.pop_back();
        break;
      }
      std::vector<RelValue> dom;
      if (t->sort == MetaSort::Individual) {
        for (int d = 0; d < m_->individuals; ++d) dom.push_back(static_cast<RelValue>(d));
      } else if (t->arity == 1) {
        if (!m_->relspace_available) throw BudgetError("relation quantifier exceeds the relation-space cap");
        dom = m_->relspace;
      } else {
        const int bits = m_->tuples(t->arity) * m_->worlds;
        if (bits >= 20) throw BudgetError("relation quantifier exceeds the relation-space cap");
        for (RelValue v = 0; v < (RelValue{1} << bits); ++v) dom.push_back(v);
      }
      r = universal;
      env_sort_.push_back(t->sort);
      for (RelValue v : dom) {
        env_.push_back(v);
        const bool b = ev(t->kids[0]);
        env_.pop_back();
        if (b != universal) {
          r = !universal;
          break;
        }
      }
      env_sort_.pop_back();
      break;
    }
    default: throw EvalError("malformed meta term");
  }
  if (slot) {
    // The cache vector may have grown during recursion.
    Slot& s = cache_[t->id];
    if (s.stamp != epoch_) s = {epoch_, 0, 0};
    s.known |= key;
    if (r) s.value |= key;
  }
  return r;
}

WorldMask MetaEvaluator::mask(const MetaTerm& lambda) {
  if (lambda->kind != MetaKind::Lambda) throw EvalError("meta evaluation expects a world abstraction");
  std::uint32_t bits = 0;
  if (lambda->sort == MetaSort::World && table(lambda->kids[0], bits)) return widen(bits, lambda->kids[0]->loose, 1);
  WorldMask r = 0;
  for (int w = 0; w < m_->worlds; ++w)
    if (holds(lambda, w)) r |= WorldMask{1} << w;
  return r;
}

// A table over `from` variables read as one over `to` >= from variables.
std::uint32_t MetaEvaluator::widen(std::uint32_t bits, int from, int to) const {
  if (from == to) return bits;
  std::uint32_t small = 1, big = 1;
  for (int i = 0; i < from; ++i) small *= static_cast<std::uint32_t>(m_->worlds);
  for (int i = 0; i < to; ++i) big *= static_cast<std::uint32_t>(m_->worlds);
  std::uint32_t r = 0;
  for (std::uint32_t i = 0; i < big; ++i)
    if ((bits >> (i % small)) & 1u) r |= 1u << i;
  return r;
}

bool MetaEvaluator::table(const MetaTerm& t, std::uint32_t& bits) {
  const int k = t->loose;
  const auto W = static_cast<std::uint32_t>(m_->worlds);
  std::uint32_t size = 1;
  for (int i = 0; i < k; ++i) {
    size *= W;
    if (size > 32) return false;
  }
  if (t->id >= tables_.size()) tables_.resize(static_cast<std::size_t>(meta_id_limit()) + 1024);
  if (tables_[t->id].stamp == epoch_) {
    bits = tables_[t->id].bits;
    return tables_[t->id].ok;
  }
  // World positions named by a Var or the actual world, per table entry.
  auto world_of = [&](const MetaTerm& w, std::uint32_t entry, std::uint32_t& out) {
    if (w->kind == MetaKind::Actual) {
      out = static_cast<std::uint32_t>(m_->actual);
      return true;
    }
    if (w->kind != MetaKind::Var || w->sort != MetaSort::World) return false;
    for (int i = 0; i < w->index; ++i) entry /= W;
    out = entry % W;
    return true;
  };
  const std::uint32_t full = size >= 32 ? ~0u : (1u << size) - 1u;
  bool ok = true;
  std::uint32_t r = 0;
  switch (t->kind) {
    case MetaKind::Top: r = full; break;
    case MetaKind::Bottom: r = 0; break;
    case MetaKind::Access:
      for (std::uint32_t e = 0; e < size && ok; ++e) {
        std::uint32_t a = 0, b = 0;
        ok = world_of(t->kids[0], e, a) && world_of(t->kids[1], e, b);
        if (ok && ((m_->succ[a] >> b) & 1u)) r |= 1u << e;
      }
      break;
    case MetaKind::Apply: {
      const MetaTerm& head = t->kids[0];
      const int ci = head->kind == MetaKind::Name ? m_->sig->index_of(head->name) : -1;
      if (t->kids.size() != 2 || ci < 0) {
        ok = false;
        break;
      }
      const auto& tab = m_->table[static_cast<std::size_t>(ci)];
      for (std::uint32_t e = 0; e < size && ok; ++e) {
        std::uint32_t w = 0;
        ok = world_of(t->kids[1], e, w);
        if (!ok) break;
        const auto v = tab[w];
        if (v < 0) throw EvalError("relation '" + head->name + "' is uninterpreted");
        if (v > 0) r |= 1u << e;
      }
      break;
    }
    case MetaKind::Not:
    case MetaKind::Implies:
    case MetaKind::And:
    case MetaKind::Or:
    case MetaKind::Iff: {
      std::uint32_t a = 0, b = 0;
      ok = table(t->kids[0], a);
      if (ok) a = widen(a, t->kids[0]->loose, k);
      if (ok && t->kind != MetaKind::Not) {
        ok = table(t->kids[1], b);
        if (ok) b = widen(b, t->kids[1]->loose, k);
      }
      if (!ok) break;
      switch (t->kind) {
        case MetaKind::Not: r = ~a; break;
        case MetaKind::Implies: r = ~a | b; break;
        case MetaKind::And: r = a & b; break;
        case MetaKind::Or: r = a | b; break;
        default: r = ~(a ^ b); break;
      }
      r &= full;
      break;
    }
    case MetaKind::ForAll:
    case MetaKind::Exists: {
      std::uint32_t body = 0;
      ok = t->sort == MetaSort::World && size * W <= 32 && table(t->kids[0], body);
      if (!ok) break;
      body = widen(body, t->kids[0]->loose, k + 1);
      const bool universal = t->kind == MetaKind::ForAll;
      for (std::uint32_t e = 0; e < size; ++e) {
        const std::uint32_t row = (body >> (e * W)) & ((1u << W) - 1u);
        if (universal ? row == (1u << W) - 1u : row != 0) r |= 1u << e;
      }
      break;
    }
    default:
      ok = false;
  }
  tables_[t->id] = {epoch_, ok, r};
  bits = r;
  return ok;
}

bool meta_eval(const MetaTerm& lambda, const KripkeInterpretation& m, int world, const Assignment& a) {
  MetaEvaluator ev(m, a);
  return ev.holds(lambda, world);
}

}  // namespace qml
