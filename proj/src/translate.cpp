#include "qml/translate.hpp"

#include <algorithm>
#include <atomic>
#include <set>

#include "qml/parse.hpp"

namespace qml {

namespace {
std::atomic<std::uint32_t> g_meta_id{1};
}

std::uint32_t meta_id_limit() { return g_meta_id.load(std::memory_order_relaxed); }

MetaTerm meta_node(MetaNode n) {
  int loose = 0;
  if (n.kind == MetaKind::Var) loose = n.index + 1;
  for (const auto& k : n.kids) loose = std::max(loose, k->loose);
  if (n.kind == MetaKind::ForAll || n.kind == MetaKind::Exists || n.kind == MetaKind::Lambda)
    loose = std::max(0, loose - 1);
  n.loose = loose;
  n.id = g_meta_id.fetch_add(1, std::memory_order_relaxed);
  return MetaTerm(std::make_shared<const MetaNode>(std::move(n)));
}

namespace {

MetaTerm mk(MetaKind k, std::vector<MetaTerm> kids = {}) {
  MetaNode n;
  n.kind = k;
  n.kids = std::move(kids);
  return meta_node(std::move(n));
}

MetaTerm var(int index, MetaSort sort, int arity = 0) {
  MetaNode n;
  n.kind = MetaKind::Var;
  n.index = index;
  n.sort = sort;
  n.arity = arity;
  return meta_node(std::move(n));
}

MetaTerm name(const std::string& s, MetaSort sort, int arity = 0) {
  MetaNode n;
  n.kind = MetaKind::Name;
  n.name = s;
  n.sort = sort;
  n.arity = arity;
  return meta_node(std::move(n));
}

MetaTerm binder(MetaKind k, MetaSort sort, int arity, const std::string& hint, MetaTerm body) {
  MetaNode n;
  n.kind = k;
  n.sort = sort;
  n.arity = arity;
  n.name = hint;
  n.kids = {std::move(body)};
  return meta_node(std::move(n));
}

MetaTerm meta_shift(const MetaTerm& t, int d, int cutoff) {
  if (t->loose <= cutoff) return t;
  MetaNode n = *t;
  if (n.kind == MetaKind::Var) {
    if (n.index >= cutoff) n.index += d;
    return meta_node(std::move(n));
  }
  const bool binds = n.kind == MetaKind::ForAll || n.kind == MetaKind::Exists || n.kind == MetaKind::Lambda;
  for (auto& k : n.kids) k = meta_shift(k, d, cutoff + (binds ? 1 : 0));
  return meta_node(std::move(n));
}

// R w v -> forall x. B  becomes  forall x. R w v -> B. World binders stay put.
MetaTerm float_implication(const MetaTerm& access, const MetaTerm& body) {
  if (body->kind == MetaKind::ForAll && body->sort != MetaSort::World) {
    return binder(MetaKind::ForAll, body->sort, body->arity, body->name,
                  float_implication(meta_shift(access, 1, 0), body->kids[0]));
  }
  return mk(MetaKind::Implies, {access, body});
}

}  // namespace

struct StandardTranslator::Ctx {
  int mdepth = 0;
  std::vector<int> fpos;  // absolute meta level of each object-language binder
  int world = -1;         // absolute level of the current world, -1 for w0

  MetaTerm at(int level, MetaSort sort, int arity = 0) const { return var(mdepth - 1 - level, sort, arity); }
  MetaTerm world_term() const { return world < 0 ? mk(MetaKind::Actual) : at(world, MetaSort::World); }
};

MetaTerm StandardTranslator::term(const Term& t, Ctx& c) {
  const MetaSort sort = t.sort().is_individual() ? MetaSort::Individual : MetaSort::Relation;
  switch (t.kind()) {
    case TermKind::Bound:
      return c.at(c.fpos[c.fpos.size() - 1 - static_cast<std::size_t>(t->index)], sort, t.sort().arity());
    case TermKind::Free:
    case TermKind::Const:
      return name(t->name, sort, t.sort().arity());
    default:
      throw Unsupported("standard translation: unsupported term '" + print_term(t) + "'");
  }
}

MetaTerm StandardTranslator::st(const Formula& f, Ctx& c) {
  const bool cacheable = f->loose == 0 && c.world == c.mdepth - 1;
  if (cacheable) {
    auto it = cache_.find(f->id);
    if (it != cache_.end()) return it->second;
  }
  auto descend_world = [&](const Formula& sub) {
    const int outer = c.world;
    const MetaTerm from = c.world_term();
    c.world = c.mdepth;
    ++c.mdepth;
    MetaTerm body = st(sub, c);
    --c.mdepth;
    c.world = outer;
    const MetaTerm access = mk(MetaKind::Access, {meta_shift(from, 1, 0), var(0, MetaSort::World)});
    return std::pair{access, body};
  };
  MetaTerm out;
  switch (f.kind()) {
    case FormulaKind::Falsum: out = mk(MetaKind::Bottom); break;
    case FormulaKind::Verum: out = mk(MetaKind::Top); break;
    case FormulaKind::Exemplify: {
      std::vector<MetaTerm> kids;
      for (const auto& t : f->terms) kids.push_back(term(t, c));
      kids.push_back(c.world_term());
      out = mk(MetaKind::Apply, std::move(kids));
      break;
    }
    case FormulaKind::Eq:
      if (!f->terms[0].sort().is_individual())
        throw Unsupported("standard translation: identity of relation terms");
      out = mk(MetaKind::Eq, {term(f->terms[0], c), term(f->terms[1], c)});
      break;
    case FormulaKind::Not: out = mk(MetaKind::Not, {st(f->subs[0], c)}); break;
    case FormulaKind::Implies: out = mk(MetaKind::Implies, {st(f->subs[0], c), st(f->subs[1], c)}); break;
    case FormulaKind::And: out = mk(MetaKind::And, {st(f->subs[0], c), st(f->subs[1], c)}); break;
    case FormulaKind::Or: out = mk(MetaKind::Or, {st(f->subs[0], c), st(f->subs[1], c)}); break;
    case FormulaKind::Iff: out = mk(MetaKind::Iff, {st(f->subs[0], c), st(f->subs[1], c)}); break;
    case FormulaKind::Xor:
      out = mk(MetaKind::Not, {mk(MetaKind::Iff, {st(f->subs[0], c), st(f->subs[1], c)})});
      break;
    case FormulaKind::Box: {
      auto [access, body] = descend_world(f->subs[0]);
      out = binder(MetaKind::ForAll, MetaSort::World, 0, "v", float_implication(access, body));
      break;
    }
    case FormulaKind::Dia: {
      auto [access, body] = descend_world(f->subs[0]);
      out = binder(MetaKind::Exists, MetaSort::World, 0, "v", mk(MetaKind::And, {access, body}));
      break;
    }
    case FormulaKind::Actually: {
      const int outer = c.world;
      c.world = -1;
      out = st(f->subs[0], c);
      c.world = outer;
      break;
    }
    case FormulaKind::ForAll:
    case FormulaKind::Exists: {
      const Sort s = f->binder_sort;
      c.fpos.push_back(c.mdepth);
      ++c.mdepth;
      MetaTerm body = st(f->subs[0], c);
      --c.mdepth;
      c.fpos.pop_back();
      out = binder(f.kind() == FormulaKind::ForAll ? MetaKind::ForAll : MetaKind::Exists,
                   s.is_individual() ? MetaSort::Individual : MetaSort::Relation, s.arity(), f->name,
                   body);
      break;
    }
    case FormulaKind::Encode:
    case FormulaKind::SecondOrder:
    case FormulaKind::Macro:
      throw Unsupported("standard translation: unsupported construct in '" + print_formula(f) + "'");
  }
  if (cacheable) cache_.emplace(f->id, out);
  return out;
}

MetaTerm StandardTranslator::operator()(const Formula& f) {
  const Formula g = beta_normalize(expand_macros(f));
  Ctx c;
  c.mdepth = 1;
  c.world = 0;
  return binder(MetaKind::Lambda, MetaSort::World, 0, "w", st(g, c));
}

MetaTerm standard_translation(const Formula& f) { return StandardTranslator{}(f); }

// ---- printing ----------------------------------------------------------------------

namespace {

enum Prec { kIff = 0, kImp = 1, kOr = 2, kAnd = 3, kUnary = 4 };

class MetaPrinter {
 public:
  explicit MetaPrinter(std::set<std::string> taken) : taken_(std::move(taken)) {}

  std::string print(const MetaTerm& t, int min_prec, bool tail) {
    switch (t->kind) {
      case MetaKind::Var: {
        const auto i = static_cast<std::size_t>(t->index);
        return i < scope_.size() ? scope_[scope_.size() - 1 - i] : "#" + std::to_string(i);
      }
      case MetaKind::Name: return t->name;
      case MetaKind::Actual: return "w0";
      case MetaKind::Top: return "true";
      case MetaKind::Bottom: return "false";
      case MetaKind::Access: return "R " + print(t->kids[0], kUnary, false) + " " + print(t->kids[1], kUnary, false);
      case MetaKind::Eq: return print(t->kids[0], kUnary, false) + " = " + print(t->kids[1], kUnary, false);
      case MetaKind::Apply: {
        std::string s;
        for (std::size_t i = 0; i < t->kids.size(); ++i) s += (i ? " " : "") + print(t->kids[i], kUnary, false);
        return s;
      }
      case MetaKind::Not: return "~" + print(t->kids[0], kUnary, tail);
      case MetaKind::Implies: return binary(t, " -> ", kImp, kOr, kImp, min_prec, tail);
      case MetaKind::And: return binary(t, " & ", kAnd, kAnd, kUnary, min_prec, tail);
      case MetaKind::Or: return binary(t, " | ", kOr, kOr, kAnd, min_prec, tail);
      case MetaKind::Iff: return binary(t, " <-> ", kIff, kIff, kImp, min_prec, tail);
      case MetaKind::Lambda: {
        const std::string w = fresh(t->name);
        scope_.push_back(w);
        std::string s = "\\" + w + ". " + print(t->kids[0], kIff, true);
        scope_.pop_back();
        return tail ? s : "(" + s + ")";
      }
      case MetaKind::ForAll:
      case MetaKind::Exists: {
        const MetaKind k = t->kind;
        std::string s = k == MetaKind::ForAll ? "forall" : "exists";
        MetaTerm cur = t;
        std::size_t pushed = 0;
        while (cur->kind == k) {
          const std::string v = fresh(cur->name);
          scope_.push_back(v);
          ++pushed;
          s += " " + v;
          cur = cur->kids[0];
        }
        s += ". " + print(cur, kIff, true);
        for (std::size_t i = 0; i < pushed; ++i) scope_.pop_back();
        return tail ? s : "(" + s + ")";
      }
    }
    return "?";
  }

 private:
  std::set<std::string> taken_;
  std::vector<std::string> scope_;

  std::string fresh(std::string n) {
    if (n.empty()) n = "x";
    auto clash = [&](const std::string& c) {
      return taken_.count(c) || c == "R" || c == "w0" ||
             std::find(scope_.begin(), scope_.end(), c) != scope_.end();
    };
    while (clash(n)) n += "'";
    return n;
  }

  std::string binary(const MetaTerm& t, const char* op, int own, int lp, int rp, int min_prec, bool tail) {
    const bool wrap = own < min_prec;
    std::string s = print(t->kids[0], lp, false) + op + print(t->kids[1], rp, wrap ? true : tail);
    return wrap ? "(" + s + ")" : s;
  }
};

void meta_names(const MetaTerm& t, std::set<std::string>& out) {
  if (t->kind == MetaKind::Name) out.insert(t->name);
  for (const auto& k : t->kids) meta_names(k, out);
}

}  // namespace

std::string print_meta(const MetaTerm& t) {
  std::set<std::string> names;
  meta_names(t, names);
  return MetaPrinter(std::move(names)).print(t, kIff, true);
}

// ---- first-order export ------------------------------------------------------------

namespace {

void collect_props(const Formula& f, std::vector<std::string>& order) {
  if (f.kind() == FormulaKind::Exemplify) {
    const Term& p = f->terms[0];
    if (!p.sort().is_proposition() || (p.kind() != TermKind::Free && p.kind() != TermKind::Const))
      throw Unsupported("first-order export handles propositional schemas only");
    if (std::find(order.begin(), order.end(), p->name) == order.end()) order.push_back(p->name);
    return;
  }
  for (const auto& s : f->subs) collect_props(s, order);
}

std::string fo(const Formula& f, const std::string& world,
               const std::vector<std::string>& props, const std::vector<std::string>& vars) {
  auto sub = [&](int i, const std::string& w) { return fo(f->subs[i], w, props, vars); };
  switch (f.kind()) {
    case FormulaKind::Exemplify: {
      const auto it = std::find(props.begin(), props.end(), f->terms[0]->name);
      return "True(" + vars[static_cast<std::size_t>(it - props.begin())] + "," + world + ")";
    }
    case FormulaKind::Falsum: return "$F";
    case FormulaKind::Verum: return "$T";
    case FormulaKind::Not: return "-" + sub(0, world);
    case FormulaKind::Implies: return "(" + sub(0, world) + " -> " + sub(1, world) + ")";
    case FormulaKind::And: return "(" + sub(0, world) + " & " + sub(1, world) + ")";
    case FormulaKind::Or: return "(" + sub(0, world) + " | " + sub(1, world) + ")";
    case FormulaKind::Iff: return "(" + sub(0, world) + " <-> " + sub(1, world) + ")";
    case FormulaKind::Xor: return "-(" + sub(0, world) + " <-> " + sub(1, world) + ")";
    case FormulaKind::Box: return "all y (Point(y) -> " + sub(0, "y") + ")";
    case FormulaKind::Dia: return "exists y (Point(y) & " + sub(0, "y") + ")";
    case FormulaKind::Actually: return sub(0, "W");
    default:
      throw Unsupported("first-order export handles propositional schemas only");
  }
}

}  // namespace

std::string export_first_order(const Formula& schema) {
  const Formula f = expand_macros(schema);
  std::vector<std::string> props;
  collect_props(f, props);
  std::vector<std::string> vars;
  for (std::size_t i = 0; i < props.size(); ++i)
    vars.push_back(props.size() == 1 ? "x" : "x" + std::to_string(i + 1));
  std::string out = fo(f, "W", props, vars);
  for (std::size_t i = props.size(); i-- > 0;)
    out = "all " + vars[i] + " (Proposition(" + vars[i] + ") -> " + out + ")";
  return out;
}

}  // namespace qml
