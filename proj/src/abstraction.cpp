#include "qml/abstraction.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <functional>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "qml/parse.hpp"

namespace qml {

// ---- schemas ---------------------------------------------------------------------------

namespace {

struct SchemaText {
  const char* name;
  const char* text;
};

const SchemaText kSchemas[] = {
    {"ax_pl_1", "p -> (q -> p)"},
    {"ax_pl_2", "(p -> (q -> r)) -> ((p -> q) -> (p -> r))"},
    {"ax_pl_3", "(~p -> ~q) -> (q -> p)"},
    {"ax_K", "[](p -> q) -> ([]p -> []q)"},
    {"ax_T", "[]p -> p"},
    {"ax_5", "<>p -> []<>p"},
    {"ax_B", "p -> []<>p"},
    {"ax_refl", "x = x"},
    {"ax_eqsub", "x = y -> (F x -> F y)"},
};

std::string canonical_name(const std::string& name) {
  return name.rfind("ax_", 0) == 0 ? name : "ax_" + name;
}

}  // namespace

Schema make_schema(const std::string& name, const std::string& template_text) {
  Schema s;
  s.name = name;
  s.tmpl = parse_formula(template_text, Signature::classical());
  s.metas = free_variables(s.tmpl);
  return s;
}

Schema schema(const std::string& name) {
  const std::string n = canonical_name(name);
  for (const auto& s : kSchemas)
    if (n == s.name) return make_schema(s.name, s.text);
  throw Error("unknown schema '" + name + "'");
}

const Schema* Layer::find(const std::string& n) const {
  const std::string c = canonical_name(n);
  for (const auto& s : schemas)
    if (s.name == c || s.name == n) return &s;
  return nullptr;
}

Layer layer_for(Logic logic) {
  Layer l;
  l.logic = logic;
  l.name = to_string(logic);
  for (const char* n : {"ax_pl_1", "ax_pl_2", "ax_pl_3", "ax_K", "ax_refl", "ax_eqsub"}) l.schemas.push_back(schema(n));
  if (logic == Logic::KB) l.schemas.push_back(schema("ax_B"));
  if (logic == Logic::S5Total) {
    l.schemas.push_back(schema("ax_T"));
    l.schemas.push_back(schema("ax_5"));
  }
  return l;
}

// ---- substitution and matching ------------------------------------------------------------

namespace {

bool is_prop_meta(const Formula& f) {
  return f->kind == FormulaKind::Exemplify && f->terms.size() == 1 && f->terms[0]->kind == TermKind::Free &&
         f->terms[0].sort().is_proposition();
}

int binders_of(const FormulaNode& n) { return n.kind == FormulaKind::ForAll || n.kind == FormulaKind::Exists; }

Formula graft(const Formula& f, const std::map<std::string, Formula>& fm, int depth);

Term graft(const Term& t, const std::map<std::string, Formula>& fm, int depth) {
  if (!t->body) return t;
  const int n = t->kind == TermKind::Lambda ? static_cast<int>(t->binders.size()) : 1;
  return rebuild(*t, graft(t->body, fm, depth + n));
}

Formula graft(const Formula& f, const std::map<std::string, Formula>& fm, int depth) {
  if (is_prop_meta(f)) {
    auto it = fm.find(f->terms[0]->name);
    if (it != fm.end()) return depth ? shift(it->second, depth) : it->second;
    return f;
  }
  std::vector<Formula> subs;
  for (const auto& s : f->subs) subs.push_back(graft(s, fm, depth + binders_of(*f)));
  std::vector<Term> terms;
  for (const auto& t : f->terms) terms.push_back(graft(t, fm, depth));
  return rebuild(*f, std::move(subs), std::move(terms));
}

struct Matcher {
  std::set<std::string> metas;
  Substitution sub;

  bool bind(const std::string& name, const Binding& value) {
    auto it = sub.find(name);
    if (it == sub.end()) {
      sub.emplace(name, value);
      return true;
    }
    if (it->second.index() != value.index()) return false;
    if (const Formula* f = std::get_if<Formula>(&it->second)) return alpha_equivalent(*f, std::get<Formula>(value));
    return alpha_equivalent(std::get<Term>(it->second), std::get<Term>(value));
  }

  bool term(const Term& t, const Term& u, int depth) {
    if (t->kind == TermKind::Free && metas.count(t->name)) {
      if (t.sort() != u.sort()) return false;
      if (depth > 0 && u->loose > 0) return false;
      return bind(t->name, u);
    }
    if (t->kind != u->kind || t.sort() != u.sort() || t->name != u->name || t->index != u->index ||
        t->binder_sorts != u->binder_sorts)
      return false;
    if (!t->body) return true;
    const int n = t->kind == TermKind::Lambda ? static_cast<int>(t->binders.size()) : 1;
    return formula(t->body, u->body, depth + n);
  }

  bool formula(const Formula& t, const Formula& f, int depth) {
    if (is_prop_meta(t) && metas.count(t->terms[0]->name)) {
      if (depth > 0 && f->loose > 0) return false;
      return bind(t->terms[0]->name, f);
    }
    if (t->kind != f->kind || t->name != f->name || t->subs.size() != f->subs.size() ||
        t->terms.size() != f->terms.size())
      return false;
    if (binders_of(*t) && t->binder_sort != f->binder_sort) return false;
    for (std::size_t i = 0; i < t->subs.size(); ++i)
      if (!formula(t->subs[i], f->subs[i], depth + binders_of(*t))) return false;
    for (std::size_t i = 0; i < t->terms.size(); ++i)
      if (!term(t->terms[i], f->terms[i], depth)) return false;
    return true;
  }
};

Formula normal_form(const Formula& f) { return expand_derived(beta_normalize(expand_derived(f))); }

}  // namespace

Formula apply_substitution(const Schema& s, const Substitution& sub) {
  std::map<std::string, Formula> formulas;
  std::vector<std::pair<FreeVar, Term>> terms;
  for (const auto& m : s.metas) {
    auto it = sub.find(m.name);
    if (it == sub.end()) continue;
    if (m.sort.is_proposition()) {
      if (const Formula* f = std::get_if<Formula>(&it->second)) {
        formulas.emplace(m.name, *f);
        continue;
      }
      throw SortError("metavariable '" + m.name + "' stands for a formula");
    }
    const Term* t = std::get_if<Term>(&it->second);
    if (!t) throw SortError("metavariable '" + m.name + "' stands for a term");
    if (t->sort() != m.sort)
      throw SortError("metavariable '" + m.name + "' has sort " + to_string(m.sort) + ", got " + to_string(t->sort()));
    terms.emplace_back(m, *t);
  }
  for (const auto& [name, _] : sub) {
    bool known = false;
    for (const auto& m : s.metas) known = known || m.name == name;
    if (!known) throw Error("schema " + s.name + " has no metavariable '" + name + "'");
  }
  // Terms go into the bare template first so that metavariable names never
  // meet variables of the grafted formulas. Renaming to fresh names keeps
  // the term substitution simultaneous.
  Formula f = s.tmpl;
  std::vector<Term> fresh;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    fresh.push_back(free_var("$meta" + std::to_string(i), terms[i].first.sort));
    f = substitute(f, free_var(terms[i].first.name, terms[i].first.sort), fresh.back());
  }
  for (std::size_t i = 0; i < terms.size(); ++i) f = substitute(f, fresh[i], terms[i].second);
  return graft(f, formulas, 0);
}

std::optional<Substitution> match_schema(const Schema& s, const Formula& f) {
  Matcher m;
  for (const auto& v : s.metas) m.metas.insert(v.name);
  if (m.formula(s.tmpl, f, 0)) return m.sub;
  return std::nullopt;
}

bool convertible(const Formula& a, const Formula& b) { return alpha_equivalent(normal_form(a), normal_form(b)); }

bool is_tautology(const Formula& f) {
  std::vector<Formula> atoms;
  std::function<void(const Formula&)> collect = [&](const Formula& g) {
    switch (g.kind()) {
      case FormulaKind::Falsum:
      case FormulaKind::Verum:
        return;
      case FormulaKind::Not:
      case FormulaKind::Implies:
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Iff:
      case FormulaKind::Xor:
        for (const auto& s : g->subs) collect(s);
        return;
      default:
        for (const auto& a : atoms)
          if (alpha_equivalent(a, g)) return;
        atoms.push_back(g);
    }
  };
  collect(f);
  if (atoms.size() > 20) throw BudgetError("tautology check with more than 20 atoms");
  std::function<bool(const Formula&, std::uint32_t)> value = [&](const Formula& g, std::uint32_t row) -> bool {
    switch (g.kind()) {
      case FormulaKind::Falsum: return false;
      case FormulaKind::Verum: return true;
      case FormulaKind::Not: return !value(g->subs[0], row);
      case FormulaKind::Implies: return !value(g->subs[0], row) || value(g->subs[1], row);
      case FormulaKind::And: return value(g->subs[0], row) && value(g->subs[1], row);
      case FormulaKind::Or: return value(g->subs[0], row) || value(g->subs[1], row);
      case FormulaKind::Iff: return value(g->subs[0], row) == value(g->subs[1], row);
      case FormulaKind::Xor: return value(g->subs[0], row) != value(g->subs[1], row);
      default:
        for (std::size_t i = 0; i < atoms.size(); ++i)
          if (alpha_equivalent(atoms[i], g)) return (row >> i) & 1u;
        return false;
    }
  };
  for (std::uint32_t row = 0; row < (1u << atoms.size()); ++row)
    if (!value(f, row)) return false;
  return true;
}

// ---- proof scripts -------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

StepKind kind_of(const std::string& word, std::size_t line) {
  static const std::map<std::string, StepKind> kinds{
      {"ax", StepKind::Axiom}, {"mp", StepKind::MP},     {"nec", StepKind::Nec},   {"hyp", StepKind::Hyp},
      {"qed", StepKind::Qed},  {"premise", StepKind::Premise}, {"exp", StepKind::Exp}, {"taut", StepKind::Taut},
      {"gen", StepKind::Gen},  {"inst", StepKind::Inst}, {"conv", StepKind::Conv}};
  auto it = kinds.find(word);
  if (it == kinds.end()) throw ParseError("unknown proof step '" + word + "'", line, 1);
  return it->second;
}

}  // namespace

ProofScript parse_proof(const std::string& text, std::shared_ptr<const Signature> sig) {
  ProofScript ps;
  ps.sig = sig;
  std::map<std::string, int> labels;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  static const std::regex label_re(R"(^([A-Za-z_][A-Za-z0-9_']*):\s+(.*)$)");
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    Step st;
    st.line = lineno;
    std::smatch lm;
    if (std::regex_match(line, lm, label_re)) {
      st.label = lm[1];
      line = trim(lm[2]);
    }
    std::istringstream words(line);
    std::string head;
    words >> head;
    st.kind = kind_of(head, lineno);
    std::string rest = trim(line.substr(head.size()));

    auto ref = [&](const std::string& tok) -> int {
      if (!tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        const int n = std::stoi(tok);
        if (n < 1 || n > static_cast<int>(ps.steps.size()))
          throw ParseError("step " + tok + " does not refer to an earlier step", lineno, 1);
        return n - 1;
      }
      auto it = labels.find(tok);
      if (it == labels.end()) throw ParseError("unknown step label '" + tok + "'", lineno, 1);
      return it->second;
    };
    auto formula = [&](const std::string& t) {
      try {
        return parse_formula(t, *sig);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), lineno, e.column());
      }
    };
    auto split_first = [&](std::string& r) {
      std::istringstream ws(r);
      std::string tok;
      ws >> tok;
      r = trim(r.substr(std::min(r.size(), r.find(tok) + tok.size())));
      return tok;
    };

    switch (st.kind) {
      case StepKind::Axiom: {
        st.schema = split_first(rest);
        if (st.schema.empty()) throw ParseError("ax needs a schema name", lineno, 1);
        if (!rest.empty() && rest.front() == '{') {
          if (rest.back() != '}') throw ParseError("unterminated substitution", lineno, 1);
          const std::string body = rest.substr(1, rest.size() - 2);
          const Schema sch = schema(st.schema);
          std::size_t start = 0;
          while (start <= body.size()) {
            std::size_t end = body.find(';', start);
            if (end == std::string::npos) end = body.size();
            const std::string item = trim(body.substr(start, end - start));
            start = end + 1;
            if (item.empty()) continue;
            const auto eq = item.find(":=");
            if (eq == std::string::npos) throw ParseError("expected 'name := value'", lineno, 1);
            const std::string name = trim(item.substr(0, eq));
            const std::string value = trim(item.substr(eq + 2));
            const FreeVar* meta = nullptr;
            for (const auto& m : sch.metas)
              if (m.name == name) meta = &m;
            if (!meta) throw ParseError("schema " + sch.name + " has no metavariable '" + name + "'", lineno, 1);
            if (meta->sort.is_proposition()) {
              st.sub.emplace(name, formula(value));
            } else {
              try {
                st.sub.emplace(name, parse_term(value, *sig));
              } catch (const ParseError& e) {
                throw ParseError(e.what(), lineno, e.column());
              }
            }
          }
        } else if (!rest.empty()) {
          st.formula = formula(rest);
        }
        break;
      }
      case StepKind::MP: {
        const std::string a = split_first(rest);
        const std::string b = split_first(rest);
        st.refs = {ref(a), ref(b)};
        break;
      }
      case StepKind::Nec:
      case StepKind::Qed:
      case StepKind::Exp:
        st.refs = {ref(split_first(rest))};
        break;
      case StepKind::Hyp:
      case StepKind::Taut:
        st.formula = formula(rest);
        break;
      case StepKind::Premise: {
        const std::string k = split_first(rest);
        if (k.empty() || !std::all_of(k.begin(), k.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
          throw ParseError("premise needs a number", lineno, 1);
        st.premise = std::stoi(k) - 1;
        break;
      }
      case StepKind::Gen:
        st.refs = {ref(split_first(rest))};
        st.var = split_first(rest);
        if (st.var.empty()) throw ParseError("gen needs a variable", lineno, 1);
        break;
      case StepKind::Inst: {
        st.refs = {ref(split_first(rest))};
        try {
          st.term = parse_term(rest, *sig);
        } catch (const ParseError& e) {
          throw ParseError(e.what(), lineno, e.column());
        }
        break;
      }
      case StepKind::Conv:
        st.refs = {ref(split_first(rest))};
        st.formula = formula(rest);
        break;
    }
    if (!st.label.empty()) {
      if (labels.count(st.label)) throw ParseError("duplicate label '" + st.label + "'", lineno, 1);
      labels[st.label] = static_cast<int>(ps.steps.size());
    }
    ps.steps.push_back(std::move(st));
  }
  return ps;
}

namespace {

// Schema templates are written with primitive identity; AOT scripts use the
// defined identity instead.
Formula defined_identity(const Formula& f) {
  if (f.kind() == FormulaKind::Eq) return macro("=", {f->terms[0], f->terms[1]});
  std::vector<Formula> subs;
  for (const auto& s : f->subs) subs.push_back(defined_identity(s));
  return rebuild(*f, std::move(subs), f->terms);
}

}  // namespace

Verdict check_proof(const ProofScript& ps, const Layer& given, const std::vector<Formula>& premises) {
  Layer layer = given;
  if (ps.sig && ps.sig->mode == Mode::Aot)
    for (auto& s : layer.schemas) s.tmpl = defined_identity(s.tmpl);
  struct Line {
    Formula f;
    std::vector<int> deps;   // open hypotheses this line depends on
    std::vector<int> block;  // hypotheses open when it was derived
  };
  std::vector<Line> lines;
  std::vector<int> open;
  Verdict v;
  auto reject = [&](std::size_t i, const std::string& reason) {
    v.accepted = false;
    v.step = static_cast<int>(i) + 1;
    v.reason = reason;
    return v;
  };
  auto accessible = [&](int j) {
    const auto& b = lines[static_cast<std::size_t>(j)].block;
    return b.size() <= open.size() && std::equal(b.begin(), b.end(), open.begin());
  };
  auto merge = [](std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
  };

  for (std::size_t i = 0; i < ps.steps.size(); ++i) {
    const Step& st = ps.steps[i];
    for (int r : st.refs)
      if (r < 0 || r >= static_cast<int>(i) || !accessible(r)) return reject(i, "bad-reference");
    if (!layer.derived_rules &&
        (st.kind == StepKind::Taut || st.kind == StepKind::Gen || st.kind == StepKind::Inst ||
         st.kind == StepKind::Conv || st.kind == StepKind::Exp))
      return reject(i, "rule-not-in-layer");
    Line out;
    out.block = open;
    auto ref = [&](int k) -> const Line& { return lines[static_cast<std::size_t>(st.refs[static_cast<std::size_t>(k)])]; };
    try {
      switch (st.kind) {
        case StepKind::Axiom: {
          const Schema* s = layer.find(st.schema);
          if (!s) return reject(i, "schema-not-in-layer");
          if (!st.formula) {
            out.f = apply_substitution(*s, st.sub);
          } else if (match_schema(*s, st.formula)) {
            out.f = st.formula;
          } else {
            Schema expanded = *s;
            expanded.tmpl = expand_derived(s->tmpl);
            auto sub = match_schema(expanded, expand_derived(st.formula));
            if (!sub || !convertible(apply_substitution(*s, *sub), st.formula)) return reject(i, "not-an-instance");
            out.f = st.formula;
          }
          break;
        }
        case StepKind::MP: {
          const Formula& a = ref(0).f;
          const Formula& b = ref(1).f;
          if (b.kind() == FormulaKind::Implies && alpha_equivalent(b->subs[0], a))
            out.f = b->subs[1];
          else if (a.kind() == FormulaKind::Implies && alpha_equivalent(a->subs[0], b))
            out.f = a->subs[1];
          else
            return reject(i, "mp-mismatch");
          out.deps = merge(ref(0).deps, ref(1).deps);
          break;
        }
        case StepKind::Nec:
          if (!ref(0).deps.empty()) return reject(i, "nec-depends-on-hypothesis");
          out.f = box(ref(0).f);
          break;
        case StepKind::Hyp:
          out.f = st.formula;
          out.deps = {static_cast<int>(i)};
          open.push_back(static_cast<int>(i));
          out.block = open;
          break;
        case StepKind::Qed: {
          if (open.empty()) return reject(i, "no-open-block");
          const int h = open.back();
          out.f = implies(lines[static_cast<std::size_t>(h)].f, ref(0).f);
          out.deps = ref(0).deps;
          out.deps.erase(std::remove(out.deps.begin(), out.deps.end(), h), out.deps.end());
          open.pop_back();
          out.block = open;
          break;
        }
        case StepKind::Premise:
          if (st.premise < 0 || st.premise >= static_cast<int>(premises.size())) return reject(i, "unknown-premise");
          out.f = premises[static_cast<std::size_t>(st.premise)];
          break;
        case StepKind::Exp:
          out.f = expand_derived(ref(0).f);
          out.deps = ref(0).deps;
          break;
        case StepKind::Taut:
          if (!is_tautology(st.formula)) return reject(i, "not-a-tautology");
          out.f = st.formula;
          break;
        case StepKind::Gen: {
          for (int h : ref(0).deps)
            if (occurs_free(lines[static_cast<std::size_t>(h)].f, st.var))
              return reject(i, "gen-variable-free-in-hypothesis");
          Sort sort = conventional_sort(st.var);
          for (const auto& fv : free_variables(ref(0).f))
            if (fv.name == st.var) sort = fv.sort;
          out.f = forall(free_var(st.var, sort), ref(0).f);
          out.deps = ref(0).deps;
          break;
        }
        case StepKind::Inst: {
          const Formula& q = ref(0).f;
          if (q.kind() != FormulaKind::ForAll) return reject(i, "not-universal");
          if (q->binder_sort != st.term.sort()) return reject(i, "sort-mismatch");
          out.f = instantiate(q->subs[0], st.term);
          out.deps = ref(0).deps;
          break;
        }
        case StepKind::Conv:
          if (!convertible(ref(0).f, st.formula)) return reject(i, "conversion-mismatch");
          out.f = st.formula;
          out.deps = ref(0).deps;
          break;
      }
    } catch (const Error& e) {
      return reject(i, std::string("error: ") + e.what());
    }
    lines.push_back(std::move(out));
  }
  if (ps.steps.empty()) return reject(0, "empty-script");
  if (!open.empty()) return reject(ps.steps.size() - 1, "unclosed-block");
  v.accepted = true;
  v.conclusion = lines.back().f;
  v.step = -1;
  return v;
}

// ---- soundness harness ---------------------------------------------------------------------

std::vector<Formula> generate_formulas(const std::vector<std::string>& atoms, int depth) {
  std::vector<Formula> level;
  for (const auto& a : atoms) level.push_back(prop_atom(constant(a, Sort::proposition())));
  const std::size_t base = level.size();
  for (int d = 1; d <= depth; ++d) {
    std::vector<Formula> next(level.begin(), level.begin() + static_cast<std::ptrdiff_t>(base));
    for (const auto& f : level) next.push_back(neg(f));
    for (const auto& f : level) next.push_back(box(f));
    for (const auto& a : level)
      for (const auto& b : level) next.push_back(implies(a, b));
    level = std::move(next);
  }
  return level;
}

std::string SoundnessReport::text() const {
  std::ostringstream out;
  out << "layer " << layer << " frames " << to_string(frames) << "\n";
  out << "generators " << generators << " models " << models << " assignments " << assignments << "\n";
  for (const auto& c : counterexamples) {
    out << "counterexample " << c.schema << ": " << c.instance << " fails at w" << c.world << "\n";
    std::istringstream m(c.model);
    std::string l;
    while (std::getline(m, l)) out << "  " << l << "\n";
  }
  for (const auto& r : rule_failures) out << "rule failure " << r << "\n";
  out << (sound() ? "sound" : "unsound") << "\n";
  return out.str();
}

namespace {

struct ModelOutcome {
  std::uint64_t assignments = 0;
  std::vector<SoundnessCounterexample> counterexamples;  // first per schema
  std::vector<std::string> rule_failures;
};

ModelOutcome check_model(const Layer& layer, const KripkeInterpretation& m, const std::vector<Formula>& gens) {
  ModelOutcome out;
  Evaluator ev(m);
  const WorldMask all = m.all_worlds();
  std::map<WorldMask, std::size_t> realized;  // mask -> first generator
  for (std::size_t i = 0; i < gens.size(); ++i) realized.emplace(ev.eval(gens[i]).t, i);
  std::vector<WorldMask> props;
  for (const auto& [mask, _] : realized) props.push_back(mask);

  for (const auto& s : layer.schemas) {
    std::vector<std::vector<RelValue>> domains;
    for (const auto& meta : s.metas) {
      std::vector<RelValue> d;
      if (meta.sort.is_proposition()) {
        for (WorldMask p : props) d.push_back(p);
      } else if (meta.sort.is_individual()) {
        for (int x = 0; x < m.individuals; ++x) d.push_back(static_cast<RelValue>(x));
      } else {
        const int bits = m.tuples(meta.sort.arity()) * m.worlds;
        if (bits > 16) throw BudgetError("relation metavariable ranges over 2^" + std::to_string(bits) + " values");
        for (RelValue r = 0; r < (RelValue{1} << bits); ++r) d.push_back(r);
      }
      domains.push_back(std::move(d));
    }
    std::vector<std::size_t> pick(domains.size(), 0);
    bool reported = false;
    std::function<void(std::size_t)> visit = [&](std::size_t k) {
      if (k < domains.size()) {
        for (pick[k] = 0; pick[k] < domains[k].size(); ++pick[k]) visit(k + 1);
        return;
      }
      Assignment a;
      for (std::size_t j = 0; j < s.metas.size(); ++j) a[s.metas[j].name] = Value{s.metas[j].sort, domains[j][pick[j]]};
      ev.set_assignment(a);
      const Truth t = ev.eval(s.tmpl);
      ++out.assignments;
      if (t.t == all || reported) return;
      reported = true;
      Substitution sub;
      std::string extra;
      for (std::size_t j = 0; j < s.metas.size(); ++j) {
        const RelValue val = domains[j][pick[j]];
        if (s.metas[j].sort.is_proposition())
          sub.emplace(s.metas[j].name, gens[realized.at(static_cast<WorldMask>(val))]);
        else
          extra += "  [" + s.metas[j].name + " = " + std::to_string(val) + "]";
      }
      int w = 0;
      while ((t.t >> w) & 1u) ++w;
      out.counterexamples.push_back({s.name, print_formula(apply_substitution(s, sub)) + extra, describe(m), w});
    };
    visit(0);
  }
  ev.set_assignment({});

  // Rules: MP and deduction at each world, necessitation on valid vectors.
  for (WorldMask a : props) {
    WorldMask boxed = 0;
    for (int w = 0; w < m.worlds; ++w)
      if ((m.succ[static_cast<std::size_t>(w)] & ~a) == 0) boxed |= 1u << w;
    if (a == all && boxed != all) out.rule_failures.push_back("nec in " + describe(m));
    for (WorldMask b : props) {
      const WorldMask imp = (~a | b) & all;
      if ((a & imp & ~b) != 0) out.rule_failures.push_back("mp in " + describe(m));
    }
  }
  return out;
}

}  // namespace

SoundnessReport validate_layer(const Layer& layer, const Bounds& b, ValidateOptions opt) {
  SoundnessReport r;
  r.layer = layer.name;
  r.frames = opt.frames.value_or(layer.logic);
  auto sig = std::make_shared<Signature>(Signature::classical(r.frames));
  std::vector<std::string> atoms;
  static const char* names[] = {"p", "q", "r", "s"};
  for (int i = 0; i < opt.atoms; ++i) atoms.push_back(i < 4 ? names[i] : "p" + std::to_string(i));
  for (const auto& a : atoms) sig->add_proposition(a);
  const std::vector<Formula> gens = generate_formulas(atoms, opt.depth);
  r.generators = gens.size();

  std::vector<KripkeInterpretation> models;
  enumerate(sig, b, [&](const KripkeInterpretation& m) {
    models.push_back(m);
    return true;
  });
  r.models = models.size();

  std::vector<ModelOutcome> outcomes(models.size());
  std::vector<std::exception_ptr> errors(models.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < models.size();) {
      try {
        outcomes[i] = check_model(layer, models[i], gens);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < opt.workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::set<std::string> seen;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    r.assignments += outcomes[i].assignments;
    for (auto& c : outcomes[i].counterexamples)
      if (seen.insert(c.schema).second) r.counterexamples.push_back(std::move(c));
    for (auto& f : outcomes[i].rule_failures) r.rule_failures.push_back(std::move(f));
  }
  return r;
}

}  // namespace qml
