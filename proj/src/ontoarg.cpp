#include "qml/ontoarg.hpp"

#include <algorithm>
#include <sstream>

#include "qml/abstraction.hpp"
#include "qml/data.hpp"
#include "qml/parse.hpp"

namespace qml {

std::vector<Formula> PremiseSet::formulas() const {
  std::vector<Formula> out;
  for (const auto& p : premises) out.push_back(p.formula);
  return out;
}

std::vector<std::string> variant_names() { return {"goedel", "scott", "anderson", "fitting"}; }

namespace {

struct Spec {
  const char* label;
  const char* text;
  const char* source;
};

// Shared by all variants: positivity is closed under entailment and is
// necessary when it holds.
const Spec kA2{"A2", "forall Y Z. P(Y) & entails(Y, Z) -> P(Z)", "positive properties are closed under entailment"};
const Spec kA4{"A4", "forall Y. P(Y) -> []P(Y)", "positivity is necessary"};

PremiseSet build(const std::string& name, bool rigid, const std::vector<Spec>& specs, const std::string& godlike,
                 const std::string& header) {
  auto sig = std::make_shared<Signature>(Signature::classical(Logic::S5Total));
  sig->add_second_order("P").add_proposition("q");
  sig->rigid_properties = rigid;
  PremiseSet ps;
  ps.name = name;
  ps.sig = sig;
  ps.godlike = godlike;
  ps.header = header;
  auto make = [&](const Spec& s) { return LabeledFormula{s.label, s.text, s.source, parse_formula(s.text, *sig)}; };
  for (const auto& s : specs) ps.premises.push_back(make(s));
  const std::string main = "[]exists x. " + godlike + " x";
  ps.main_theorem = make(Spec{"T", main.c_str(), "necessary existence of a Godlike being"});
  ps.collapse.push_back(make(Spec{"MC", "q -> []q", "modal collapse instance for the contingent atom q"}));
  return ps;
}

}  // namespace

PremiseSet variant(const std::string& name) {
  if (name == "goedel")
    return build(name, false,
                 {{"A1", "forall Y. P(Y) xor P([\\x ~Y x])", "exactly one of a property and its negation is positive"},
                  kA2,
                  {"A3", "P(God)", "being Godlike is positive; God x := forall Y (P(Y) -> Y x)"},
                  kA4,
                  {"A5", "P(NE)", "necessary existence is positive; essence without the possession conjunct"}},
                 "God", "essence: ess(Y, x) := forall Z (Z x -> entails(Y, Z))");
  if (name == "scott" || name == "fitting") {
    const bool fitting = name == "fitting";
    return build(
        name, fitting,
        {{"A1a", "forall Y. P([\\x ~Y x]) -> ~P(Y)", "the negation of a positive property is not positive"},
         {"A1b", "forall Y. ~P(Y) -> P([\\x ~Y x])", "a property or its negation is positive"},
         kA2,
         {"A3", "P(God)", "being Godlike is positive"},
         kA4,
         {"A5", "P(NEs)", "necessary existence is positive; essence with the possession conjunct"}},
        "God",
        fitting ? "composition: scott premises + property quantifiers over rigid properties only + positivity "
                  "applied to rigidified extensions"
                : "essence: sess(Y, x) := Y x & ess(Y, x)");
  }
  if (name == "anderson")
    return build(name, false,
                 {{"A1", "forall Y. P(Y) -> ~P([\\x ~Y x])", "if a property is positive its negation is not"},
                  kA2,
                  {"A3", "P(God*)", "being Godlike* is positive; God* x := forall Y (P(Y) <-> []Y x)"},
                  kA4,
                  {"A5", "P(NE*)", "necessary existence* is positive; essence*: ess*(Y, x)"}},
                 "God*", "essence*: ess*(Y, x) := forall Z ([]Z x <-> entails(Y, Z))");
  throw Error("unknown variant '" + name + "'");
}

bool essence_holds(EssenceKind kind, RelValue y, int x, const KripkeInterpretation& m, int w) {
  static const char* names[] = {"ess", "sess", "ess*"};
  const Term yv = free_var("Y", Sort::relation(1));
  const Term xv = free_var("x", Sort::individual());
  const Formula f = macro(names[static_cast<int>(kind)], {yv, xv});
  const Assignment a{{"Y", {Sort::relation(1), y}}, {"x", {Sort::individual(), static_cast<RelValue>(x)}}};
  return eval(f, m, a, w);
}

bool is_rigid(RelValue y, const KripkeInterpretation& m) { return is_rigid_value(y, m.worlds, m.individuals); }

namespace {

std::string set_text(std::uint32_t mask, int elements, const char* prefix) {
  std::string s = "{";
  bool first = true;
  for (int i = 0; i < elements; ++i)
    if ((mask >> i) & 1u) {
      if (!first) s += ",";
      s += prefix + std::to_string(i);
      first = false;
    }
  return s + "}";
}

}  // namespace

UltrafilterReport check_ultrafilter(int elements, std::vector<std::uint32_t> family, std::string carrier) {
  UltrafilterReport r;
  r.carrier = std::move(carrier);
  r.elements = elements;
  std::sort(family.begin(), family.end());
  family.erase(std::unique(family.begin(), family.end()), family.end());
  r.family = family;
  const std::uint32_t top = elements >= 32 ? ~0u : (1u << elements) - 1u;
  const char* tag = r.carrier.rfind("properties", 0) == 0 ? "b" : "d";
  auto in = [&](std::uint32_t x) { return std::binary_search(family.begin(), family.end(), x); };
  auto txt = [&](std::uint32_t x) { return set_text(x, elements, tag); };

  r.proper = !in(0);
  if (!r.proper) r.witnesses.push_back("not proper: contains {}");
  r.upward_closed = true;
  for (std::uint32_t x : family) {
    for (std::uint32_t y = 0; y <= top && r.upward_closed; ++y)
      if ((x & y) == x && !in(y)) {
        r.upward_closed = false;
        r.witnesses.push_back("not upward closed: " + txt(x) + " in, " + txt(y) + " out");
      }
    if (!r.upward_closed) break;
  }
  r.meet_closed = true;
  for (std::size_t i = 0; i < family.size() && r.meet_closed; ++i)
    for (std::size_t j = i + 1; j < family.size() && r.meet_closed; ++j)
      if (!in(family[i] & family[j])) {
        r.meet_closed = false;
        r.witnesses.push_back("not meet closed: " + txt(family[i]) + " & " + txt(family[j]));
      }
  r.maximal = true;
  for (std::uint32_t x = 0; x <= top; ++x)
    if (!in(x) && !in(top & ~x)) {
      r.maximal = false;
      r.witnesses.push_back("not maximal: neither " + txt(x) + " nor its complement");
      break;
    }
  return r;
}

UltrafilterReport ultrafilter_report(const KripkeInterpretation& m, Selector sel) {
  const int pi = m.sig->index_of("P");
  if (pi < 0 || m.sig->constants[static_cast<std::size_t>(pi)].kind != ConstKind::SecondOrder)
    throw EvalError("the interpretation has no positivity constant P");
  const auto& table = m.table[static_cast<std::size_t>(pi)];
  auto positive = [&](int member) { return table[static_cast<std::size_t>(member)] == 1; };  // world 0 row
  if (sel == Selector::P) {
    if (m.sig->rigid_properties) {
      UltrafilterReport r;
      r.carrier = "properties (not defined: property quantifiers range over rigid properties only)";
      r.applicable = false;
      return r;
    }
    std::vector<std::uint32_t> family;
    for (std::size_t i = 0; i < m.relspace.size(); ++i)
      if (positive(static_cast<int>(i))) family.push_back(static_cast<std::uint32_t>(m.relspace[i]));
    return check_ultrafilter(m.individuals * m.worlds, family,
                             "properties as sets of (individual, world) bits, positive at w0");
  }
  std::vector<std::uint32_t> family;
  for (std::uint32_t e = 0; e < (1u << m.individuals); ++e) {
    const int idx = m.relspace_index(rigid_relation(m.worlds, m.individuals, e));
    if (idx >= 0 && positive(idx)) family.push_back(e);
  }
  return check_ultrafilter(m.individuals, family, "extensions whose rigid property is positive at w0");
}

std::string describe(const UltrafilterReport& r) {
  std::ostringstream out;
  out << "carrier " << r.carrier << "\n";
  if (!r.applicable) return out.str();
  const char* tag = r.carrier.rfind("properties", 0) == 0 ? "b" : "d";
  out << "family";
  for (auto x : r.family) out << " " << set_text(x, r.elements, tag);
  out << "\nproper " << r.proper << " upward " << r.upward_closed << " meet " << r.meet_closed << " maximal "
      << r.maximal << " ultrafilter " << r.is_ultrafilter() << "\n";
  for (const auto& w : r.witnesses) out << "  " << w << "\n";
  return out.str();
}

}  // namespace qml

namespace qml {

namespace {

bool world_uniform(const KripkeInterpretation& m) {
  const auto& consts = m.sig->constants;
  for (std::size_t c = 0; c < consts.size(); ++c) {
    std::size_t row = 0;
    switch (consts[c].kind) {
      case ConstKind::Individual:
        continue;
      case ConstKind::SecondOrder:
        row = m.relspace.size();
        break;
      default:
        row = static_cast<std::size_t>(m.tuples(consts[c].arity));
    }
    const auto& t = m.table[c];
    for (int w = 1; w < m.worlds; ++w)
      if (!std::equal(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(row),
                      t.begin() + static_cast<std::ptrdiff_t>(row * static_cast<std::size_t>(w))))
        return false;
  }
  return true;
}

VariantReport::Found inspect(std::string role, const KripkeInterpretation& m) {
  VariantReport::Found f{std::move(role), m, ultrafilter_report(m, Selector::P),
                         ultrafilter_report(m, Selector::Pprime), false};
  if (f.p.applicable) {
    std::vector<std::uint32_t> lifted;
    for (auto e : f.pprime.family) lifted.push_back(static_cast<std::uint32_t>(rigid_relation(m.worlds, m.individuals, e)));
    std::sort(lifted.begin(), lifted.end());
    f.p_equals_pprime = lifted == f.p.family;
  }
  return f;
}

std::string verdict_text(const SatResult& s) {
  if (s.sat()) return "sat (model with " + std::to_string(s.model->worlds) + " worlds, " +
                      std::to_string(s.model->individuals) + " individuals)";
  return "unsat up to " + to_string(s.bounds) + ", examined " + std::to_string(s.examined);
}

}  // namespace

VariantReport run_variant_suite(const std::string& name, const Bounds& b, SearchOptions opt) {
  const PremiseSet ps = variant(name);
  const std::vector<Formula> premises = ps.formulas();
  VariantReport r;
  r.name = name;
  r.sat = decide_sat(premises, ps.sig, b, opt);
  r.consistent = r.sat.sat();
  r.main_theorem = frame_requirements(premises, ps.main_theorem.formula, *ps.sig,
                                      {Logic::K, Logic::KB, Logic::S5Total}, b, opt);
  r.collapse_countermodel = find_countermodel(premises, ps.collapse.front().formula, ps.sig, b, opt);

  r.all_models_world_uniform = true;
  for_each_model(premises, ps.sig, b, [&](const KripkeInterpretation& m) {
    ++r.models_checked;
    if (!world_uniform(m)) r.all_models_world_uniform = false;
    return r.all_models_world_uniform;
  });

  if (r.sat.model) r.found.push_back(inspect("first model", *r.sat.model));
  if (r.collapse_countermodel) r.found.push_back(inspect("collapse countermodel", *r.collapse_countermodel));
  for (int w = b.max_worlds; w >= 1; --w)
    if (auto m = first_model_at(premises, ps.sig, w, b.max_individuals, b, opt)) {
      r.found.push_back(inspect("first model with " + std::to_string(b.max_individuals) + " individuals", *m));
      break;
    }

  if (name == "goedel") {
    auto ksig = std::make_shared<Signature>(*ps.sig);
    ksig->logic = Logic::K;
    const std::string rel = "proofs/goedel_refutation.proof";
    if (auto text = read_data(rel)) {
      try {
        const Verdict v = check_proof(parse_proof(*text, ksig), layer_for(Logic::K), premises);
        r.refutation_accepted = v.accepted && v.conclusion.kind() == FormulaKind::Falsum;
        r.refutation_detail = v.accepted ? "accepted under the K layer, conclusion " + print_formula(v.conclusion)
                                         : "rejected at step " + std::to_string(v.step) + ": " + v.reason;
      } catch (const Error& e) {
        r.refutation_accepted = false;
        r.refutation_detail = std::string("script error: ") + e.what();
      }
    } else {
      r.refutation_accepted = false;
      r.refutation_detail = "cannot read " + data_path(rel);
    }
  }

  std::ostringstream out;
  out << "variant " << name << "\n" << ps.header << "\n";
  if (ps.sig->rigid_properties) out << "property quantifiers range over rigid properties\n";
  out << "positivity is read at the actual world w0\n";
  out << "bounds " << to_string(b) << "\n\npremises\n";
  for (const auto& p : ps.premises) out << "  " << p.label << "  " << print_formula(p.formula) << "\n";
  out << "\nconsistency  " << verdict_text(r.sat) << "\n";
  out << "main theorem  " << print_formula(ps.main_theorem.formula) << "\n";
  for (const auto& v : r.main_theorem)
    out << "  " << to_string(v.logic) << "  " << (v.holds() ? "holds" : "countermodel") << "\n";
  out << "modal collapse  " << print_formula(ps.collapse.front().formula) << "  "
      << (r.collapse_countermodel ? "countermodel found" : "no countermodel") << "\n";
  out << "models checked " << r.models_checked << ", all world-uniform " << (r.all_models_world_uniform ? "yes" : "no")
      << "\n";
  if (r.refutation_accepted) out << "refutation  " << r.refutation_detail << "\n";
  for (const auto& f : r.found) {
    out << "\n" << f.role << "\n" << describe(f.model);
    out << "P   " << describe(f.p) << "P'  " << describe(f.pprime);
    if (f.p.applicable) out << "P = P' " << (f.p_equals_pprime ? "yes" : "no") << "\n";
  }
  r.text = out.str();
  return r;
}

}  // namespace qml
