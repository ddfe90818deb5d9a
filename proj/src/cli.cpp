#include "qml/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "qml/abstraction.hpp"
#include "qml/ontoarg.hpp"
#include "qml/parse.hpp"
#include "qml/problem.hpp"

namespace qml {

namespace {

const char* yesno(bool b) { return b ? "yes" : "no"; }

struct Settings {
  std::string format = "text";
  int workers = 1;
  bool tsv() const { return format == "tsv"; }
};

int compare(Expectation got, Expectation want) { return got == want ? kAsExpected : kContradicts; }

int run_check(const std::string& file, const Settings& s, std::ostream& out) {
  const Problem p = load_problem(file);
  if (p.conjectures.empty()) throw ParseError("no conjecture to check", 0, 0);
  const Expectation want = p.check_expectation.value_or(Expectation::Valid);
  const auto premises = p.premise_formulas();
  Expectation verdict = Expectation::Valid;
  if (!s.tsv()) out << "problem " << p.name << "\nlogic " << to_string(p.sig->logic) << "\nbounds " << to_string(p.bounds) << "\n";
  for (std::size_t i = 0; i < p.conjectures.size(); ++i) {
    const auto& c = p.conjectures[i];
    const auto cm = find_countermodel(premises, c.formula, p.sig, p.bounds, {s.workers});
    if (cm) verdict = Expectation::Countermodel;
    const char* v = cm ? "countermodel" : "valid";
    if (s.tsv()) {
      out << "conjecture\t" << i + 1 << "\t" << print_formula(c.formula) << "\t" << v << "\n";
    } else {
      out << "conjecture " << i + 1 << ": " << print_formula(c.formula) << "\n  " << (cm ? "countermodel" : "no countermodel within bounds") << "\n";
      if (cm) out << describe(*cm);
    }
  }
  if (s.tsv())
    out << "verdict\t" << to_string(verdict) << "\texpected\t" << to_string(want) << "\n";
  else
    out << "verdict " << to_string(verdict) << " (expected " << to_string(want) << ")\n";
  return compare(verdict, want);
}

int run_sat(const std::string& file, const Settings& s, std::ostream& out) {
  const Problem p = load_problem(file);
  const Expectation want = p.sat_expectation.value_or(Expectation::Sat);
  const SatResult r = decide_sat(p.premise_formulas(), p.sig, p.bounds, {s.workers});
  const Expectation verdict = r.sat() ? Expectation::Sat : Expectation::Unsat;
  if (s.tsv()) {
    out << "verdict\t" << to_string(verdict) << "\texamined\t" << r.examined << "\texpected\t" << to_string(want) << "\n";
  } else {
    out << "problem " << p.name << "\nlogic " << to_string(p.sig->logic) << "\nbounds " << to_string(p.bounds) << "\n";
    if (r.sat())
      out << "model found\n" << describe(*r.model);
    else
      out << "unsat up to bounds, " << r.examined << " interpretations examined\n";
    out << "verdict " << to_string(verdict) << " (expected " << to_string(want) << ")\n";
  }
  return compare(verdict, want);
}

int run_prove(const std::string& file, const std::string& script, const Settings& s, std::ostream& out) {
  const Problem p = load_problem(file);
  const ProofScript ps = parse_proof(read_file(script), p.sig);
  const Verdict v = check_proof(ps, layer_for(p.sig->logic), p.premise_formulas());
  bool matches = v.accepted;
  std::string note;
  const bool refutes = v.accepted && convertible(v.conclusion, falsum());
  if (refutes && p.sat_expectation) {
    matches = *p.sat_expectation == Expectation::Unsat;
    if (!matches) note = "premises refuted but expected sat";
  } else if (v.accepted && !p.conjectures.empty()) {
    matches = std::any_of(p.conjectures.begin(), p.conjectures.end(),
                          [&](const ProblemFormula& c) { return convertible(v.conclusion, c.formula); });
    if (!matches) note = "conclusion is none of the conjectures";
  }
  if (s.tsv()) {
    if (v.accepted)
      out << "accepted\t" << print_formula(v.conclusion) << "\n";
    else
      out << "rejected\t" << v.step << "\t" << v.reason << "\n";
    if (!note.empty()) out << "mismatch\t" << note << "\n";
  } else {
    if (v.accepted)
      out << "Accepted " << print_formula(v.conclusion) << "\n";
    else
      out << "Rejected at step " << v.step << ": " << v.reason << "\n";
    if (!note.empty()) out << note << "\n";
  }
  return matches ? kAsExpected : kContradicts;
}

// What the suite is expected to find for each variant.
bool as_expected(const VariantReport& r) {
  if (r.name == "goedel") return !r.consistent && r.refutation_accepted.value_or(false);
  if (r.name == "scott") return r.consistent && !r.collapse_countermodel && r.all_models_world_uniform;
  return r.consistent && r.collapse_countermodel.has_value();
}

void corpus_tsv(const VariantReport& r, std::ostream& out) {
  out << "variant\t" << r.name << "\n";
  out << "consistent\t" << yesno(r.consistent) << "\t" << r.sat.examined << "\n";
  for (const auto& f : r.main_theorem)
    out << "main_theorem\t" << to_string(f.logic) << "\t" << (f.holds() ? "holds" : "countermodel") << "\n";
  out << "collapse\t" << (r.collapse_countermodel ? "countermodel" : "none") << "\n";
  out << "world_uniform\t" << yesno(r.all_models_world_uniform) << "\t" << r.models_checked << "\n";
  for (const auto& f : r.found)
    out << "found\t" << f.role << "\t" << (f.p.applicable ? yesno(f.p.is_ultrafilter()) : "n/a") << "\t"
        << yesno(f.pprime.is_ultrafilter()) << "\t" << yesno(f.p_equals_pprime) << "\n";
  if (r.refutation_accepted) out << "refutation\t" << (*r.refutation_accepted ? "accepted" : "rejected") << "\n";
}

int run_corpus(const std::string& which, const Bounds& b, const std::string& dir, const Settings& s,
               std::ostream& out) {
  std::vector<std::string> names;
  if (which == "all") {
    names = variant_names();
  } else {
    const auto all = variant_names();
    if (std::find(all.begin(), all.end(), which) == all.end()) throw ParseError("unknown variant '" + which + "'", 0, 0);
    names.push_back(which);
  }
  bool ok = true;
  for (const auto& n : names) {
    const VariantReport r = run_variant_suite(n, b, {s.workers});
    ok = ok && as_expected(r);
    std::ostringstream text;
    if (s.tsv())
      corpus_tsv(r, text);
    else
      text << r.text;
    if (dir.empty()) {
      out << text.str();
    } else {
      std::filesystem::create_directories(dir);
      const std::string path = (std::filesystem::path(dir) / (n + (s.tsv() ? ".tsv" : ".txt"))).string();
      std::ofstream f(path, std::ios::binary);
      if (!(f << text.str())) throw Error("cannot write '" + path + "'");
      out << n << "\t" << path << "\n";
    }
  }
  return ok ? kAsExpected : kContradicts;
}

int run_aot(const std::string& config, bool census, bool theory, int worlds, const Settings& s, std::ostream& out) {
  AczelConfig c;
  if (!config.empty()) c = load_aot_config(config);
  if (worlds > 0) c.worlds = worlds;
  if (!census && !theory) census = theory = true;
  const AczelModel m = build_aczel(c);
  bool ok = true;
  if (census) {
    const MinimalModelReport r = minimal_model_report(m);
    ok = ok && r.contingency && r.all_named_distinct && r.two_individuals_ok;
    if (s.tsv()) {
      out << "worlds\t" << r.worlds << "\npropositions\t" << r.propositions << "\nrelations\t" << r.relations
          << "\ncontingency\t" << yesno(r.contingency) << "\npairs\t" << r.witnesses.size() << "\t" << r.pairs
          << "\nhistorical_distinct\t" << yesno(r.historical_distinct) << "\ncovers_relspace\t"
          << yesno(r.covers_relspace) << "\ntwo_individuals\t" << yesno(r.two_individuals_ok) << "\n";
    } else {
      out << r.text();
    }
  }
  if (theory) {
    const WorldTheoryReport r = world_theory_report(m);
    ok = ok && r.bijective && r.fundamental_theorem;
    if (s.tsv())
      out << "syntactic_worlds\t" << r.worlds.size() << "\nbijective\t" << yesno(r.bijective)
          << "\nfundamental_theorem\t" << yesno(r.fundamental_theorem) << "\n";
    else
      out << (census ? "\n" : "") << r.text();
  }
  return ok ? kAsExpected : kContradicts;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-model and proof-script checks for quantified modal logic", "qml"};
  app.require_subcommand(1);
  app.fallthrough();
  Settings s;
  app.add_option("--format", s.format, "Report format")->check(CLI::IsMember({"text", "tsv"}));
  app.add_option("--workers", s.workers, "Search threads")->check(CLI::Range(1, 256));

  std::string file, script, variant_name = "all", out_dir, config;
  Bounds corpus_bounds{2, 2, 16, 2};
  bool census = false, theory = false;
  int aot_worlds = 0;

  auto* check = app.add_subcommand("check", "Search countermodels to the conjectures");
  check->add_option("file", file)->required();
  auto* sat = app.add_subcommand("sat", "Decide satisfiability of the premises within bounds");
  sat->add_option("file", file)->required();
  auto* prove = app.add_subcommand("prove", "Check a proof script");
  prove->add_option("file", file)->required();
  prove->add_option("script", script)->required();
  auto* corpus = app.add_subcommand("corpus", "Run the verification suite of an argument variant");
  corpus->add_option("variant", variant_name, "goedel, scott, anderson, fitting or all");
  corpus->add_option("--out", out_dir, "Write one report file per variant here");
  corpus->add_option("--worlds", corpus_bounds.max_worlds)->check(CLI::Range(1, 4));
  corpus->add_option("--individuals", corpus_bounds.max_individuals)->check(CLI::Range(1, 4));
  auto* aot = app.add_subcommand("aot", "Aczel model reports");
  aot->add_option("config", config, "Model config file");
  aot->add_flag("--census", census, "Relation census of the model");
  aot->add_flag("--theory", theory, "World theory report");
  aot->add_option("--worlds", aot_worlds, "Override the number of worlds")->check(CLI::Range(1, 4));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kAsExpected;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*check) return run_check(file, s, out);
    if (*sat) return run_sat(file, s, out);
    if (*prove) return run_prove(file, script, s, out);
    if (*corpus) return run_corpus(variant_name, corpus_bounds, out_dir, s, out);
    if (*aot) return run_aot(config, census, theory, aot_worlds, s, out);
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace qml
