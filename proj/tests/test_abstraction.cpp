#include <chrono>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "qml/abstraction.hpp"
#include "qml/ontoarg.hpp"
#include "qml/parse.hpp"

using namespace qml;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::shared_ptr<Signature> pq(Logic l = Logic::K) {
  auto s = std::make_shared<Signature>(Signature::classical(l));
  s->add_proposition("p").add_proposition("q");
  return s;
}

Verdict run(const std::string& script, Logic layer, std::vector<Formula> premises = {},
            std::shared_ptr<Signature> sig = nullptr) {
  if (!sig) sig = pq();
  return check_proof(parse_proof(script, sig), layer_for(layer), premises);
}

}  // namespace

TEST_CASE("match_schema") {
  const Signature s = Signature::classical();
  const Schema t = schema("ax_T");
  auto m = match_schema(t, parse_formula("[](p & q) -> (p & q)", s));
  REQUIRE(m);
  REQUIRE(m->size() == 1);
  CHECK(alpha_equivalent(std::get<Formula>(m->at("p")), parse_formula("p & q", s)));
  CHECK_FALSE(match_schema(t, parse_formula("[]p -> q", s)));

  // Apply-then-match round trip on random instances of ax_K.
  const Schema k = schema("K");
  testgen::Options o;
  o.depth = 2;
  for (unsigned seed = 0; seed < 300; ++seed) {
    testgen::Gen g(seed, o);
    Substitution sub{{"p", g.formula()}, {"q", g.formula()}};
    const Formula inst = apply_substitution(k, sub);
    auto back = match_schema(k, inst);
    REQUIRE(back);
    CHECK(alpha_equivalent(apply_substitution(k, *back), inst));
  }

  // Term metavariables.
  auto eq = match_schema(schema("eqsub"), parse_formula("a = b -> ([\\x ~G x] a -> [\\x ~G x] b)", s));
  REQUIRE(eq);
  CHECK(print_term(std::get<Term>(eq->at("F"))) == "[\\x ~G x]");
}

TEST_CASE("substitution is simultaneous and keeps instance variables") {
  const Signature s = Signature::classical();
  const Schema sub = schema("eqsub");
  const Formula f = apply_substitution(
      sub, {{"x", parse_term("y", s)}, {"y", parse_term("x", s)}, {"F", parse_term("[\\z R:2 z x]", s)}});
  CHECK(print_formula(f) == "y = x -> [\\z R:2 z x]y -> [\\z R:2 z x]x");
}

TEST_CASE("shipped K-dia script") {
  const Verdict v = run(slurp(QML_DATA_DIR "/proofs/kdia.proof"), Logic::K);
  REQUIRE(v.accepted);
  CHECK(alpha_equivalent(v.conclusion, parse_formula("[](p -> q) -> (<>p -> <>q)", *pq())));
}

TEST_CASE("check_proof rejections") {
  CHECK(run("ax T {p := p}", Logic::K).reason == "schema-not-in-layer");
  CHECK(run("ax T {p := p}", Logic::S5Total).accepted);
  const Verdict mm = run("a: ax pl_1 {p := p; q := q}\nb: ax pl_1 {p := q; q := p}\nmp a b", Logic::K);
  CHECK_FALSE(mm.accepted);
  CHECK(mm.step == 3);
  CHECK(mm.reason == "mp-mismatch");
  CHECK(run("hyp p\nnec 1\nqed 2", Logic::K).reason == "nec-depends-on-hypothesis");
  CHECK(run("hyp p", Logic::K).reason == "unclosed-block");
  CHECK(run("taut p -> q", Logic::K).reason == "not-a-tautology");
  CHECK(run("ax K [](p -> q) -> []p -> q", Logic::K).reason == "not-an-instance");
  CHECK(run("hyp F x\ngen 1 x\nqed 2", Logic::K).reason == "gen-variable-free-in-hypothesis");
  CHECK(run("premise 2", Logic::K, {verum()}).reason == "unknown-premise");
  // Lines inside a closed block are out of reach.
  CHECK(run("h: hyp p\nqed h\nmp h 2", Logic::K).reason == "bad-reference");
  CHECK_THROWS_AS(parse_proof("mp 1 2", pq()), ParseError);
  CHECK_THROWS_AS(parse_proof("frobnicate 1", pq()), ParseError);
  try {
    parse_proof("ax pl_1 {p := p}\nhyp p ->", pq());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("axiom instances may be given modulo definitions") {
  CHECK(run("ax 5 ~[]~p -> []~[]~p", Logic::S5Total).accepted);
  CHECK(run("ax 5 <>p -> []<>p", Logic::S5Total).accepted);
  CHECK(run("ax 5 {p := q & p}", Logic::S5Total).accepted);
}

TEST_CASE("checker ignores the semantics") {
  // The verdict depends only on the script, the layer and the premises.
  auto s = pq();
  const std::string script = "h: hyp p\nqed h\nn: nec 2\n";
  const Verdict a = run(script, Logic::K, {}, s);
  s->add_proposition("r");
  const Verdict b = run(script, Logic::K, {}, s);
  CHECK(a.accepted == b.accepted);
  CHECK(alpha_equivalent(a.conclusion, b.conclusion));
}

TEST_CASE("deduction meta-rule admissibility") {
  // psi derived inside a block from phi gives phi -> psi outside it.
  const Verdict inner = run("hyp []p\nax K {p := p; q := p | q}\nnec 2\n", Logic::K);
  CHECK(inner.reason == "unclosed-block");
  const std::string body = "h: hyp [](p -> q)\na: ax K {p := p; q := q}\nb: mp h a\n";
  const Verdict closed = run(body + "qed b", Logic::K);
  REQUIRE(closed.accepted);
  CHECK(print_formula(closed.conclusion) == "[](p -> q) -> []p -> []q");
}

TEST_CASE("accepted conclusions have no bounded countermodel") {
  auto s = pq(Logic::K);
  const Verdict v = run(slurp(QML_DATA_DIR "/proofs/kdia.proof"), Logic::K, {}, s);
  REQUIRE(v.accepted);
  for (Logic l : {Logic::K, Logic::KB, Logic::S5Total}) {
    auto sl = std::make_shared<Signature>(*s);
    sl->logic = l;
    CHECK_FALSE(find_countermodel({}, v.conclusion, sl, Bounds{3, 1, 16, 2}));
  }
  const Verdict t = run("ax T {p := p -> q}", Logic::S5Total);
  REQUIRE(t.accepted);
  auto s5 = pq(Logic::S5Total);
  CHECK_FALSE(find_countermodel({}, t.conclusion, s5, Bounds{3, 1, 16, 2}));
}

TEST_CASE("goedel refutation script under the K layer") {
  const PremiseSet g = variant("goedel");
  auto sig = std::make_shared<Signature>(*g.sig);
  sig->logic = Logic::K;
  const Verdict v = check_proof(parse_proof(slurp(QML_DATA_DIR "/proofs/goedel_refutation.proof"), sig),
                                layer_for(Logic::K), g.formulas());
  REQUIRE(v.accepted);
  CHECK(v.conclusion.kind() == FormulaKind::Falsum);
  // Without A5 the final step is no longer licensed.
  std::vector<Formula> missing = g.formulas();
  missing[4] = verum();
  CHECK_FALSE(check_proof(parse_proof(slurp(QML_DATA_DIR "/proofs/goedel_refutation.proof"), sig),
                          layer_for(Logic::K), missing)
                  .accepted);
}

TEST_CASE("tautology checker") {
  const Signature s = Signature::classical();
  CHECK(is_tautology(parse_formula("p | ~p", s)));
  CHECK(is_tautology(parse_formula("([]p -> q) -> (~q -> ~[]p)", s)));
  CHECK(is_tautology(parse_formula("(p xor q) <-> ~(p <-> q)", s)));
  CHECK_FALSE(is_tautology(parse_formula("[]p -> p", s)));
  CHECK(is_tautology(parse_formula("(forall x. F x) -> (forall y. F y)", s)));
}

TEST_CASE("generated formulas") {
  const auto g = generate_formulas({"p", "q"}, 3);
  CHECK(g.size() == 15130);
  CHECK(generate_formulas({"p", "q"}, 1).size() == 10);
}

TEST_CASE("validate_layer") {
  const auto start = std::chrono::steady_clock::now();
  const SoundnessReport s5 = validate_layer(layer_for(Logic::S5Total), Bounds{3, 1, 16, 2});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(s5.sound());
  CHECK(s5.models == 84);
  CHECK(secs < 10.0);

  Layer bogus = layer_for(Logic::S5Total);
  bogus.schemas.push_back(make_schema("bogus", "p -> []p"));
  const SoundnessReport bad = validate_layer(bogus, Bounds{2, 1, 16, 2}, {2, 2});
  REQUIRE(bad.counterexamples.size() == 1);
  CHECK(bad.counterexamples[0].schema == "bogus");
  CHECK(bad.counterexamples[0].model.rfind("worlds 2", 0) == 0);

  ValidateOptions kb;
  kb.frames = Logic::KB;
  kb.depth = 2;
  CHECK(validate_layer(layer_for(Logic::K), Bounds{3, 1, 16, 2}, kb).sound());
  ValidateOptions on_k;
  on_k.frames = Logic::K;
  on_k.depth = 2;
  CHECK_FALSE(validate_layer(layer_for(Logic::S5Total), Bounds{2, 1, 16, 2}, on_k).sound());
}

TEST_CASE("validate_layer is independent of worker count") {
  ValidateOptions one, four;
  one.depth = four.depth = 2;
  four.workers = 4;
  Layer bogus = layer_for(Logic::KB);
  bogus.schemas.push_back(make_schema("bogus", "<>p -> []<>p"));
  CHECK(validate_layer(bogus, Bounds{3, 1, 16, 2}, one).text() ==
        validate_layer(bogus, Bounds{3, 1, 16, 2}, four).text());
}
