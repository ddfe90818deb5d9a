#include <random>

#include "doctest.h"
#include "gen.hpp"
#include "qml/kripke.hpp"
#include "qml/parse.hpp"

using namespace qml;

namespace {

std::shared_ptr<const Signature> pq_sig(Logic logic) {
  auto s = std::make_shared<Signature>(Signature::classical(logic));
  s->add_proposition("p").add_proposition("q");
  return s;
}

// Every interpretation of p, q over `worlds` worlds with each accessibility
// relation allowed by the logic. Written independently of modelfind.
template <class F>
void all_pq_models(Logic logic, int worlds, F&& visit) {
  auto sig = pq_sig(logic);
  const int pairs = worlds * worlds;
  for (std::uint32_t r = 0; r < (1u << pairs); ++r) {
    KripkeInterpretation m = KripkeInterpretation::blank(sig, worlds, 1);
    for (int w = 0; w < worlds; ++w)
      for (int v = 0; v < worlds; ++v) m.set_access(w, v, (r >> (w * worlds + v)) & 1u);
    if (!frame_check(m, logic)) continue;
    for (std::uint32_t pv = 0; pv < (1u << worlds); ++pv)
      for (std::uint32_t qv = 0; qv < (1u << worlds); ++qv) {
        m.set_proposition("p", pv);
        m.set_proposition("q", qv);
        visit(m);
      }
  }
}

Formula F(const std::string& text, Logic logic = Logic::K) { return parse_formula(text, *pq_sig(logic)); }

}  // namespace

TEST_CASE("one-world model: box collapses") {
  int n = 0;
  all_pq_models(Logic::S5Total, 1, [&](const KripkeInterpretation& m) {
    CHECK(eval(F("[]p <-> p"), m, {}, 0));
    ++n;
  });
  CHECK(n == 4);
}

TEST_CASE("K-dia formula holds in every S5 model up to three worlds") {
  const Formula kdia = F("[](p -> q) -> (<>p -> <>q)");
  int models = 0;
  for (int w = 1; w <= 3; ++w)
    all_pq_models(Logic::S5Total, w, [&](const KripkeInterpretation& m) {
      ++models;
      for (int x = 0; x < m.worlds; ++x) CHECK(eval(kdia, m, {}, x));
    });
  CHECK(models == 4 + 16 + 64);
}

TEST_CASE("axiom 5 fails in a non-symmetric two-world K model") {
  const Formula ax5 = F("<>p -> []<>p");
  bool found = false;
  all_pq_models(Logic::K, 2, [&](const KripkeInterpretation& m) {
    if (frame_check(m, Logic::KB)) return;
    for (int w = 0; w < 2; ++w)
      if (!eval(ax5, m, {}, w)) found = true;
  });
  CHECK(found);
}

TEST_CASE("proposition_of basics") {
  auto sig = pq_sig(Logic::K);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int worlds = 1 + static_cast<int>(rng() % 3);
    KripkeInterpretation m = KripkeInterpretation::blank(sig, worlds, 1);
    for (int w = 0; w < worlds; ++w) m.succ[w] = rng() & m.all_worlds();
    m.set_proposition("p", rng() & m.all_worlds());
    m.set_proposition("q", rng() & m.all_worlds());
    m.actual = static_cast<int>(rng() % worlds);
    const auto top = proposition_of(F("true"), m);
    for (bool b : top) CHECK(b);
    const auto act = proposition_of(F("@p"), m);
    const bool p0 = eval(F("p"), m, {}, m.actual);
    for (bool b : act) CHECK(b == p0);
    // Box as pointwise AND over successors, unfolded by hand.
    const auto boxp = proposition_of(F("[]p"), m);
    const auto pv = proposition_of(F("p"), m);
    for (int w = 0; w < worlds; ++w) {
      bool all = true;
      for (int v = 0; v < worlds; ++v)
        if ((m.succ[w] >> v) & 1u) all = all && pv[v];
      CHECK(boxp[w] == all);
    }
  }
}

TEST_CASE("validity notions") {
  auto sig = pq_sig(Logic::S5Total);
  KripkeInterpretation m = KripkeInterpretation::blank(sig, 2, 1);
  m.set_proposition("p", 0b01);
  m.set_proposition("q", 0b11);
  CHECK(validity(F("true"), m, Validity::Necessary));
  CHECK(validity(F("p"), m, Validity::Actual));
  CHECK_FALSE(validity(F("p"), m, Validity::Necessary));
  CHECK_THROWS_AS(validity(parse_formula("F x", *sig), m, Validity::Actual), EvalError);
  testgen::Options o;
  o.relations.clear();
  o.quantifiers = false;
  o.lambdas = false;
  o.free_props_are_constants = true;
  for (unsigned seed = 0; seed < 300; ++seed) {
    testgen::Gen g(seed, o);
    const Formula f = g.formula();
    if (validity(f, m, Validity::Necessary)) CHECK(validity(f, m, Validity::Actual));
  }
}

TEST_CASE("frame_check") {
  auto sig = pq_sig(Logic::K);
  KripkeInterpretation m = KripkeInterpretation::blank(sig, 2, 1);
  m.set_total_access();
  CHECK(frame_check(m, Logic::S5Total));
  m.succ = {0b10, 0b00};
  CHECK_FALSE(frame_check(m, Logic::KB));
  CHECK(frame_check(m, Logic::K));
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    KripkeInterpretation s = KripkeInterpretation::blank(sig, 3, 1);
    for (int w = 0; w < 3; ++w)
      for (int v = w; v < 3; ++v)
        if (rng() & 1u) {
          s.set_access(w, v);
          s.set_access(v, w);
        }
    bool symmetric = true;
    for (int w = 0; w < 3; ++w)
      for (int v = 0; v < 3; ++v)
        if (((s.succ[w] >> v) & 1u) != ((s.succ[v] >> w) & 1u)) symmetric = false;
    CHECK(symmetric);
    CHECK(frame_check(s, Logic::KB));
  }
}

TEST_CASE("frame hierarchy and necessitation are sound on random formulas") {
  testgen::Options o;
  o.relations.clear();
  o.quantifiers = false;
  o.lambdas = false;
  o.actually = false;
  o.depth = 3;
  o.free_props_are_constants = true;
  for (unsigned seed = 0; seed < 150; ++seed) {
    testgen::Gen g(seed, o);
    const Formula f = g.formula();
    bool k_valid = true;
    for (int w = 1; w <= 2; ++w)
      all_pq_models(Logic::K, w, [&](const KripkeInterpretation& m) {
        const bool valid = validity(f, m, Validity::Necessary);
        if (valid) CHECK(validity(box(f), m, Validity::Necessary));
        k_valid = k_valid && valid;
      });
    if (!k_valid) continue;
    for (Logic l : {Logic::KB, Logic::S5Total})
      for (int w = 1; w <= 2; ++w)
        all_pq_models(l, w, [&](const KripkeInterpretation& m) { CHECK(validity(f, m, Validity::Necessary)); });
  }
}

TEST_CASE("deduction is sound at a fixed world") {
  const Formula a = F("[]p"), b = F("p | q");
  all_pq_models(Logic::K, 2, [&](const KripkeInterpretation& m) {
    for (int w = 0; w < 2; ++w)
      if (!eval(a, m, {}, w) || eval(b, m, {}, w)) CHECK(eval(implies(a, b), m, {}, w));
  });
}

TEST_CASE("substitution lemma on random first-order formulas") {
  auto sig = std::make_shared<Signature>(Signature::classical(Logic::K));
  sig->add_proposition("p").add_proposition("q").add_relation("F", 1).add_individual("a");
  testgen::Options o;
  o.individuals = {"x", "a"};
  o.free_props_are_constants = true;
  std::mt19937 rng(11);
  for (unsigned seed = 0; seed < 300; ++seed) {
    testgen::Gen g(seed, o);
    Formula f;
    try {
      f = parse_formula(print_formula(g.formula()), *sig);
    } catch (const Error&) {
      continue;
    }
    KripkeInterpretation m = KripkeInterpretation::blank(sig, 2, 2);
    for (int w = 0; w < 2; ++w) m.succ[w] = rng() & 3u;
    m.set_proposition("p", rng() & 3u);
    m.set_proposition("q", rng() & 3u);
    m.set_relation("F", rng() & 0xFu);
    const int a = static_cast<int>(rng() & 1u);
    m.set_individual("a", a);
    const Formula s = substitute(f, free_var("x", Sort::individual()), constant("a", Sort::individual()));
    const Assignment asg{{"x", {Sort::individual(), static_cast<RelValue>(a)}}};
    CHECK(proposition_mask(s, m, asg) == proposition_mask(f, m, asg));
  }
}

TEST_CASE("lambda exemplification and relation quantifiers") {
  auto sig = std::make_shared<Signature>(Signature::classical(Logic::S5Total));
  sig->add_relation("F", 1).add_relation("R", 2).add_individual("a").add_individual("b");
  KripkeInterpretation m = KripkeInterpretation::blank(sig, 2, 2);
  m.set_relation("F", 0b0110);    // w0: {d1}, w1: {d0}
  m.set_relation("R", 0x00F2);    // w0: {(d1,d0)}, w1: everything
  m.set_individual("a", 0);
  m.set_individual("b", 1);
  auto f = [&](const char* t) { return parse_formula(t, *sig); };
  CHECK(proposition_mask(f("[\\x ~F x] a"), m) == 0b01);
  CHECK(proposition_mask(f("[\\x y. R y x] a b"), m) == 0b11);
  CHECK(proposition_mask(f("R a b"), m) == 0b10);
  CHECK(proposition_mask(f("exists X. forall x. X x <-> ~F x"), m) == 0b11);
  CHECK(proposition_mask(f("forall X. X a -> []X a"), m) == 0b00);
  CHECK(proposition_mask(f("a = b"), m) == 0);
  CHECK_THROWS_AS(proposition_mask(f("F (the x: F x)"), m), EvalError);
  KripkeInterpretation big = KripkeInterpretation::blank(sig, 3, 2);
  big.set_relation("F", 0);
  big.set_relation("R", 0);
  big.set_individual("a", 0);
  big.set_individual("b", 0);
  CHECK_THROWS_AS(proposition_mask(f("forall X. X a"), big), BudgetError);
}

TEST_CASE("partial interpretations evaluate three-valued") {
  auto sig = pq_sig(Logic::S5Total);
  KripkeInterpretation m = KripkeInterpretation::blank(sig, 2, 1);
  m.set_proposition("p", 0b11);
  Evaluator ev(m);
  CHECK(ev.eval(F("p | q", Logic::S5Total)) == Truth{0b11, 0});
  CHECK(ev.eval(F("p & q", Logic::S5Total)) == Truth{0, 0});
  CHECK(ev.eval(F("~p & q", Logic::S5Total)) == Truth{0, 0b11});
  CHECK(ev.eval(F("[]q", Logic::S5Total)) == Truth{0, 0});
}
