#include <chrono>

#include "aot_gen.hpp"
#include "doctest.h"
#include "qml/aot.hpp"
#include "qml/parse.hpp"

using namespace qml;

namespace {

AczelModel minimal() {
  AczelConfig c;
  c.constants["a"] = AotValue::ordinary(0);
  return build_aczel(c);
}

Formula F(const AczelModel& m, const std::string& text) { return parse_formula(text, *m.sig); }
Term T(const AczelModel& m, const std::string& text) { return parse_term(text, *m.sig); }

const char* const kParadoxText = "[\\x exists F. x[F] & ~F x]";

}  // namespace

TEST_CASE("aczel construction") {
  for (int o = 1; o <= 2; ++o)
    for (int s = 1; s <= 2; ++s)
      for (int w = 1; w <= 2; ++w) {
        AczelConfig c;
        c.ordinary = o;
        c.special = s;
        c.worlds = w;
        if ((o + s) * w > 4) {
          CHECK_THROWS_AS(build_aczel(c), BudgetError);
          continue;
        }
        const AczelModel m = build_aczel(c);
        std::uint32_t closed = 1;
        for (int i = 0; i < (o + s) * w; ++i) closed *= 2;
        CHECK(m.relations == closed);
        CHECK(m.propositions() == (1u << w));
        // Pigeonhole: more abstract objects than special urelements.
        CHECK(m.abstract_objects() > static_cast<std::uint64_t>(m.special));
      }
  AczelConfig three;
  three.worlds = 3;
  CHECK_THROWS_AS(build_aczel(three), BudgetError);
  AczelConfig bad;
  bad.e_bang = 0b0010;  // special urelement at w0
  CHECK_THROWS_AS(build_aczel(bad), Error);

  const AczelModel m = minimal();
  CHECK(m.relation_text(m.e_bang) == "{u0@w1}");
  CHECK(m.q0 == 0b10);
  CHECK(satisfies_contingency(m));
  AczelConfig one;
  one.worlds = 1;
  CHECK_FALSE(satisfies_contingency(build_aczel(one)));
}

TEST_CASE("sigma is not injective") {
  const AczelModel m = minimal();
  CHECK(m.sigma(0) == m.sigma(1));
  AczelConfig c;
  c.ordinary = 1;
  c.special = 2;
  c.worlds = 1;
  c.sigma = SigmaRule::Parity;
  const AczelModel p = build_aczel(c);
  CHECK(p.sigma(0b1) != p.sigma(0b11));
  CHECK(p.sigma(0b11) == p.sigma(0));
}

TEST_CASE("axiom instances in the minimal model") {
  const AczelModel m = minimal();
  const std::uint32_t all = m.all_worlds();
  CHECK(eval_aot_mask(F(m, "forall x. O!x -> [](~exists F. x[F])"), m) == all);
  CHECK(eval_aot_mask(F(m, "forall x F. <>x[F] -> []x[F]"), m) == all);
  CHECK(eval_aot_mask(F(m, "exists x. A!x & forall F. (x[F] <-> F = E!)"), m) == all);
  CHECK(eval_aot_mask(F(m, "forall x. O!x | A!x"), m) == all);
  CHECK(eval_aot_mask(F(m, "exists x. A!x & forall F. ~x[F]"), m) == all);
}

TEST_CASE("encoding and exemplification invariants") {
  const AczelModel m = minimal();
  const Formula enc = F(m, "x[G]");
  const Formula ex = F(m, "G x");
  std::mt19937 rng(7);
  for (int i = 0; i < 400; ++i) {
    const auto e = static_cast<std::uint32_t>(rng() % m.abstract_objects());
    const auto g = static_cast<std::uint32_t>(rng() % m.relations);
    const AotAssignment a{{"x", AotValue::abstract(e)}, {"G", AotValue::relation(g)}};
    const std::uint32_t em = eval_aot_mask(enc, m, a);
    CHECK((em == 0 || em == m.all_worlds()));  // rigid
    CHECK((em != 0) == static_cast<bool>((e >> g) & 1u));
    // Exemplification goes through the urelement.
    const int u = m.urelement(AotValue::abstract(e));
    for (int w = 0; w < m.worlds; ++w) CHECK(eval_aot(ex, m, a, w) == m.exemplifies(g, u, w));
  }
  for (std::uint32_t g = 0; g < m.relations; ++g)
    for (int w = 0; w < m.worlds; ++w) {
      const AotAssignment a{{"x", AotValue::ordinary(0)}, {"G", AotValue::relation(g)}};
      CHECK_FALSE(eval_aot(enc, m, a, w));
      CHECK(eval_aot(ex, m, a, w) == m.exemplifies(g, 0, w));
    }
}

TEST_CASE("sigma classes decide exemplification indiscernibility") {
  AczelConfig c;
  c.ordinary = 1;
  c.special = 2;
  c.worlds = 1;
  c.sigma = SigmaRule::Parity;
  const AczelModel m = build_aczel(c);
  const Formula indisc = F(m, "[](forall F. F x <-> F y)");
  std::vector<AotValue> inds{AotValue::ordinary(0)};
  for (std::uint32_t e = 0; e < 40; ++e) inds.push_back(AotValue::abstract(e * 5 % 256));
  for (const auto& x : inds)
    for (const auto& y : inds)
      CHECK(eval_aot(indisc, m, {{"x", x}, {"y", y}}, 0) == (m.urelement(x) == m.urelement(y)));
}

TEST_CASE("free logic") {
  const AczelModel m = minimal();
  const Term paradox = T(m, kParadoxText);
  CHECK_FALSE(denote(paradox, m).denotes);
  CHECK(denote(T(m, "[\\x E!x]"), m) == Denotation::of(AotValue::relation(m.e_bang)));
  CHECK(denote(T(m, "O!"), m) == Denotation::of(AotValue::relation(0b0101)));
  const Denotation d = denote(T(m, "(the x: A!x & forall F. (x[F] <-> F = E!))"), m);
  REQUIRE(d.denotes);
  CHECK(d.value == AotValue::abstract(1u << m.e_bang));
  CHECK_FALSE(denote(T(m, "(the x: A!x)"), m).denotes);
  CHECK(denote(T(m, "(the x: O!x)"), m) == Denotation::of(AotValue::ordinary(0)));

  // Atoms with a non-denoting term are false everywhere.
  for (const AotValue& y : {AotValue::ordinary(0), AotValue::abstract(0), AotValue::abstract(0xFFFF)}) {
    CHECK(eval_aot_mask(F(m, std::string(kParadoxText) + " y"), m, {{"y", y}}) == 0);
    CHECK(eval_aot_mask(F(m, std::string("y[") + kParadoxText + "]"), m, {{"y", y}}) == 0);
    CHECK(eval_aot_mask(F(m, std::string("~") + kParadoxText + " y"), m, {{"y", y}}) == m.all_worlds());
  }

  CHECK(exists_term(T(m, "a"), m));
  CHECK_FALSE(exists_term(paradox, m));
  CHECK_FALSE(eval_aot(F(m, std::string("exists G. G = ") + kParadoxText), m, {}, 0));
  CHECK(exists_term(T(m, "E!"), m));
  CHECK(exists_term(T(m, "q0"), m));
}

TEST_CASE("defined identity") {
  const AczelModel m = minimal();
  const Term paradox = T(m, kParadoxText);
  CHECK_FALSE(identity_holds(paradox, paradox, m));
  for (const char* t : {"a", "E!", "O!", "[\\x E!x -> E!x]", "q0", "(the x: O!x)"})
    CHECK(identity_holds(T(m, t), T(m, t), m));
  CHECK_FALSE(identity_holds(T(m, "O!"), T(m, "A!"), m));
  CHECK_THROWS_AS(identity_holds(T(m, "a"), T(m, "E!"), m), SortError);
  // Two abstract objects on the same special urelement: indiscernible by
  // exemplification, yet distinct.
  const AotAssignment a{{"x", AotValue::abstract(0)}, {"y", AotValue::abstract(1u << m.e_bang)}};
  REQUIRE(m.urelement(a.at("x")) == m.urelement(a.at("y")));
  CHECK(eval_aot(F(m, "[](forall F. F x <-> F y)"), m, a, 0));
  CHECK_FALSE(identity_holds(T(m, "x"), T(m, "y"), m, a));
  // The same object under two descriptions.
  CHECK(identity_holds(T(m, "(the x: A!x & forall F. (x[F] <-> F = E!))"), T(m, "y"), m, a));
}

TEST_CASE("comprehension witnesses") {
  const AczelModel m = minimal();
  for (const char* cond : {"F = E!", "F a", "<>F a", "F = E! | F = O!", "~(F = A!)", "exists y. F y & A!y", "false"}) {
    const Formula phi = F(m, cond);
    std::uint32_t encoded = 0;
    for (std::uint32_t g = 0; g < m.relations; ++g)
      if (eval_aot(phi, m, {{"F", AotValue::relation(g)}}, 0)) encoded |= 1u << g;
    const Formula claim = F(m, std::string("A!x & forall F. (x[F] <-> ") + cond + ")");
    CHECK(eval_aot(claim, m, {{"x", AotValue::abstract(encoded)}}, 0));
  }
}

TEST_CASE("existence matches denotation on generated terms") {
  const AczelModel m = minimal();
  testgen::AotTermGen gen(2024);
  int denoting = 0, failing = 0;
  for (int i = 0; i < 100; ++i) {
    const std::string text = gen.term();
    CAPTURE(text);
    const Term t = T(m, text);
    const bool d = denote(t, m).denotes;
    CHECK(exists_term(t, m) == d);
    (d ? denoting : failing)++;
  }
  CHECK(denoting > 0);
  CHECK(failing > 0);
}

TEST_CASE("scan budget") {
  const AczelModel m = minimal();
  CHECK_THROWS_AS(eval_aot(F(m, "forall x. exists y. forall F. (x[F] <-> y[F])"), m, {}, 0), BudgetError);
  AczelConfig c;
  c.constants["a"] = AotValue::ordinary(0);
  c.full_scan_nesting = 0;
  CHECK_THROWS_AS(denote(T(build_aczel(c), kParadoxText), build_aczel(c)), BudgetError);
}

TEST_CASE("minimal model census") {
  const AczelModel m = minimal();
  const auto start = std::chrono::steady_clock::now();
  const MinimalModelReport r = minimal_model_report(m);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 1.0);
  CHECK(r.worlds == 2);
  CHECK(r.propositions == 4);
  CHECK(r.relations == 16);
  CHECK(r.contingency);
  CHECK(r.named.size() == 16);
  CHECK(r.pairs == 120);
  CHECK(r.witnesses.size() == 120);
  CHECK(r.historical_distinct);
  CHECK(r.covers_relspace);
  CHECK(r.two_individuals_ok);
  for (const auto& w : r.witnesses)
    CHECK(m.exemplifies(r.named[static_cast<std::size_t>(w.i)].mask, w.urelement, w.world) !=
          m.exemplifies(r.named[static_cast<std::size_t>(w.j)].mask, w.urelement, w.world));

  AczelConfig one;
  one.worlds = 1;
  const MinimalModelReport small = minimal_model_report(build_aczel(one));
  CHECK_FALSE(small.contingency);
  CHECK(small.relations == 4);
  CHECK_FALSE(small.two_individuals_ok);
}

TEST_CASE("world theory") {
  const AczelModel m = minimal();
  const WorldTheoryReport r = world_theory_report(m);
  CHECK(r.candidates == 16);
  REQUIRE(r.worlds.size() == 2);
  CHECK(r.bijective);
  CHECK(r.fundamental_theorem);
  CHECK(r.checks.size() >= 4);
  for (const auto& c : r.checks) CHECK(c.holds());
  // Top is necessary and holds in every syntactic world.
  CHECK(r.checks[3].mask == 0b11);
  CHECK(r.checks[3].necessary);
}
