#pragma once

// Random AOT-mode terms as source text. Matrices use the variable x and stay
// within one level of exhaustive individual scans, so every term can be
// evaluated in the minimal model.

#include <random>
#include <string>

namespace qml::testgen {

class AotTermGen {
 public:
  explicit AotTermGen(unsigned seed) : rng_(seed) {}

  // Sort chosen uniformly: individual, unary relation, proposition.
  std::string term() {
    switch (pick(3)) {
      case 0: return individual();
      case 1: return relation();
      default: return proposition();
    }
  }

  std::string individual() {
    if (pick(4) == 0) return "a";
    return "(the x: " + matrix(2, true) + ")";
  }

  std::string relation() {
    static const char* const named[] = {"E!", "O!", "A!"};
    if (pick(4) == 0) return named[pick(3)];
    return "[\\x " + matrix(2, true) + "]";
  }

  std::string proposition() {
    if (pick(4) == 0) return "q0";
    return "[\\. " + closed(2) + "]";
  }

 private:
  std::mt19937 rng_;

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  // Atoms about x. The heavy ones scan every abstract object.
  std::string atom(bool heavy_ok) {
    static const char* const light[] = {"E!x",   "O!x",          "A!x",           "x[E!]", "x[O!]",
                                        "x[A!]", "x[[\\y q0]]",  "q0",            "x[[\\y E!y -> E!y]]",
                                        "x = a", "exists F. F x & x[E!]"};
    static const char* const heavy[] = {"exists F. x[F] & ~F x", "exists F. x[F]", "forall F. x[F] -> F x"};
    if (heavy_ok && pick(5) == 0) return heavy[pick(3)];
    return light[pick(11)];
  }

  std::string matrix(int depth, bool heavy_ok) {
    if (depth == 0 || pick(3) == 0) return atom(heavy_ok);
    switch (pick(6)) {
      case 0: return "~(" + matrix(depth - 1, heavy_ok) + ")";
      case 1: return "(" + matrix(depth - 1, heavy_ok) + " & " + matrix(depth - 1, heavy_ok) + ")";
      case 2: return "(" + matrix(depth - 1, heavy_ok) + " | " + matrix(depth - 1, heavy_ok) + ")";
      case 3: return "<>(" + matrix(depth - 1, heavy_ok) + ")";
      case 4: return "@(" + matrix(depth - 1, heavy_ok) + ")";
      default: return "(" + matrix(depth - 1, heavy_ok) + " -> " + matrix(depth - 1, heavy_ok) + ")";
    }
  }

  std::string closed(int depth) {
    switch (pick(4)) {
      case 0: return "q0";
      case 1: return "exists x. " + matrix(depth, false);
      case 2: return "[](forall x. " + matrix(depth, false) + ")";
      default: return "E!a";
    }
  }
};

}  // namespace qml::testgen
