#pragma once

// Concrete ASCII syntax.
//
//   []φ  <>φ (or dia φ)  @φ  ~φ  φ -> ψ  φ <-> ψ  φ xor ψ  φ & ψ  φ | ψ
//   forall x F:2 p. φ     exists y. φ     true  false
//   F x y   F(x, y)   E!x   [\x φ] a   [\x y. φ]   [\. φ]   p
//   x[F]    (the x: φ)    a = b   a != b    P(X)  P X
//   ess(Y, x)  sess(Y, x)  ess*(Y, x)  entails(Y, Z)  rigid(Y)  down(t)
//
// Binding strength, loosest first: <-> and xor, -> (right associative), |,
// &, then the prefix operators. A quantifier body extends as far right as
// possible.
//
// Names not bound and not in the signature are free variables whose sort
// follows the spelling: an upper-case initial is a unary relation, p/q/r/s
// optionally followed by digits or primes is a proposition, anything else an
// individual. `name:i`, `name:o` and `name:N` override.

#include <string>
#include <string_view>

#include "qml/syntax.hpp"

namespace qml {

Formula parse_formula(std::string_view text, const Signature& sig);
Term parse_term(std::string_view text, const Signature& sig);

std::string print_formula(const Formula& f);
std::string print_term(const Term& t);

Sort conventional_sort(std::string_view name);

}  // namespace qml
