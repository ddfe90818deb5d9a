#pragma once

// Exhaustive finite model search over classical signatures.
//
// Interpretations are enumerated size by size (|W| then |D|, ascending), and
// within a size by the slot order: accessibility bits first (K: every pair,
// KB: pairs w <= v set symmetrically, S5Total: none), then every table entry
// of every signature constant in signature order. Earlier slots are more
// significant and every slot counts upward from 0, which fixes the canonical
// order. The actual world is always w0.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qml/kripke.hpp"

namespace qml {

struct Bounds {
  int max_worlds = 3;
  int max_individuals = 2;
  std::size_t relspace_cap = 16;
  int quantifier_nesting = 2;  // nested relation quantifiers after macro expansion
};

std::string to_string(const Bounds& b);

struct SearchOptions {
  int workers = 1;
};

struct SatResult {
  std::optional<KripkeInterpretation> model;
  Bounds bounds;
  // Interpretations ruled out, counted through pruned subtrees. Equals
  // count_interpretations when the result is UnsatUpTo.
  std::uint64_t examined = 0;

  bool sat() const { return model.has_value(); }
};

// Closed form of the number of interpretations within the bounds.
std::uint64_t count_interpretations(const Signature& sig, const Bounds& b);
std::uint64_t count_interpretations(const Signature& sig, int worlds, int individuals, std::size_t cap = 16);

// Visits every complete interpretation in canonical order until the visitor
// returns false.
void enumerate(std::shared_ptr<const Signature> sig, const Bounds& b,
               const std::function<bool(const KripkeInterpretation&)>& visit);

SatResult decide_sat(const std::vector<Formula>& premises, std::shared_ptr<const Signature> sig, const Bounds& b,
                     SearchOptions opt = {});

std::optional<KripkeInterpretation> find_countermodel(const std::vector<Formula>& premises, const Formula& conjecture,
                                                      std::shared_ptr<const Signature> sig, const Bounds& b,
                                                      SearchOptions opt = {});

// First model of the premises with exactly this many worlds and individuals.
std::optional<KripkeInterpretation> first_model_at(const std::vector<Formula>& premises,
                                                   std::shared_ptr<const Signature> sig, int worlds,
                                                   int individuals, const Bounds& b, SearchOptions opt = {});

// Every model of the premises within the bounds, canonical order.
void for_each_model(const std::vector<Formula>& premises, std::shared_ptr<const Signature> sig, const Bounds& b,
                    const std::function<bool(const KripkeInterpretation&)>& visit);

// Subset-minimal premise index sets from which the conjecture has no bounded
// countermodel. Ordered by size, then lexicographically.
std::vector<std::vector<int>> minimize_premises(const std::vector<Formula>& premises, const Formula& conjecture,
                                                std::shared_ptr<const Signature> sig, const Bounds& b,
                                                SearchOptions opt = {});

struct FrameVerdict {
  Logic logic;
  std::optional<KripkeInterpretation> counterexample;  // empty: holds within bounds
  bool holds() const { return !counterexample.has_value(); }
};

std::vector<FrameVerdict> frame_requirements(const std::vector<Formula>& premises, const Formula& conjecture,
                                             const Signature& sig, const std::vector<Logic>& logics,
                                             const Bounds& b, SearchOptions opt = {});

// Depth of nested relation-sorted quantifiers once macros are unfolded.
int relation_quantifier_nesting(const Formula& f);

}  // namespace qml
