#pragma once

// Premise sets for four versions of the modal ontological argument, the
// essence/rigidity/positivity machinery, ultrafilter checks, and the
// per-variant verification suite.
//
// Every variant uses the second-order constant P (positivity) and a
// designated contingent proposition q used to probe modal collapse.

#include <optional>
#include <string>
#include <vector>

#include "qml/modelfind.hpp"

namespace qml {

struct LabeledFormula {
  std::string label;
  std::string text;  // as parsed
  std::string source;
  Formula formula;
};

struct PremiseSet {
  std::string name;
  std::shared_ptr<const Signature> sig;
  std::vector<LabeledFormula> premises;
  LabeledFormula main_theorem;
  std::vector<LabeledFormula> collapse;  // q -> []q for each designated atom
  std::string godlike;                   // relation macro naming the Godlike property
  std::string header;                    // notes printed at the top of reports

  std::vector<Formula> formulas() const;
};

std::vector<std::string> variant_names();
PremiseSet variant(const std::string& name);

enum class EssenceKind { Goedel, Scott, AndersonStar };

bool essence_holds(EssenceKind kind, RelValue y, int x, const KripkeInterpretation& m, int w);
bool is_rigid(RelValue y, const KripkeInterpretation& m);

// Checks on a family of subsets of an n-element set (members as bitmasks).
struct UltrafilterReport {
  std::string carrier;
  bool applicable = true;
  std::vector<std::uint32_t> family;
  int elements = 0;
  bool proper = false;
  bool upward_closed = false;
  bool meet_closed = false;
  bool maximal = false;
  std::vector<std::string> witnesses;

  bool is_ultrafilter() const { return applicable && proper && upward_closed && meet_closed && maximal; }
};

UltrafilterReport check_ultrafilter(int elements, std::vector<std::uint32_t> family, std::string carrier);

enum class Selector { P, Pprime };

// P: properties positive at w0 (needs the full relation space).
// Pprime: extensions E such that the rigid property with extension E is
// positive at w0.
UltrafilterReport ultrafilter_report(const KripkeInterpretation& m, Selector sel);

std::string describe(const UltrafilterReport& r);

struct VariantReport {
  std::string name;
  bool consistent = false;
  SatResult sat;
  std::vector<FrameVerdict> main_theorem;
  std::optional<KripkeInterpretation> collapse_countermodel;
  bool all_models_world_uniform = false;  // every bounded model has identical atomic valuations
  std::uint64_t models_checked = 0;
  struct Found {
    std::string role;
    KripkeInterpretation model;
    UltrafilterReport p;
    UltrafilterReport pprime;
    bool p_equals_pprime = false;
  };
  std::vector<Found> found;
  std::optional<bool> refutation_accepted;  // goedel only
  std::string refutation_detail;
  std::string text;
};

VariantReport run_variant_suite(const std::string& name, const Bounds& b, SearchOptions opt = {});

}  // namespace qml
