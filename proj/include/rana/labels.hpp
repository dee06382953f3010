#pragma once

#include <optional>
#include <string_view>

#include "rana/graph.hpp"

namespace rana {

/// Confidence band of a node pair, by model confidence relative to the oracle
/// accuracy and the minimum acceptable threshold.
enum class Region { high, moderate, low };

enum class Provenance { oracle, model, twin_backed_oracle, twin_backed_model };

constexpr std::string_view to_string(Region r) {
  switch (r) {
    case Region::high: return "high";
    case Region::moderate: return "moderate";
    case Region::low: return "low";
  }
  return "?";
}

constexpr std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::oracle: return "oracle";
    case Provenance::model: return "model";
    case Provenance::twin_backed_oracle: return "twin_backed_oracle";
    case Provenance::twin_backed_model: return "twin_backed_model";
  }
  return "?";
}

struct TwinLabel {
  NodePair pair;
  int label = 0;
};

/// A labeled node pair: final label, where it came from, and how much it is
/// trusted.
struct LabeledPair {
  NodePair pair;
  int label = 0;
  Provenance provenance = Provenance::oracle;
  double confidence = 0.0;
  std::optional<TwinLabel> twin;
  /// Band the pair was fused in. Empty for labels that did not go through
  /// fusion (baseline queries, twin side-labels).
  std::optional<Region> region;

  bool positive() const noexcept { return label == 1; }
};

}  // namespace rana
