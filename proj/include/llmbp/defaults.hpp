#pragma once

// Default hyperparameters and reference dataset metadata.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace llmbp::defaults {

/// Message-passing rounds for full BP.
inline constexpr int kBpIterations = 5;
/// The linear approximation is a single round.
inline constexpr int kApproxIterations = 1;
/// Softmax temperature of the node potentials.
inline constexpr double kTauBp = 0.025;
inline constexpr double kTauApprox = 0.01;

/// Zero-shot anchors: 20 sampled nodes per class, top-10 nearest the center.
inline constexpr std::size_t kZeroShotSamplesPerClass = 20;
inline constexpr std::size_t kZeroShotTopK = 10;
/// Extra sampling rounds when some class receives no LLM label.
inline constexpr int kEmptyClusterResampleRounds = 2;

/// Same-class judgments per sampled edge, combined by majority vote.
inline constexpr int kVoteTrials = 5;
/// Sampled edges for citation, e-commerce and knowledge graphs.
inline constexpr std::size_t kSampledEdgesLarge = 100;
/// Sampled edges for the small web-page graphs.
inline constexpr std::size_t kSampledEdgesSmall = 50;
inline constexpr std::size_t kPairTextCharBudget = 2000;
inline constexpr double kLabelTemperature = 0.0;
inline constexpr double kPairTemperature = 0.0;

/// log psi must stay finite, and the smallest published estimate is 0.02.
inline constexpr double kRatioClampEpsilon = 1e-4;
/// Log-potential floor applied before exponentiation.
inline constexpr double kLogFloor = -700.0;
/// Damping weight on the new message; 1.0 disables damping.
inline constexpr double kDamping = 1.0;

/// Zero-shot repetitions use seeds 42..71; few-shot uses 42..51.
inline constexpr std::uint64_t kFirstSeed = 42;
inline constexpr std::size_t kZeroShotRepeats = 30;
inline constexpr std::size_t kFewShotRepeats = 10;
inline constexpr std::array<std::size_t, 4> kFewShotK{1, 3, 5, 10};

/// Link prediction: held-out edges / negatives, aggregation layers.
inline constexpr std::size_t kLinkPredHoldout = 1000;
inline constexpr std::size_t kLinkPredLayers = 3;
/// Neighborhood-aggregation baseline depth for node classification.
inline constexpr std::size_t kNaLayers = 3;

enum class GraphType { citation, e_commerce, knowledge_graph, web_page };

constexpr std::size_t sampled_edges_for(GraphType type) noexcept {
  return type == GraphType::web_page ? kSampledEdgesSmall : kSampledEdgesLarge;
}

struct DatasetPreset {
  std::string_view name;
  GraphType type;
  std::size_t nodes;
  /// Directed adjacency entries (each undirected edge twice).
  std::size_t directed_edges;
  std::size_t classes;
  double true_homophily;
  /// Estimate used in the reference experiments.
  double predicted_r;
  std::string_view task_description;
};

inline constexpr std::array<DatasetPreset, 11> kDatasets{{
    {"cora", GraphType::citation, 2708, 10556, 7, 0.809, 0.70, "opening text of machine learning papers"},
    {"citeseer", GraphType::citation, 3186, 8450, 6, 0.764, 0.81,
     "description or opening text of scientific publications"},
    {"pubmed", GraphType::citation, 19717, 88648, 3, 0.792, 0.81,
     "title and abstract of scientific publications"},
    {"history", GraphType::e_commerce, 41551, 503180, 12, 0.662, 0.73, "description or title of the book"},
    {"children", GraphType::e_commerce, 76875, 2325044, 24, 0.464, 0.35,
     "description or title of the child literature"},
    {"sportsfit", GraphType::e_commerce, 173055, 3020134, 13, 0.9, 0.81,
     "the title of a good in sports & fitness"},
    {"wikics", GraphType::knowledge_graph, 11701, 431726, 10, 0.678, 0.52, "entry and content of wikipedia"},
    {"cornell", GraphType::web_page, 191, 292, 5, 0.115, 0.05, "webpage text"},
    {"texas", GraphType::web_page, 187, 310, 5, 0.067, 0.04, "webpage text"},
    {"wisconsin", GraphType::web_page, 265, 510, 5, 0.152, 0.06, "webpage text"},
    {"washington", GraphType::web_page, 229, 394, 5, 0.149, 0.02, "webpage text"},
}};

constexpr std::optional<DatasetPreset> find_dataset(std::string_view name) noexcept {
  for (const auto& d : kDatasets) {
    if (d.name == name) return d;
  }
  return std::nullopt;
}

}  // namespace llmbp::defaults
