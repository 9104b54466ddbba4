#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"
#include "llmbp/rng.hpp"

namespace llmbp {

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorKind::shape,
                "prediction/truth lengths differ: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace detail

/// Fraction of exact matches over nodes whose truth is labeled.
inline double accuracy(std::span<const ClassId> pred, std::span<const ClassId> truth) {
  detail::require_same_length(pred.size(), truth.size());
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == kUnlabeled) continue;
    ++total;
    hits += pred[i] == truth[i];
  }
  if (total == 0) throw Error(ErrorKind::missing_label, "no labeled nodes to evaluate");
  return static_cast<double>(hits) / static_cast<double>(total);
}

/// Unweighted mean of per-class F1 = 2TP / (2TP + FP + FN). A class that
/// appears in neither pred nor truth scores 0.
inline double macro_f1(std::span<const ClassId> pred, std::span<const ClassId> truth, std::size_t class_count) {
  detail::require_same_length(pred.size(), truth.size());
  if (class_count == 0) throw Error(ErrorKind::shape, "class_count must be positive");
  std::vector<std::size_t> tp(class_count, 0), fp(class_count, 0), fn(class_count, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == kUnlabeled) continue;
    ++total;
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(pred[i]);
    if (t >= class_count || p >= class_count) throw Error(ErrorKind::out_of_range, "class id >= class_count");
    if (p == t) {
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  if (total == 0) throw Error(ErrorKind::missing_label, "no labeled nodes to evaluate");
  double sum = 0.0;
  for (std::size_t k = 0; k < class_count; ++k) {
    const auto denom = 2 * tp[k] + fp[k] + fn[k];
    if (denom > 0) sum += 2.0 * static_cast<double>(tp[k]) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(class_count);
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann-Whitney form, O((P + N) log(P + N))).
inline double auc(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) {
    throw Error(ErrorKind::range, "AUC needs at least one positive and one negative");
  }
  std::vector<std::pair<double, bool>> all;
  all.reserve(positives.size() + negatives.size());
  for (double s : positives) all.emplace_back(s, true);
  for (double s : negatives) all.emplace_back(s, false);
  for (const auto& [s, _] : all) {
    if (std::isnan(s)) throw Error(ErrorKind::data, "NaN score");
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Sum of (1-based, tie-averaged) ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t k = 0; k < all.size();) {
    std::size_t end = k;
    std::size_t pos_in_block = 0;
    while (end < all.size() && all[end].first == all[k].first) {
      pos_in_block += all[end].second;
      ++end;
    }
    const double mean_rank = (static_cast<double>(k + 1) + static_cast<double>(end)) / 2.0;
    rank_sum += mean_rank * static_cast<double>(pos_in_block);
    k = end;
  }
  const double p = static_cast<double>(positives.size());
  const double q = static_cast<double>(negatives.size());
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

struct FewShotSplit {
  std::vector<std::pair<NodeId, ClassId>> shots;
  /// true for labeled nodes that were not drawn as shots.
  std::vector<bool> test_mask;
};

/// k labeled nodes per class drawn uniformly without replacement; every
/// other labeled node is test data.
inline FewShotSplit sample_few_shot(const TagGraph& graph, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error(ErrorKind::range, "k must be >= 1");
  std::vector<std::vector<NodeId>> by_class(graph.class_count());
  for (NodeId i = 0; i < graph.node_count(); ++i) {
    if (graph.is_labeled(i)) by_class[static_cast<std::size_t>(graph.label(i))].push_back(i);
  }
  FewShotSplit split;
  split.test_mask.assign(graph.node_count(), false);
  for (NodeId i = 0; i < graph.node_count(); ++i) split.test_mask[i] = graph.is_labeled(i);
  Rng rng(seed, /*stream=*/0x53484f54);  // "SHOT"
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& members = by_class[c];
    if (members.size() < k) {
      throw Error(ErrorKind::insufficient_shots, "class " + std::to_string(c) + " has " +
                                                     std::to_string(members.size()) + " labeled nodes, need " +
                                                     std::to_string(k));
    }
    for (std::size_t idx : rng.sample_without_replacement(members.size(), k)) {
      const NodeId node = members[idx];
      split.shots.emplace_back(node, static_cast<ClassId>(c));
      split.test_mask[node] = false;
    }
  }
  return split;
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean and sample standard deviation (n - 1 denominator; 0 for one value).
inline MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace llmbp
