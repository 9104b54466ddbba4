#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"
#include "llmbp/parallel.hpp"

namespace llmbp {

/// Dense row-major n x d matrix of node embeddings.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), values_(rows * dim) {}
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> values)
      : rows_(rows), dim_(dim), values_(std::move(values)) {
    if (values_.size() != rows_ * dim_) {
      throw Error(ErrorKind::shape, "embedding payload has " + std::to_string(values_.size()) +
                                        " values, expected " + std::to_string(rows_ * dim_));
    }
    validate_finite();
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<double> row(std::size_t i) {
    normalized_ = false;
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const double> values() const noexcept { return values_; }
  /// Mutable access to the whole payload; clears the normalized flag.
  std::span<double> mutable_values() {
    normalized_ = false;
    return values_;
  }

  void validate_finite() const {
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k])) {
        throw Error(ErrorKind::data, "non-finite embedding value at row " +
                                         std::to_string(dim_ ? k / dim_ : 0) + ", column " +
                                         std::to_string(dim_ ? k % dim_ : 0));
      }
    }
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  friend EmbeddingMatrix normalize_rows(const EmbeddingMatrix&);
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
  bool normalized_ = false;
};

enum class ClassEmbeddingProvenance { zero_shot_clustered, few_shot_averaged, external };

constexpr std::string_view to_string(ClassEmbeddingProvenance p) noexcept {
  switch (p) {
    case ClassEmbeddingProvenance::zero_shot_clustered: return "zero_shot_clustered";
    case ClassEmbeddingProvenance::few_shot_averaged: return "few_shot_averaged";
    case ClassEmbeddingProvenance::external: return "external";
  }
  return "external";
}

/// c x d class anchors plus a record of how they were built.
struct ClassEmbeddings {
  EmbeddingMatrix matrix;
  ClassEmbeddingProvenance provenance = ClassEmbeddingProvenance::external;
  // Zero-shot bookkeeping; empty otherwise.
  std::vector<NodeId> sampled_nodes;
  std::vector<ClassId> sampled_labels;
  std::size_t k_top = 0;
  std::uint64_t seed = 0;
  std::size_t resample_rounds = 0;
  /// Classes whose anchor came from the embedded class-name text.
  std::vector<ClassId> class_name_fallbacks;

  std::size_t class_count() const noexcept { return matrix.rows(); }
  std::size_t dim() const noexcept { return matrix.dim(); }
};

inline double squared_norm(std::span<const double> v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

/// Returns a copy with unit-norm rows. Zero rows are rejected.
inline EmbeddingMatrix normalize_rows(const EmbeddingMatrix& emb) {
  EmbeddingMatrix out = emb;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = std::span<double>(out.values_.data() + i * out.dim_, out.dim_);
    const double norm = std::sqrt(squared_norm(row));
    if (norm == 0.0) {
      throw Error(ErrorKind::degenerate_embedding, "row " + std::to_string(i) + " has zero norm");
    }
    for (double& x : row) x /= norm;
  }
  out.normalized_ = true;
  return out;
}

/// Cosine similarity clamped to [-1, 1].
inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::shape, "cosine of vectors with dims " + std::to_string(u.size()) +
                                      " and " + std::to_string(v.size()));
  }
  const double nu = squared_norm(u);
  const double nv = squared_norm(v);
  if (nu == 0.0 || nv == 0.0) {
    throw Error(ErrorKind::degenerate_embedding, "cosine of a zero vector");
  }
  const double dot = std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

namespace detail {

inline void require_node(const EmbeddingMatrix& emb, NodeId i) {
  if (i >= emb.rows()) {
    throw Error(ErrorKind::out_of_range,
                "node " + std::to_string(i) + " >= embedding rows " + std::to_string(emb.rows()));
  }
}

inline std::vector<double> mean_of_rows(const EmbeddingMatrix& emb, std::span<const NodeId> nodes) {
  std::vector<double> mean(emb.dim(), 0.0);
  for (NodeId i : nodes) {
    const auto r = emb.row(i);
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += r[d];
  }
  for (double& x : mean) x /= static_cast<double>(nodes.size());
  return mean;
}

/// Mean of the min(k_top, |members|) members most cosine-similar to the
/// cluster mean; ties by ascending node id. Duplicates count once.
inline std::vector<double> cluster_anchor(const EmbeddingMatrix& emb, std::vector<NodeId> members,
                                          std::size_t k_top) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  const auto center = mean_of_rows(emb, members);
  std::vector<std::pair<double, NodeId>> ranked;
  ranked.reserve(members.size());
  for (NodeId i : members) ranked.emplace_back(cosine(emb.row(i), center), i);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  const std::size_t take = std::min(k_top, ranked.size());
  std::vector<NodeId> nearest;
  for (std::size_t k = 0; k < take; ++k) nearest.push_back(ranked[k].second);
  return mean_of_rows(emb, nearest);
}

}  // namespace detail

/// Builds class anchors from LLM-labeled samples: for each predicted class,
/// the mean of the min(k_top, cluster size) members whose embeddings are most
/// cosine-similar to the cluster mean (ties by ascending node id). Throws
/// EmptyClusterError for the first class with no members.
inline ClassEmbeddings zero_shot_class_embeddings(const EmbeddingMatrix& emb,
                                                  std::span<const NodeId> sampled_nodes,
                                                  std::span<const ClassId> llm_labels,
                                                  std::size_t class_count, std::size_t k_top) {
  if (sampled_nodes.size() != llm_labels.size()) {
    throw Error(ErrorKind::shape, "every sampled node needs exactly one predicted label");
  }
  if (k_top == 0) throw Error(ErrorKind::range, "k_top must be >= 1");
  std::vector<std::vector<NodeId>> clusters(class_count);
  for (std::size_t s = 0; s < sampled_nodes.size(); ++s) {
    detail::require_node(emb, sampled_nodes[s]);
    const ClassId y = llm_labels[s];
    if (y < 0 || static_cast<std::size_t>(y) >= class_count) {
      throw Error(ErrorKind::out_of_range, "predicted class " + std::to_string(y) +
                                               " is not < class_count " +
                                               std::to_string(class_count));
    }
    clusters[static_cast<std::size_t>(y)].push_back(sampled_nodes[s]);
  }

  ClassEmbeddings out;
  out.matrix = EmbeddingMatrix(class_count, emb.dim());
  out.provenance = ClassEmbeddingProvenance::zero_shot_clustered;
  out.sampled_nodes.assign(sampled_nodes.begin(), sampled_nodes.end());
  out.sampled_labels.assign(llm_labels.begin(), llm_labels.end());
  out.k_top = k_top;

  for (std::size_t c = 0; c < class_count; ++c) {
    auto& members = clusters[c];
    if (members.empty()) throw EmptyClusterError(static_cast<int>(c));
    const auto anchor = detail::cluster_anchor(emb, members, k_top);
    std::copy(anchor.begin(), anchor.end(), out.matrix.row(c).begin());
  }
  return out;
}

/// Class anchor = mean embedding of that class's labeled shots.
inline ClassEmbeddings few_shot_class_embeddings(
    const EmbeddingMatrix& emb, std::span<const std::pair<NodeId, ClassId>> labeled,
    std::size_t class_count) {
  std::vector<std::vector<NodeId>> shots(class_count);
  for (const auto& [node, y] : labeled) {
    detail::require_node(emb, node);
    if (y < 0 || static_cast<std::size_t>(y) >= class_count) {
      throw Error(ErrorKind::out_of_range, "shot label " + std::to_string(y) + " out of range");
    }
    shots[static_cast<std::size_t>(y)].push_back(node);
  }
  ClassEmbeddings out;
  out.matrix = EmbeddingMatrix(class_count, emb.dim());
  out.provenance = ClassEmbeddingProvenance::few_shot_averaged;
  for (std::size_t c = 0; c < class_count; ++c) {
    if (shots[c].empty()) {
      throw Error(ErrorKind::missing_class, "class " + std::to_string(c) + " has no labeled shots");
    }
    const auto mean = detail::mean_of_rows(emb, shots[c]);
    std::copy(mean.begin(), mean.end(), out.matrix.row(c).begin());
  }
  return out;
}

struct AggregateOptions {
  bool include_self = true;
  unsigned workers = 1;
};

/// Neighborhood-averaging baseline: each layer replaces a node's embedding
/// by the mean over itself and its neighbors. Isolated nodes are unchanged.
inline EmbeddingMatrix neighborhood_aggregate(const TagGraph& graph, const EmbeddingMatrix& emb,
                                              std::size_t layers, AggregateOptions opts = {}) {
  if (emb.rows() != graph.node_count()) {
    throw Error(ErrorKind::shape, "embedding rows " + std::to_string(emb.rows()) +
                                      " != node_count " + std::to_string(graph.node_count()));
  }
  EmbeddingMatrix current = emb;
  const std::size_t dim = emb.dim();
  for (std::size_t layer = 0; layer < layers; ++layer) {
    EmbeddingMatrix next(current.rows(), dim);
    const auto payload = next.mutable_values();
    parallel_for(graph.node_count(), opts.workers, [&](std::size_t i) {
      const auto nb = graph.neighbors(static_cast<NodeId>(i));
      const auto out = payload.subspan(i * dim, dim);
      if (nb.empty()) {
        const auto self = current.row(i);
        std::copy(self.begin(), self.end(), out.begin());
        return;
      }
      std::fill(out.begin(), out.end(), 0.0);
      if (opts.include_self) {
        const auto self = current.row(i);
        for (std::size_t d = 0; d < dim; ++d) out[d] += self[d];
      }
      for (NodeId j : nb) {
        const auto r = current.row(j);
        for (std::size_t d = 0; d < dim; ++d) out[d] += r[d];
      }
      const double count = static_cast<double>(nb.size() + (opts.include_self ? 1 : 0));
      for (double& x : out) x /= count;
    });
    current = std::move(next);
  }
  return current;
}

inline double link_score(const EmbeddingMatrix& emb_agg, NodeId i, NodeId j) {
  detail::require_node(emb_agg, i);
  detail::require_node(emb_agg, j);
  return cosine(emb_agg.row(i), emb_agg.row(j));
}

}  // namespace llmbp
