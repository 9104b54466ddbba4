#pragma once

// Undirected text-attributed graph in compressed adjacency form plus the
// label utilities and edge sampling that operate on it.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "llmbp/error.hpp"
#include "llmbp/rng.hpp"

namespace llmbp {

using NodeId = std::uint32_t;
using ClassId = std::int32_t;

inline constexpr ClassId kUnlabeled = -1;

/// Undirected edge with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(NodeId a, NodeId b) noexcept { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Counts reported while canonicalizing raw input pairs.
struct CanonicalizeStats {
  std::size_t input_pairs = 0;
  std::size_t self_loops_dropped = 0;
  /// Pairs repeated with the same orientation.
  std::size_t duplicates_dropped = 0;
  /// Pairs whose reverse orientation was also present (already symmetric input).
  std::size_t reverse_pairs_merged = 0;
};

class TagGraph {
 public:
  TagGraph() = default;

  /// Builds a canonical graph from arbitrary (possibly directed, repeated,
  /// self-looped) pairs. Ids must be < node_count.
  static TagGraph from_pairs(std::size_t node_count, std::size_t class_count,
                             std::span<const std::pair<NodeId, NodeId>> pairs,
                             CanonicalizeStats* stats = nullptr) {
    if (class_count == 0) throw Error(ErrorKind::spec, "class_count must be positive");
    CanonicalizeStats local;
    local.input_pairs = pairs.size();

    std::vector<std::pair<NodeId, NodeId>> directed;
    directed.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
      if (a >= node_count || b >= node_count) {
        throw Error(ErrorKind::out_of_range, "edge (" + std::to_string(a) + ", " +
                                                 std::to_string(b) + ") references a node >= " +
                                                 std::to_string(node_count));
      }
      if (a == b) {
        ++local.self_loops_dropped;
        continue;
      }
      directed.emplace_back(a, b);
    }
    std::sort(directed.begin(), directed.end());
    const auto unique_end = std::unique(directed.begin(), directed.end());
    local.duplicates_dropped = static_cast<std::size_t>(directed.end() - unique_end);
    directed.erase(unique_end, directed.end());

    std::vector<Edge> edges;
    edges.reserve(directed.size());
    for (const auto& [a, b] : directed) edges.push_back(make_edge(a, b));
    std::sort(edges.begin(), edges.end());
    const auto edge_end = std::unique(edges.begin(), edges.end());
    local.reverse_pairs_merged = static_cast<std::size_t>(edges.end() - edge_end);
    edges.erase(edge_end, edges.end());

    if (stats) *stats = local;
    return from_canonical_edges(node_count, class_count, edges);
  }

  /// Builds from a sorted, duplicate-free list of edges with u < v.
  static TagGraph from_canonical_edges(std::size_t node_count, std::size_t class_count,
                                       std::span<const Edge> edges) {
    TagGraph g;
    g.node_count_ = node_count;
    g.class_count_ = class_count;
    g.offsets_.assign(node_count + 1, 0);
    for (const Edge& e : edges) {
      if (e.v >= node_count || e.u >= e.v) {
        throw Error(ErrorKind::out_of_range, "edge list is not canonical for node_count " +
                                                 std::to_string(node_count));
      }
      ++g.offsets_[e.u + 1];
      ++g.offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < node_count; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.neighbors_.resize(g.offsets_.back());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const Edge& e : edges) {
      g.neighbors_[cursor[e.u]++] = e.v;
      g.neighbors_[cursor[e.v]++] = e.u;
    }
    for (std::size_t i = 0; i < node_count; ++i) {
      auto first = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
      auto last = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
      std::sort(first, last);
      if (std::adjacent_find(first, last) != last) {
        throw Error(ErrorKind::out_of_range, "duplicate edge at node " + std::to_string(i));
      }
    }
    g.labels_.assign(node_count, kUnlabeled);
    return g;
  }

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t class_count() const noexcept { return class_count_; }
  /// Each undirected edge counted once.
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }
  /// Each undirected edge counted in both directions.
  std::size_t directed_entry_count() const noexcept { return neighbors_.size(); }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }
  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const NodeId> adjacency() const noexcept { return neighbors_; }

  bool has_edge(NodeId a, NodeId b) const {
    if (a >= node_count_ || b >= node_count_) return false;
    const auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  /// Canonical undirected edge list (u < v, lexicographic).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId i = 0; i < node_count_; ++i) {
      for (NodeId j : neighbors(i)) {
        if (i < j) out.push_back({i, j});
      }
    }
    return out;
  }

  // Labels ---------------------------------------------------------------

  std::span<const ClassId> labels() const noexcept { return labels_; }
  ClassId label(NodeId i) const { return labels_[i]; }
  bool is_labeled(NodeId i) const { return labels_[i] != kUnlabeled; }
  bool fully_labeled() const {
    return std::none_of(labels_.begin(), labels_.end(), [](ClassId y) { return y == kUnlabeled; });
  }
  bool any_labeled() const {
    return std::any_of(labels_.begin(), labels_.end(), [](ClassId y) { return y != kUnlabeled; });
  }

  void set_labels(std::vector<ClassId> labels) {
    if (labels.size() != node_count_) {
      throw Error(ErrorKind::shape, "label count " + std::to_string(labels.size()) +
                                        " does not match node_count " +
                                        std::to_string(node_count_));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != kUnlabeled &&
          (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count_)) {
        throw Error(ErrorKind::out_of_range, "label " + std::to_string(labels[i]) + " of node " +
                                                 std::to_string(i) + " is not < class_count " +
                                                 std::to_string(class_count_));
      }
    }
    labels_ = std::move(labels);
  }

  // Texts and class metadata --------------------------------------------

  bool has_texts() const noexcept { return texts_.has_value(); }
  const std::string& text(NodeId i) const { return texts_->at(i); }
  const std::optional<std::vector<std::string>>& texts() const noexcept { return texts_; }

  void set_texts(std::vector<std::string> texts) {
    if (texts.size() != node_count_) {
      throw Error(ErrorKind::shape, "text count " + std::to_string(texts.size()) +
                                        " does not match node_count " +
                                        std::to_string(node_count_));
    }
    texts_ = std::move(texts);
  }

  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  void set_class_names(std::vector<std::string> names) {
    if (!names.empty() && names.size() != class_count_) {
      throw Error(ErrorKind::shape, "class_names has " + std::to_string(names.size()) +
                                        " entries, class_count is " +
                                        std::to_string(class_count_));
    }
    class_names_ = std::move(names);
  }

  const std::string& task_description() const noexcept { return task_description_; }
  void set_task_description(std::string description) { task_description_ = std::move(description); }

  friend bool operator==(const TagGraph&, const TagGraph&) = default;

 private:
  std::size_t node_count_ = 0;
  std::size_t class_count_ = 1;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> neighbors_;
  std::vector<ClassId> labels_;
  std::optional<std::vector<std::string>> texts_;
  std::vector<std::string> class_names_;
  std::string task_description_;
};

/// Fraction of undirected edges whose endpoints share a label.
inline double homophily_ratio_exact(const TagGraph& graph) {
  if (!graph.fully_labeled()) {
    throw Error(ErrorKind::missing_label, "homophily ratio needs every node labeled");
  }
  if (graph.edge_count() == 0) {
    throw Error(ErrorKind::undefined_ratio, "homophily ratio is undefined on a graph with no edges");
  }
  std::size_t same = 0;
  for (NodeId i = 0; i < graph.node_count(); ++i) {
    for (NodeId j : graph.neighbors(i)) {
      if (i < j && graph.label(i) == graph.label(j)) ++same;
    }
  }
  return static_cast<double>(same) / static_cast<double>(graph.edge_count());
}

struct EdgeSample {
  std::vector<Edge> pairs;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;
};

/// Uniform sample of min(t, |E|) distinct undirected edges, returned in
/// canonical order. Bit-identical for a fixed seed on every platform.
inline EdgeSample sample_edges(const TagGraph& graph, std::size_t t, std::uint64_t seed) {
  if (t == 0) throw Error(ErrorKind::range, "sample size must be >= 1");
  if (graph.edge_count() == 0) {
    throw Error(ErrorKind::undefined_sample, "cannot sample edges from a graph with no edges");
  }
  auto all = graph.edges();
  EdgeSample sample;
  sample.seed = seed;
  sample.sample_size = t;
  if (t >= all.size()) {
    sample.pairs = std::move(all);
    return sample;
  }
  Rng rng(seed, /*stream=*/0x45444745);  // "EDGE"
  auto picked = rng.sample_without_replacement(all.size(), t);
  std::sort(picked.begin(), picked.end());
  sample.pairs.reserve(t);
  for (std::size_t idx : picked) sample.pairs.push_back(all[idx]);
  return sample;
}

struct HeldOutEdges {
  TagGraph residual;
  std::vector<Edge> positives;
  std::vector<Edge> negatives;
};

/// Removes m uniformly chosen edges and draws m distinct node pairs that are
/// not edges of the original graph.
inline HeldOutEdges hold_out_edges(const TagGraph& graph, std::size_t m, std::uint64_t seed) {
  const std::size_t edge_count = graph.edge_count();
  if (m > edge_count) {
    throw Error(ErrorKind::insufficient_edges, "cannot hold out " + std::to_string(m) +
                                                   " edges from a graph with " +
                                                   std::to_string(edge_count));
  }
  const std::size_t n = graph.node_count();
  const std::size_t all_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  if (m > all_pairs - edge_count) {
    throw Error(ErrorKind::insufficient_edges,
                "graph has fewer than " + std::to_string(m) + " non-edge pairs");
  }

  HeldOutEdges out;
  auto all = graph.edges();
  Rng rng(seed, /*stream=*/0x484f4c44);  // "HOLD"
  auto picked = rng.sample_without_replacement(all.size(), m);
  std::sort(picked.begin(), picked.end());
  std::vector<bool> removed(all.size(), false);
  for (std::size_t idx : picked) {
    removed[idx] = true;
    out.positives.push_back(all[idx]);
  }
  std::vector<Edge> kept;
  kept.reserve(all.size() - m);
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (!removed[k]) kept.push_back(all[k]);
  }

  std::unordered_set<std::uint64_t> seen;
  while (out.negatives.size() < m) {
    const auto a = static_cast<NodeId>(rng.uniform_index(n));
    const auto b = static_cast<NodeId>(rng.uniform_index(n));
    if (a == b || graph.has_edge(a, b)) continue;
    const Edge e = make_edge(a, b);
    if (seen.insert((std::uint64_t{e.u} << 32) | e.v).second) out.negatives.push_back(e);
  }

  out.residual = TagGraph::from_canonical_edges(n, graph.class_count(), kept);
  out.residual.set_labels({graph.labels().begin(), graph.labels().end()});
  if (graph.texts()) out.residual.set_texts(*graph.texts());
  out.residual.set_class_names(graph.class_names());
  out.residual.set_task_description(graph.task_description());
  return out;
}

}  // namespace llmbp
