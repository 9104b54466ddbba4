#pragma once

// Planted-partition benchmark graphs with a chosen homophily level and
// noisy embeddings around known class centroids.

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "llmbp/embedding.hpp"
#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"
#include "llmbp/rng.hpp"

namespace llmbp {

struct SyntheticSpec {
  std::size_t n = 2000;
  std::size_t c = 4;
  double target_r = 0.85;
  double mean_degree = 8.0;
  std::size_t embedding_dim = 32;
  double noise_sigma = 0.65;
  std::uint64_t seed = 42;
};

struct SyntheticData {
  TagGraph graph;
  EmbeddingMatrix embeddings;
  ClassEmbeddings classes;
};

namespace detail {

inline std::uint64_t pair_code(NodeId a, NodeId b) {
  const Edge e = make_edge(a, b);
  return (std::uint64_t{e.u} << 32) | e.v;
}

inline std::vector<double> random_unit_vector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& x : v) x = rng.normal();
    norm = std::sqrt(squared_norm(v));
  }
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace detail

/// Labels are uniform over classes. The edge count is round(mean_degree * n / 2),
/// of which round(target_r * count) join same-class pairs; both groups are
/// drawn uniformly without replacement from their candidate pairs, so the
/// realised homophily equals the target up to rounding. Node embeddings are
/// unit-normalized (centroid + N(0, sigma^2 I)); the class embeddings are the
/// unit centroids.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 2) throw Error(ErrorKind::spec, "synthetic graph needs n >= 2");
  if (spec.c < 1) throw Error(ErrorKind::spec, "synthetic graph needs c >= 1");
  if (!(spec.target_r > 0.0 && spec.target_r < 1.0)) throw Error(ErrorKind::spec, "target_r must lie in (0, 1)");
  if (!(spec.mean_degree > 0.0)) throw Error(ErrorKind::spec, "mean_degree must be positive");
  if (spec.embedding_dim == 0) throw Error(ErrorKind::spec, "embedding_dim must be positive");
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorKind::spec, "noise_sigma must be >= 0");

  const std::size_t n = spec.n;
  const std::size_t c = spec.c;
  Rng label_rng(spec.seed, 1);
  std::vector<ClassId> labels(n);
  std::vector<std::vector<NodeId>> members(c);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<ClassId>(label_rng.uniform_index(c));
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<NodeId>(i));
  }

  std::vector<std::uint64_t> class_pairs(c);
  std::uint64_t intra_pairs = 0;
  for (std::size_t k = 0; k < c; ++k) {
    const std::uint64_t m = members[k].size();
    class_pairs[k] = m < 2 ? 0 : m * (m - 1) / 2;
    intra_pairs += class_pairs[k];
  }
  const std::uint64_t all_pairs = std::uint64_t{n} * (n - 1) / 2;
  const std::uint64_t inter_pairs = all_pairs - intra_pairs;
  const auto edges_total = static_cast<std::uint64_t>(std::llround(spec.mean_degree * static_cast<double>(n) / 2.0));
  const auto edges_in = static_cast<std::uint64_t>(std::llround(spec.target_r * static_cast<double>(edges_total)));
  const std::uint64_t edges_out = edges_total - edges_in;
  if (edges_in > intra_pairs || edges_out > inter_pairs) {
    throw Error(ErrorKind::spec, "cannot place " + std::to_string(edges_in) + " same-class and " +
                                     std::to_string(edges_out) + " cross-class edges (" +
                                     std::to_string(intra_pairs) + " / " + std::to_string(inter_pairs) +
                                     " candidate pairs)");
  }

  Rng edge_rng(spec.seed, 2);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(edges_total);

  auto sample_exhaustive = [&](bool same_class, std::uint64_t count) {
    std::vector<std::pair<NodeId, NodeId>> candidates;
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId b = a + 1; b < n; ++b) {
        if ((labels[a] == labels[b]) == same_class) candidates.emplace_back(a, b);
      }
    }
    for (std::size_t idx : edge_rng.sample_without_replacement(candidates.size(), count)) {
      pairs.push_back(candidates[idx]);
    }
  };

  // Same-class pairs: pick a class proportional to its pair count, then a pair.
  if (edges_in > 0) {
    if (edges_in * 2 > intra_pairs) {
      sample_exhaustive(true, edges_in);
    } else {
      std::unordered_set<std::uint64_t> seen;
      while (seen.size() < edges_in) {
        std::uint64_t ticket = edge_rng.uniform_index(intra_pairs);
        std::size_t k = 0;
        while (ticket >= class_pairs[k]) ticket -= class_pairs[k++];
        const auto& group = members[k];
        const NodeId a = group[edge_rng.uniform_index(group.size())];
        const NodeId b = group[edge_rng.uniform_index(group.size())];
        if (a == b) continue;
        if (seen.insert(detail::pair_code(a, b)).second) pairs.emplace_back(a, b);
      }
    }
  }
  if (edges_out > 0) {
    if (edges_out * 2 > inter_pairs) {
      sample_exhaustive(false, edges_out);
    } else {
      std::unordered_set<std::uint64_t> seen;
      while (seen.size() < edges_out) {
        const auto a = static_cast<NodeId>(edge_rng.uniform_index(n));
        const auto b = static_cast<NodeId>(edge_rng.uniform_index(n));
        if (labels[a] == labels[b]) continue;
        if (seen.insert(detail::pair_code(a, b)).second) pairs.emplace_back(a, b);
      }
    }
  }

  SyntheticData data;
  data.graph = TagGraph::from_pairs(n, c, pairs);
  data.graph.set_labels(labels);
  std::vector<std::string> names, texts;
  for (std::size_t k = 0; k < c; ++k) names.push_back("class " + std::to_string(k));
  for (std::size_t i = 0; i < n; ++i) texts.push_back("synthetic node " + std::to_string(i));
  data.graph.set_class_names(std::move(names));
  data.graph.set_texts(std::move(texts));
  data.graph.set_task_description("synthetic benchmark nodes");

  const std::size_t dim = spec.embedding_dim;
  Rng embed_rng(spec.seed, 3);
  data.classes.matrix = EmbeddingMatrix(c, dim);
  data.classes.provenance = ClassEmbeddingProvenance::external;
  data.classes.seed = spec.seed;
  std::vector<std::vector<double>> centroids;
  for (std::size_t k = 0; k < c; ++k) {
    centroids.push_back(detail::random_unit_vector(embed_rng, dim));
    std::copy(centroids[k].begin(), centroids[k].end(), data.classes.matrix.row(k).begin());
  }
  data.embeddings = EmbeddingMatrix(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& center = centroids[static_cast<std::size_t>(labels[i])];
    auto row = data.embeddings.row(i);
    double norm = 0.0;
    while (norm == 0.0) {
      for (std::size_t d = 0; d < dim; ++d) row[d] = center[d] + spec.noise_sigma * embed_rng.normal();
      norm = std::sqrt(squared_norm(row));
    }
    for (double& x : row) x /= norm;
  }
  data.embeddings = normalize_rows(data.embeddings);
  return data;
}

}  // namespace llmbp
