#pragma once

// End-to-end node classification runs: class anchors, homophily level,
// the four predictors (raw, neighborhood aggregation, BP, linear BP) and
// repeated-seed aggregation. Also the link-prediction protocol.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmbp/bp.hpp"
#include "llmbp/defaults.hpp"
#include "llmbp/embedding.hpp"
#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"
#include "llmbp/homophily.hpp"
#include "llmbp/llm/parse.hpp"
#include "llmbp/llm/prompt.hpp"
#include "llmbp/llm/types.hpp"
#include "llmbp/metrics.hpp"
#include "llmbp/parallel.hpp"
#include "llmbp/rng.hpp"

namespace llmbp {

enum class Method { raw, na, bp, bp_approx };
enum class AnchorMode { zero_shot, few_shot, external };
enum class RSource { llm_estimate, oracle, fixed };

inline const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::raw: return "raw";
    case Method::na: return "na";
    case Method::bp: return "bp";
    case Method::bp_approx: return "bp-approx";
  }
  return "raw";
}

inline Method parse_method(std::string_view s) {
  if (s == "raw") return Method::raw;
  if (s == "na") return Method::na;
  if (s == "bp") return Method::bp;
  if (s == "bp-approx" || s == "bp_approx") return Method::bp_approx;
  throw Error(ErrorKind::config, "unknown method '" + std::string(s) + "'");
}

inline const char* to_string(AnchorMode m) noexcept {
  switch (m) {
    case AnchorMode::zero_shot: return "zero-shot";
    case AnchorMode::few_shot: return "few-shot";
    case AnchorMode::external: return "external";
  }
  return "zero-shot";
}

inline AnchorMode parse_anchor_mode(std::string_view s) {
  if (s == "zero-shot" || s == "zero_shot") return AnchorMode::zero_shot;
  if (s == "few-shot" || s == "few_shot") return AnchorMode::few_shot;
  if (s == "external") return AnchorMode::external;
  throw Error(ErrorKind::config, "unknown mode '" + std::string(s) + "'");
}

struct ZeroShotOptions {
  std::size_t samples_per_class = defaults::kZeroShotSamplesPerClass;
  std::size_t k_top = defaults::kZeroShotTopK;
  int resample_rounds = defaults::kEmptyClusterResampleRounds;
  llm::DecodingParams decoding{};
  unsigned max_in_flight = 4;
  std::size_t text_char_budget = defaults::kPairTextCharBudget;
};

/// Asks the provider for the class of each node. Unparseable replies are nullopt.
inline std::vector<std::optional<ClassId>> label_nodes(const TagGraph& graph, llm::Provider& provider,
                                                       std::span<const NodeId> nodes,
                                                       const ZeroShotOptions& options) {
  if (!graph.has_texts()) throw Error(ErrorKind::missing_texts, "zero-shot labeling needs node texts");
  const auto& names = graph.class_names();
  if (names.size() != graph.class_count()) {
    throw Error(ErrorKind::prompt_spec, "zero-shot labeling needs one name per class");
  }
  std::vector<llm::Prompt> prompts;
  prompts.reserve(nodes.size());
  for (NodeId i : nodes) {
    std::string text = llm::truncate_head(graph.text(i), options.text_char_budget);
    if (text.empty()) text = "(no text)";
    prompts.push_back(llm::build_node_label_prompt(graph.task_description(), names, text));
  }
  std::vector<std::optional<ClassId>> out(nodes.size());
  parallel_for_dynamic(nodes.size(), options.max_in_flight, [&](std::size_t k) {
    llm::ChatRequest request{prompts[k], llm::node_key(nodes[k], 0), 0};
    out[k] = llm::parse_class_label(provider.chat(request, options.decoding).raw_text, names);
  });
  return out;
}

/// Samples samples_per_class * c nodes, labels them with the LLM and
/// clusters them into class anchors. A class with no labeled sample triggers
/// up to `resample_rounds` further batches of fresh nodes; after that its
/// anchor is the class-name embedding when one is supplied, otherwise
/// EmptyClusterError propagates.
inline ClassEmbeddings zero_shot_anchors(const TagGraph& graph, const EmbeddingMatrix& emb,
                                         llm::Provider& provider, std::uint64_t seed,
                                         const ZeroShotOptions& options = {},
                                         const EmbeddingMatrix* class_name_embeddings = nullptr) {
  const std::size_t c = graph.class_count();
  const std::size_t n = graph.node_count();
  if (emb.rows() != n) throw Error(ErrorKind::shape, "embedding rows != node_count");
  if (options.samples_per_class == 0) throw Error(ErrorKind::range, "samples_per_class must be >= 1");
  const std::size_t batch = options.samples_per_class * c;

  Rng rng(seed, /*stream=*/0x5a45524f);  // "ZERO"
  std::vector<NodeId> order(n);
  for (NodeId i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(std::span<NodeId>(order));

  std::vector<NodeId> sampled;
  std::vector<ClassId> labels;
  std::vector<std::vector<NodeId>> clusters(c);
  std::size_t cursor = 0;
  int round = 0;
  auto missing = [&] {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < c; ++k) {
      if (clusters[k].empty()) out.push_back(k);
    }
    return out;
  };
  for (;; ++round) {
    const std::size_t take = std::min(batch, n - cursor);
    const std::span<const NodeId> nodes(order.data() + cursor, take);
    cursor += take;
    const auto answers = label_nodes(graph, provider, nodes, options);
    for (std::size_t k = 0; k < take; ++k) {
      if (!answers[k]) continue;
      sampled.push_back(nodes[k]);
      labels.push_back(*answers[k]);
      clusters[static_cast<std::size_t>(*answers[k])].push_back(nodes[k]);
    }
    if (missing().empty() || round >= options.resample_rounds || cursor >= n) break;
  }

  ClassEmbeddings out;
  out.matrix = EmbeddingMatrix(c, emb.dim());
  out.provenance = ClassEmbeddingProvenance::zero_shot_clustered;
  out.sampled_nodes = sampled;
  out.sampled_labels = labels;
  out.k_top = options.k_top;
  out.seed = seed;
  out.resample_rounds = static_cast<std::size_t>(round);
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<double> anchor;
    if (!clusters[k].empty()) {
      anchor = detail::cluster_anchor(emb, clusters[k], options.k_top);
    } else if (class_name_embeddings != nullptr) {
      if (class_name_embeddings->rows() != c || class_name_embeddings->dim() != emb.dim()) {
        throw Error(ErrorKind::shape, "class-name embeddings must be c x d");
      }
      const auto row = class_name_embeddings->row(k);
      anchor.assign(row.begin(), row.end());
      out.class_name_fallbacks.push_back(static_cast<ClassId>(k));
    } else {
      throw EmptyClusterError(static_cast<int>(k));
    }
    std::copy(anchor.begin(), anchor.end(), out.matrix.row(k).begin());
  }
  return out;
}

struct ExperimentConfig {
  AnchorMode mode = AnchorMode::zero_shot;
  std::size_t shots = 1;
  std::vector<Method> methods{Method::raw, Method::na, Method::bp, Method::bp_approx};
  std::uint64_t first_seed = defaults::kFirstSeed;
  std::size_t repeats = defaults::kZeroShotRepeats;
  BpConfig bp = BpConfig::full();
  BpConfig approx = BpConfig::approx();
  std::size_t na_layers = defaults::kNaLayers;
  RSource r_source = RSource::llm_estimate;
  double fixed_r = 0.5;
  EstimateOptions estimate{};
  ZeroShotOptions zero_shot{};
  /// Seeds run concurrently; the provider must then be thread-safe.
  unsigned seed_workers = 1;
};

struct ExperimentInputs {
  const TagGraph* graph = nullptr;
  const EmbeddingMatrix* embeddings = nullptr;
  /// Required for AnchorMode::external.
  const ClassEmbeddings* external = nullptr;
  const EmbeddingMatrix* class_name_embeddings = nullptr;
  /// Required for zero-shot anchors and LLM homophily estimates.
  llm::Provider* provider = nullptr;
};

struct MethodScore {
  Method method = Method::raw;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  double r = 0.0;
  std::vector<MethodScore> scores;
  std::vector<NodeId> sampled_nodes;
  std::vector<ClassId> sampled_labels;
  std::vector<ClassId> class_name_fallbacks;
  std::size_t eval_nodes = 0;
};

struct MethodSummary {
  Method method = Method::raw;
  MeanStd accuracy;
  MeanStd macro_f1;
};

struct ExperimentReport {
  std::vector<SeedResult> seeds;
  std::vector<MethodSummary> summary;

  const MethodSummary& of(Method m) const {
    for (const auto& s : summary) {
      if (s.method == m) return s;
    }
    throw Error(ErrorKind::config, std::string("method not in report: ") + to_string(m));
  }
};

/// Predictions of one method given anchors and r.
inline std::vector<ClassId> predict_with(Method method, const TagGraph& graph, const EmbeddingMatrix& emb,
                                         const ClassEmbeddings& anchors, double r, const ExperimentConfig& cfg) {
  switch (method) {
    case Method::raw:
      return predict(node_potentials(emb, anchors, cfg.bp.tau, cfg.bp.workers));
    case Method::na: {
      AggregateOptions opts;
      opts.workers = cfg.bp.workers;
      const auto agg = neighborhood_aggregate(graph, emb, cfg.na_layers, opts);
      return predict(node_potentials(agg, anchors, cfg.bp.tau, cfg.bp.workers));
    }
    case Method::bp: {
      const auto init = node_potentials(emb, anchors, cfg.bp.tau, cfg.bp.workers);
      return predict(run_lbp(graph, init, edge_potential_from_r(r, cfg.bp.epsilon_clamp), cfg.bp));
    }
    case Method::bp_approx: {
      const auto init = node_potentials(emb, anchors, cfg.approx.tau, cfg.approx.workers);
      return predict(run_lbp_approx(graph, init, r, cfg.approx.epsilon_clamp, cfg.approx.workers));
    }
  }
  throw Error(ErrorKind::config, "unknown method");
}

inline SeedResult run_seed(const ExperimentInputs& in, const ExperimentConfig& cfg, std::uint64_t seed) {
  const TagGraph& graph = *in.graph;
  const EmbeddingMatrix& emb = *in.embeddings;
  SeedResult result;
  result.seed = seed;

  std::vector<ClassId> truth(graph.labels().begin(), graph.labels().end());
  ClassEmbeddings anchors;
  switch (cfg.mode) {
    case AnchorMode::external:
      if (in.external == nullptr) throw Error(ErrorKind::config, "external mode needs class embeddings");
      anchors = *in.external;
      break;
    case AnchorMode::few_shot: {
      const auto split = sample_few_shot(graph, cfg.shots, seed);
      anchors = few_shot_class_embeddings(emb, split.shots, graph.class_count());
      for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!split.test_mask[i]) truth[i] = kUnlabeled;
      }
      break;
    }
    case AnchorMode::zero_shot:
      if (in.provider == nullptr) throw Error(ErrorKind::config, "zero-shot mode needs an LLM provider");
      anchors = zero_shot_anchors(graph, emb, *in.provider, seed, cfg.zero_shot, in.class_name_embeddings);
      result.sampled_nodes = anchors.sampled_nodes;
      result.sampled_labels = anchors.sampled_labels;
      result.class_name_fallbacks = anchors.class_name_fallbacks;
      break;
  }
  for (ClassId y : truth) result.eval_nodes += y != kUnlabeled;

  bool needs_r = false;
  for (Method m : cfg.methods) needs_r |= m == Method::bp || m == Method::bp_approx;
  if (needs_r) {
    switch (cfg.r_source) {
      case RSource::fixed: result.r = cfg.fixed_r; break;
      case RSource::oracle: result.r = homophily_ratio_exact(graph); break;
      case RSource::llm_estimate: {
        if (in.provider == nullptr) throw Error(ErrorKind::config, "LLM homophily estimate needs a provider");
        EstimateOptions opts = cfg.estimate;
        opts.seed = seed;
        result.r = estimate_r(graph, *in.provider, opts).r;
        break;
      }
    }
  }

  for (Method m : cfg.methods) {
    const auto pred = predict_with(m, graph, emb, anchors, result.r, cfg);
    result.scores.push_back({m, accuracy(pred, truth), macro_f1(pred, truth, graph.class_count())});
  }
  return result;
}

inline ExperimentReport run_experiment(const ExperimentInputs& in, const ExperimentConfig& cfg) {
  if (in.graph == nullptr || in.embeddings == nullptr) {
    throw Error(ErrorKind::config, "experiment needs a graph and embeddings");
  }
  if (cfg.repeats == 0) throw Error(ErrorKind::config, "repeats must be >= 1");
  if (cfg.methods.empty()) throw Error(ErrorKind::config, "no methods selected");
  cfg.bp.validate();
  cfg.approx.validate();

  ExperimentReport report;
  report.seeds.resize(cfg.repeats);
  parallel_for_dynamic(cfg.repeats, cfg.seed_workers, [&](std::size_t s) {
    report.seeds[s] = run_seed(in, cfg, cfg.first_seed + s);
  });
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    std::vector<double> acc, f1;
    for (const auto& seed : report.seeds) {
      acc.push_back(seed.scores[k].accuracy);
      f1.push_back(seed.scores[k].macro_f1);
    }
    report.summary.push_back({cfg.methods[k], mean_std(acc), mean_std(f1)});
  }
  return report;
}

inline nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  auto& seeds = j["seeds"] = nlohmann::json::array();
  for (const auto& s : report.seeds) {
    nlohmann::json row{{"seed", s.seed}, {"r", s.r}, {"eval_nodes", s.eval_nodes}};
    for (const auto& m : s.scores) {
      row["methods"][to_string(m.method)] = {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}};
    }
    if (!s.sampled_nodes.empty()) {
      row["sampled_nodes"] = s.sampled_nodes;
      row["llm_labels"] = s.sampled_labels;
    }
    if (!s.class_name_fallbacks.empty()) row["class_name_fallbacks"] = s.class_name_fallbacks;
    seeds.push_back(std::move(row));
  }
  for (const auto& m : report.summary) {
    j["summary"][to_string(m.method)] = {{"accuracy_mean", m.accuracy.mean},
                                         {"accuracy_std", m.accuracy.stddev},
                                         {"macro_f1_mean", m.macro_f1.mean},
                                         {"macro_f1_std", m.macro_f1.stddev}};
  }
  return j;
}

inline void write_csv(std::ostream& out, const ExperimentReport& report) {
  out << "seed,method,r,accuracy,macro_f1\n";
  out.precision(10);
  for (const auto& s : report.seeds) {
    for (const auto& m : s.scores) {
      out << s.seed << ',' << to_string(m.method) << ',' << s.r << ',' << m.accuracy << ',' << m.macro_f1 << '\n';
    }
  }
}

struct LinkPredictionResult {
  double auc = 0.0;
  std::vector<double> positive_scores;
  std::vector<double> negative_scores;
  std::vector<Edge> positives;
  std::vector<Edge> negatives;
};

/// Removes m edges, aggregates embeddings over the residual graph and scores
/// held-out edges against m sampled non-edges by cosine similarity.
inline LinkPredictionResult link_prediction(const TagGraph& graph, const EmbeddingMatrix& emb, std::size_t m,
                                            std::size_t layers, std::uint64_t seed, unsigned workers = 1) {
  if (m == 0) throw Error(ErrorKind::range, "link prediction needs m >= 1 held-out edges");
  const HeldOutEdges split = hold_out_edges(graph, m, seed);
  AggregateOptions opts;
  opts.workers = workers;
  const auto agg = neighborhood_aggregate(split.residual, emb, layers, opts);
  LinkPredictionResult out;
  out.positives = split.positives;
  out.negatives = split.negatives;
  for (const Edge& e : split.positives) out.positive_scores.push_back(link_score(agg, e.u, e.v));
  for (const Edge& e : split.negatives) out.negative_scores.push_back(link_score(agg, e.u, e.v));
  out.auc = auc(out.positive_scores, out.negative_scores);
  return out;
}

}  // namespace llmbp
