#pragma once

// Homophily level r from LLM same-class judgments on sampled edges, and the
// scalar edge potential built from it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmbp/defaults.hpp"
#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"
#include "llmbp/llm/parse.hpp"
#include "llmbp/llm/prompt.hpp"
#include "llmbp/llm/types.hpp"
#include "llmbp/parallel.hpp"

namespace llmbp {

enum class EdgePotentialKind { homophily_scalar };

/// psi(a, a) = r, psi(a, b) = 1 - r for a != b, with r clamped away from 0 and 1.
struct EdgePotential {
  EdgePotentialKind kind = EdgePotentialKind::homophily_scalar;
  double r_clamped = 0.5;
  double epsilon = defaults::kRatioClampEpsilon;

  double same() const noexcept { return r_clamped; }
  double different() const noexcept { return 1.0 - r_clamped; }
  double operator()(ClassId a, ClassId b) const noexcept { return a == b ? same() : different(); }
  double log_same() const { return std::log(same()); }
  double log_different() const { return std::log(different()); }

  friend bool operator==(const EdgePotential&, const EdgePotential&) = default;
};

inline EdgePotential edge_potential_from_r(double r, double epsilon = defaults::kRatioClampEpsilon) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw Error(ErrorKind::range, "homophily ratio " + std::to_string(r) + " is outside [0, 1]");
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw Error(ErrorKind::range, "clamp epsilon must lie in (0, 0.5)");
  }
  EdgePotential psi;
  psi.r_clamped = std::clamp(r, epsilon, 1.0 - epsilon);
  psi.epsilon = epsilon;
  return psi;
}

struct PairAudit {
  Edge pair;
  std::vector<llm::Vote> votes;
  llm::Decision decision = llm::Decision::abstain;
};

struct HomophilyEstimate {
  double r = 0.0;
  /// Number of pairs actually judged: min(T, |E|).
  std::size_t sample_size = 0;
  std::size_t requested_t = 0;
  int trials_per_pair = 1;
  std::size_t yes_pairs = 0;
  std::size_t no_pairs = 0;
  std::size_t abstained_pairs = 0;
  std::size_t truncated_texts = 0;
  std::vector<PairAudit> per_pair_votes;
  std::uint64_t seed = 0;
  std::string provider;
  std::string model;
  double temperature = 0.0;
  std::string template_version{llm::kPairTemplateVersion};
};

struct EstimateOptions {
  std::size_t t = defaults::kSampledEdgesLarge;
  int trials = defaults::kVoteTrials;
  std::uint64_t seed = defaults::kFirstSeed;
  /// Falls back to the graph's task description when empty.
  std::string task_description;
  llm::DecodingParams decoding{};
  unsigned max_in_flight = 4;
  /// Per-text character budget; longer texts keep their head.
  std::size_t text_char_budget = defaults::kPairTextCharBudget;
};

/// Samples T edges, asks `trials` same-class questions per pair, majority
/// votes each pair and returns r = yes / (yes + no) over decided pairs.
inline HomophilyEstimate estimate_r(const TagGraph& graph, llm::Provider& provider,
                                    const EstimateOptions& options) {
  if (options.t == 0) throw Error(ErrorKind::range, "T must be >= 1");
  if (options.trials < 1 || options.trials % 2 == 0) {
    throw Error(ErrorKind::range, "trials must be odd and >= 1");
  }
  if (!graph.has_texts()) throw Error(ErrorKind::missing_texts, "homophily estimation needs node texts");
  const std::string task =
      options.task_description.empty() ? graph.task_description() : options.task_description;
  if (task.empty()) throw Error(ErrorKind::prompt_spec, "no task description for pair prompts");

  const EdgeSample sample = sample_edges(graph, options.t, options.seed);
  const std::size_t pairs = sample.pairs.size();
  const auto trials = static_cast<std::size_t>(options.trials);

  HomophilyEstimate est;
  est.requested_t = options.t;
  est.sample_size = pairs;
  est.trials_per_pair = options.trials;
  est.seed = options.seed;
  est.provider = provider.name();
  est.model = options.decoding.model;
  est.temperature = options.decoding.temperature;

  std::vector<llm::Prompt> prompts;
  prompts.reserve(pairs);
  auto prepare = [&](NodeId node) {
    const std::string& raw = graph.text(node);
    std::string text = llm::truncate_head(raw, options.text_char_budget);
    if (text.size() != raw.size()) ++est.truncated_texts;
    if (text.empty()) text = "(no text)";
    return text;
  };
  for (const Edge& e : sample.pairs) {
    const auto a = prepare(e.u);
    const auto b = prepare(e.v);
    prompts.push_back(llm::build_pair_prompt(a, b, task));
  }

  std::vector<llm::Vote> votes(pairs * trials, llm::Vote::unparseable);
  parallel_for_dynamic(pairs * trials, options.max_in_flight, [&](std::size_t k) {
    const std::size_t p = k / trials;
    const int trial = static_cast<int>(k % trials);
    llm::ChatRequest request{prompts[p], llm::pair_key(sample.pairs[p].u, sample.pairs[p].v, trial), trial};
    votes[k] = llm::parse_yes_no(provider.chat(request, options.decoding).raw_text);
  });

  est.per_pair_votes.reserve(pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    PairAudit audit;
    audit.pair = sample.pairs[p];
    audit.votes.assign(votes.begin() + static_cast<std::ptrdiff_t>(p * trials),
                       votes.begin() + static_cast<std::ptrdiff_t>((p + 1) * trials));
    audit.decision = llm::majority_vote(audit.votes);
    switch (audit.decision) {
      case llm::Decision::yes: ++est.yes_pairs; break;
      case llm::Decision::no: ++est.no_pairs; break;
      case llm::Decision::abstain: ++est.abstained_pairs; break;
    }
    est.per_pair_votes.push_back(std::move(audit));
  }
  if (est.yes_pairs + est.no_pairs == 0) {
    throw Error(ErrorKind::estimation_failed, "every sampled pair abstained");
  }
  est.r = static_cast<double>(est.yes_pairs) / static_cast<double>(est.yes_pairs + est.no_pairs);
  return est;
}

struct SensitivityRow {
  std::size_t t = 0;
  double r = 0.0;
  std::optional<double> gap;
};

/// One estimate per T. The gap column is |r - exact ratio| when the graph
/// is fully labeled.
inline std::vector<SensitivityRow> sensitivity_sweep(const TagGraph& graph, llm::Provider& provider,
                                                     std::span<const std::size_t> t_values,
                                                     EstimateOptions options) {
  std::optional<double> truth;
  if (graph.fully_labeled() && graph.edge_count() > 0) truth = homophily_ratio_exact(graph);
  std::vector<SensitivityRow> rows;
  for (std::size_t t : t_values) {
    options.t = t;
    const auto est = estimate_r(graph, provider, options);
    SensitivityRow row{t, est.r, std::nullopt};
    if (truth) row.gap = std::abs(est.r - *truth);
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json to_json(const HomophilyEstimate& est) {
  nlohmann::json j;
  j["r"] = est.r;
  j["sample_size"] = est.sample_size;
  j["requested_t"] = est.requested_t;
  j["trials"] = est.trials_per_pair;
  j["seed"] = est.seed;
  j["yes_pairs"] = est.yes_pairs;
  j["no_pairs"] = est.no_pairs;
  j["abstained_pairs"] = est.abstained_pairs;
  j["truncated_texts"] = est.truncated_texts;
  j["provider"] = est.provider;
  j["model"] = est.model;
  j["temperature"] = est.temperature;
  j["template_version"] = est.template_version;
  auto& audit = j["pairs"] = nlohmann::json::array();
  for (const auto& p : est.per_pair_votes) {
    nlohmann::json votes = nlohmann::json::array();
    for (auto v : p.votes) votes.push_back(llm::to_string(v));
    audit.push_back({{"i", p.pair.u}, {"j", p.pair.v}, {"votes", votes},
                     {"decision", llm::to_string(p.decision)}});
  }
  return j;
}

/// Reads the fields the inference step needs back from a report.
inline HomophilyEstimate estimate_from_json(const nlohmann::json& j) {
  HomophilyEstimate est;
  try {
    est.r = j.at("r").get<double>();
    est.sample_size = j.value("sample_size", std::size_t{0});
    est.requested_t = j.value("requested_t", est.sample_size);
    est.trials_per_pair = j.value("trials", 1);
    est.seed = j.value("seed", std::uint64_t{0});
    est.yes_pairs = j.value("yes_pairs", std::size_t{0});
    est.no_pairs = j.value("no_pairs", std::size_t{0});
    est.abstained_pairs = j.value("abstained_pairs", std::size_t{0});
    est.truncated_texts = j.value("truncated_texts", std::size_t{0});
    est.provider = j.value("provider", std::string{});
    est.model = j.value("model", std::string{});
    est.temperature = j.value("temperature", 0.0);
    est.template_version = j.value("template_version", std::string(llm::kPairTemplateVersion));
    if (j.contains("pairs")) {
      for (const auto& p : j["pairs"]) {
        PairAudit audit;
        audit.pair = {p.at("i").get<NodeId>(), p.at("j").get<NodeId>()};
        for (const auto& v : p.at("votes")) {
          const auto s = v.get<std::string>();
          audit.votes.push_back(s == "yes" ? llm::Vote::yes : s == "no" ? llm::Vote::no : llm::Vote::unparseable);
        }
        const auto d = p.at("decision").get<std::string>();
        audit.decision = d == "yes" ? llm::Decision::yes : d == "no" ? llm::Decision::no : llm::Decision::abstain;
        est.per_pair_votes.push_back(std::move(audit));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("homophily report: ") + e.what());
  }
  if (!(est.r >= 0.0 && est.r <= 1.0)) throw Error(ErrorKind::range, "report r outside [0, 1]");
  return est;
}

}  // namespace llmbp
