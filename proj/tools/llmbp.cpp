// llmbp command-line driver: dataset ingestion, homophily estimation,
// inference, evaluation, link prediction and synthetic data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "llmbp/llmbp.hpp"

namespace fs = std::filesystem;
using namespace llmbp;

namespace {

struct ProviderOptions {
  bool oracle = false;
  std::string mock_table;
  std::string endpoint;
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  int timeout_s = 60;
  int max_attempts = 5;
  std::string cache_dir;
  unsigned max_in_flight = 4;

  void add_to(CLI::App& cmd) {
    cmd.add_flag("--oracle", oracle, "answer LLM queries from ground-truth labels");
    cmd.add_option("--mock", mock_table, "JSON table of canned responses")->check(CLI::ExistingFile);
    cmd.add_option("--endpoint", endpoint, "chat-completions base URL");
    cmd.add_option("--model", model, "model name sent to the endpoint")->capture_default_str();
    cmd.add_option("--temperature", temperature)->capture_default_str();
    cmd.add_option("--timeout", timeout_s, "HTTP timeout in seconds")->capture_default_str();
    cmd.add_option("--max-attempts", max_attempts, "retry cap for transient failures")->capture_default_str();
    cmd.add_option("--cache-dir", cache_dir, "response cache directory");
    cmd.add_option("--max-in-flight", max_in_flight, "concurrent LLM requests")->capture_default_str();
  }

  bool any() const { return oracle || !mock_table.empty() || !endpoint.empty(); }

  llm::DecodingParams decoding() const {
    llm::DecodingParams p;
    p.model = model;
    p.temperature = temperature;
    return p;
  }

  std::shared_ptr<llm::Provider> build(const TagGraph& graph) const {
    if (static_cast<int>(oracle) + !mock_table.empty() + !endpoint.empty() > 1) {
      throw Error(ErrorKind::config, "choose one of --oracle, --mock, --endpoint");
    }
    std::shared_ptr<llm::Provider> p;
    if (oracle) {
      if (!graph.fully_labeled()) throw Error(ErrorKind::missing_label, "--oracle needs every node labeled");
      p = std::make_shared<llm::LabelOracleProvider>(
          std::vector<ClassId>(graph.labels().begin(), graph.labels().end()), graph.class_names());
    } else if (!mock_table.empty()) {
      p = std::make_shared<llm::MockProvider>(llm::MockProvider::read_table(mock_table));
    } else if (!endpoint.empty()) {
      llm::HttpProviderConfig cfg;
      cfg.endpoint = endpoint;
      cfg.api_key = llm::api_key_from_environment();
      cfg.timeout = std::chrono::seconds(timeout_s);
      llm::RetryPolicy policy;
      policy.max_attempts = max_attempts;
      p = std::make_shared<llm::RetryingProvider>(std::make_shared<llm::HttpChatProvider>(cfg), policy);
    } else {
      throw Error(ErrorKind::config, "no LLM provider: pass --oracle, --mock or --endpoint");
    }
    if (!cache_dir.empty()) p = std::make_shared<llm::CachingProvider>(p, cache_dir);
    return p;
  }
};

struct DataOptions {
  std::string meta;
  std::string embeddings;

  void add_to(CLI::App& cmd, bool needs_embeddings) {
    cmd.add_option("--data", meta, "dataset meta.json")->required()->check(CLI::ExistingFile);
    auto* opt = cmd.add_option("--embeddings", embeddings, "node embedding matrix (overrides meta.json)");
    opt->check(CLI::ExistingFile);
    if (!needs_embeddings) opt->description("node embedding matrix to validate and copy");
  }

  Dataset load() const { return load_dataset(meta); }

  EmbeddingMatrix load_embeddings_for(const Dataset& ds) const {
    std::optional<fs::path> path;
    if (!embeddings.empty()) path = embeddings;
    else path = ds.resolve(ds.meta.embeddings_file);
    if (!path) throw Error(ErrorKind::config, "no embeddings: pass --embeddings or set embeddings in meta.json");
    auto emb = llmbp::load_embeddings(*path);
    if (emb.rows() != ds.graph.node_count()) {
      throw Error(ErrorKind::shape, path->string() + " has " + std::to_string(emb.rows()) + " rows, graph has " +
                                        std::to_string(ds.graph.node_count()) + " nodes");
    }
    return emb;
  }
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_atomically(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

void print_summary(const TagGraph& g) {
  std::cout << "nodes " << g.node_count() << "\nedges " << g.edge_count() << "\nclasses " << g.class_count()
            << '\n';
  if (g.fully_labeled() && g.edge_count() > 0) std::cout << "homophily " << homophily_ratio_exact(g) << '\n';
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
  DataOptions data;
  std::string out;
};

void run_ingest(const IngestArgs& a) {
  const Dataset ds = a.data.load();
  if (ds.graph.edge_count() == 0) std::cerr << "warning: graph has no edges\n";
  if (ds.stats.self_loops_dropped > 0) std::cerr << "warning: dropped " << ds.stats.self_loops_dropped << " self-loops\n";
  if (ds.stats.duplicates_dropped > 0) std::cerr << "warning: merged " << ds.stats.duplicates_dropped << " duplicate edges\n";
  if (!ds.graph.any_labeled()) std::cerr << "warning: no labels\n";

  GraphMetadata extra;
  std::optional<EmbeddingMatrix> emb;
  if (!a.data.embeddings.empty() || ds.meta.embeddings_file) {
    emb = a.data.load_embeddings_for(ds);
    extra.embeddings_file = "embeddings.bin";
  }
  ClassEmbeddings class_emb;
  if (const auto p = ds.resolve(ds.meta.class_embeddings_file)) {
    class_emb = load_class_embeddings(*p);
    extra.class_embeddings_file = "class_embeddings.bin";
  }
  std::optional<EmbeddingMatrix> name_emb;
  if (const auto p = ds.resolve(ds.meta.class_name_embeddings_file)) {
    name_emb = llmbp::load_embeddings(*p);
    extra.class_name_embeddings_file = "class_name_embeddings.bin";
  }

  const fs::path out(a.out);
  if (fs::exists(out / "meta.json") && fs::equivalent(out / "meta.json", a.data.meta)) {
    throw Error(ErrorKind::config, "--out must differ from the input directory");
  }
  save_dataset(ds.graph, out, extra);
  if (emb) save_matrix(out / "embeddings.bin", *emb);
  if (extra.class_embeddings_file) save_class_embeddings(out / "class_embeddings.bin", class_emb);
  if (name_emb) save_matrix(out / "class_name_embeddings.bin", *name_emb);
  print_summary(ds.graph);
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  SyntheticSpec spec;
  std::string out;
};

void run_synth(const SynthArgs& a) {
  const auto data = generate_synthetic(a.spec);
  GraphMetadata extra;
  extra.embeddings_file = "embeddings.bin";
  extra.class_embeddings_file = "class_embeddings.bin";
  const fs::path out(a.out);
  save_dataset(data.graph, out, extra);
  save_matrix(out / "embeddings.bin", data.embeddings);
  save_class_embeddings(out / "class_embeddings.bin", data.classes);
  print_summary(data.graph);
}

// ---- estimate-r ------------------------------------------------------------

struct EstimateArgs {
  DataOptions data;
  ProviderOptions provider;
  std::string t = "100";
  int trials = defaults::kVoteTrials;
  std::uint64_t seed = defaults::kFirstSeed;
  std::vector<std::size_t> sweep;
  std::string task;
  std::size_t char_budget = defaults::kPairTextCharBudget;
  std::string out;
};

std::size_t parse_t(const std::string& t, const TagGraph& g) {
  if (t == "all") return std::max<std::size_t>(g.edge_count(), 1);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(t, &used);
    if (used != t.size() || v < 1) throw std::invalid_argument(t);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, "--t must be a positive integer or 'all'");
  }
}

void run_estimate(const EstimateArgs& a) {
  const Dataset ds = a.data.load();
  const auto provider = a.provider.build(ds.graph);
  EstimateOptions opt;
  opt.trials = a.trials;
  opt.seed = a.seed;
  opt.task_description = a.task;
  opt.decoding = a.provider.decoding();
  opt.max_in_flight = a.provider.max_in_flight;
  opt.text_char_budget = a.char_budget;

  if (!a.sweep.empty()) {
    const auto rows = sensitivity_sweep(ds.graph, *provider, a.sweep, opt);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json r{{"t", row.t}, {"r", row.r}};
      if (row.gap) r["gap"] = *row.gap;
      j.push_back(r);
      std::cout << "t " << row.t << " r " << row.r;
      if (row.gap) std::cout << " gap " << *row.gap;
      std::cout << '\n';
    }
    write_json(a.out, nlohmann::json{{"seed", a.seed}, {"trials", a.trials}, {"sweep", j}});
    return;
  }
  opt.t = parse_t(a.t, ds.graph);
  const auto est = estimate_r(ds.graph, *provider, opt);
  write_json(a.out, to_json(est));
  std::cout << "r " << est.r << " (" << est.yes_pairs << " yes, " << est.no_pairs << " no, " << est.abstained_pairs
            << " abstained)\n";
  if (est.truncated_texts > 0) std::cerr << "note: truncated " << est.truncated_texts << " node texts\n";
}

// ---- anchors shared by infer and eval --------------------------------------

struct AnchorArgs {
  std::string mode = "zero-shot";
  std::size_t k = 1;
  std::string class_embeddings;
  std::size_t samples_per_class = defaults::kZeroShotSamplesPerClass;
  std::size_t k_top = defaults::kZeroShotTopK;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--mode", mode, "zero-shot | few-shot | external")->capture_default_str();
    cmd.add_option("--k", k, "labeled nodes per class in few-shot mode")->capture_default_str();
    cmd.add_option("--class-embeddings", class_embeddings, "class embedding matrix for external mode")
        ->check(CLI::ExistingFile);
    cmd.add_option("--samples-per-class", samples_per_class, "zero-shot nodes sent to the LLM per class")
        ->capture_default_str();
    cmd.add_option("--k-top", k_top, "nodes kept nearest each cluster center")->capture_default_str();
  }

  std::optional<ClassEmbeddings> external(const Dataset& ds) const {
    std::optional<fs::path> p;
    if (!class_embeddings.empty()) p = class_embeddings;
    else p = ds.resolve(ds.meta.class_embeddings_file);
    if (!p) return std::nullopt;
    return load_class_embeddings(*p);
  }

  ZeroShotOptions zero_shot(const ProviderOptions& provider) const {
    ZeroShotOptions z;
    z.samples_per_class = samples_per_class;
    z.k_top = k_top;
    z.decoding = provider.decoding();
    z.max_in_flight = provider.max_in_flight;
    return z;
  }
};

std::optional<EmbeddingMatrix> class_name_embeddings(const Dataset& ds) {
  if (const auto p = ds.resolve(ds.meta.class_name_embeddings_file)) return llmbp::load_embeddings(*p);
  return std::nullopt;
}

// ---- infer -----------------------------------------------------------------

struct InferArgs {
  DataOptions data;
  ProviderOptions provider;
  AnchorArgs anchors;
  std::string method = "bp";
  std::optional<double> r;
  std::string r_report;
  bool r_oracle = false;
  std::optional<double> tau;
  std::optional<int> iterations;
  std::size_t na_layers = defaults::kNaLayers;
  std::uint64_t seed = defaults::kFirstSeed;
  unsigned workers = 1;
  std::string out;
};

void run_infer(const InferArgs& a) {
  const Dataset ds = a.data.load();
  const auto emb = a.data.load_embeddings_for(ds);
  const Method method = parse_method(a.method);
  const AnchorMode mode = parse_anchor_mode(a.anchors.mode);
  const TagGraph& g = ds.graph;

  ClassEmbeddings anchors;
  std::vector<bool> eval_mask(g.node_count(), true);
  switch (mode) {
    case AnchorMode::external: {
      auto ext = a.anchors.external(ds);
      if (!ext) throw Error(ErrorKind::config, "external mode needs --class-embeddings");
      anchors = std::move(*ext);
      break;
    }
    case AnchorMode::few_shot: {
      const auto split = sample_few_shot(g, a.anchors.k, a.seed);
      anchors = few_shot_class_embeddings(emb, split.shots, g.class_count());
      eval_mask = split.test_mask;
      break;
    }
    case AnchorMode::zero_shot: {
      const auto provider = a.provider.build(g);
      const auto names = class_name_embeddings(ds);
      anchors = zero_shot_anchors(g, emb, *provider, a.seed, a.anchors.zero_shot(a.provider),
                                  names ? &*names : nullptr);
      break;
    }
  }

  BpConfig bp = method == Method::bp_approx ? BpConfig::approx() : BpConfig::full();
  if (a.tau) bp.tau = *a.tau;
  if (a.iterations) bp.iterations = *a.iterations;
  bp.workers = a.workers;
  bp.validate();

  double r = 0.5;
  const bool needs_r = method == Method::bp || method == Method::bp_approx;
  if (needs_r) {
    const int sources = a.r.has_value() + !a.r_report.empty() + a.r_oracle;
    if (sources != 1) throw Error(ErrorKind::config, "bp needs exactly one of --r, --r-report, --r-oracle");
    if (a.r) {
      r = *a.r;
    } else if (!a.r_report.empty()) {
      std::ifstream in(a.r_report);
      if (!in) throw Error(ErrorKind::io, "cannot open " + a.r_report);
      r = estimate_from_json(nlohmann::json::parse(in)).r;
    } else {
      r = homophily_ratio_exact(g);
    }
  }

  BeliefState beliefs;
  switch (method) {
    case Method::raw: beliefs = node_potentials(emb, anchors, bp.tau, bp.workers); break;
    case Method::na: {
      AggregateOptions opts;
      opts.workers = a.workers;
      beliefs = node_potentials(neighborhood_aggregate(g, emb, a.na_layers, opts), anchors, bp.tau, bp.workers);
      break;
    }
    case Method::bp:
    case Method::bp_approx:
      beliefs = propagate(g, node_potentials(emb, anchors, bp.tau, bp.workers),
                          edge_potential_from_r(r, bp.epsilon_clamp), bp);
      break;
  }
  const auto pred = predict(beliefs);

  const fs::path out(a.out);
  fs::create_directories(out);
  save_predictions(out / "predictions.txt", pred);
  save_beliefs(out / "beliefs.bin", beliefs, bp, r);
  save_class_embeddings(out / "class_embeddings.bin", anchors);

  nlohmann::json summary{{"method", to_string(method)}, {"mode", to_string(mode)}, {"seed", a.seed},
                         {"tau", bp.tau},          {"iterations", bp.iterations}};
  if (needs_r) summary["r"] = r;
  if (g.any_labeled()) {
    std::vector<ClassId> truth(g.labels().begin(), g.labels().end());
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (!eval_mask[i]) truth[i] = kUnlabeled;
    }
    bool any = false;
    for (ClassId y : truth) any |= y != kUnlabeled;
    if (any) {
      summary["accuracy"] = accuracy(pred, truth);
      summary["macro_f1"] = macro_f1(pred, truth, g.class_count());
      std::cout << "accuracy " << summary["accuracy"].get<double>() << "\nmacro_f1 "
                << summary["macro_f1"].get<double>() << '\n';
    }
  }
  write_json(out / "summary.json", summary);
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  DataOptions data;
  ProviderOptions provider;
  AnchorArgs anchors;
  std::vector<std::string> methods{"raw", "na", "bp", "bp-approx"};
  std::string r_source = "llm";
  double r = 0.5;
  std::size_t t = defaults::kSampledEdgesLarge;
  int trials = defaults::kVoteTrials;
  std::uint64_t first_seed = defaults::kFirstSeed;
  std::optional<std::size_t> repeats;
  unsigned workers = 1;
  unsigned seed_workers = 1;
  std::string out;
};

void run_eval(const EvalArgs& a) {
  const Dataset ds = a.data.load();
  const auto emb = a.data.load_embeddings_for(ds);
  ExperimentConfig cfg;
  cfg.mode = parse_anchor_mode(a.anchors.mode);
  cfg.shots = a.anchors.k;
  cfg.methods.clear();
  for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
  cfg.first_seed = a.first_seed;
  cfg.repeats = a.repeats.value_or(cfg.mode == AnchorMode::few_shot ? defaults::kFewShotRepeats
                                                                    : defaults::kZeroShotRepeats);
  cfg.bp.workers = cfg.approx.workers = a.workers;
  cfg.seed_workers = a.seed_workers;
  if (a.r_source == "llm") cfg.r_source = RSource::llm_estimate;
  else if (a.r_source == "oracle") cfg.r_source = RSource::oracle;
  else if (a.r_source == "fixed") cfg.r_source = RSource::fixed;
  else throw Error(ErrorKind::config, "--r-source must be llm, oracle or fixed");
  cfg.fixed_r = a.r;
  cfg.estimate.t = a.t;
  cfg.estimate.trials = a.trials;
  cfg.estimate.decoding = a.provider.decoding();
  cfg.estimate.max_in_flight = a.provider.max_in_flight;
  cfg.zero_shot = a.anchors.zero_shot(a.provider);

  std::shared_ptr<llm::Provider> provider;
  if (a.provider.any() || cfg.mode == AnchorMode::zero_shot || cfg.r_source == RSource::llm_estimate) {
    provider = a.provider.build(ds.graph);
  }
  const auto external = a.anchors.external(ds);
  const auto names = class_name_embeddings(ds);
  ExperimentInputs in{&ds.graph, &emb, external ? &*external : nullptr, names ? &*names : nullptr, provider.get()};
  const auto report = run_experiment(in, cfg);

  const fs::path out(a.out);
  fs::create_directories(out);
  write_json(out / "report.json", to_json(report));
  write_atomically(out / "report.csv", [&](std::ostream& o) { write_csv(o, report); });
  for (const auto& s : report.summary) {
    std::printf("%-10s acc %.4f +- %.4f  macro-F1 %.4f +- %.4f\n", to_string(s.method), s.accuracy.mean,
                s.accuracy.stddev, s.macro_f1.mean, s.macro_f1.stddev);
  }
}

// ---- linkpred --------------------------------------------------------------

struct LinkArgs {
  DataOptions data;
  std::size_t m = defaults::kLinkPredHoldout;
  std::size_t layers = defaults::kLinkPredLayers;
  std::uint64_t seed = defaults::kFirstSeed;
  unsigned workers = 1;
  std::string out;
};

void run_linkpred(const LinkArgs& a) {
  const Dataset ds = a.data.load();
  const auto emb = a.data.load_embeddings_for(ds);
  const auto res = link_prediction(ds.graph, emb, a.m, a.layers, a.seed, a.workers);
  write_json(a.out, nlohmann::json{{"auc", res.auc}, {"m", a.m}, {"layers", a.layers}, {"seed", a.seed}});
  std::cout << "auc " << res.auc << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief propagation over text-attributed graphs with LLM-derived potentials"};
  app.set_config("--config", "", "TOML file with option values; command-line flags take precedence");
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "validate a dataset and write it in canonical form");
  ingest.data.add_to(*ingest_cmd, false);
  ingest_cmd->add_option("--out", ingest.out, "output directory")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic planted-partition dataset");
  synth_cmd->add_option("--n", synth.spec.n)->capture_default_str();
  synth_cmd->add_option("--c", synth.spec.c)->capture_default_str();
  synth_cmd->add_option("--r", synth.spec.target_r, "target homophily")->capture_default_str();
  synth_cmd->add_option("--degree", synth.spec.mean_degree)->capture_default_str();
  synth_cmd->add_option("--dim", synth.spec.embedding_dim)->capture_default_str();
  synth_cmd->add_option("--sigma", synth.spec.noise_sigma, "embedding noise")->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "output directory")->required();

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate-r", "estimate the homophily ratio from sampled edges");
  est.data.add_to(*est_cmd, false);
  est.provider.add_to(*est_cmd);
  est_cmd->add_option("--t", est.t, "sampled edges, or 'all'")->capture_default_str();
  est_cmd->add_option("--trials", est.trials, "votes per edge (odd)")->capture_default_str();
  est_cmd->add_option("--seed", est.seed)->capture_default_str();
  est_cmd->add_option("--sweep", est.sweep, "run once per listed T")->delimiter(',');
  est_cmd->add_option("--task", est.task, "task description (defaults to meta.json)");
  est_cmd->add_option("--char-budget", est.char_budget, "characters kept per node text")->capture_default_str();
  est_cmd->add_option("--out", est.out, "report file")->required();

  InferArgs inf;
  auto* inf_cmd = app.add_subcommand("infer", "classify nodes and write predictions and beliefs");
  inf.data.add_to(*inf_cmd, true);
  inf.provider.add_to(*inf_cmd);
  inf.anchors.add_to(*inf_cmd);
  inf_cmd->add_option("--method", inf.method, "raw | na | bp | bp-approx")->capture_default_str();
  auto* r_opt = inf_cmd->add_option("--r", inf.r, "fixed homophily ratio")->check(CLI::Range(0.0, 1.0));
  auto* rr_opt = inf_cmd->add_option("--r-report", inf.r_report, "read r from an estimate-r report")
                     ->check(CLI::ExistingFile);
  auto* ro_opt = inf_cmd->add_flag("--r-oracle", inf.r_oracle, "use the exact ratio from labels");
  r_opt->excludes(rr_opt)->excludes(ro_opt);
  rr_opt->excludes(ro_opt);
  inf_cmd->add_option("--tau", inf.tau, "softmax temperature");
  inf_cmd->add_option("--iterations", inf.iterations, "BP rounds");
  inf_cmd->add_option("--na-layers", inf.na_layers)->capture_default_str();
  inf_cmd->add_option("--seed", inf.seed)->capture_default_str();
  inf_cmd->add_option("--workers", inf.workers)->capture_default_str();
  inf_cmd->add_option("--out", inf.out, "output directory")->required();

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "repeat an experiment over seeds and report mean and std");
  ev.data.add_to(*ev_cmd, true);
  ev.provider.add_to(*ev_cmd);
  ev.anchors.add_to(*ev_cmd);
  ev_cmd->add_option("--methods", ev.methods)->delimiter(',')->capture_default_str();
  ev_cmd->add_option("--r-source", ev.r_source, "llm | oracle | fixed")->capture_default_str();
  ev_cmd->add_option("--r", ev.r, "ratio for --r-source fixed")->check(CLI::Range(0.0, 1.0));
  ev_cmd->add_option("--t", ev.t, "sampled edges per estimate")->capture_default_str();
  ev_cmd->add_option("--trials", ev.trials)->capture_default_str();
  ev_cmd->add_option("--first-seed", ev.first_seed)->capture_default_str();
  ev_cmd->add_option("--repeats", ev.repeats, "number of seeds (30 zero-shot, 10 few-shot)");
  ev_cmd->add_option("--workers", ev.workers)->capture_default_str();
  ev_cmd->add_option("--seed-workers", ev.seed_workers)->capture_default_str();
  ev_cmd->add_option("--out", ev.out, "output directory")->required();

  LinkArgs lp;
  auto* lp_cmd = app.add_subcommand("linkpred", "hold out edges and score them by aggregated embeddings");
  lp.data.add_to(*lp_cmd, true);
  lp_cmd->add_option("--m", lp.m, "held-out edges and negatives")->capture_default_str();
  lp_cmd->add_option("--layers", lp.layers)->capture_default_str();
  lp_cmd->add_option("--seed", lp.seed)->capture_default_str();
  lp_cmd->add_option("--workers", lp.workers)->capture_default_str();
  lp_cmd->add_option("--out", lp.out, "report file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) run_ingest(ingest);
    else if (*synth_cmd) run_synth(synth);
    else if (*est_cmd) run_estimate(est);
    else if (*inf_cmd) run_infer(inf);
    else if (*ev_cmd) run_eval(ev);
    else if (*lp_cmd) run_linkpred(lp);
  } catch (const EmptyClusterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
