#pragma once

// Persisted inference outputs: beliefs as a float32 matrix with a JSON
// sidecar, predictions as one class id per line.

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "llmbp/bp.hpp"
#include "llmbp/embedding_io.hpp"
#include "llmbp/graph_io.hpp"
#include "llmbp/llm/hash.hpp"

namespace llmbp {

inline nlohmann::json to_json(const BpConfig& cfg) {
  return {{"iterations", cfg.iterations}, {"tau", cfg.tau},           {"epsilon_clamp", cfg.epsilon_clamp},
          {"schedule", "synchronous"},    {"mode", to_string(cfg.mode)}, {"damping", cfg.damping}};
}

/// Stable fingerprint of everything that affects the beliefs.
inline std::string config_hash(const BpConfig& cfg, double r) {
  auto j = to_json(cfg);
  j["r"] = r;
  return llm::sha256_hex(j.dump());
}

/// Writes log-beliefs to `bin_path` and metadata to the matching .json.
inline void save_beliefs(const std::filesystem::path& bin_path, const BeliefState& beliefs, const BpConfig& cfg,
                         double r) {
  write_atomically(bin_path, [&](std::ostream& o) {
    write_matrix(o, beliefs.rows, beliefs.class_count, beliefs.log_beliefs);
  });
  nlohmann::json side{{"iteration", beliefs.iteration},
                      {"values", "log_probability"},
                      {"r", r},
                      {"config", to_json(cfg)},
                      {"config_hash", config_hash(cfg, r)}};
  auto sidecar = bin_path;
  sidecar.replace_extension(".json");
  write_atomically(sidecar, [&](std::ostream& o) { o << side.dump(2) << '\n'; });
}

inline void write_predictions(std::ostream& out, std::span<const ClassId> pred) {
  for (ClassId y : pred) out << y << '\n';
}

inline void save_predictions(const std::filesystem::path& path, std::span<const ClassId> pred) {
  write_atomically(path, [&](std::ostream& o) { write_predictions(o, pred); });
}

}  // namespace llmbp
