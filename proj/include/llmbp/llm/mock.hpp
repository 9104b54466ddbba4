#pragma once

// Offline providers: a canned response table and a ground-truth oracle.

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"
#include "llmbp/llm/hash.hpp"
#include "llmbp/llm/types.hpp"

namespace llmbp::llm {

/// Answers from a fixed table. Lookup order for a request:
///   1. the request key ("pair:3:9:trial:2")
///   2. the key without its trial suffix ("pair:3:9")
///   3. "sha256:<hex digest of the rendered prompt>"
///   4. "default"
/// A miss is a mock_miss error.
class MockProvider final : public Provider {
 public:
  MockProvider() = default;
  explicit MockProvider(std::map<std::string, std::string> table) : table_(std::move(table)) {}

  /// Table file: a JSON object mapping keys to reply strings, optionally
  /// wrapped as {"responses": {...}, "default": "..."}.
  static MockProvider from_file(const std::filesystem::path& path) { return MockProvider(read_table(path)); }

  static std::map<std::string, std::string> read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open mock table " + path.string());
    nlohmann::json j;
    try {
      in >> j;
      std::map<std::string, std::string> table;
      const auto& responses = j.contains("responses") ? j["responses"] : j;
      for (const auto& [key, value] : responses.items()) {
        if (key == "default" && !value.is_string()) continue;
        table[key] = value.get<std::string>();
      }
      if (j.contains("responses") && j.contains("default")) table["default"] = j["default"].get<std::string>();
      return table;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
  }

  void set(std::string key, std::string reply) { table_[std::move(key)] = std::move(reply); }

  /// The next `count` calls fail with a transient error.
  void inject_transient_failures(int count) { pending_failures_.store(count); }

  int calls() const noexcept { return calls_.load(); }

  LlmResponse chat(const ChatRequest& request, const DecodingParams&) override {
    ++calls_;
    if (pending_failures_.fetch_sub(1) > 0) {
      throw Error(ErrorKind::transient, "injected failure");
    }
    LlmResponse response;
    response.provider = name();
    if (auto hit = lookup(request)) {
      response.raw_text = *hit;
      return response;
    }
    throw Error(ErrorKind::mock_miss, "no canned response for key '" + request.key + "'");
  }

  std::string name() const override { return "mock"; }

 private:
  std::optional<std::string> lookup(const ChatRequest& request) const {
    if (auto it = table_.find(request.key); it != table_.end()) return it->second;
    if (const auto cut = request.key.rfind(":trial:"); cut != std::string::npos) {
      if (auto it = table_.find(request.key.substr(0, cut)); it != table_.end()) return it->second;
    }
    if (auto it = table_.find("sha256:" + sha256_hex(request.prompt.render())); it != table_.end()) {
      return it->second;
    }
    if (auto it = table_.find("default"); it != table_.end()) return it->second;
    return std::nullopt;
  }

  std::map<std::string, std::string> table_;
  std::atomic<int> pending_failures_{0};
  std::atomic<int> calls_{0};
};

struct ParsedKey {
  enum class Kind { node, pair } kind = Kind::node;
  NodeId a = 0;
  NodeId b = 0;
  int trial = 0;
};

/// Parses "node:<i>:trial:<t>" and "pair:<i>:<j>:trial:<t>".
inline std::optional<ParsedKey> parse_request_key(std::string_view key) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto colon = key.find(':');
    parts.push_back(key.substr(0, colon));
    if (colon == std::string_view::npos) break;
    key.remove_prefix(colon + 1);
  }
  auto number = [](std::string_view s, auto& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
  };
  ParsedKey parsed;
  if (parts.size() == 4 && parts[0] == "node" && parts[2] == "trial") {
    parsed.kind = ParsedKey::Kind::node;
    if (number(parts[1], parsed.a) && number(parts[3], parsed.trial)) return parsed;
  } else if (parts.size() == 5 && parts[0] == "pair" && parts[3] == "trial") {
    parsed.kind = ParsedKey::Kind::pair;
    if (number(parts[1], parsed.a) && number(parts[2], parsed.b) && number(parts[4], parsed.trial)) {
      return parsed;
    }
  }
  return std::nullopt;
}

/// Answers from ground-truth labels: node questions with the true class
/// name, pair questions with "Yes" exactly when the labels agree.
class LabelOracleProvider final : public Provider {
 public:
  LabelOracleProvider(std::vector<ClassId> labels, std::vector<std::string> class_names)
      : labels_(std::move(labels)), class_names_(std::move(class_names)) {}

  LlmResponse chat(const ChatRequest& request, const DecodingParams&) override {
    const auto key = parse_request_key(request.key);
    if (!key) throw Error(ErrorKind::mock_miss, "oracle cannot answer key '" + request.key + "'");
    LlmResponse response;
    response.provider = name();
    if (key->kind == ParsedKey::Kind::node) {
      const ClassId y = label_of(key->a);
      response.raw_text = y == kUnlabeled ? "unknown" : class_names_.at(static_cast<std::size_t>(y));
    } else {
      const ClassId ya = label_of(key->a);
      const ClassId yb = label_of(key->b);
      response.raw_text = (ya != kUnlabeled && ya == yb) ? "Yes" : "No";
    }
    return response;
  }

  std::string name() const override { return "label-oracle"; }

 private:
  ClassId label_of(NodeId i) const {
    if (i >= labels_.size()) throw Error(ErrorKind::out_of_range, "oracle asked about node " + std::to_string(i));
    return labels_[i];
  }

  std::vector<ClassId> labels_;
  std::vector<std::string> class_names_;
};

/// Wraps a callable; handy for scripted tests.
class CallbackProvider final : public Provider {
 public:
  using Fn = std::function<std::string(const ChatRequest&, const DecodingParams&)>;
  explicit CallbackProvider(Fn fn, std::string name = "callback")
      : fn_(std::move(fn)), name_(std::move(name)) {}

  LlmResponse chat(const ChatRequest& request, const DecodingParams& params) override {
    LlmResponse response;
    response.raw_text = fn_(request, params);
    response.provider = name_;
    return response;
  }

  std::string name() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

}  // namespace llmbp::llm
