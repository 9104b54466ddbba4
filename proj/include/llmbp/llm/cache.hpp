#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "llmbp/error.hpp"
#include "llmbp/graph_io.hpp"
#include "llmbp/llm/hash.hpp"
#include "llmbp/llm/types.hpp"

namespace llmbp::llm {

/// Cache key over (prompt, model, temperature, trial). The trial index is
/// part of the key so repeated sampled trials are not collapsed into one.
inline std::string cache_key(const ChatRequest& request, const DecodingParams& params) {
  std::ostringstream material;
  material << sha256_hex(request.prompt.render()) << '\n'
           << params.model << '\n'
           << params.temperature << '\n'
           << request.trial;
  return sha256_hex(material.str());
}

/// Persists replies under `directory/<key>.json`; hits skip the inner
/// provider entirely. Writes are write-temp-then-rename.
class CachingProvider final : public Provider {
 public:
  CachingProvider(std::shared_ptr<Provider> inner, std::filesystem::path directory)
      : inner_(std::move(inner)), directory_(std::move(directory)) {
    std::filesystem::create_directories(directory_);
  }

  LlmResponse chat(const ChatRequest& request, const DecodingParams& params) override {
    const auto key = cache_key(request, params);
    const auto path = directory_ / (key + ".json");
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      try {
        const auto j = nlohmann::json::parse(in);
        LlmResponse cached;
        cached.raw_text = j.at("raw_text").get<std::string>();
        cached.provider = j.value("provider", inner_->name());
        cached.attempt_count = 0;
        cached.from_cache = true;
        return cached;
      } catch (const nlohmann::json::exception&) {
        // Unreadable entry: fall through and overwrite it.
      }
    }
    LlmResponse response = inner_->chat(request, params);
    nlohmann::json j;
    j["raw_text"] = response.raw_text;
    j["provider"] = response.provider;
    j["model"] = params.model;
    j["temperature"] = params.temperature;
    j["trial"] = request.trial;
    j["key"] = request.key;
    // Unique temp name per thread so concurrent writers never share a file.
    auto tmp = path;
    tmp += "." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw Error(ErrorKind::io, "cannot write cache entry " + tmp.string());
      out << j.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
    return response;
  }

  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<Provider> inner_;
  std::filesystem::path directory_;
};

}  // namespace llmbp::llm
