#pragma once

// Chat-completion transport speaking the common hosted-API JSON shape:
//   POST {base}/chat/completions
//   {"model": ..., "messages": [{"role": ..., "content": ...}], "temperature": ..., "max_tokens": ...}
// and reading choices[0].message.content from the reply.

#include <chrono>
#include <cstdlib>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include "llmbp/error.hpp"
#include "llmbp/llm/types.hpp"

namespace llmbp::llm {

struct HttpProviderConfig {
  /// Base URL including any path prefix, e.g. "https://api.openai.com/v1".
  std::string endpoint = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::seconds timeout{60};
};

/// Reads the key from the first non-empty variable of LLMBP_API_KEY, OPENAI_API_KEY.
inline std::string api_key_from_environment() {
  for (const char* name : {"LLMBP_API_KEY", "OPENAI_API_KEY"}) {
    if (const char* value = std::getenv(name); value && *value) return value;
  }
  return {};
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // "" or "/prefix"
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::transport, "endpoint needs a scheme: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::transport, "unsupported endpoint scheme '" + scheme + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) out.path = url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

inline nlohmann::json chat_request_body(const Prompt& prompt, const DecodingParams& params) {
  nlohmann::json body;
  body["model"] = params.model;
  body["temperature"] = params.temperature;
  body["max_tokens"] = params.max_tokens;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : prompt.messages) {
    body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return body;
}

class HttpChatProvider final : public Provider {
 public:
  explicit HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {
    url_ = split_url(config_.endpoint);
  }

  LlmResponse chat(const ChatRequest& request, const DecodingParams& params) override {
    // httplib::Client is not safe to share across threads; one per call.
    httplib::Client client(url_.origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const auto body = chat_request_body(request.prompt, params).dump();
    auto result = client.Post(url_.path + "/chat/completions", headers, body, "application/json");
    if (!result) {
      throw Error(ErrorKind::transient,
                  "request to " + config_.endpoint + " failed: " + httplib::to_string(result.error()));
    }
    const int status = result->status;
    if (status == 401 || status == 403) {
      throw Error(ErrorKind::credential, "endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
    }
    if (status == 408 || status == 429 || status >= 500) {
      throw Error(ErrorKind::transient, "HTTP " + std::to_string(status));
    }
    if (status != 200) {
      throw Error(ErrorKind::request, "HTTP " + std::to_string(status) + ": " + result->body);
    }
    LlmResponse response;
    response.provider = name();
    try {
      const auto reply = nlohmann::json::parse(result->body);
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      response.raw_text = content.is_null() ? std::string{} : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::request, std::string("malformed chat-completion reply: ") + e.what());
    }
    return response;
  }

  std::string name() const override { return "http:" + config_.endpoint; }

 private:
  HttpProviderConfig config_;
  SplitUrl url_;
};

}  // namespace llmbp::llm
