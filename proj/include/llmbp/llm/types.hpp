#pragma once

#include <string>
#include <variant>
#include <vector>

#include "llmbp/graph.hpp"

namespace llmbp::llm {

enum class Role { system, user, assistant };

inline const char* to_string(Role role) noexcept {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// A rendered chat prompt.
struct Prompt {
  std::vector<ChatMessage> messages;

  /// Flat text form used for hashing and length accounting: each message as
  /// "<role>: <content>" joined by newlines.
  std::string render() const {
    std::string out;
    for (std::size_t k = 0; k < messages.size(); ++k) {
      if (k) out += '\n';
      out += to_string(messages[k].role);
      out += ": ";
      out += messages[k].content;
    }
    return out;
  }

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

/// A prompt plus a routing key. Keys name the logical question so that mock
/// and oracle providers can answer without parsing prompt text:
///   "node:<i>:trial:<t>"        label node i
///   "pair:<i>:<j>:trial:<t>"    are i and j in the same class
struct ChatRequest {
  Prompt prompt;
  std::string key;
  int trial = 0;
};

struct DecodingParams {
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  int max_tokens = 64;
};

enum class Vote { yes, no, unparseable };
enum class Decision { yes, no, abstain };

inline const char* to_string(Vote v) noexcept {
  switch (v) {
    case Vote::yes: return "yes";
    case Vote::no: return "no";
    case Vote::unparseable: return "unparseable";
  }
  return "unparseable";
}

inline const char* to_string(Decision d) noexcept {
  switch (d) {
    case Decision::yes: return "yes";
    case Decision::no: return "no";
    case Decision::abstain: return "abstain";
  }
  return "abstain";
}

struct LlmResponse {
  std::string raw_text;
  /// Filled by callers that parse the reply: a class id or a yes/no vote.
  std::variant<std::monostate, ClassId, Vote> parsed;
  int attempt_count = 1;
  std::string provider;
  bool from_cache = false;
};

/// Chat-completion backend. Implementations must be safe to call from
/// several threads at once.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual LlmResponse chat(const ChatRequest& request, const DecodingParams& params) = 0;
  virtual std::string name() const = 0;
};

inline std::string node_key(NodeId node, int trial) {
  return "node:" + std::to_string(node) + ":trial:" + std::to_string(trial);
}

inline std::string pair_key(NodeId a, NodeId b, int trial) {
  return "pair:" + std::to_string(a) + ":" + std::to_string(b) + ":trial:" + std::to_string(trial);
}

}  // namespace llmbp::llm
