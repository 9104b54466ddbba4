#pragma once

// Prompt builders. All of them are pure: identical inputs give
// byte-identical output.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmbp/error.hpp"
#include "llmbp/llm/types.hpp"

namespace llmbp::llm {

inline constexpr std::string_view kInstructMarker = "<instruct>";
inline constexpr std::string_view kQueryMarker = "<query>";
inline constexpr std::string_view kResponseMarker = "<response>";
inline constexpr std::string_view kClassifierSystemPrompt =
    "You are a chatbot who is an expert in text classification";
inline constexpr std::string_view kPairTemplateVersion = "pair-v1";
inline constexpr std::string_view kPairInstruction =
    "Answer strictly Yes or No: do these two belong to the same class?";

namespace detail {

inline void require_single_line(std::string_view value, std::string_view what) {
  if (value.find('\n') != std::string_view::npos) {
    throw Error(ErrorKind::prompt_spec, std::string(what) + " must not contain newlines");
  }
}

inline void require_classes(std::span<const std::string> class_names) {
  if (class_names.empty()) throw Error(ErrorKind::prompt_spec, "class list is empty");
  for (const auto& name : class_names) {
    if (name.empty()) throw Error(ErrorKind::prompt_spec, "class name is empty");
    require_single_line(name, "class name");
  }
}

inline void require_task(std::string_view task) {
  if (task.empty()) throw Error(ErrorKind::prompt_spec, "task description is empty");
  require_single_line(task, "task description");
}

}  // namespace detail

/// Encoder input that conditions the node text on the task and its classes:
///
///   <instruct>
///   Given the {task}, classify it into one of the following {k} classes:
///   {class 1}
///   ...
///   {class k}
///   <query>
///   {node text}
///   <response>
inline std::string build_task_adaptive_prompt(std::string_view task_description,
                                              std::span<const std::string> class_names,
                                              std::string_view node_text) {
  detail::require_task(task_description);
  detail::require_classes(class_names);
  std::string out;
  out += kInstructMarker;
  out += "\nGiven the ";
  out += task_description;
  out += ", classify it into one of the following ";
  out += std::to_string(class_names.size());
  out += " classes:\n";
  for (const auto& name : class_names) {
    out += name;
    out += '\n';
  }
  out += kQueryMarker;
  out += '\n';
  out += node_text;
  out += '\n';
  out += kResponseMarker;
  return out;
}

struct TaskAdaptiveFields {
  std::string task_description;
  std::vector<std::string> class_names;
  std::string node_text;
};

/// Inverse of build_task_adaptive_prompt; nullopt if `prompt` does not have
/// that layout.
inline std::optional<TaskAdaptiveFields> parse_task_adaptive_prompt(std::string_view prompt) {
  auto take_line = [&](std::string_view& rest) -> std::optional<std::string_view> {
    const auto nl = rest.find('\n');
    if (nl == std::string_view::npos) return std::nullopt;
    auto line = rest.substr(0, nl);
    rest.remove_prefix(nl + 1);
    return line;
  };
  std::string_view rest = prompt;
  const auto marker = take_line(rest);
  if (!marker || *marker != kInstructMarker) return std::nullopt;
  const auto header = take_line(rest);
  if (!header) return std::nullopt;
  constexpr std::string_view kHead = "Given the ";
  constexpr std::string_view kMid = ", classify it into one of the following ";
  constexpr std::string_view kTail = " classes:";
  if (!header->starts_with(kHead) || !header->ends_with(kTail)) return std::nullopt;
  const auto mid = header->rfind(kMid);
  if (mid == std::string_view::npos || mid < kHead.size()) return std::nullopt;

  TaskAdaptiveFields fields;
  fields.task_description = std::string(header->substr(kHead.size(), mid - kHead.size()));
  const auto count_text = header->substr(mid + kMid.size(),
                                         header->size() - mid - kMid.size() - kTail.size());
  std::size_t count = 0;
  for (char ch : count_text) {
    if (ch < '0' || ch > '9') return std::nullopt;
    count = count * 10 + static_cast<std::size_t>(ch - '0');
  }
  if (count_text.empty()) return std::nullopt;
  for (std::size_t k = 0; k < count; ++k) {
    const auto name = take_line(rest);
    if (!name) return std::nullopt;
    fields.class_names.emplace_back(*name);
  }
  const auto query = take_line(rest);
  if (!query || *query != kQueryMarker) return std::nullopt;
  const std::string suffix = "\n" + std::string(kResponseMarker);
  if (!rest.ends_with(suffix)) return std::nullopt;
  fields.node_text = std::string(rest.substr(0, rest.size() - suffix.size()));
  return fields;
}

/// Direct classification prompt for a chat model.
inline Prompt build_node_label_prompt(std::string_view task_description,
                                      std::span<const std::string> class_names,
                                      std::string_view node_text) {
  detail::require_task(task_description);
  detail::require_classes(class_names);
  std::string user = "We have ";
  user += task_description;
  user += " from the following ";
  user += std::to_string(class_names.size());
  user += class_names.size() == 1 ? " category: " : " categories: ";
  for (std::size_t k = 0; k < class_names.size(); ++k) {
    if (k) user += ", ";
    user += class_names[k];
  }
  user += "\nThe text is as follows:\n";
  user += node_text;
  user += "\nPlease tell which category the text belongs to:";
  return Prompt{{{Role::system, std::string(kClassifierSystemPrompt)}, {Role::user, std::move(user)}}};
}

/// Same-class judgment for two connected nodes.
inline Prompt build_pair_prompt(std::string_view text_i, std::string_view text_j,
                                std::string_view task_description) {
  if (text_i.empty() || text_j.empty()) {
    throw Error(ErrorKind::prompt_spec, "pair prompt needs two non-empty texts");
  }
  detail::require_task(task_description);
  std::string user = "We have two connected nodes from a graph of ";
  user += task_description;
  user += ".\nNode A: ";
  user += text_i;
  user += "\nNode B: ";
  user += text_j;
  user += '\n';
  user += kPairInstruction;
  return Prompt{{{Role::system, std::string(kClassifierSystemPrompt)}, {Role::user, std::move(user)}}};
}

enum class PromptKind { task_adaptive_encode, node_label, pair_same_class };

struct PromptSpec {
  PromptKind kind = PromptKind::node_label;
  std::string task_description;
  std::vector<std::string> class_info;
  /// One text for node prompts, two for the pair prompt.
  std::vector<std::string> body;
};

/// Flat rendering of any prompt kind.
inline std::string render(const PromptSpec& spec) {
  switch (spec.kind) {
    case PromptKind::task_adaptive_encode:
      if (spec.body.size() != 1) throw Error(ErrorKind::prompt_spec, "expected one node text");
      return build_task_adaptive_prompt(spec.task_description, spec.class_info, spec.body[0]);
    case PromptKind::node_label:
      if (spec.body.size() != 1) throw Error(ErrorKind::prompt_spec, "expected one node text");
      return build_node_label_prompt(spec.task_description, spec.class_info, spec.body[0]).render();
    case PromptKind::pair_same_class:
      if (spec.body.size() != 2) throw Error(ErrorKind::prompt_spec, "expected two node texts");
      return build_pair_prompt(spec.body[0], spec.body[1], spec.task_description).render();
  }
  throw Error(ErrorKind::prompt_spec, "unknown prompt kind");
}

/// Keeps the first `max_chars` code points of a UTF-8 string. Returns the
/// input unchanged when it already fits.
inline std::string truncate_head(std::string_view text, std::size_t max_chars) {
  std::size_t chars = 0;
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    const auto byte = static_cast<unsigned char>(text[pos]);
    if ((byte & 0xC0) != 0x80) {
      if (chars == max_chars) return std::string(text.substr(0, pos));
      ++chars;
    }
  }
  return std::string(text);
}

}  // namespace llmbp::llm
