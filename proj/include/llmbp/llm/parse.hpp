#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "llmbp/error.hpp"
#include "llmbp/llm/types.hpp"

namespace llmbp::llm {

namespace detail {

inline bool is_ascii_alpha(char ch) noexcept {
  return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z');
}

inline bool is_ascii_alnum(char ch) noexcept { return is_ascii_alpha(ch) || (ch >= '0' && ch <= '9'); }

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

}  // namespace detail

/// Leading-token rule: skip everything that is not a letter or digit
/// (whitespace, quotes, markdown), then compare the first run of letters
/// case-insensitively against "yes" and "no".
inline Vote parse_yes_no(std::string_view raw_text) {
  std::size_t pos = 0;
  while (pos < raw_text.size() && !detail::is_ascii_alnum(raw_text[pos])) ++pos;
  std::size_t end = pos;
  while (end < raw_text.size() && detail::is_ascii_alpha(raw_text[end])) ++end;
  const auto token = detail::ascii_lower(raw_text.substr(pos, end - pos));
  if (token == "yes") return Vote::yes;
  if (token == "no") return Vote::no;
  return Vote::unparseable;
}

/// Longest class name found (case-insensitive) in the reply; ties go to the
/// earliest first occurrence, then to the lowest class id.
inline std::optional<ClassId> parse_class_label(std::string_view raw_text,
                                                std::span<const std::string> class_names) {
  const auto haystack = detail::ascii_lower(raw_text);
  std::optional<ClassId> best;
  std::size_t best_len = 0;
  std::size_t best_pos = 0;
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    if (class_names[c].empty()) continue;
    const auto needle = detail::ascii_lower(class_names[c]);
    const auto pos = haystack.find(needle);
    if (pos == std::string::npos) continue;
    const bool better = !best || needle.size() > best_len ||
                        (needle.size() == best_len && pos < best_pos);
    if (better) {
      best = static_cast<ClassId>(c);
      best_len = needle.size();
      best_pos = pos;
    }
  }
  return best;
}

/// Strict majority of the parseable votes; ties, all-unparseable and empty
/// lists abstain.
inline Decision majority_vote(std::span<const Vote> votes) {
  const auto yes = std::count(votes.begin(), votes.end(), Vote::yes);
  const auto no = std::count(votes.begin(), votes.end(), Vote::no);
  if (yes > no) return Decision::yes;
  if (no > yes) return Decision::no;
  return Decision::abstain;
}

}  // namespace llmbp::llm
