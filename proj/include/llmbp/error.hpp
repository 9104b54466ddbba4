#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace llmbp {

enum class ErrorKind : std::uint8_t {
  parse,
  out_of_range,
  missing_label,
  undefined_ratio,
  undefined_sample,
  insufficient_edges,
  format,
  data,
  degenerate_embedding,
  empty_cluster,
  missing_class,
  shape,
  prompt_spec,
  missing_texts,
  credential,
  transient,
  transport,
  request,
  mock_miss,
  estimation_failed,
  range,
  numerical_failure,
  infeasible_size,
  insufficient_shots,
  spec,
  config,
  io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::out_of_range: return "out_of_range";
    case ErrorKind::missing_label: return "missing_label";
    case ErrorKind::undefined_ratio: return "undefined_ratio";
    case ErrorKind::undefined_sample: return "undefined_sample";
    case ErrorKind::insufficient_edges: return "insufficient_edges";
    case ErrorKind::format: return "format";
    case ErrorKind::data: return "data";
    case ErrorKind::degenerate_embedding: return "degenerate_embedding";
    case ErrorKind::empty_cluster: return "empty_cluster";
    case ErrorKind::missing_class: return "missing_class";
    case ErrorKind::shape: return "shape";
    case ErrorKind::prompt_spec: return "prompt_spec";
    case ErrorKind::missing_texts: return "missing_texts";
    case ErrorKind::credential: return "credential";
    case ErrorKind::transient: return "transient";
    case ErrorKind::transport: return "transport";
    case ErrorKind::request: return "request";
    case ErrorKind::mock_miss: return "mock_miss";
    case ErrorKind::estimation_failed: return "estimation_failed";
    case ErrorKind::range: return "range";
    case ErrorKind::numerical_failure: return "numerical_failure";
    case ErrorKind::infeasible_size: return "infeasible_size";
    case ErrorKind::insufficient_shots: return "insufficient_shots";
    case ErrorKind::spec: return "spec";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library. `kind()` is stable and meant to be
/// matched on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a zero-shot cluster has no members for some class.
class EmptyClusterError : public Error {
 public:
  explicit EmptyClusterError(int class_id)
      : Error(ErrorKind::empty_cluster,
              "no sampled node was assigned to class " + std::to_string(class_id)),
        class_id_(class_id) {}

  int class_id() const noexcept { return class_id_; }

 private:
  int class_id_;
};

}  // namespace llmbp
