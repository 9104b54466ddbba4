#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <utility>

#include "llmbp/error.hpp"
#include "llmbp/llm/types.hpp"

namespace llmbp::llm {

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  /// Delay before attempt `attempt + 1`, for attempt >= 1.
  std::chrono::milliseconds backoff_after(int attempt) const {
    double delay = static_cast<double>(initial_backoff.count());
    for (int k = 1; k < attempt; ++k) delay *= multiplier;
    delay = std::min(delay, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<long long>(delay));
  }
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

inline void sleep_for_real(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Retries transient failures of the wrapped provider with exponential
/// backoff. Credential and request errors surface immediately; running out
/// of attempts becomes a transport error.
class RetryingProvider final : public Provider {
 public:
  RetryingProvider(std::shared_ptr<Provider> inner, RetryPolicy policy = {},
                   SleepFn sleep = sleep_for_real)
      : inner_(std::move(inner)), policy_(policy), sleep_(std::move(sleep)) {
    if (policy_.max_attempts < 1) throw Error(ErrorKind::config, "max_attempts must be >= 1");
  }

  LlmResponse chat(const ChatRequest& request, const DecodingParams& params) override {
    std::string last_error;
    for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
      try {
        LlmResponse response = inner_->chat(request, params);
        response.attempt_count = attempt;
        return response;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::transient) throw;
        last_error = e.what();
      }
      if (attempt < policy_.max_attempts) sleep_(policy_.backoff_after(attempt));
    }
    throw Error(ErrorKind::transport, inner_->name() + ": giving up after " +
                                          std::to_string(policy_.max_attempts) +
                                          " attempts; last error: " + last_error);
  }

  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<Provider> inner_;
  RetryPolicy policy_;
  SleepFn sleep_;
};

}  // namespace llmbp::llm
