#pragma once

// Brute-force posterior marginals of the pairwise MRF
//   P(Y) ∝ prod_i p_i^(0)(y_i) * prod_{(i,j) in E} psi(y_i, y_j)
// by enumerating every labeling. Only for small graphs; used as the
// reference that BP is checked against.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "llmbp/bp.hpp"
#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"
#include "llmbp/homophily.hpp"

namespace llmbp {

inline constexpr std::uint64_t kMaxExactStates = 10'000'000;

/// Number of labelings c^n, or nullopt-like max() when it exceeds `limit`.
inline std::uint64_t state_count(std::size_t n, std::size_t c, std::uint64_t limit) {
  std::uint64_t states = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (states > limit / c) return std::numeric_limits<std::uint64_t>::max();
    states *= c;
  }
  return states;
}

inline BeliefState exact_marginals(const TagGraph& graph, const BeliefState& init, const EdgePotential& psi,
                                   std::uint64_t max_states = kMaxExactStates) {
  detail::check_init(graph, init);
  const std::size_t n = graph.node_count();
  const std::size_t c = init.class_count;
  if (state_count(n, c, max_states) > max_states) {
    throw Error(ErrorKind::infeasible_size, std::to_string(c) + "^" + std::to_string(n) +
                                                " labelings exceed the enumeration bound of " +
                                                std::to_string(max_states));
  }
  const BeliefState phi = detail::floored(init);
  const double log_same = psi.log_same();
  const double log_diff = psi.log_different();

  // partial[d] = contribution of digits d..n-1: their unary terms plus the
  // edges from each of them to higher-numbered nodes. Recomputing only the
  // digits that changed keeps every log-weight an exact fixed-order sum.
  std::vector<std::size_t> y(n, 0);
  std::vector<double> partial(n + 1, 0.0);
  auto recompute = [&](std::size_t d) {
    double s = partial[d + 1] + phi.row(d)[y[d]];
    for (NodeId j : graph.neighbors(static_cast<NodeId>(d))) {
      if (j > d) s += (y[d] == y[j]) ? log_same : log_diff;
    }
    partial[d] = s;
  };
  for (std::size_t d = n; d-- > 0;) recompute(d);

  // Accumulators are kept relative to the running maximum log-weight.
  std::vector<double> acc(n * c, 0.0);
  double top = -std::numeric_limits<double>::infinity();
  while (true) {
    const double logw = partial[0];
    if (logw > top) {
      const double scale = std::isfinite(top) ? std::exp(top - logw) : 0.0;
      for (double& a : acc) a *= scale;
      top = logw;
    }
    const double w = std::exp(logw - top);
    for (std::size_t i = 0; i < n; ++i) acc[i * c + y[i]] += w;

    std::size_t d = 0;
    while (d < n && ++y[d] == c) y[d++] = 0;
    if (d == n) break;
    for (std::size_t k = d + 1; k-- > 0;) recompute(k);
  }

  BeliefState out(n, c, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = out.row(i);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += acc[i * c + k];
    for (std::size_t k = 0; k < c; ++k) row[k] = std::log(acc[i * c + k]) - std::log(z);
  }
  return out;
}

}  // namespace llmbp
