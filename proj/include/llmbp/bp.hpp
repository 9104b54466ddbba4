#pragma once

// Node potentials, log-space loopy belief propagation with the scalar
// homophily potential, and its one-step linear approximation.
//
// Messages live on directed adjacency entries: entry e of node i (pointing
// at j = adjacency[e]) stores log m_{j->i}, the message i receives from j.
// Each round is synchronous: every message is recomputed from the previous
// round's beliefs and messages, then every belief from the new messages.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmbp/defaults.hpp"
#include "llmbp/embedding.hpp"
#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"
#include "llmbp/homophily.hpp"
#include "llmbp/parallel.hpp"

namespace llmbp {

/// n x c matrix of per-node log-probabilities after `iteration` rounds.
struct BeliefState {
  std::size_t rows = 0;
  std::size_t class_count = 0;
  std::vector<double> log_beliefs;
  int iteration = 0;

  BeliefState() = default;
  BeliefState(std::size_t n, std::size_t c, int k = 0)
      : rows(n), class_count(c), log_beliefs(n * c, 0.0), iteration(k) {}

  std::span<const double> row(std::size_t i) const {
    return {log_beliefs.data() + i * class_count, class_count};
  }
  std::span<double> row(std::size_t i) { return {log_beliefs.data() + i * class_count, class_count}; }

  friend bool operator==(const BeliefState&, const BeliefState&) = default;
};

enum class BpMode { full_bp, linear_approx };
enum class BpSchedule { synchronous };

constexpr std::string_view to_string(BpMode mode) noexcept {
  return mode == BpMode::full_bp ? "full_bp" : "linear_approx";
}

struct BpConfig {
  int iterations = defaults::kBpIterations;
  double tau = defaults::kTauBp;
  double epsilon_clamp = defaults::kRatioClampEpsilon;
  BpSchedule schedule = BpSchedule::synchronous;
  BpMode mode = BpMode::full_bp;
  /// Weight of the freshly computed message; 1.0 means no damping.
  double damping = defaults::kDamping;
  unsigned workers = 1;

  static BpConfig full() { return {}; }
  static BpConfig approx() {
    BpConfig c;
    c.iterations = defaults::kApproxIterations;
    c.tau = defaults::kTauApprox;
    c.mode = BpMode::linear_approx;
    return c;
  }

  void validate() const {
    if (iterations < 1) throw Error(ErrorKind::config, "BP needs at least one iteration");
    if (!(tau > 0.0)) throw Error(ErrorKind::config, "tau must be positive");
    if (!(damping > 0.0 && damping <= 1.0)) throw Error(ErrorKind::config, "damping must lie in (0, 1]");
    if (!(epsilon_clamp > 0.0 && epsilon_clamp < 0.5)) {
      throw Error(ErrorKind::config, "epsilon_clamp must lie in (0, 0.5)");
    }
  }
};

/// log(sum(exp(x))) with the usual max shift. -inf for an all -inf input.
inline double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - top);
  return top + std::log(sum);
}

/// Subtracts LSE(row) so that exp(row) sums to one.
inline void normalize_log_row(std::span<double> row) {
  const double lse = log_sum_exp(row);
  for (double& v : row) v -= lse;
}

/// p_i(y) = softmax_y(cos(h_i, q_y) / tau), returned in log space.
inline BeliefState node_potentials(const EmbeddingMatrix& emb, const ClassEmbeddings& classes,
                                   double tau, unsigned workers = 1) {
  if (!(tau > 0.0)) throw Error(ErrorKind::config, "tau must be positive");
  if (emb.dim() != classes.dim()) {
    throw Error(ErrorKind::shape, "node embedding dim " + std::to_string(emb.dim()) +
                                      " != class embedding dim " + std::to_string(classes.dim()));
  }
  const std::size_t c = classes.class_count();
  if (c == 0) throw Error(ErrorKind::shape, "no class embeddings");
  for (std::size_t k = 0; k < c; ++k) {
    if (squared_norm(classes.matrix.row(k)) == 0.0) {
      throw Error(ErrorKind::degenerate_embedding, "class embedding " + std::to_string(k) + " is zero");
    }
  }
  BeliefState out(emb.rows(), c, 0);
  parallel_for(emb.rows(), workers, [&](std::size_t i) {
    if (squared_norm(emb.row(i)) == 0.0) {
      throw Error(ErrorKind::degenerate_embedding, "node " + std::to_string(i) + " has a zero embedding");
    }
    auto row = out.row(i);
    for (std::size_t k = 0; k < c; ++k) row[k] = cosine(emb.row(i), classes.matrix.row(k)) / tau;
    normalize_log_row(row);
  });
  return out;
}

namespace detail {

inline void check_init(const TagGraph& graph, const BeliefState& init) {
  if (init.rows != graph.node_count()) {
    throw Error(ErrorKind::shape, "belief rows " + std::to_string(init.rows) + " != node_count " +
                                      std::to_string(graph.node_count()));
  }
  if (init.class_count == 0 || init.log_beliefs.size() != init.rows * init.class_count) {
    throw Error(ErrorKind::shape, "malformed belief state");
  }
  for (double v : init.log_beliefs) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorKind::numerical_failure, "initial beliefs contain NaN or +inf");
    }
  }
}

/// Copy of `init` with entries floored and rows renormalized.
inline BeliefState floored(const BeliefState& init) {
  BeliefState out = init;
  for (std::size_t i = 0; i < out.rows; ++i) {
    auto row = out.row(i);
    for (double& v : row) v = std::max(v, defaults::kLogFloor);
    normalize_log_row(row);
  }
  return out;
}

inline void require_finite(std::span<const double> values, int iteration, std::string_view what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::numerical_failure,
                  std::string(what) + " became non-finite at iteration " + std::to_string(iteration));
    }
  }
}

/// For each directed entry e = (i -> j), the entry of j that points back at i.
inline std::vector<std::size_t> reverse_entries(const TagGraph& graph) {
  const auto offsets = graph.offsets();
  const auto adjacency = graph.adjacency();
  std::vector<std::size_t> rev(adjacency.size());
  for (NodeId i = 0; i < graph.node_count(); ++i) {
    for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
      const NodeId j = adjacency[e];
      const auto nb = graph.neighbors(j);
      const auto it = std::lower_bound(nb.begin(), nb.end(), i);
      rev[e] = offsets[j] + static_cast<std::size_t>(it - nb.begin());
    }
  }
  return rev;
}

}  // namespace detail

/// Synchronous log-space loopy BP for `config.iterations` rounds:
///
///   log m_{j->i}(y_i) = LSE_{y_j}[log psi(y_i, y_j) + log p_j(y_j) - log m_{i->j}(y_j)]
///   log p_i(y_i)      = log p_i^(0)(y_i) + sum_{j in N(i)} log m_{j->i}(y_i)
///
/// with every message and belief renormalized each round. Messages start
/// uniform (1/c). Output is bit-identical for any worker count.
inline BeliefState run_lbp(const TagGraph& graph, const BeliefState& init, const EdgePotential& psi,
                           const BpConfig& config) {
  config.validate();
  detail::check_init(graph, init);
  if (!(psi.r_clamped > 0.0 && psi.r_clamped < 1.0)) {
    throw Error(ErrorKind::range, "edge potential must be strictly positive");
  }
  const std::size_t c = init.class_count;
  const std::size_t n = graph.node_count();
  const auto offsets = graph.offsets();
  const auto adjacency = graph.adjacency();
  const std::size_t entries = adjacency.size();
  const auto rev = detail::reverse_entries(graph);
  const double r = psi.r_clamped;
  const double damping = config.damping;

  const BeliefState phi = detail::floored(init);
  BeliefState belief = phi;
  BeliefState next(n, c);
  std::vector<double> messages(entries * c, -std::log(static_cast<double>(c)));
  std::vector<double> fresh(entries * c);

  for (int k = 1; k <= config.iterations; ++k) {
    parallel_for(entries, config.workers, [&](std::size_t e) {
      // Entry e belongs to receiver i and points at sender j.
      const NodeId j = adjacency[e];
      const auto sender = belief.row(j);
      const double* back = messages.data() + rev[e] * c;  // log m_{i->j}
      thread_local std::vector<double> t, ex, prefix;
      t.resize(c);
      ex.resize(c);
      prefix.resize(c + 1);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < c; ++y) {
        t[y] = std::max(sender[y] - back[y], defaults::kLogFloor);
        top = std::max(top, t[y]);
      }
      prefix[0] = 0.0;
      for (std::size_t y = 0; y < c; ++y) {
        ex[y] = std::exp(t[y] - top);
        prefix[y + 1] = prefix[y] + ex[y];
      }
      // suffix sums are accumulated backwards so rest_y never cancels
      double suffix = 0.0;
      double* out = fresh.data() + e * c;
      for (std::size_t y = c; y-- > 0;) {
        const double rest = prefix[y] + suffix;
        out[y] = top + std::log(r * ex[y] + (1.0 - r) * rest);
        suffix += ex[y];
      }
      std::span<double> msg(out, c);
      normalize_log_row(msg);
      if (damping < 1.0) {
        const double* old = messages.data() + e * c;
        for (std::size_t y = 0; y < c; ++y) msg[y] = damping * msg[y] + (1.0 - damping) * old[y];
        normalize_log_row(msg);
      }
      detail::require_finite(msg, k, "message");
    });
    messages.swap(fresh);

    parallel_for(n, config.workers, [&](std::size_t i) {
      auto row = next.row(i);
      const auto base = phi.row(i);
      std::copy(base.begin(), base.end(), row.begin());
      for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
        const double* m = messages.data() + e * c;
        for (std::size_t y = 0; y < c; ++y) row[y] += m[y];
      }
      normalize_log_row(row);
      detail::require_finite(row, k, "belief of node " + std::to_string(i));
    });
    std::swap(belief, next);
    belief.iteration = k;
  }
  return belief;
}

/// One linear step: log p_i = log p_i^(0) + sgn(log(r / (1 - r))) * sum_j log p_j^(0),
/// renormalized per row. For r = 0.5 the sign is zero and `init` is returned
/// unchanged.
inline BeliefState run_lbp_approx(const TagGraph& graph, const BeliefState& init, double r,
                                  double epsilon = defaults::kRatioClampEpsilon, unsigned workers = 1) {
  detail::check_init(graph, init);
  const double rc = edge_potential_from_r(r, epsilon).r_clamped;
  const double log_odds = std::log(rc / (1.0 - rc));
  const double sign = log_odds > 0.0 ? 1.0 : (log_odds < 0.0 ? -1.0 : 0.0);
  if (sign == 0.0) {
    BeliefState same = init;
    same.iteration = 1;
    return same;
  }
  const BeliefState phi = detail::floored(init);
  const std::size_t c = init.class_count;
  BeliefState out(init.rows, c, 1);
  parallel_for(init.rows, workers, [&](std::size_t i) {
    auto row = out.row(i);
    const auto base = phi.row(i);
    std::copy(base.begin(), base.end(), row.begin());
    for (NodeId j : graph.neighbors(static_cast<NodeId>(i))) {
      const auto nb = phi.row(j);
      for (std::size_t y = 0; y < c; ++y) row[y] += sign * nb[y];
    }
    normalize_log_row(row);
    detail::require_finite(row, 1, "belief of node " + std::to_string(i));
  });
  return out;
}

/// Dispatches on config.mode. The linear mode reads r from `psi`.
inline BeliefState propagate(const TagGraph& graph, const BeliefState& init, const EdgePotential& psi,
                             const BpConfig& config) {
  if (config.mode == BpMode::linear_approx) {
    return run_lbp_approx(graph, init, psi.r_clamped, config.epsilon_clamp, config.workers);
  }
  return run_lbp(graph, init, psi, config);
}

/// Per-row argmax; exact ties go to the lowest class id.
inline std::vector<ClassId> predict(const BeliefState& beliefs) {
  std::vector<ClassId> out(beliefs.rows);
  for (std::size_t i = 0; i < beliefs.rows; ++i) {
    const auto row = beliefs.row(i);
    std::size_t best = 0;
    for (std::size_t y = 1; y < row.size(); ++y) {
      if (row[y] > row[best]) best = y;
    }
    out[i] = static_cast<ClassId>(best);
  }
  return out;
}

}  // namespace llmbp
