#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "llmbp/bp.hpp"
#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"

/// Asserts that `expr` throws llmbp::Error of the given kind.
#define CHECK_THROWS_KIND(expr, k)                                                     \
  CHECK_THROWS_MATCHES(expr, ::llmbp::Error,                                           \
                       ::Catch::Matchers::Predicate<const ::llmbp::Error&>(            \
                           [](const ::llmbp::Error& e_) { return e_.kind() == (k); }, \
                           "error kind " #k))

namespace test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("llmbp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Erdos-Renyi style pair list; independent of the library's samplers.
inline std::vector<std::pair<llmbp::NodeId, llmbp::NodeId>> random_pairs(std::size_t n, double p, std::mt19937_64& gen) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<llmbp::NodeId, llmbp::NodeId>> out;
  for (llmbp::NodeId a = 0; a < n; ++a) {
    for (llmbp::NodeId b = a + 1; b < n; ++b) {
      if (coin(gen)) out.emplace_back(a, b);
    }
  }
  return out;
}

/// Uniform random labeled tree: node k attaches to a random earlier node.
inline std::vector<std::pair<llmbp::NodeId, llmbp::NodeId>> random_tree(std::size_t n, std::mt19937_64& gen) {
  std::vector<std::pair<llmbp::NodeId, llmbp::NodeId>> out;
  for (llmbp::NodeId k = 1; k < n; ++k) {
    std::uniform_int_distribution<llmbp::NodeId> parent(0, k - 1);
    out.emplace_back(parent(gen), k);
  }
  return out;
}

/// Normalized log rows drawn from a Dirichlet(1) distribution.
inline llmbp::BeliefState random_beliefs(std::size_t n, std::size_t c, std::mt19937_64& gen) {
  std::exponential_distribution<double> expo(1.0);
  llmbp::BeliefState b(n, c, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> w(c);
    double z = 0.0;
    for (auto& x : w) z += (x = expo(gen) + 1e-12);
    for (std::size_t k = 0; k < c; ++k) b.row(i)[k] = std::log(w[k] / z);
  }
  return b;
}

/// Marginals by plain probability-space enumeration over an explicit edge
/// list. Written separately from the library's enumerator.
inline std::vector<std::vector<double>> brute_marginals(std::size_t n, std::size_t c,
                                                        const std::vector<std::pair<llmbp::NodeId, llmbp::NodeId>>& edges,
                                                        const llmbp::BeliefState& init, double r) {
  std::vector<std::vector<double>> mass(n, std::vector<double>(c, 0.0));
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= c;
  std::vector<std::size_t> y(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rest % c;
      rest /= c;
    }
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) w *= std::exp(init.row(i)[y[i]]);
    for (const auto& [a, b] : edges) w *= y[a] == y[b] ? r : 1.0 - r;
    for (std::size_t i = 0; i < n; ++i) mass[i][y[i]] += w;
  }
  for (auto& row : mass) {
    double z = 0.0;
    for (double v : row) z += v;
    for (double& v : row) v /= z;
  }
  return mass;
}

}  // namespace test
