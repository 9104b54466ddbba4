#include "catch_amalgamated.hpp"

#include <random>
#include <set>

#include "llmbp/metrics.hpp"
#include "support.hpp"

using namespace llmbp;

namespace {

double pairwise_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double q : neg) wins += p > q ? 1.0 : p == q ? 0.5 : 0.0;
  }
  return wins / static_cast<double>(pos.size() * neg.size());
}

double reference_macro_f1(const std::vector<ClassId>& pred, const std::vector<ClassId>& truth, std::size_t c) {
  double sum = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] == static_cast<ClassId>(k), t = truth[i] == static_cast<ClassId>(k);
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
    }
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    sum += precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  }
  return sum / static_cast<double>(c);
}

}  // namespace

TEST_CASE("accuracy", "[metrics]") {
  const std::vector<ClassId> truth{0, 1, 2, 1, kUnlabeled};
  CHECK(accuracy(std::vector<ClassId>{0, 1, 2, 1, 0}, truth) == 1.0);
  CHECK(accuracy(std::vector<ClassId>{0, 0, 2, 0, 0}, truth) == 0.5);
  CHECK_THROWS_KIND(accuracy(std::vector<ClassId>{0}, truth), ErrorKind::shape);
  CHECK_THROWS_KIND(accuracy(std::vector<ClassId>{0}, std::vector<ClassId>{kUnlabeled}), ErrorKind::missing_label);
}

TEST_CASE("macro F1", "[metrics]") {
  // Class 0: tp 1, fp 1 -> 2/3; class 1: tp 1, fn 1 -> 2/3.
  CHECK(macro_f1(std::vector<ClassId>{0, 0, 1}, std::vector<ClassId>{0, 1, 1}, 2) == Catch::Approx(2.0 / 3.0));
  CHECK(macro_f1(std::vector<ClassId>{0, 1}, std::vector<ClassId>{0, 1}, 3) == Catch::Approx(2.0 / 3.0));

  std::mt19937_64 gen(41);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t c = 2 + gen() % 5, n = 1 + gen() % 40;
    std::uniform_int_distribution<int> cls(0, static_cast<int>(c) - 1);
    std::vector<ClassId> pred(n), truth(n);
    for (auto& v : pred) v = cls(gen);
    for (auto& v : truth) v = cls(gen);
    CHECK(macro_f1(pred, truth, c) == Catch::Approx(reference_macro_f1(pred, truth, c)).margin(1e-12));
  }
}

TEST_CASE("AUC", "[metrics]") {
  CHECK(auc(std::vector<double>{0.9, 0.8}, std::vector<double>{0.1, 0.2}) == 1.0);
  CHECK(auc(std::vector<double>{0.1}, std::vector<double>{0.9}) == 0.0);
  CHECK(auc(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5}) == 0.5);
  CHECK_THROWS_KIND(auc(std::vector<double>{}, std::vector<double>{1.0}), ErrorKind::range);
  CHECK_THROWS_KIND(auc(std::vector<double>{std::nan("")}, std::vector<double>{1.0}), ErrorKind::data);

  std::mt19937_64 gen(42);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t p = 1 + gen() % 30, q = 1 + gen() % 30;
    // Coarse grid so ties occur.
    std::uniform_int_distribution<int> grid(0, 8);
    std::vector<double> pos(p), neg(q);
    for (auto& v : pos) v = grid(gen) / 8.0;
    for (auto& v : neg) v = grid(gen) / 8.0;
    const double value = auc(pos, neg);
    CHECK(value == Catch::Approx(pairwise_auc(pos, neg)).margin(1e-12));
    // Strictly increasing transforms leave it unchanged.
    for (auto& v : pos) v = std::exp(3.0 * v) - 7.0;
    for (auto& v : neg) v = std::exp(3.0 * v) - 7.0;
    CHECK(auc(pos, neg) == Catch::Approx(value).margin(1e-12));
  }
}

TEST_CASE("few-shot split", "[metrics]") {
  std::vector<ClassId> y(60);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<ClassId>(i % 3);
  y[7] = kUnlabeled;
  auto g = TagGraph::from_pairs(60, 3, {});
  g.set_labels(y);

  for (std::size_t k : {1u, 3u, 5u, 10u}) {
    const auto split = sample_few_shot(g, k, 42);
    CHECK(split.shots.size() == 3 * k);
    std::set<NodeId> shots;
    std::vector<std::size_t> per_class(3, 0);
    for (const auto& [node, cls] : split.shots) {
      CHECK(g.label(node) == cls);
      shots.insert(node);
      ++per_class[static_cast<std::size_t>(cls)];
    }
    CHECK(shots.size() == 3 * k);
    for (auto count : per_class) CHECK(count == k);
    // Shots, test nodes and unlabeled nodes partition the graph.
    for (NodeId i = 0; i < 60; ++i) {
      const bool is_shot = shots.contains(i);
      CHECK(split.test_mask[i] == (!is_shot && g.is_labeled(i)));
    }
    CHECK(sample_few_shot(g, k, 42).shots == split.shots);
  }
  CHECK(sample_few_shot(g, 3, 42).shots != sample_few_shot(g, 3, 43).shots);
  CHECK_THROWS_KIND(sample_few_shot(g, 20, 1), ErrorKind::insufficient_shots);
  CHECK_THROWS_KIND(sample_few_shot(g, 0, 1), ErrorKind::range);
}

TEST_CASE("mean and sample standard deviation", "[metrics]") {
  const auto a = mean_std(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(a.mean == 5.0);
  CHECK(a.stddev == Catch::Approx(std::sqrt(32.0 / 7.0)));
  const auto one = mean_std(std::vector<double>{0.3});
  CHECK(one.mean == 0.3);
  CHECK(one.stddev == 0.0);
}
