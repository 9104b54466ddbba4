#include "catch_amalgamated.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "llmbp/graph.hpp"
#include "llmbp/graph_io.hpp"
#include "support.hpp"

using namespace llmbp;

namespace {

GraphMetadata meta_for(std::size_t n, std::size_t c) {
  GraphMetadata m;
  m.node_count = n;
  m.class_count = c;
  return m;
}

TagGraph graph_from(std::size_t n, std::size_t c, std::vector<std::pair<NodeId, NodeId>> pairs) {
  return TagGraph::from_pairs(n, c, pairs);
}

}  // namespace

TEST_CASE("load_graph canonicalizes reversed pairs and self-loops", "[graph]") {
  std::istringstream in("1 2\n2 1\n3 3\n");
  const auto loaded = load_graph(in, meta_for(4, 2));
  CHECK(loaded.graph.edge_count() == 1);
  CHECK(loaded.graph.directed_entry_count() == 2);
  CHECK(loaded.graph.has_edge(1, 2));
  CHECK(loaded.graph.has_edge(2, 1));
  CHECK(loaded.stats.self_loops_dropped == 1);
  CHECK(loaded.stats.reverse_pairs_merged == 1);
}

TEST_CASE("empty edge list gives isolated nodes", "[graph]") {
  std::istringstream in("");
  const auto loaded = load_graph(in, meta_for(3, 1));
  CHECK(loaded.graph.node_count() == 3);
  CHECK(loaded.graph.edge_count() == 0);
  for (NodeId i = 0; i < 3; ++i) CHECK(loaded.graph.degree(i) == 0);
}

TEST_CASE("edge list errors carry line numbers", "[graph]") {
  SECTION("malformed line") {
    std::istringstream in("0 1\n# comment\n\n1 x\n");
    try {
      load_graph(in, meta_for(3, 1), "edges.txt");
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
      CHECK(std::string(e.what()).find("edges.txt:4") != std::string::npos);
    }
  }
  SECTION("id out of range") {
    std::istringstream in("0 1\n0 7\n");
    try {
      load_graph(in, meta_for(3, 1), "edges.txt");
      FAIL("expected a bounds error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::out_of_range);
      CHECK(std::string(e.what()).find("edges.txt:2") != std::string::npos);
    }
  }
}

TEST_CASE("adjacency is symmetric, sorted and duplicate free", "[graph]") {
  std::mt19937_64 gen(7);
  auto pairs = test::random_pairs(40, 0.15, gen);
  // Add reversed copies and repeats.
  const auto base = pairs;
  for (const auto& [a, b] : base) {
    pairs.emplace_back(b, a);
    pairs.emplace_back(a, b);
  }
  std::shuffle(pairs.begin(), pairs.end(), gen);
  const auto g = graph_from(40, 2, pairs);
  CHECK(g.edge_count() == base.size());
  for (NodeId i = 0; i < 40; ++i) {
    const auto nb = g.neighbors(i);
    CHECK(std::is_sorted(nb.begin(), nb.end()));
    CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
    for (NodeId j : nb) {
      CHECK(j != i);
      CHECK(g.has_edge(j, i));
    }
  }
}

TEST_CASE("homophily ratio", "[graph]") {
  SECTION("complete bipartite graph with sides labeled apart is 0") {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId a = 0; a < 3; ++a) {
      for (NodeId b = 3; b < 7; ++b) pairs.emplace_back(a, b);
    }
    auto g = graph_from(7, 2, pairs);
    g.set_labels({0, 0, 0, 1, 1, 1, 1});
    CHECK(homophily_ratio_exact(g) == 0.0);
  }
  SECTION("matches a direct count over the explicit edge list") {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 20; ++rep) {
      const auto pairs = test::random_pairs(10, 0.4, gen);
      if (pairs.empty()) continue;
      auto g = graph_from(10, 3, pairs);
      std::vector<ClassId> y(10);
      std::uniform_int_distribution<int> cls(0, 2);
      for (auto& v : y) v = cls(gen);
      g.set_labels(y);
      std::size_t same = 0;
      for (const auto& [a, b] : pairs) same += y[a] == y[b];
      CHECK(homophily_ratio_exact(g) == static_cast<double>(same) / static_cast<double>(pairs.size()));

      // Invariant under relabeling the classes.
      std::vector<ClassId> perm{2, 0, 1};
      for (auto& v : y) v = perm[static_cast<std::size_t>(v)];
      g.set_labels(y);
      CHECK(homophily_ratio_exact(g) == static_cast<double>(same) / static_cast<double>(pairs.size()));
    }
  }
  SECTION("errors") {
    auto g = graph_from(3, 2, {{0, 1}});
    CHECK_THROWS_KIND(homophily_ratio_exact(g), ErrorKind::missing_label);
    auto empty = graph_from(2, 2, {});
    empty.set_labels({0, 1});
    CHECK_THROWS_KIND(homophily_ratio_exact(empty), ErrorKind::undefined_ratio);
  }
}

TEST_CASE("labels are validated", "[graph]") {
  auto g = graph_from(3, 2, {{0, 1}});
  CHECK_THROWS_AS(g.set_labels({0, 2, 1}), Error);
  CHECK_THROWS_AS(g.set_labels({0, 1}), Error);
  g.set_labels({0, kUnlabeled, 1});
  CHECK_FALSE(g.fully_labeled());
  CHECK(g.any_labeled());
}

TEST_CASE("sample_edges", "[graph]") {
  std::mt19937_64 gen(3);
  const auto g = graph_from(80, 2, test::random_pairs(80, 0.35, gen));
  REQUIRE(g.edge_count() > 1000);

  SECTION("deterministic for a seed and distinct across seeds") {
    const auto a = sample_edges(g, 100, 42);
    const auto b = sample_edges(g, 100, 42);
    const auto c = sample_edges(g, 100, 43);
    CHECK(a.pairs == b.pairs);
    CHECK(a.pairs != c.pairs);
    CHECK(a.pairs.size() == 100);
    CHECK(a.sample_size == 100);
    const std::set<Edge> distinct(a.pairs.begin(), a.pairs.end());
    CHECK(distinct.size() == 100);
    for (const auto& e : a.pairs) CHECK(g.has_edge(e.u, e.v));
  }
  SECTION("t >= |E| returns every edge in canonical order") {
    const auto all = sample_edges(g, g.edge_count() + 5, 1);
    CHECK(all.pairs == g.edges());
  }
  SECTION("errors") {
    const auto empty = graph_from(4, 1, {});
    CHECK_THROWS_KIND(sample_edges(empty, 5, 1), ErrorKind::undefined_sample);
  }
}

TEST_CASE("sample_edges is uniform", "[graph]") {
  // 6-edge star: each edge should be picked by about half of the size-3 draws.
  const auto g = graph_from(7, 1, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}});
  std::vector<int> hits(7, 0);
  const int draws = 6000;
  for (int s = 0; s < draws; ++s) {
    for (const auto& e : sample_edges(g, 3, static_cast<std::uint64_t>(s)).pairs) ++hits[e.v];
  }
  for (NodeId v = 1; v < 7; ++v) CHECK(std::abs(hits[v] / static_cast<double>(draws) - 0.5) < 0.03);
}

TEST_CASE("hold_out_edges", "[graph]") {
  std::mt19937_64 gen(5);
  auto g = graph_from(60, 2, test::random_pairs(60, 0.2, gen));
  std::vector<ClassId> y(60);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<ClassId>(i % 2);
  g.set_labels(y);
  const std::size_t m = 50;
  const auto split = hold_out_edges(g, m, 9);
  CHECK(split.residual.edge_count() == g.edge_count() - m);
  CHECK(split.positives.size() == m);
  CHECK(split.negatives.size() == m);
  for (const auto& e : split.positives) {
    CHECK(g.has_edge(e.u, e.v));
    CHECK_FALSE(split.residual.has_edge(e.u, e.v));
  }
  const std::set<Edge> negatives(split.negatives.begin(), split.negatives.end());
  CHECK(negatives.size() == m);
  for (const auto& e : split.negatives) {
    CHECK(e.u != e.v);
    CHECK_FALSE(g.has_edge(e.u, e.v));
  }
  CHECK(split.residual.labels().size() == 60);
  CHECK(hold_out_edges(g, m, 9).positives == split.positives);

  const auto none = hold_out_edges(g, 0, 9);
  CHECK(none.residual == g);
  CHECK(none.positives.empty());
  CHECK(none.negatives.empty());

  CHECK_THROWS_KIND(hold_out_edges(g, g.edge_count() + 1, 1), ErrorKind::insufficient_edges);
}

TEST_CASE("dataset round trip is idempotent", "[graph][io]") {
  test::TempDir dir;
  std::mt19937_64 gen(1);
  auto g = graph_from(25, 3, test::random_pairs(25, 0.2, gen));
  std::vector<ClassId> y(25);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<ClassId>(i % 3);
  y[4] = kUnlabeled;
  g.set_labels(y);
  std::vector<std::string> texts;
  for (int i = 0; i < 25; ++i) texts.push_back("node \"" + std::to_string(i) + "\"\twith tab");
  texts[3] = "";
  g.set_texts(texts);
  g.set_class_names({"alpha", "beta", "gamma"});
  g.set_task_description("toy texts");

  save_dataset(g, dir / "a");
  const auto first = load_dataset(dir / "a" / "meta.json");
  CHECK(first.graph == g);
  save_dataset(first.graph, dir / "b");
  const auto second = load_dataset(dir / "b" / "meta.json");
  CHECK(second.graph == first.graph);

  std::ifstream ea(dir / "a" / "edges.txt"), eb(dir / "b" / "edges.txt");
  std::stringstream sa, sb;
  sa << ea.rdbuf();
  sb << eb.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("metadata validation", "[graph][io]") {
  CHECK_THROWS_AS(parse_metadata(nlohmann::json{{"node_count", 3}}), Error);
  CHECK_THROWS_AS(parse_metadata(nlohmann::json{{"node_count", 3}, {"class_count", 0}}), Error);
  CHECK_THROWS_AS(parse_metadata(nlohmann::json{{"node_count", 3}, {"class_count", 2}, {"class_names", {"a"}}}),
                  Error);
  const auto m = parse_metadata(nlohmann::json{{"node_count", 3}, {"class_count", 2}, {"edges", "e.txt"}});
  CHECK(m.edges_file == "e.txt");
  CHECK_FALSE(m.labels_file.has_value());
}
