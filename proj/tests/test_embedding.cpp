#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "llmbp/embedding.hpp"
#include "llmbp/embedding_io.hpp"
#include "support.hpp"

using namespace llmbp;
using Catch::Approx;

namespace {

EmbeddingMatrix random_matrix(std::size_t n, std::size_t d, std::mt19937_64& gen) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n * d);
  for (double& x : v) x = g(gen);
  return EmbeddingMatrix(n, d, v);
}

std::string serialize(const EmbeddingMatrix& m) {
  std::ostringstream out(std::ios::binary);
  write_matrix(out, m);
  return out.str();
}

}  // namespace

TEST_CASE("binary matrix round trip", "[embedding][io]") {
  std::mt19937_64 gen(1);
  SECTION("float32 values survive exactly") {
    std::vector<double> v(12);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(static_cast<float>(0.1 * k - 0.3));
    const EmbeddingMatrix m(3, 4, v);
    std::istringstream in(serialize(m));
    const auto back = read_matrix(in);
    CHECK(back.rows() == 3);
    CHECK(back.dim() == 4);
    CHECK(std::equal(back.values().begin(), back.values().end(), v.begin()));
  }
  SECTION("header layout is little-endian magic, version, rows, cols") {
    const EmbeddingMatrix m(2, 5);
    const auto bytes = serialize(m);
    REQUIRE(bytes.size() == 16 + 2 * 5 * 4);
    CHECK(bytes.substr(0, 4) == "LBPE");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);
    CHECK(static_cast<unsigned char>(bytes[12]) == 5);
  }
  SECTION("n = 0 is accepted") {
    std::istringstream in(serialize(EmbeddingMatrix(0, 8)));
    const auto back = read_matrix(in);
    CHECK(back.rows() == 0);
    CHECK(back.dim() == 8);
  }
  SECTION("truncated payload is a format error") {
    auto bytes = serialize(random_matrix(4, 3, gen));
    bytes.resize(bytes.size() - 2);
    std::istringstream in(bytes);
    CHECK_THROWS_KIND(read_matrix(in), ErrorKind::format);
  }
  SECTION("truncated header and bad magic are format errors") {
    std::istringstream short_header(std::string("LBPE\x01\x00", 6));
    CHECK_THROWS_KIND(read_matrix(short_header), ErrorKind::format);
    auto bytes = serialize(random_matrix(1, 1, gen));
    bytes[0] = 'X';
    std::istringstream in(bytes);
    CHECK_THROWS_KIND(read_matrix(in), ErrorKind::format);
  }
  SECTION("non-finite values are data errors") {
    std::vector<double> v{1.0, std::nan(""), 0.0, 1.0};
    std::ostringstream out(std::ios::binary);
    write_matrix(out, 2, 2, v);
    std::istringstream in(out.str());
    CHECK_THROWS_KIND(read_matrix(in), ErrorKind::data);
  }
  SECTION("file round trip with class-embedding sidecar") {
    test::TempDir dir;
    ClassEmbeddings ce;
    ce.matrix = EmbeddingMatrix(2, 2, {1.0, 0.0, 0.0, 1.0});
    ce.provenance = ClassEmbeddingProvenance::zero_shot_clustered;
    ce.sampled_nodes = {4, 9};
    ce.sampled_labels = {0, 1};
    ce.k_top = 10;
    ce.seed = 42;
    save_class_embeddings(dir / "classes.bin", ce);
    CHECK(std::filesystem::exists(dir / "classes.json"));
    const auto back = load_class_embeddings(dir / "classes.bin");
    CHECK(back.matrix == ce.matrix);
    CHECK(back.provenance == ce.provenance);
    CHECK(back.sampled_nodes == ce.sampled_nodes);
    CHECK(back.k_top == 10);
    CHECK(back.seed == 42);
  }
}

TEST_CASE("normalize_rows", "[embedding]") {
  const EmbeddingMatrix m(1, 2, {3.0, 4.0});
  const auto n = normalize_rows(m);
  CHECK(n.normalized());
  CHECK(n.row(0)[0] == Approx(0.6).margin(1e-15));
  CHECK(n.row(0)[1] == Approx(0.8).margin(1e-15));

  const auto twice = normalize_rows(n);
  for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(twice.values()[k] - n.values()[k]) <= 1e-12);

  std::mt19937_64 gen(2);
  const auto r = normalize_rows(random_matrix(5, 7, gen));
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (double x : r.row(i)) s += x * x;
    CHECK(std::abs(std::sqrt(s) - 1.0) <= 1e-9);
  }

  try {
    normalize_rows(EmbeddingMatrix(3, 2, {1.0, 0.0, 0.0, 0.0, 0.0, 1.0}));
    FAIL("expected degenerate-embedding error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_embedding);
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("cosine", "[embedding]") {
  const std::vector<double> u{1, 2, 3}, v{4, 5, 6};
  CHECK(cosine(u, u) == Approx(1.0).margin(1e-15));
  CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  // 32 / sqrt(14 * 77)
  CHECK(cosine(u, v) == Approx(0.974631846).margin(1e-9));
  CHECK(cosine(u, v) == cosine(v, u));
  CHECK(cosine(std::vector<double>{3, 6, 9}, v) == Approx(cosine(u, v)).margin(1e-15));
  CHECK_THROWS_KIND(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}), ErrorKind::degenerate_embedding);
  CHECK_THROWS_KIND(cosine(std::vector<double>{1}, std::vector<double>{1, 0}), ErrorKind::shape);
  // Clamped against round-off.
  const std::vector<double> w{0.1, 0.7, 0.3};
  CHECK(cosine(w, w) <= 1.0);
}

TEST_CASE("zero-shot class embeddings", "[embedding]") {
  SECTION("singleton cluster equals its node") {
    const EmbeddingMatrix emb(3, 2, {1, 0, 0, 1, 1, 1});
    const std::vector<NodeId> nodes{0, 1};
    const std::vector<ClassId> labels{1, 0};
    const auto ce = zero_shot_class_embeddings(emb, nodes, labels, 2, 10);
    CHECK(ce.provenance == ClassEmbeddingProvenance::zero_shot_clustered);
    CHECK(ce.matrix.row(0)[0] == 0.0);
    CHECK(ce.matrix.row(0)[1] == 1.0);
    CHECK(ce.matrix.row(1)[0] == 1.0);
    CHECK(ce.matrix.row(1)[1] == 0.0);
  }
  SECTION("matches a brute-force nearest-to-centroid oracle") {
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 50; ++rep) {
      const auto emb = random_matrix(12, 4, gen);
      std::vector<NodeId> nodes{0, 2, 3, 5, 7, 11};
      std::vector<ClassId> labels{0, 1, 0, 1, 0, 1};
      const auto ce = zero_shot_class_embeddings(emb, nodes, labels, 2, 2);
      for (ClassId c = 0; c < 2; ++c) {
        std::vector<NodeId> members;
        for (std::size_t s = 0; s < nodes.size(); ++s) {
          if (labels[s] == c) members.push_back(nodes[s]);
        }
        std::vector<double> center(4, 0.0);
        for (NodeId i : members) {
          for (int d = 0; d < 4; ++d) center[d] += emb.row(i)[d] / 3.0;
        }
        // Exhaustively pick the pair of members with the two largest cosines.
        std::vector<double> sim;
        for (NodeId i : members) {
          double dot = 0, na = 0, nb = 0;
          for (int d = 0; d < 4; ++d) {
            dot += emb.row(i)[d] * center[d];
            na += emb.row(i)[d] * emb.row(i)[d];
            nb += center[d] * center[d];
          }
          sim.push_back(dot / std::sqrt(na * nb));
        }
        std::size_t worst = 0;
        for (std::size_t k = 1; k < 3; ++k) {
          if (sim[k] < sim[worst]) worst = k;
        }
        for (int d = 0; d < 4; ++d) {
          double expect = 0.0;
          for (std::size_t k = 0; k < 3; ++k) {
            if (k != worst) expect += emb.row(members[k])[d] / 2.0;
          }
          CHECK(ce.matrix.row(static_cast<std::size_t>(c))[d] == Approx(expect).margin(1e-12));
        }
      }
    }
  }
  SECTION("invariant to sample order") {
    std::mt19937_64 gen(4);
    const auto emb = random_matrix(30, 5, gen);
    std::vector<NodeId> nodes;
    std::vector<ClassId> labels;
    for (NodeId i = 0; i < 30; ++i) {
      nodes.push_back(i);
      labels.push_back(static_cast<ClassId>(i % 3));
    }
    const auto a = zero_shot_class_embeddings(emb, nodes, labels, 3, 4);
    std::vector<std::size_t> order(30);
    for (std::size_t k = 0; k < 30; ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<NodeId> n2;
    std::vector<ClassId> l2;
    for (auto k : order) {
      n2.push_back(nodes[k]);
      l2.push_back(labels[k]);
    }
    const auto b = zero_shot_class_embeddings(emb, n2, l2, 3, 4);
    CHECK(a.matrix == b.matrix);
  }
  SECTION("empty cluster carries the class id") {
    const EmbeddingMatrix emb(2, 2, {1, 0, 0, 1});
    const std::vector<NodeId> nodes{0, 1};
    const std::vector<ClassId> labels{0, 0};
    try {
      zero_shot_class_embeddings(emb, nodes, labels, 3, 10);
      FAIL("expected empty cluster");
    } catch (const EmptyClusterError& e) {
      CHECK(e.class_id() == 1);
      CHECK(e.kind() == ErrorKind::empty_cluster);
    }
  }
}

TEST_CASE("few-shot class embeddings", "[embedding]") {
  const EmbeddingMatrix emb(4, 2, {1, 0, 0, 1, 0.2, 0.4, 3, 3});
  SECTION("midpoint of two shots") {
    const std::vector<std::pair<NodeId, ClassId>> shots{{0, 0}, {1, 0}, {3, 1}};
    const auto ce = few_shot_class_embeddings(emb, shots, 2);
    CHECK(ce.provenance == ClassEmbeddingProvenance::few_shot_averaged);
    CHECK(ce.matrix.row(0)[0] == 0.5);
    CHECK(ce.matrix.row(0)[1] == 0.5);
    CHECK(ce.matrix.row(1)[0] == 3.0);
  }
  SECTION("recomputed mean on random data and class permutation") {
    std::mt19937_64 gen(5);
    const auto big = random_matrix(40, 6, gen);
    std::vector<std::pair<NodeId, ClassId>> shots;
    for (NodeId i = 0; i < 20; ++i) shots.emplace_back(i, static_cast<ClassId>(i % 4));
    const auto ce = few_shot_class_embeddings(big, shots, 4);
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t d = 0; d < 6; ++d) {
        double s = 0.0;
        for (NodeId i = static_cast<NodeId>(c); i < 20; i += 4) s += big.row(i)[d];
        CHECK(ce.matrix.row(c)[d] == Approx(s / 5.0).margin(1e-12));
      }
    }
    const std::vector<ClassId> perm{3, 1, 0, 2};
    auto permuted = shots;
    for (auto& [_, y] : permuted) y = perm[static_cast<std::size_t>(y)];
    const auto pe = few_shot_class_embeddings(big, permuted, 4);
    for (std::size_t c = 0; c < 4; ++c) {
      const auto a = ce.matrix.row(c);
      const auto b = pe.matrix.row(static_cast<std::size_t>(perm[c]));
      CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
  }
  SECTION("class without shots") {
    const std::vector<std::pair<NodeId, ClassId>> shots{{0, 0}};
    CHECK_THROWS_KIND(few_shot_class_embeddings(emb, shots, 2), ErrorKind::missing_class);
  }
}

TEST_CASE("neighborhood aggregation", "[embedding]") {
  SECTION("zero layers is the identity; isolated nodes unchanged") {
    const auto g = TagGraph::from_pairs(3, 1, std::vector<std::pair<NodeId, NodeId>>{{0, 1}});
    const EmbeddingMatrix emb(3, 2, {1, 0, 0, 1, 5, 5});
    CHECK(neighborhood_aggregate(g, emb, 0) == emb);
    const auto one = neighborhood_aggregate(g, emb, 1);
    CHECK(one.row(0)[0] == 0.5);
    CHECK(one.row(0)[1] == 0.5);
    CHECK(one.row(1)[0] == 0.5);
    CHECK(one.row(2)[0] == 5.0);
  }
  SECTION("matches a dense averaging-operator power") {
    std::mt19937_64 gen(6);
    const std::size_t n = 6, d = 3;
    const auto pairs = test::random_pairs(n, 0.5, gen);
    const auto g = TagGraph::from_pairs(n, 1, pairs);
    const auto emb = random_matrix(n, d, gen);
    // A = D^-1 (I + adjacency), rows of isolated nodes are identity.
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
    for (const auto& [u, v] : pairs) {
      a[u * n + v] = 1.0;
      a[v * n + u] = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a[i * n + j];
      for (std::size_t j = 0; j < n; ++j) a[i * n + j] /= s;
    }
    std::vector<double> x(emb.values().begin(), emb.values().end());
    for (int layer = 0; layer < 3; ++layer) {
      std::vector<double> y(n * d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t k = 0; k < d; ++k) y[i * d + k] += a[i * n + j] * x[j * d + k];
        }
      }
      x = y;
    }
    const auto agg = neighborhood_aggregate(g, emb, 3);
    for (std::size_t k = 0; k < n * d; ++k) CHECK(agg.values()[k] == Approx(x[k]).margin(1e-12));
  }
  SECTION("constant rows stay constant, and worker count does not matter") {
    std::mt19937_64 gen(7);
    const auto g = TagGraph::from_pairs(50, 1, test::random_pairs(50, 0.1, gen));
    std::vector<double> v;
    for (int i = 0; i < 50; ++i) v.insert(v.end(), {0.25, -1.5});
    const EmbeddingMatrix flat(50, 2, v);
    const auto out = neighborhood_aggregate(g, flat, 4);
    for (std::size_t i = 0; i < 50; ++i) {
      CHECK(out.row(i)[0] == Approx(0.25).margin(1e-14));
      CHECK(out.row(i)[1] == Approx(-1.5).margin(1e-14));
    }
    const auto emb = random_matrix(50, 4, gen);
    AggregateOptions four;
    four.workers = 4;
    CHECK(neighborhood_aggregate(g, emb, 3) == neighborhood_aggregate(g, emb, 3, four));
  }
}

TEST_CASE("link_score", "[embedding]") {
  const EmbeddingMatrix emb(3, 2, {1, 0, 0, 1, 0, 0});
  CHECK(link_score(emb, 0, 0) == Approx(1.0));
  CHECK(link_score(emb, 0, 1) == 0.0);
  CHECK_THROWS_KIND(link_score(emb, 0, 2), ErrorKind::degenerate_embedding);
  CHECK_THROWS_KIND(link_score(emb, 0, 3), ErrorKind::out_of_range);
}
