#include "catch_amalgamated.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "llmbp/llmbp.hpp"
#include "support.hpp"

using namespace llmbp;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunResult run(const test::TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd =
      std::string(LLMBP_CLI_PATH) + " " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<ClassId> read_predictions(const fs::path& p) {
  std::ifstream in(p);
  std::vector<ClassId> out;
  for (ClassId y; in >> y;) out.push_back(y);
  return out;
}

std::string path_arg(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("synth, ingest and re-ingest", "[cli]") {
  test::TempDir dir;
  auto r = run(dir, "synth --n 300 --seed 5 --out " + path_arg(dir / "syn"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("nodes 300") != std::string::npos);
  CHECK(r.out.find("homophily") != std::string::npos);

  r = run(dir, "ingest --data " + path_arg(dir / "syn" / "meta.json") + " --out " + path_arg(dir / "a"));
  REQUIRE(r.code == 0);
  r = run(dir, "ingest --data " + path_arg(dir / "a" / "meta.json") + " --out " + path_arg(dir / "b"));
  REQUIRE(r.code == 0);
  for (const char* f : {"meta.json", "edges.txt", "labels.txt", "texts.txt", "embeddings.bin", "class_embeddings.bin"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("ingest of an empty graph warns", "[cli]") {
  test::TempDir dir;
  fs::create_directories(dir / "in");
  std::ofstream(dir / "in" / "edges.txt") << "";
  std::ofstream(dir / "in" / "meta.json") << R"({"node_count": 3, "class_count": 2, "edges": "edges.txt"})";
  const auto r = run(dir, "ingest --data " + path_arg(dir / "in" / "meta.json") + " --out " + path_arg(dir / "out"));
  CHECK(r.code == 0);
  CHECK(r.err.find("no edges") != std::string::npos);
  CHECK(r.out.find("nodes 3") != std::string::npos);

  std::ofstream(dir / "in" / "edges.txt") << "0 1\n1 9\n";
  const auto bad = run(dir, "ingest --data " + path_arg(dir / "in" / "meta.json") + " --out " + path_arg(dir / "x"));
  CHECK(bad.code != 0);
  CHECK(bad.err.find("edges.txt:2") != std::string::npos);
}

TEST_CASE("estimate-r with oracle and mock providers", "[cli]") {
  test::TempDir dir;
  REQUIRE(run(dir, "synth --n 300 --out " + path_arg(dir / "syn")).code == 0);
  const auto meta = path_arg(dir / "syn" / "meta.json");
  const auto ds = load_dataset(dir / "syn" / "meta.json");

  auto r = run(dir, "estimate-r --data " + meta + " --oracle --t all --trials 1 --out " + path_arg(dir / "r.json"));
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "r.json");
  const auto est = estimate_from_json(nlohmann::json::parse(in));
  CHECK(est.r == homophily_ratio_exact(ds.graph));

  std::ofstream(dir / "table.json") << R"({"responses": {}, "default": "Yes"})";
  const std::string mock = "estimate-r --data " + meta + " --mock " + path_arg(dir / "table.json") + " --t 30 --out ";
  REQUIRE(run(dir, mock + path_arg(dir / "m1.json")).code == 0);
  REQUIRE(run(dir, mock + path_arg(dir / "m2.json")).code == 0);
  CHECK(slurp(dir / "m1.json") == slurp(dir / "m2.json"));
  CHECK(nlohmann::json::parse(slurp(dir / "m1.json"))["r"] == 1.0);

  r = run(dir, "estimate-r --data " + meta + " --oracle --sweep 40,80 --trials 1 --out " + path_arg(dir / "s.json"));
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "s.json"))["sweep"].size() == 2);

  r = run(dir, "estimate-r --data " + meta + " --out " + path_arg(dir / "none.json"));
  CHECK(r.code == 2);
}

TEST_CASE("infer", "[cli]") {
  test::TempDir dir;
  REQUIRE(run(dir, "synth --n 300 --out " + path_arg(dir / "syn")).code == 0);
  const auto meta = path_arg(dir / "syn" / "meta.json");
  const auto ds = load_dataset(dir / "syn" / "meta.json");
  const auto emb = load_embeddings(dir / "syn" / "embeddings.bin");
  const auto classes = load_class_embeddings(dir / "syn" / "class_embeddings.bin");

  REQUIRE(run(dir, "infer --data " + meta + " --mode external --method raw --out " + path_arg(dir / "raw")).code == 0);
  const auto raw = read_predictions(dir / "raw" / "predictions.txt");
  // Cosine argmax computed directly.
  REQUIRE(raw.size() == 300);
  for (std::size_t i = 0; i < 300; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < classes.class_count(); ++k) {
      if (cosine(emb.row(i), classes.matrix.row(k)) > cosine(emb.row(i), classes.matrix.row(best))) best = k;
    }
    CHECK(raw[i] == static_cast<ClassId>(best));
  }

  REQUIRE(run(dir, "infer --data " + meta + " --mode external --method bp --r 0.5 --out " + path_arg(dir / "n")).code ==
          0);
  CHECK(read_predictions(dir / "n" / "predictions.txt") == raw);

  const auto bp = run(dir, "infer --data " + meta + " --mode external --method bp --r-oracle --workers 3 --out " +
                               path_arg(dir / "bp"));
  REQUIRE(bp.code == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "bp" / "summary.json"));
  CHECK(summary["r"] == homophily_ratio_exact(ds.graph));
  CHECK(summary["iterations"] == 5);
  CHECK(fs::exists(dir / "bp" / "beliefs.bin"));
  CHECK(fs::exists(dir / "bp" / "beliefs.json"));

  const auto zs = run(dir, "infer --data " + meta + " --oracle --method bp-approx --r 0.85 --out " + path_arg(dir / "z"));
  REQUIRE(zs.code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "z" / "summary.json"))["tau"] == 0.01);

  CHECK(run(dir, "infer --data " + meta + " --mode external --method bp --out " + path_arg(dir / "q")).code == 2);
  CHECK(run(dir, "infer --data " + meta + " --mode external --method bp --r 0.5 --r-oracle --out " +
                     path_arg(dir / "q"))
            .code != 0);
}

TEST_CASE("eval honours config files with command-line precedence", "[cli]") {
  test::TempDir dir;
  REQUIRE(run(dir, "synth --n 300 --out " + path_arg(dir / "syn")).code == 0);
  std::ofstream(dir / "cfg.toml") << "[eval]\nmode = \"few-shot\"\nk = 3\nrepeats = 3\nr-source = \"oracle\"\n";
  const std::string base = "--config " + path_arg(dir / "cfg.toml") + " eval --data " +
                           path_arg(dir / "syn" / "meta.json") + " --out ";
  REQUIRE(run(dir, base + path_arg(dir / "e1")).code == 0);
  const auto from_file = nlohmann::json::parse(slurp(dir / "e1" / "report.json"));
  CHECK(from_file["seeds"].size() == 3);
  CHECK(from_file["seeds"][0]["eval_nodes"] == 300 - 4 * 3);

  REQUIRE(run(dir, base + path_arg(dir / "e2") + " --repeats 2 --seed-workers 2").code == 0);
  const auto overridden = nlohmann::json::parse(slurp(dir / "e2" / "report.json"));
  CHECK(overridden["seeds"].size() == 2);
  CHECK(overridden["seeds"][0] == from_file["seeds"][0]);
  const auto csv = slurp(dir / "e2" / "report.csv");
  CHECK(csv.starts_with("seed,method,r,accuracy,macro_f1\n"));
}

TEST_CASE("linkpred", "[cli]") {
  test::TempDir dir;
  REQUIRE(run(dir, "synth --n 300 --out " + path_arg(dir / "syn")).code == 0);
  const auto meta = path_arg(dir / "syn" / "meta.json");
  const auto r = run(dir, "linkpred --data " + meta + " --m 100 --out " + path_arg(dir / "lp.json"));
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "lp.json"))["auc"].get<double>() > 0.5);
  const auto zero = run(dir, "linkpred --data " + meta + " --m 0 --out " + path_arg(dir / "z.json"));
  CHECK(zero.code == 2);
  CHECK(zero.err.find("range") != std::string::npos);
}
