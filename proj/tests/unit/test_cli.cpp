#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "facesim/corpus.hpp"
#include "facesim/simd/kernels.hpp"
#include "facesim/synth.hpp"
#include "support.hpp"

using namespace facesim;
using facesim::testing::identity_corpus;
using facesim::testing::slurp;
using facesim::testing::TempDir;
using json = nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run facesim_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "facesim");
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json report(const std::string& path) { return json::parse(slurp(path)); }

// synth -> validate -> split in dir, returning nothing; files land in dir.
void prepare(const TempDir& d) {
  REQUIRE(facesim_cli({"synth", "--preset", "planted", "--out", d.path().string(), "--report",
                       d / "synth.json"})
              .code == 0);
  REQUIRE(facesim_cli({"validate", "--annotations", d / "annotations.csv", "--manifest",
                       d / "manifest.csv", "--out", d / "triplets.csv", "--report", d / "validate.json"})
              .code == 0);
}

}  // namespace

TEST_CASE("synth reports and replays") {
  TempDir a("cli_a"), b("cli_b");
  prepare(a);
  prepare(b);
  CHECK(slurp(a / "embeddings.csv") == slurp(b / "embeddings.csv"));
  CHECK(slurp(a / "triplets.csv") == slurp(b / "triplets.csv"));
  const json rep = report(a / "synth.json");
  CHECK(rep["format"] == "facesim-report/1");
  CHECK(rep["version"] == FACESIM_VERSION);
  CHECK(rep["run_config"]["subcommand"] == "synth");
  CHECK(rep["run_config"]["seed"] == "7");
  CHECK(rep["identity_heldout_accuracy"].get<double>() <= 0.65);
  CHECK(rep["oracle_heldout_accuracy"].get<double>() == 1.0);

  const json v = report(a / "validate.json");
  CHECK(v["run_config"]["options"]["min-votes"] == "3");
}

TEST_CASE("train and eval-triplets") {
  TempDir d("cli_train");
  prepare(d);
  const std::vector<std::string> train{"train", "--triplets", d / "triplets.csv", "--embeddings",
                                       d / "embeddings.csv", "--partition", d / "partition.json",
                                       "--epochs", "5", "--repeats", "2", "--out", d / "model.json",
                                       "--history", d / "hist.csv", "--report", d / "train.json"};
  REQUIRE(facesim_cli(train).code == 0);
  const std::string m0 = slurp(d / "model.r0.json"), h1 = slurp(d / "hist.r1.csv");
  CHECK_FALSE(m0.empty());
  CHECK(m0 != slurp(d / "model.r1.json"));
  REQUIRE(facesim_cli(train).code == 0);
  CHECK(slurp(d / "model.r0.json") == m0);
  CHECK(slurp(d / "hist.r1.csv") == h1);
  const json tr = report(d / "train.json");
  CHECK(tr["run_config"]["repeats"] == "2");
  CHECK(tr["run_config"]["options"]["lr"] == "0.01");

  const auto ev = facesim_cli({"eval-triplets", "--triplets", d / "triplets.csv", "--embeddings",
                               d / "embeddings.csv", "--partition", d / "partition.json", "--model",
                               d / "model.r0.json", "--model", d / "model.r1.json", "--report",
                               d / "eval.json"});
  REQUIRE(ev.code == 0);
  const json e = report(d / "eval.json");
  CHECK(e["evaluations"].size() == 2);
  CHECK(e.contains("accuracy_mean"));
  CHECK(e.contains("accuracy_sd"));

  // The planted corpus has no validation triplets.
  const auto empty = facesim_cli({"eval-triplets", "--triplets", d / "triplets.csv", "--embeddings",
                                  d / "embeddings.csv", "--partition", d / "partition.json", "--part",
                                  "val"});
  CHECK(empty.code == 3);
  CHECK(empty.err.find("no consistent samples") != std::string::npos);
}

TEST_CASE("divergence exits 4") {
  TempDir d("cli_div");
  prepare(d);
  const auto r = facesim_cli({"train", "--triplets", d / "triplets.csv", "--embeddings",
                              d / "embeddings.csv", "--partition", d / "partition.json", "--lr", "1e8",
                              "--epochs", "50", "--repeats", "1", "--out", d / "m.json", "--report",
                              d / "t.json"});
  CHECK(r.code == 4);
}

TEST_CASE("usage and data errors") {
  CHECK(facesim_cli({}).code == 2);
  CHECK(facesim_cli({"bogus"}).code == 2);
  CHECK(facesim_cli({"split", "--mode", "iv", "--triplets", "x", "--embeddings", "y", "--out", "z"}).code ==
        2);
  CHECK(facesim_cli({"train", "--triplets", "x"}).code == 2);
  const auto missing = facesim_cli({"ingest", "--embeddings", "/nonexistent/e.csv"});
  CHECK(missing.code == 3);
  CHECK(missing.err.find("facesim:") == 0);
  CHECK(facesim_cli({"--version"}).code == 0);

  TempDir d("cli_bad");
  {
    std::ofstream f(d / "e.csv");
    f << "image_id,identity_id\nx,y\n";
  }
  CHECK(facesim_cli({"ingest", "--embeddings", d / "e.csv"}).code == 3);
}

TEST_CASE("a single-target corpus is an infeasible split") {
  TempDir d("cli_single");
  const auto c = identity_corpus(1, 20, 60, 3);
  save_embeddings(d / "e.csv", c.table);
  save_triplets(d / "t.csv", c.samples);
  const auto r = facesim_cli({"split", "--triplets", d / "t.csv", "--embeddings", d / "e.csv", "--mode",
                              "iii", "--out", d / "p.json"});
  CHECK(r.code == 5);

  const auto many = identity_corpus(6, 20, 200, 3);
  save_embeddings(d / "e6.csv", many.table);
  save_triplets(d / "t6.csv", many.samples);
  REQUIRE(facesim_cli({"split", "--triplets", d / "t6.csv", "--embeddings", d / "e6.csv", "--mode", "ii",
                       "--seed", "4", "--out", d / "p6.json", "--report", d / "s.json"})
              .code == 0);
  const json s = report(d / "s.json");
  CHECK(s["audit"]["ok"] == true);
  CHECK(s["run_config"]["seed"] == "4");
}

TEST_CASE("eval-attributes and select") {
  TempDir d("cli_attr");
  REQUIRE(facesim_cli({"synth", "--preset", "clustered-attributes", "--out", d.path().string(), "--queries",
                       "40", "--report", d / "synth.json"})
              .code == 0);
  REQUIRE(facesim_cli({"eval-attributes", "--candidates", d / "candidates.csv", "--queries",
                       d / "queries.csv", "--task", "four-way", "--outcomes", d / "outcomes.csv",
                       "--report", d / "attr.json"})
              .code == 0);
  const json a = report(d / "attr.json");
  CHECK(a["accuracy"].get<double>() == 1.0);
  CHECK(a["run_config"]["options"]["ci"] == "normal");
  CHECK(slurp(d / "outcomes.csv").find("query_id,truth,predicted") == 0);

  REQUIRE(facesim_cli({"--kernel", "scalar", "select", "--candidates", d / "candidates.csv", "--queries",
                       d / "queries.csv", "--query-id", "q0000", "-k", "3", "--ranking",
                       d / "rank.csv", "--report", d / "sel.json"})
              .code == 0);
  const json s = report(d / "sel.json");
  CHECK(s["run_config"]["kernel"] == "scalar");
  REQUIRE(s["recommendations"].size() == 1);
  CHECK(s["recommendations"][0]["candidates"].size() == 3);
  CHECK(slurp(d / "rank.csv").find("query_id,group,rank,image_id,similarity,recommended") == 0);
  simd::reset_isa();
}

TEST_CASE("gradcheck") {
  TempDir d("cli_gc");
  REQUIRE(facesim_cli({"gradcheck", "--probes", "5", "--report", d / "gc.json"}).code == 0);
  const json g = report(d / "gc.json");
  CHECK(g["max_relative_error"].get<double>() <= 1e-4);
  CHECK(facesim_cli({"gradcheck", "--probes", "2", "--step", "0.3", "--tolerance", "1e-12", "--report",
                     d / "bad.json"})
            .code == 1);
}
