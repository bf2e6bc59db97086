#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "facesim/attributes.hpp"
#include "facesim/evaluator.hpp"
#include "facesim/synth.hpp"
#include "facesim/trainer.hpp"
#include "support.hpp"

using namespace facesim;
using facesim::testing::slurp;
using facesim::testing::TempDir;

namespace {

std::vector<TripletSample> pick(const std::vector<TripletSample>& samples, const std::vector<std::string>& ids) {
  std::set<std::string> want(ids.begin(), ids.end());
  std::vector<TripletSample> out;
  for (const auto& s : samples) {
    if (want.contains(s.triplet_id)) out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("planted corpora replay from the seed") {
  const auto a = synth_planted({});
  const auto b = synth_planted({});
  TempDir da("synth_a"), db("synth_b");
  save_planted(da.path(), a);
  save_planted(db.path(), b);
  for (const char* f : {"embeddings.csv", "manifest.csv", "annotations.csv", "partition.json",
                        "hidden_metric.json"}) {
    CAPTURE(f);
    CHECK(slurp(da / f) == slurp(db / f));
    CHECK_FALSE(slurp(da / f).empty());
  }
  PlantedConfig other;
  other.seed = 8;
  CHECK(partition_to_json(synth_planted(other).partition) != partition_to_json(a.partition));
}

TEST_CASE("planted labels need the hidden metric") {
  const auto corpus = synth_planted({});
  const auto samples = aggregate_triplets(corpus.annotations, validate_annotators(corpus.annotations),
                                          corpus.manifest);
  const auto heldout = pick(samples, corpus.partition.d1.test);
  REQUIRE(heldout.size() == 100);
  const double base = eval_triplets(ProjectionModel::identity(32), heldout, corpus.embeddings).accuracy;
  CHECK(base <= 0.65);
  CHECK(eval_triplets(ProjectionModel{corpus.hidden_metric}, heldout, corpus.embeddings).accuracy == 1.0);
  CHECK(corpus.partition.d1.train.size() == 500);
  CHECK(audit_split(corpus.partition, samples, corpus.embeddings).ok());
}

TEST_CASE("flips and the careless annotator") {
  PlantedConfig cfg;
  cfg.flip_fraction = 0.3;
  const auto corpus = synth_planted(cfg);
  CHECK(corpus.flipped.size() == 180);
  const auto valid = validate_annotators(corpus.annotations);
  CHECK(valid.size() == 3);
  CHECK_FALSE(valid.contains("p99"));
  const auto samples = aggregate_triplets(corpus.annotations, valid, corpus.manifest);
  const std::set<std::string> flipped(corpus.flipped.begin(), corpus.flipped.end());
  const ProjectionModel oracle{corpus.hidden_metric};
  for (const auto& s : samples) {
    REQUIRE(s.admitted());
    CHECK(s.votes.size() == 3);
    CHECK(s.consistent == !flipped.contains(s.triplet_id));
    const bool oracle_agrees =
        similarity_score(oracle, corpus.embeddings.at(s.ref_id), corpus.embeddings.at(s.positive_id())) >
        similarity_score(oracle, corpus.embeddings.at(s.ref_id), corpus.embeddings.at(s.negative_id()));
    CHECK(oracle_agrees == !flipped.contains(s.triplet_id));
  }
  for (const auto& id : corpus.partition.d2.train) CHECK_FALSE(flipped.contains(id));
}

TEST_CASE("config validation") {
  PlantedConfig p;
  p.flip_fraction = 1.5;
  CHECK_THROWS(p.validate());
  p = {};
  p.nuisance_rank = 40;
  CHECK_THROWS(p.validate());
  ClusteredConfig c;
  c.dim = 3;
  CHECK_THROWS(c.validate());
}

TEST_CASE("clustered corpus shape") {
  const auto corpus = synth_clustered({});
  CHECK(corpus.candidates.size() == 400);
  CHECK(corpus.queries.size() == 200);
  CHECK(corpus.means.size() == 4);
  const auto groups = build_groups(corpus.candidates.records());
  for (GroupName g : kIntersectionGroups) CHECK(find_group(groups, g).members.size() == 100);
  std::set<std::string> identities;
  for (const auto& r : corpus.candidates) identities.insert(r.identity_id);
  for (const auto& r : corpus.queries) CHECK_FALSE(identities.contains(r.identity_id));

  TempDir d("clustered");
  save_clustered(d.path(), corpus);
  CHECK(load_embeddings(d / "candidates.csv").size() == 400);
  CHECK(load_embeddings(d / "queries.csv").size() == 200);
}

TEST_CASE("gradient probes keep every hinge active") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto probe = synth_gradient_probe(16, 4, 0.1, seed);
    REQUIRE(probe.batch.size() == 4);
    for (const auto& t : probe.batch) {
      CHECK(triplet_loss(project(probe.model, t.anchor), project(probe.model, t.positive),
                         project(probe.model, t.negative), 0.1) >= 1e-2);
    }
    CHECK_FALSE(probe.model == ProjectionModel::identity(16));
  }
}
