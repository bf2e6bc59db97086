#include "facesim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "facesim/attributes.hpp"
#include "facesim/error.hpp"
#include "facesim/metric.hpp"
#include "facesim/rng.hpp"

namespace facesim {
namespace {

std::string numbered(const char* prefix, std::size_t k, int width = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, k);
  return buf;
}

Vector gaussian(Rng& rng, std::size_t d, double scale) {
  Vector v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

// Columns of the result are orthonormal (modified Gram-Schmidt).
Matrix random_orthogonal(std::size_t d, Rng& rng) {
  std::vector<Vector> cols;
  while (cols.size() < d) {
    Vector v = gaussian(rng, d, 1.0);
    for (const auto& c : cols) axpy(-dot(c, v), c, v);
    const double n = norm(v);
    if (n < 1e-8) continue;
    for (double& x : v) x /= n;
    cols.push_back(std::move(v));
  }
  Matrix q(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < d; ++r) q(r, c) = cols[c][r];
  }
  return q;
}

}  // namespace

void PlantedConfig::validate() const {
  if (dim < 2) throw ValidationError("planted corpus needs dim >= 2");
  if (nuisance_rank >= dim) throw ValidationError("nuisance_rank must be below dim");
  if (n_train == 0 || n_heldout == 0) throw ValidationError("need training and held-out triplets");
  if (train_sources < 3 || heldout_sources < 3) {
    throw ValidationError("each identity pool needs at least 3 sources");
  }
  if (train_targets == 0 || heldout_targets == 0) throw ValidationError("empty target pool");
  if (!(flip_fraction >= 0.0 && flip_fraction < 0.5)) {
    throw ValidationError("flip_fraction must be in [0, 0.5)");
  }
  if (annotators < 3) throw ValidationError("need at least 3 annotators");
  if (dummies_per_annotator == 0) throw ValidationError("annotators need dummy samples");
  if (!(min_gap >= 0.0 && min_gap < 1.0)) throw ValidationError("min_gap must be in [0, 1)");
}

PlantedCorpus synth_planted(const PlantedConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.dim;
  Rng rng(cfg.seed);
  const Matrix q = random_orthogonal(d, rng);

  PlantedCorpus out;
  out.hidden_metric = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const double w = i < cfg.nuisance_rank ? cfg.suppressed_weight : 1.0;
    for (std::size_t c = 0; c < d; ++c) out.hidden_metric(i, c) = w * q(c, i);
  }
  const ProjectionModel oracle{out.hidden_metric};

  const std::size_t n_targets = cfg.train_targets + cfg.heldout_targets;
  const std::size_t n_sources = cfg.train_sources + cfg.heldout_sources;
  std::vector<Vector> targets, sources;
  for (std::size_t t = 0; t < n_targets; ++t) targets.push_back(gaussian(rng, d, cfg.target_scale));
  for (std::size_t s = 0; s < n_sources; ++s) sources.push_back(gaussian(rng, d, 1.0));

  std::map<std::pair<std::size_t, std::size_t>, EmbeddingRecord> images;
  std::vector<std::pair<std::size_t, std::size_t>> creation_order;
  auto image = [&](std::size_t t, std::size_t s) -> const EmbeddingRecord& {
    auto key = std::make_pair(t, s);
    auto it = images.find(key);
    if (it != images.end()) return it->second;
    Vector v = targets[t];
    axpy(1.0, sources[s], v);
    axpy(cfg.image_noise, gaussian(rng, d, 1.0), v);
    for (std::size_t k = 0; k < cfg.nuisance_rank; ++k) {
      const double z = cfg.nuisance_scale * rng.normal();
      for (std::size_t r = 0; r < d; ++r) v[r] += z * q(r, k);
    }
    EmbeddingRecord rec;
    rec.image_id = "sw_" + numbered("t", t, 3) + "_" + numbered("s", s, 3);
    rec.identity_id = numbered("s", s, 3);
    rec.role = Role::swapped;
    rec.target_id = numbered("t", t, 3);
    rec.vector = std::move(v);
    creation_order.push_back(key);
    return images.emplace(key, std::move(rec)).first->second;
  };

  struct Generated {
    std::string id;
    Choice truth;
  };
  std::vector<Generated> generated;
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::vector<std::string> train_ids, val_ids, test_ids;

  auto generate = [&](std::size_t count, std::size_t t0, std::size_t nt, std::size_t s0,
                      std::size_t ns, std::vector<std::string>& ids) {
    const std::size_t max_attempts = 1000 * count + 1000;
    std::size_t attempts = 0;
    while (ids.size() < count) {
      if (++attempts > max_attempts) {
        throw ValidationError("planted generator cannot reach min_gap; lower it");
      }
      const std::size_t t = t0 + rng.uniform_index(nt);
      std::size_t pick[3];
      pick[0] = s0 + rng.uniform_index(ns);
      do pick[1] = s0 + rng.uniform_index(ns); while (pick[1] == pick[0]);
      do pick[2] = s0 + rng.uniform_index(ns); while (pick[2] == pick[0] || pick[2] == pick[1]);
      const EmbeddingRecord& c = image(t, pick[0]);
      const EmbeddingRecord& x = image(t, pick[1]);
      const EmbeddingRecord& y = image(t, pick[2]);
      const double gap = similarity_score(oracle, c, x) - similarity_score(oracle, c, y);
      if (std::abs(gap) < cfg.min_gap) continue;
      const bool x_first = rng.uniform01() < 0.5;
      TripletRef ref;
      ref.triplet_id = numbered("tr", generated.size(), 5);
      ref.ref_id = c.image_id;
      ref.option_a_id = x_first ? x.image_id : y.image_id;
      ref.option_b_id = x_first ? y.image_id : x.image_id;
      const bool x_closer = gap > 0.0;
      const Choice truth = (x_closer == x_first) ? Choice::A : Choice::B;
      for (std::size_t s : pick) used.emplace(t, s);
      generated.push_back({ref.triplet_id, truth});
      ids.push_back(ref.triplet_id);
      out.manifest.push_back(std::move(ref));
    }
  };
  generate(cfg.n_train, 0, cfg.train_targets, 0, cfg.train_sources, train_ids);
  generate(cfg.n_val, 0, cfg.train_targets, 0, cfg.train_sources, val_ids);
  generate(cfg.n_heldout, cfg.train_targets, cfg.heldout_targets, cfg.train_sources,
           cfg.heldout_sources, test_ids);

  out.embeddings = EmbeddingTable(d);
  for (const auto& key : creation_order) {
    if (used.contains(key)) out.embeddings.add(images.at(key));
  }

  // Noise flips: an exact count, chosen uniformly over all triplets.
  std::vector<std::size_t> order(generated.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span(order));
  const auto n_flip = static_cast<std::size_t>(std::llround(cfg.flip_fraction * generated.size()));
  std::vector<bool> flipped(generated.size(), false);
  for (std::size_t k = 0; k < n_flip; ++k) flipped[order[k]] = true;

  std::vector<std::string> annotators;
  for (std::size_t a = 0; a < cfg.annotators; ++a) annotators.push_back(numbered("p", a + 1, 2));
  const std::string careless = "p99";

  std::vector<Choice> dummy_answers;
  for (std::size_t k = 0; k < cfg.dummies_per_annotator; ++k) {
    dummy_answers.push_back(rng.uniform01() < 0.5 ? Choice::A : Choice::B);
  }
  auto other = [](Choice c) { return c == Choice::A ? Choice::B : Choice::A; };
  auto emit_dummies = [&](const std::string& who, bool fail_first) {
    for (std::size_t k = 0; k < dummy_answers.size(); ++k) {
      const Choice answer = dummy_answers[k];
      out.annotations.push_back({who, numbered("dummy", k + 1, 3),
                                 (fail_first && k == 0) ? other(answer) : answer, true, answer});
    }
  };
  for (const auto& a : annotators) emit_dummies(a, false);
  if (cfg.careless_annotator) emit_dummies(careless, true);

  for (std::size_t i = 0; i < generated.size(); ++i) {
    const Choice truth = generated[i].truth;
    const std::size_t honest = flipped[i] ? rng.uniform_index(annotators.size()) : 0;
    for (std::size_t a = 0; a < annotators.size(); ++a) {
      Choice vote = truth;
      if (flipped[i]) vote = a == honest ? truth : other(truth);
      // With more than three annotators a flipped triplet keeps one honest vote.
      out.annotations.push_back({annotators[a], generated[i].id, vote, false, std::nullopt});
    }
    if (cfg.careless_annotator) {
      out.annotations.push_back({careless, generated[i].id,
                                 rng.uniform01() < 0.5 ? Choice::A : Choice::B, false,
                                 std::nullopt});
    }
    if (flipped[i]) out.flipped.push_back(generated[i].id);
  }

  SplitResult& p = out.partition;
  p.mode = EvalMode::i;
  p.seed = cfg.seed;
  const double total = static_cast<double>(generated.size());
  p.ratios = {static_cast<double>(cfg.n_train) / total, static_cast<double>(cfg.n_val) / total,
              static_cast<double>(cfg.n_heldout) / total};
  p.d1 = {"D1", EvalMode::i, train_ids, val_ids, test_ids};
  p.d2 = {"D2", EvalMode::i, {}, {}, {}};
  std::set<std::string> flipped_ids(out.flipped.begin(), out.flipped.end());
  auto keep_consistent = [&](const std::vector<std::string>& from, std::vector<std::string>& to) {
    for (const auto& id : from) {
      if (!flipped_ids.contains(id)) to.push_back(id);
    }
  };
  keep_consistent(train_ids, p.d2.train);
  keep_consistent(val_ids, p.d2.val);
  keep_consistent(test_ids, p.d2.test);
  return out;
}

void ClusteredConfig::validate() const {
  if (dim < 4) throw ValidationError("clustered corpus needs dim >= 4");
  if (candidates_per_cluster == 0) throw ValidationError("need candidates in every cluster");
  if (queries < 4) throw ValidationError("need at least one query per cluster");
  if (!(separation > 0.0) || !(noise >= 0.0)) throw ValidationError("bad cluster geometry");
}

ClusteredCorpus synth_clustered(const ClusteredConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.dim;
  Rng rng(cfg.seed);
  const Matrix q = random_orthogonal(d, rng);

  ClusteredCorpus out;
  out.candidates = EmbeddingTable(d);
  out.queries = EmbeddingTable(d);
  for (std::size_t c = 0; c < kIntersectionGroups.size(); ++c) {
    Vector mean(d);
    for (std::size_t r = 0; r < d; ++r) mean[r] = cfg.separation * q(r, c);
    out.means.push_back(std::move(mean));
  }

  auto labels = [](GroupName g) -> std::pair<Gender, AgeGroup> {
    switch (g) {
      case GroupName::young_male:
        return {Gender::male, AgeGroup::young};
      case GroupName::young_female:
        return {Gender::female, AgeGroup::young};
      case GroupName::older_male:
        return {Gender::male, AgeGroup::older};
      default:
        return {Gender::female, AgeGroup::older};
    }
  };
  auto sample = [&](std::size_t cluster, std::string id, std::string identity, Role role) {
    EmbeddingRecord rec;
    rec.image_id = std::move(id);
    rec.identity_id = std::move(identity);
    rec.role = role;
    std::tie(rec.gender, rec.age_group) = labels(kIntersectionGroups[cluster]);
    rec.vector = out.means[cluster];
    axpy(1.0, gaussian(rng, d, cfg.noise), rec.vector);
    return rec;
  };

  std::size_t k = 0;
  for (std::size_t c = 0; c < kIntersectionGroups.size(); ++c) {
    for (std::size_t i = 0; i < cfg.candidates_per_cluster; ++i, ++k) {
      out.candidates.add(sample(c, numbered("c", k), numbered("cid", k), Role::source));
    }
  }
  const std::size_t clusters = kIntersectionGroups.size();
  k = 0;
  for (std::size_t c = 0; c < clusters; ++c) {
    const std::size_t n = cfg.queries / clusters + (c < cfg.queries % clusters ? 1 : 0);
    for (std::size_t i = 0; i < n; ++i, ++k) {
      out.queries.add(sample(c, numbered("q", k), numbered("qid", k), Role::target));
    }
  }
  return out;
}

GradientProbe synth_gradient_probe(std::size_t dim, std::size_t batch_size, double margin,
                                   std::uint64_t seed, double slack) {
  if (dim < 2 || batch_size == 0) throw ValidationError("gradient probe needs dim >= 2 and a batch");
  Rng rng(seed);
  Matrix w = Matrix::identity(dim);
  const double spread = 0.3 / std::sqrt(static_cast<double>(dim));
  for (double& x : w.values()) x += spread * rng.normal();
  GradientProbe probe{ProjectionModel{std::move(w)}, {}};
  std::size_t attempts = 0;
  while (probe.batch.size() < batch_size) {
    if (++attempts > 10000 * batch_size) throw ValidationError("no active triplet found for probe");
    TripletVectors t{numbered("p", probe.batch.size()), gaussian(rng, dim, 1.0),
                     gaussian(rng, dim, 1.0), gaussian(rng, dim, 1.0)};
    const double loss = triplet_loss(project(probe.model, t.anchor), project(probe.model, t.positive),
                                     project(probe.model, t.negative), margin);
    if (loss >= slack) probe.batch.push_back(std::move(t));
  }
  return probe;
}

void save_planted(const std::filesystem::path& dir, const PlantedCorpus& corpus) {
  std::filesystem::create_directories(dir);
  save_embeddings(dir / "embeddings.csv", corpus.embeddings);
  save_manifest(dir / "manifest.csv", corpus.manifest);
  save_annotations(dir / "annotations.csv", corpus.annotations);
  save_partition(dir / "partition.json", corpus.partition);
  save_model(dir / "hidden_metric.json", ProjectionModel{corpus.hidden_metric});
}

void save_clustered(const std::filesystem::path& dir, const ClusteredCorpus& corpus) {
  std::filesystem::create_directories(dir);
  save_embeddings(dir / "candidates.csv", corpus.candidates);
  save_embeddings(dir / "queries.csv", corpus.queries);
}

}  // namespace facesim
