#pragma once

// Seeded synthetic corpora with known ground truth.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "facesim/corpus.hpp"
#include "facesim/linalg.hpp"
#include "facesim/metric.hpp"
#include "facesim/trainer.hpp"

namespace facesim {

/// Swapped-face triplets labeled by cosine under a hidden projection.
///
/// Every image vector is target + source identity + per-image noise, plus a
/// large per-image nuisance component confined to a low-rank subspace. The
/// hidden metric suppresses that subspace, so base-embedding cosines carry
/// little of the label signal while a learned projection can recover it.
struct PlantedConfig {
  std::size_t dim = 32;
  std::size_t n_train = 500;
  std::size_t n_val = 0;
  std::size_t n_heldout = 100;
  /// Identity pools for training/validation triplets.
  std::size_t train_targets = 40;
  std::size_t train_sources = 60;
  /// Disjoint pools for held-out triplets (unseen targets and sources).
  std::size_t heldout_targets = 10;
  std::size_t heldout_sources = 20;
  std::size_t nuisance_rank = 4;
  double nuisance_scale = 6.0;
  double suppressed_weight = 0.05;
  double target_scale = 0.5;
  double image_noise = 0.3;
  /// Minimum |cos_M(C,A) - cos_M(C,B)| for a generated triplet.
  double min_gap = 0.1;
  /// Fraction of triplets whose majority is flipped (2 wrong votes, 1 right).
  double flip_fraction = 0.0;
  std::size_t annotators = 3;
  std::size_t dummies_per_annotator = 5;
  /// Adds one annotator who fails a dummy and votes at random.
  bool careless_annotator = true;
  std::uint64_t seed = 7;

  void validate() const;
};

struct PlantedCorpus {
  EmbeddingTable embeddings;
  std::vector<TripletRef> manifest;
  std::vector<RawAnnotation> annotations;
  /// Projection whose cosines define the true labels.
  Matrix hidden_metric;
  /// Fixed mode-i split: validation and training share pools, held-out
  /// triplets use fresh targets and sources.
  SplitResult partition;
  /// Triplets whose majority label was flipped.
  std::vector<std::string> flipped;
};

PlantedCorpus synth_planted(const PlantedConfig& config);

/// Four Gaussian clusters, one per gender x age intersection.
struct ClusteredConfig {
  std::size_t dim = 32;
  std::size_t candidates_per_cluster = 100;
  /// Split evenly over the clusters (remainder to the first ones).
  std::size_t queries = 200;
  /// Norm of each cluster mean; means are mutually orthogonal.
  double separation = 4.0;
  /// Per-component standard deviation around the mean.
  double noise = 0.5;
  std::uint64_t seed = 7;

  void validate() const;
};

struct ClusteredCorpus {
  EmbeddingTable candidates;
  EmbeddingTable queries;
  /// Cluster means in kIntersectionGroups order.
  std::vector<Vector> means;
};

ClusteredCorpus synth_clustered(const ClusteredConfig& config);

/// A perturbed-identity model plus a batch whose hinges are all active by at
/// least `slack`, so a small finite-difference step never crosses the kink.
struct GradientProbe {
  ProjectionModel model;
  std::vector<TripletVectors> batch;
};

GradientProbe synth_gradient_probe(std::size_t dim, std::size_t batch_size, double margin,
                                   std::uint64_t seed, double slack = 1e-2);

/// Writes embeddings.csv, manifest.csv, annotations.csv, partition.json and
/// hidden_metric.json into dir.
void save_planted(const std::filesystem::path& dir, const PlantedCorpus& corpus);
/// Writes candidates.csv and queries.csv into dir.
void save_clustered(const std::filesystem::path& dir, const ClusteredCorpus& corpus);

}  // namespace facesim
