#pragma once

// Similar/dissimilar pair accuracy over annotated triplets.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "facesim/corpus.hpp"
#include "facesim/metric.hpp"

namespace facesim {

struct TripletVectors;

struct PairRecord {
  std::string triplet_id;
  /// Score of (reference, majority-chosen option).
  double sim_pair_score = 0.0;
  /// Score of (reference, other option).
  double dissim_pair_score = 0.0;
  /// sim_pair_score > dissim_pair_score; exact ties are incorrect.
  bool correct = false;
};

struct TripletEvaluation {
  double accuracy = 0.0;
  std::size_t n_correct = 0;
  /// Samples that were skipped for being inconsistent or rejected.
  std::size_t n_excluded = 0;
  /// One record per consistent sample, ordered by triplet_id.
  std::vector<PairRecord> records;
};

/// Scores consistent samples only. Throws EvaluationError when none remain.
TripletEvaluation eval_triplets(const ProjectionModel& model,
                                std::span<const TripletSample> samples,
                                const EmbeddingTable& table);

/// Fraction of triplets whose positive outscores the negative under model.
/// Throws EvaluationError on an empty input.
double triplet_accuracy(const ProjectionModel& model, std::span<const TripletVectors> triplets);

/// triplet_id,x,y,correct with x the similar-pair score and y the dissimilar one.
void write_scatter(std::ostream& out, std::span<const PairRecord> records);
void export_scatter(const std::filesystem::path& path, std::span<const PairRecord> records);

/// Accuracy rounded half away from zero to three decimals, as reported.
double round3(double value) noexcept;

}  // namespace facesim
