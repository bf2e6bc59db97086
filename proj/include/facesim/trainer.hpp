#pragma once

// Triplet-loss training of a ProjectionModel with mini-batch SGD.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "facesim/corpus.hpp"
#include "facesim/linalg.hpp"
#include "facesim/metric.hpp"

namespace facesim {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 32;
  double margin = 0.1;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  bool shuffle = true;

  /// Throws ValidationError on out-of-range values.
  void validate() const;
};

/// Base embeddings of one annotated triplet: the reference (x), the option
/// the majority picked (x+) and the other option (x-).
struct TripletVectors {
  std::string triplet_id;
  Vector anchor;
  Vector positive;
  Vector negative;
};

/// Looks up C, majority and minority images of each admitted sample.
/// Throws IntegrityError on unresolvable ids or rejected samples.
std::vector<TripletVectors> resolve_triplets(std::span<const TripletSample> samples,
                                             const EmbeddingTable& table);

/// max(0, cos(x, x-) - cos(x, x+) + margin)
double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin);

struct LossAndGradient {
  /// Mean loss over the batch.
  double loss = 0.0;
  /// d(loss)/d(weight), same shape as the weight.
  Matrix gradient;
  /// Triplets whose hinge was active.
  std::size_t active = 0;
};

/// Mean triplet loss of the projected batch and its analytic gradient with
/// respect to the projection weight. Throws ValidationError on an empty batch.
LossAndGradient batch_loss_and_gradient(const ProjectionModel& model,
                                        std::span<const TripletVectors> batch, double margin);

/// Mean loss only.
double batch_loss(const ProjectionModel& model, std::span<const TripletVectors> batch,
                  double margin);

struct TrainHistory {
  std::vector<double> mean_loss;
  /// NaN when no validation samples were given.
  std::vector<double> val_accuracy;
  std::vector<double> active_fraction;

  std::size_t epochs() const noexcept { return mean_loss.size(); }
  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

/// epoch,mean_loss,val_accuracy,active_fraction (empty val_accuracy when absent)
void write_history_csv(std::ostream& out, const TrainHistory& history);
void save_history_csv(const std::filesystem::path& path, const TrainHistory& history);

struct TrainResult {
  ProjectionModel model;
  TrainHistory history;
};

/// Runs config.epochs epochs of (optionally shuffled) mini-batch SGD with
/// momentum and coupled weight decay starting from `initial`. Validation
/// accuracy is measured on `val` after each epoch. Throws DivergenceError when
/// the loss or weights stop being finite.
TrainResult train(const ProjectionModel& initial, std::span<const TripletVectors> train_set,
                  std::span<const TripletVectors> val, const TrainConfig& config);

struct GradientCheckOptions {
  double step = 1e-5;
  /// Relative error denominators never go below this.
  double magnitude_floor = 1e-3;
  /// Check at most this many weight entries, sampled with `seed`; 0 checks all.
  std::size_t max_entries = 0;
  std::uint64_t seed = 0;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_row = 0;
  std::size_t worst_col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Compares the analytic batch gradient against central finite differences,
/// entry by entry: |analytic - numeric| / max(|analytic|, |numeric|, floor).
GradientCheckResult gradient_check(const ProjectionModel& model,
                                   std::span<const TripletVectors> batch, double margin,
                                   const GradientCheckOptions& options = {});

}  // namespace facesim
