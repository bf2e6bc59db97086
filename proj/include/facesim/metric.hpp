#pragma once

// Cosine similarity over learned linear projections of base embeddings.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "facesim/corpus.hpp"
#include "facesim/linalg.hpp"

namespace facesim {

inline constexpr std::string_view kModelFormat = "facesim-projection/1";

/// Square linear map applied on top of base embeddings. A default-built
/// model of dimension d is the identity, so its scores are base-embedding
/// cosines.
class ProjectionModel {
 public:
  ProjectionModel() = default;
  explicit ProjectionModel(std::size_t dim) : weight_(Matrix::identity(dim)) {}
  /// Throws FormatError unless square, ValidationError unless finite.
  explicit ProjectionModel(Matrix weight);

  static ProjectionModel identity(std::size_t dim) { return ProjectionModel(dim); }

  std::size_t dim() const noexcept { return weight_.rows(); }
  const Matrix& weight() const noexcept { return weight_; }

  friend bool operator==(const ProjectionModel&, const ProjectionModel&) = default;

 private:
  Matrix weight_;
};

/// weight * v. Throws FormatError on a dimension mismatch.
Vector project(const ProjectionModel& model, std::span<const double> v);

/// dot(u, v) / (|u| |v|) clamped to [-1, 1]. Throws DegenerateVectorError on
/// a zero-norm input and FormatError on a length mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

/// 1 - cosine(u, v), in [0, 2].
double distance(std::span<const double> u, std::span<const double> v);

/// Cosine between the two records' projections. A zero projection raises
/// DegenerateVectorError naming the record.
double similarity_score(const ProjectionModel& model, const EmbeddingRecord& a,
                        const EmbeddingRecord& b);

/// Projection with the degenerate check similarity_score applies.
Vector project_record(const ProjectionModel& model, const EmbeddingRecord& record);

std::string model_to_json(const ProjectionModel& model);
ProjectionModel model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const ProjectionModel& model);
ProjectionModel load_model(const std::filesystem::path& path);

}  // namespace facesim
