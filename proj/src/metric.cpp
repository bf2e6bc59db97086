#include "facesim/metric.hpp"

#include <algorithm>
#include <cmath>

#include "facesim/error.hpp"

namespace facesim {

ProjectionModel::ProjectionModel(Matrix weight) : weight_(std::move(weight)) {
  if (weight_.rows() != weight_.cols() || weight_.rows() == 0) {
    throw FormatError("projection weight must be a non-empty square matrix, got " +
                      std::to_string(weight_.rows()) + "x" + std::to_string(weight_.cols()));
  }
  if (!weight_.all_finite()) throw ValidationError("projection weight has a non-finite entry");
}

Vector project(const ProjectionModel& model, std::span<const double> v) {
  if (v.size() != model.dim()) {
    throw FormatError("cannot project a " + std::to_string(v.size()) +
                      "-vector with a model of dimension " + std::to_string(model.dim()));
  }
  return gemv(model.weight(), v);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw FormatError("cosine of vectors of lengths " + std::to_string(u.size()) + " and " +
                      std::to_string(v.size()));
  }
  const double nu = norm(u);
  const double nv = norm(v);
  if (!(nu > 0.0) || !(nv > 0.0)) throw DegenerateVectorError("cosine of a zero-norm vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

double distance(std::span<const double> u, std::span<const double> v) {
  return 1.0 - cosine(u, v);
}

Vector project_record(const ProjectionModel& model, const EmbeddingRecord& record) {
  Vector y = project(model, record.vector);
  if (!(norm(y) > 0.0)) {
    throw DegenerateVectorError("projection of '" + record.image_id + "' is the zero vector");
  }
  return y;
}

double similarity_score(const ProjectionModel& model, const EmbeddingRecord& a,
                        const EmbeddingRecord& b) {
  return cosine(project_record(model, a), project_record(model, b));
}

}  // namespace facesim
