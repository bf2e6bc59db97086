#pragma once

// Face-swap source selection: pick the query's attribute group, then
// recommend the members that look least like the query.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "facesim/attributes.hpp"
#include "facesim/corpus.hpp"
#include "facesim/metric.hpp"

namespace facesim {

enum class GroupMode {
  /// Classify among the four gender x age groups.
  intersection,
  /// Classify among all eight groups; intersections win ties.
  all,
};

std::string_view to_string(GroupMode m) noexcept;
std::optional<GroupMode> parse_group_mode(std::string_view text) noexcept;

struct RankedCandidate {
  std::string image_id;
  double similarity = 0.0;
  /// 1 is the most similar.
  std::size_t rank = 0;
};

struct Recommendation {
  std::string query_id;
  GroupName selected_group = GroupName::male;
  /// Least similar first.
  std::vector<RankedCandidate> candidates;
  std::size_t k = 0;
};

GroupName select_group(const ProjectionModel& model, const EmbeddingRecord& query,
                       std::span<const AttributeGroup> groups, GroupMode mode = GroupMode::intersection,
                       const CiOptions& options = {});

/// Members scored by similarity to the query, most similar first, ties by
/// image_id. The query's own image and identity are never candidates.
/// Throws ValidationError when no eligible member is left.
std::vector<RankedCandidate> rank_candidates(const ProjectionModel& model,
                                             const EmbeddingRecord& query,
                                             const AttributeGroup& group);

/// The k lowest-ranked members of one group, least similar first; the full
/// ranking is left in full_ranking.
Recommendation recommend_in_group(const ProjectionModel& model, const EmbeddingRecord& query,
                                  const AttributeGroup& group, std::size_t k,
                                  std::vector<RankedCandidate>& full_ranking);

/// select_group then the k lowest-ranked members of it, least similar first.
Recommendation recommend(const ProjectionModel& model, const EmbeddingRecord& query,
                         std::span<const AttributeGroup> groups, std::size_t k,
                         GroupMode mode = GroupMode::intersection, const CiOptions& options = {});

/// Recommendation plus the full ranking it was cut from.
Recommendation recommend(const ProjectionModel& model, const EmbeddingRecord& query,
                         std::span<const AttributeGroup> groups, std::size_t k, GroupMode mode,
                         const CiOptions& options, std::vector<RankedCandidate>& full_ranking);

}  // namespace facesim
