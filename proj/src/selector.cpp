#include "facesim/selector.hpp"

#include <algorithm>

#include "facesim/error.hpp"

namespace facesim {

std::string_view to_string(GroupMode m) noexcept {
  return m == GroupMode::intersection ? "intersection" : "all";
}

std::optional<GroupMode> parse_group_mode(std::string_view text) noexcept {
  if (text == "intersection") return GroupMode::intersection;
  if (text == "all") return GroupMode::all;
  return std::nullopt;
}

GroupName select_group(const ProjectionModel& model, const EmbeddingRecord& query,
                       std::span<const AttributeGroup> groups, GroupMode mode,
                       const CiOptions& options) {
  std::vector<GroupDistanceResult> distances;
  for (const auto& g : groups) {
    if (mode == GroupMode::all || is_intersection(g.name)) {
      distances.push_back(group_distance(model, query, g, options));
    }
  }
  if (distances.size() < 2) throw ValidationError("group selection needs at least two groups");
  return argmin_group(distances);
}

std::vector<RankedCandidate> rank_candidates(const ProjectionModel& model,
                                             const EmbeddingRecord& query,
                                             const AttributeGroup& group) {
  const Vector q = project_record(model, query);
  std::vector<RankedCandidate> ranked;
  ranked.reserve(group.members.size());
  for (const auto& m : group.members) {
    if (m.image_id == query.image_id) continue;
    if (!query.identity_id.empty() && m.identity_id == query.identity_id) continue;
    ranked.push_back({m.image_id, cosine(q, project_record(model, m)), 0});
  }
  if (ranked.empty()) {
    throw ValidationError("group '" + std::string(to_string(group.name)) +
                          "' has no candidate besides the query itself");
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.image_id < b.image_id;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i + 1;
  return ranked;
}

Recommendation recommend_in_group(const ProjectionModel& model, const EmbeddingRecord& query,
                                  const AttributeGroup& group, std::size_t k,
                                  std::vector<RankedCandidate>& full_ranking) {
  if (k < 1) throw ValidationError("recommendation size k must be at least 1");
  Recommendation rec;
  rec.query_id = query.image_id;
  rec.k = k;
  rec.selected_group = group.name;
  full_ranking = rank_candidates(model, query, group);
  const std::size_t take = std::min(k, full_ranking.size());
  rec.candidates.assign(full_ranking.rbegin(), full_ranking.rbegin() + static_cast<std::ptrdiff_t>(take));
  return rec;
}

Recommendation recommend(const ProjectionModel& model, const EmbeddingRecord& query,
                         std::span<const AttributeGroup> groups, std::size_t k, GroupMode mode,
                         const CiOptions& options, std::vector<RankedCandidate>& full_ranking) {
  if (k < 1) throw ValidationError("recommendation size k must be at least 1");
  const GroupName selected = select_group(model, query, groups, mode, options);
  return recommend_in_group(model, query, find_group(groups, selected), k, full_ranking);
}

Recommendation recommend(const ProjectionModel& model, const EmbeddingRecord& query,
                         std::span<const AttributeGroup> groups, std::size_t k, GroupMode mode,
                         const CiOptions& options) {
  std::vector<RankedCandidate> scratch;
  return recommend(model, query, groups, k, mode, options, scratch);
}

}  // namespace facesim
