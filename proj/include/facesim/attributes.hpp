#pragma once

// Attribute groups, confidence-bound group distance and attribute
// classification of query faces.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facesim/corpus.hpp"
#include "facesim/metric.hpp"

namespace facesim {

enum class GroupName {
  male,
  female,
  young,
  older,
  young_male,
  young_female,
  older_male,
  older_female,
};

std::string_view to_string(GroupName g) noexcept;
std::optional<GroupName> parse_group_name(std::string_view text) noexcept;
bool is_intersection(GroupName g) noexcept;
/// Whether a record with these labels belongs to the group.
bool group_contains(GroupName g, Gender gender, AgeGroup age) noexcept;

inline constexpr std::array<GroupName, 4> kIntersectionGroups = {
    GroupName::young_male, GroupName::young_female, GroupName::older_male,
    GroupName::older_female};
inline constexpr std::array<GroupName, 4> kUnionGroups = {GroupName::male, GroupName::female,
                                                          GroupName::young, GroupName::older};

struct AttributeGroup {
  GroupName name = GroupName::male;
  std::vector<EmbeddingRecord> members;

  std::vector<std::string> member_ids() const;
};

struct GroupSampling {
  /// Members drawn per intersection group; nullopt keeps every labeled record.
  std::optional<std::size_t> per_intersection;
  std::uint64_t seed = 0;
};

/// Four intersection groups from fully labeled records (sampled per
/// `sampling`), then the four union groups as concatenations of their two
/// intersections. Returned in the order of kIntersectionGroups then
/// kUnionGroups. Throws ValidationError naming an empty group.
std::vector<AttributeGroup> build_groups(std::span<const EmbeddingRecord> records,
                                         const GroupSampling& sampling = {});

const AttributeGroup& find_group(std::span<const AttributeGroup> groups, GroupName name);

enum class CiStatistic { normal, student_t };

struct CiOptions {
  CiStatistic statistic = CiStatistic::normal;
};

struct GroupDistanceResult {
  GroupName group = GroupName::male;
  std::size_t n = 0;
  double mean_d = 0.0;
  double sd_d = 0.0;
  /// Upper limit of the 95% confidence interval of the mean distance.
  double upper = 0.0;
};

/// Mean, sample SD (n-1) and mean + q * sd / sqrt(n), with q = 1.96 for the
/// normal statistic or the 0.975 Student-t quantile on n-1 degrees of freedom.
/// A single distance gives sd = 0 and upper = that distance.
GroupDistanceResult summarize_distances(std::span<const double> distances,
                                        const CiOptions& options = {});

/// Distances 1 - cos(f(query), f(member)) to every member except one sharing
/// the query's image_id.
std::vector<double> member_distances(const ProjectionModel& model, const EmbeddingRecord& query,
                                     const AttributeGroup& group);

GroupDistanceResult group_distance(const ProjectionModel& model, const EmbeddingRecord& query,
                                   const AttributeGroup& group, const CiOptions& options = {});

/// Precedence among candidate groups with equal distance: intersection groups
/// first, then lexicographic by name.
bool group_precedes(GroupName a, GroupName b) noexcept;

/// Group with the smallest upper bound; ties resolved by group_precedes.
/// Throws ValidationError when empty.
GroupName argmin_group(std::span<const GroupDistanceResult> distances);

/// argmin_group over the candidates' distances to the query.
/// Throws ValidationError with fewer than two candidates.
GroupName classify_query(const ProjectionModel& model, const EmbeddingRecord& query,
                         std::span<const AttributeGroup> candidates,
                         const CiOptions& options = {});

/// Same as classify_query but also returns the per-group bounds, in the order
/// of `candidates`.
GroupName classify_query(const ProjectionModel& model, const EmbeddingRecord& query,
                         std::span<const AttributeGroup> candidates, const CiOptions& options,
                         std::vector<GroupDistanceResult>& distances);

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs with the
/// positive scored higher, ties counting one half. Throws EvaluationError
/// unless both classes are present.
double auc(std::span<const ScoredLabel> items);

enum class ClassificationTask { gender, age, four_way };
std::string_view to_string(ClassificationTask t) noexcept;
std::optional<ClassificationTask> parse_task(std::string_view text) noexcept;
/// Candidate groups of the task in fixed order.
std::vector<GroupName> task_groups(ClassificationTask task);
/// True label of a record for the task, or nullopt when its labels are unknown.
std::optional<GroupName> task_label(ClassificationTask task, const EmbeddingRecord& record) noexcept;

struct CategoryMetrics {
  GroupName category = GroupName::male;
  std::size_t support = 0;
  std::size_t predicted = 0;
  std::size_t true_positive = 0;
  /// 0 when nothing was predicted as this category.
  double precision = 0.0;
  double recall = 0.0;
  /// One-vs-rest accuracy.
  double accuracy = 0.0;
  /// One-vs-rest AUC of -upper for this category's group; NaN when the
  /// queries hold only one class.
  double auc = 0.0;
};

struct QueryOutcome {
  std::string query_id;
  GroupName truth = GroupName::male;
  GroupName predicted = GroupName::male;
  std::vector<GroupDistanceResult> distances;
};

struct ClassificationReport {
  ClassificationTask task = ClassificationTask::four_way;
  std::vector<GroupName> categories;
  /// confusion[truth][predicted], indexed like categories.
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<CategoryMetrics> per_category;
  double accuracy = 0.0;
  std::size_t n_queries = 0;
  std::vector<QueryOutcome> outcomes;
};

/// Classifies every query against the task's groups and reduces the
/// confusion matrix and one-vs-rest AUCs in query order. Throws
/// IntegrityError for a query without the task's labels.
ClassificationReport evaluate_classification(const ProjectionModel& model,
                                             std::span<const EmbeddingRecord> queries,
                                             std::span<const AttributeGroup> groups,
                                             ClassificationTask task,
                                             const CiOptions& options = {});

}  // namespace facesim
