#include "facesim/attributes.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "facesim/error.hpp"
#include "facesim/rng.hpp"

namespace facesim {

std::string_view to_string(GroupName g) noexcept {
  switch (g) {
    case GroupName::male:
      return "male";
    case GroupName::female:
      return "female";
    case GroupName::young:
      return "young";
    case GroupName::older:
      return "older";
    case GroupName::young_male:
      return "young_male";
    case GroupName::young_female:
      return "young_female";
    case GroupName::older_male:
      return "older_male";
    case GroupName::older_female:
      return "older_female";
  }
  return "?";
}

std::optional<GroupName> parse_group_name(std::string_view text) noexcept {
  for (GroupName g : kIntersectionGroups) {
    if (text == to_string(g)) return g;
  }
  for (GroupName g : kUnionGroups) {
    if (text == to_string(g)) return g;
  }
  return std::nullopt;
}

bool is_intersection(GroupName g) noexcept {
  return std::find(kIntersectionGroups.begin(), kIntersectionGroups.end(), g) !=
         kIntersectionGroups.end();
}

bool group_contains(GroupName g, Gender gender, AgeGroup age) noexcept {
  switch (g) {
    case GroupName::male:
      return gender == Gender::male;
    case GroupName::female:
      return gender == Gender::female;
    case GroupName::young:
      return age == AgeGroup::young;
    case GroupName::older:
      return age == AgeGroup::older;
    case GroupName::young_male:
      return age == AgeGroup::young && gender == Gender::male;
    case GroupName::young_female:
      return age == AgeGroup::young && gender == Gender::female;
    case GroupName::older_male:
      return age == AgeGroup::older && gender == Gender::male;
    case GroupName::older_female:
      return age == AgeGroup::older && gender == Gender::female;
  }
  return false;
}

std::vector<std::string> AttributeGroup::member_ids() const {
  std::vector<std::string> ids;
  ids.reserve(members.size());
  for (const auto& m : members) ids.push_back(m.image_id);
  return ids;
}

std::vector<AttributeGroup> build_groups(std::span<const EmbeddingRecord> records,
                                         const GroupSampling& sampling) {
  Rng rng(sampling.seed);
  std::vector<AttributeGroup> groups;
  for (GroupName g : kIntersectionGroups) {
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (r.gender == Gender::unknown || r.age_group == AgeGroup::unknown) continue;
      if (group_contains(g, r.gender, r.age_group)) picked.push_back(i);
    }
    if (sampling.per_intersection && *sampling.per_intersection < picked.size()) {
      rng.shuffle(std::span(picked));
      picked.resize(*sampling.per_intersection);
      std::sort(picked.begin(), picked.end());
    }
    if (picked.empty()) {
      throw ValidationError("attribute group '" + std::string(to_string(g)) + "' is empty");
    }
    AttributeGroup group{g, {}};
    for (std::size_t i : picked) group.members.push_back(records[i]);
    groups.push_back(std::move(group));
  }
  auto parts = [&](GroupName g) -> std::pair<GroupName, GroupName> {
    switch (g) {
      case GroupName::male:
        return {GroupName::young_male, GroupName::older_male};
      case GroupName::female:
        return {GroupName::young_female, GroupName::older_female};
      case GroupName::young:
        return {GroupName::young_male, GroupName::young_female};
      default:
        return {GroupName::older_male, GroupName::older_female};
    }
  };
  for (GroupName g : kUnionGroups) {
    const auto [first, second] = parts(g);
    AttributeGroup group{g, find_group(groups, first).members};
    const auto& more = find_group(groups, second).members;
    group.members.insert(group.members.end(), more.begin(), more.end());
    groups.push_back(std::move(group));
  }
  return groups;
}

const AttributeGroup& find_group(std::span<const AttributeGroup> groups, GroupName name) {
  for (const auto& g : groups) {
    if (g.name == name) return g;
  }
  throw ValidationError("no attribute group named '" + std::string(to_string(name)) + "'");
}

GroupDistanceResult summarize_distances(std::span<const double> distances,
                                        const CiOptions& options) {
  if (distances.empty()) throw ValidationError("group distance over an empty group");
  GroupDistanceResult out;
  out.n = distances.size();
  double sum = 0.0;
  for (double d : distances) sum += d;
  out.mean_d = sum / static_cast<double>(out.n);
  if (out.n == 1) {
    out.sd_d = 0.0;
    out.upper = out.mean_d;
    return out;
  }
  double ss = 0.0;
  for (double d : distances) ss += (d - out.mean_d) * (d - out.mean_d);
  out.sd_d = std::sqrt(ss / static_cast<double>(out.n - 1));
  double q = 1.96;
  if (options.statistic == CiStatistic::student_t) {
    boost::math::students_t_distribution<double> dist(static_cast<double>(out.n - 1));
    q = boost::math::quantile(dist, 0.975);
  }
  out.upper = out.mean_d + q * out.sd_d / std::sqrt(static_cast<double>(out.n));
  return out;
}

std::vector<double> member_distances(const ProjectionModel& model, const EmbeddingRecord& query,
                                     const AttributeGroup& group) {
  const Vector q = project_record(model, query);
  std::vector<double> out;
  out.reserve(group.members.size());
  for (const auto& m : group.members) {
    if (m.image_id == query.image_id) continue;
    out.push_back(distance(q, project_record(model, m)));
  }
  return out;
}

GroupDistanceResult group_distance(const ProjectionModel& model, const EmbeddingRecord& query,
                                   const AttributeGroup& group, const CiOptions& options) {
  const std::vector<double> d = member_distances(model, query, group);
  if (d.empty()) {
    throw ValidationError("attribute group '" + std::string(to_string(group.name)) +
                          "' has no members other than the query");
  }
  GroupDistanceResult out = summarize_distances(d, options);
  out.group = group.name;
  return out;
}

bool group_precedes(GroupName a, GroupName b) noexcept {
  const bool ia = is_intersection(a);
  const bool ib = is_intersection(b);
  if (ia != ib) return ia;
  return to_string(a) < to_string(b);
}

GroupName argmin_group(std::span<const GroupDistanceResult> distances) {
  if (distances.empty()) throw ValidationError("no group distances to compare");
  std::size_t best = 0;
  for (std::size_t i = 1; i < distances.size(); ++i) {
    const double d = distances[i].upper;
    const double b = distances[best].upper;
    if (d < b || (d == b && group_precedes(distances[i].group, distances[best].group))) best = i;
  }
  return distances[best].group;
}

GroupName classify_query(const ProjectionModel& model, const EmbeddingRecord& query,
                         std::span<const AttributeGroup> candidates, const CiOptions& options,
                         std::vector<GroupDistanceResult>& distances) {
  if (candidates.size() < 2) throw ValidationError("classification needs at least two groups");
  distances.clear();
  for (const auto& g : candidates) distances.push_back(group_distance(model, query, g, options));
  return argmin_group(distances);
}

GroupName classify_query(const ProjectionModel& model, const EmbeddingRecord& query,
                         std::span<const AttributeGroup> candidates, const CiOptions& options) {
  std::vector<GroupDistanceResult> scratch;
  return classify_query(model, query, candidates, options, scratch);
}

double auc(std::span<const ScoredLabel> items) {
  std::vector<ScoredLabel> sorted(items.begin(), items.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
  std::size_t n_pos = 0;
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) ++j;
    // Ranks i+1 .. j share their mean.
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (sorted[k].positive) {
        ++n_pos;
        pos_rank_sum += mid_rank;
      }
    }
    i = j;
  }
  const std::size_t n_neg = sorted.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw EvaluationError("AUC is undefined without both positive and negative labels");
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

std::string_view to_string(ClassificationTask t) noexcept {
  switch (t) {
    case ClassificationTask::gender:
      return "gender";
    case ClassificationTask::age:
      return "age";
    case ClassificationTask::four_way:
      return "four-way";
  }
  return "?";
}

std::optional<ClassificationTask> parse_task(std::string_view text) noexcept {
  if (text == "gender") return ClassificationTask::gender;
  if (text == "age") return ClassificationTask::age;
  if (text == "four-way") return ClassificationTask::four_way;
  return std::nullopt;
}

std::vector<GroupName> task_groups(ClassificationTask task) {
  switch (task) {
    case ClassificationTask::gender:
      return {GroupName::male, GroupName::female};
    case ClassificationTask::age:
      return {GroupName::young, GroupName::older};
    case ClassificationTask::four_way:
      return {kIntersectionGroups.begin(), kIntersectionGroups.end()};
  }
  return {};
}

std::optional<GroupName> task_label(ClassificationTask task,
                                    const EmbeddingRecord& record) noexcept {
  for (GroupName g : task_groups(task)) {
    const bool needs_gender = g != GroupName::young && g != GroupName::older;
    const bool needs_age = g != GroupName::male && g != GroupName::female;
    if (needs_gender && record.gender == Gender::unknown) return std::nullopt;
    if (needs_age && record.age_group == AgeGroup::unknown) return std::nullopt;
    if (group_contains(g, record.gender, record.age_group)) return g;
  }
  return std::nullopt;
}

ClassificationReport evaluate_classification(const ProjectionModel& model,
                                             std::span<const EmbeddingRecord> queries,
                                             std::span<const AttributeGroup> groups,
                                             ClassificationTask task, const CiOptions& options) {
  if (queries.empty()) throw EvaluationError("no queries to classify");
  ClassificationReport report;
  report.task = task;
  report.categories = task_groups(task);
  const std::size_t k = report.categories.size();
  std::vector<AttributeGroup> candidates;
  for (GroupName g : report.categories) candidates.push_back(find_group(groups, g));

  auto index_of = [&](GroupName g) {
    return static_cast<std::size_t>(
        std::find(report.categories.begin(), report.categories.end(), g) -
        report.categories.begin());
  };

  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (const auto& q : queries) {
    auto truth = task_label(task, q);
    if (!truth) {
      throw IntegrityError("query '" + q.image_id + "' lacks the labels of task '" +
                           std::string(to_string(task)) + "'");
    }
    QueryOutcome outcome;
    outcome.query_id = q.image_id;
    outcome.truth = *truth;
    outcome.predicted = classify_query(model, q, candidates, options, outcome.distances);
    ++report.confusion[index_of(outcome.truth)][index_of(outcome.predicted)];
    report.outcomes.push_back(std::move(outcome));
  }
  report.n_queries = report.outcomes.size();

  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) correct += report.confusion[c][c];
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n_queries);

  for (std::size_t c = 0; c < k; ++c) {
    CategoryMetrics m;
    m.category = report.categories[c];
    m.true_positive = report.confusion[c][c];
    for (std::size_t j = 0; j < k; ++j) {
      m.support += report.confusion[c][j];
      m.predicted += report.confusion[j][c];
    }
    m.precision = m.predicted == 0 ? 0.0
                                   : static_cast<double>(m.true_positive) /
                                         static_cast<double>(m.predicted);
    m.recall = m.support == 0 ? 0.0
                              : static_cast<double>(m.true_positive) /
                                    static_cast<double>(m.support);
    const std::size_t false_pos = m.predicted - m.true_positive;
    const std::size_t false_neg = m.support - m.true_positive;
    const std::size_t true_neg = report.n_queries - m.true_positive - false_pos - false_neg;
    m.accuracy = static_cast<double>(m.true_positive + true_neg) /
                 static_cast<double>(report.n_queries);

    std::vector<ScoredLabel> scored;
    scored.reserve(report.n_queries);
    for (const auto& o : report.outcomes) {
      scored.push_back({-o.distances[c].upper, o.truth == m.category});
    }
    const bool both = m.support > 0 && m.support < report.n_queries;
    m.auc = both ? auc(scored) : std::nan("");
    report.per_category.push_back(m);
  }
  return report;
}

}  // namespace facesim
