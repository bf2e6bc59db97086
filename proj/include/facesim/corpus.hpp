#pragma once

// Embedding tables, triplet annotations and dataset partitions.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "facesim/linalg.hpp"

namespace facesim {

enum class Role { target, source, swapped };
enum class Gender { male, female, unknown };
enum class AgeGroup { young, older, unknown };
enum class Choice { A, B };

std::string_view to_string(Role v) noexcept;
std::string_view to_string(Gender v) noexcept;
std::string_view to_string(AgeGroup v) noexcept;
std::string_view to_string(Choice v) noexcept;

std::optional<Role> parse_role(std::string_view text) noexcept;
std::optional<Gender> parse_gender(std::string_view text) noexcept;
std::optional<AgeGroup> parse_age_group(std::string_view text) noexcept;
std::optional<Choice> parse_choice(std::string_view text) noexcept;

/// One face image's base embedding plus its identity and attribute tags.
struct EmbeddingRecord {
  std::string image_id;
  /// Identity of the swapped-in source, or of the natural face.
  std::string identity_id;
  Role role = Role::source;
  /// Target image used to produce a swapped record.
  std::optional<std::string> target_id;
  Gender gender = Gender::unknown;
  AgeGroup age_group = AgeGroup::unknown;
  Vector vector;
};

/// Throws unless the record's vector is finite, nonzero and of length dim,
/// and a swapped record names its target.
void validate_record(const EmbeddingRecord& record, std::size_t dim);

/// Records of one dimension, indexed by image_id.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  /// Validates and appends. Throws IntegrityError on a duplicate image_id.
  void add(EmbeddingRecord record);

  const EmbeddingRecord* find(std::string_view image_id) const noexcept;
  /// Throws IntegrityError naming image_id when absent.
  const EmbeddingRecord& at(std::string_view image_id) const;

  std::span<const EmbeddingRecord> records() const noexcept { return records_; }
  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

 private:
  std::size_t dim_ = 0;
  std::vector<EmbeddingRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source);
EmbeddingTable load_embeddings(const std::filesystem::path& path);
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

struct RawAnnotation {
  std::string annotator_id;
  std::string triplet_id;
  Choice choice = Choice::A;
  bool is_dummy = false;
  std::optional<Choice> dummy_answer;
};

std::vector<RawAnnotation> parse_annotations(std::istream& in, const std::string& source);
std::vector<RawAnnotation> load_annotations(const std::filesystem::path& path);
void write_annotations(std::ostream& out, std::span<const RawAnnotation> annotations);
void save_annotations(const std::filesystem::path& path, std::span<const RawAnnotation> annotations);

/// Reference image C and the two options A and B of one triplet.
struct TripletRef {
  std::string triplet_id;
  std::string ref_id;
  std::string option_a_id;
  std::string option_b_id;
};

std::vector<TripletRef> parse_manifest(std::istream& in, const std::string& source);
std::vector<TripletRef> load_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, std::span<const TripletRef> manifest);
void save_manifest(const std::filesystem::path& path, std::span<const TripletRef> manifest);

/// Annotators whose every dummy answer is correct. Annotators that never saw
/// a dummy sample are not admitted.
std::set<std::string> validate_annotators(std::span<const RawAnnotation> annotations);

enum class Rejection { none, too_few_votes, tied };
std::string_view to_string(Rejection v) noexcept;
std::optional<Rejection> parse_rejection(std::string_view text) noexcept;

struct TripletSample {
  std::string triplet_id;
  std::string ref_id;
  std::string option_a_id;
  std::string option_b_id;
  /// Non-dummy choices of valid annotators, in input order.
  std::vector<Choice> votes;
  std::optional<Choice> majority;
  /// All votes identical.
  bool consistent = false;
  Rejection rejection = Rejection::none;

  bool admitted() const noexcept { return rejection == Rejection::none; }
  /// Option picked by the majority (x+). Requires admitted().
  const std::string& positive_id() const;
  /// Option not picked by the majority (x-). Requires admitted().
  const std::string& negative_id() const;
};

struct AggregateOptions {
  std::size_t min_votes = 3;
};

/// Collapses validated votes into one sample per manifest entry, in manifest
/// order. Samples with fewer than min_votes valid votes, or a tie, are
/// returned with a rejection marker.
std::vector<TripletSample> aggregate_triplets(std::span<const RawAnnotation> annotations,
                                              const std::set<std::string>& valid_annotators,
                                              std::span<const TripletRef> manifest,
                                              const AggregateOptions& options = {});

/// Aggregated sample file: triplet_id,ref_id,option_a_id,option_b_id,votes,majority,consistent,rejection
std::vector<TripletSample> parse_triplets(std::istream& in, const std::string& source);
std::vector<TripletSample> load_triplets(const std::filesystem::path& path);
void write_triplets(std::ostream& out, std::span<const TripletSample> samples);
void save_triplets(const std::filesystem::path& path, std::span<const TripletSample> samples);

/// All admitted samples (D1) and the consistent ones among them (D2).
struct Datasets {
  std::vector<std::string> d1;
  std::vector<std::string> d2;
  std::vector<std::string> warnings;
};

Datasets build_datasets(std::span<const TripletSample> samples);

/// Evaluation split modes by what the held-out samples share with training:
///   i   - neither source identities nor targets
///   ii  - every source identity is known, no target is
///   iii - every target is known, no source identity is
enum class EvalMode { i, ii, iii };
std::string_view to_string(EvalMode v) noexcept;
std::optional<EvalMode> parse_eval_mode(std::string_view text) noexcept;

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
  void validate() const;
};

struct DatasetPartition {
  std::string name;
  EvalMode mode = EvalMode::i;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

struct SplitResult {
  EvalMode mode = EvalMode::i;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  DatasetPartition d1;
  /// d1 restricted to consistent samples.
  DatasetPartition d2;
  /// Admitted samples that could not be placed without breaking the mode.
  std::vector<std::string> unassigned;

  const DatasetPartition& dataset(std::string_view name) const;
};

/// Identity view of an admitted sample used by splitting and auditing.
struct TripletIdentities {
  std::string triplet_id;
  std::string target_id;
  /// Distinct source identities of C, A and B, sorted.
  std::vector<std::string> sources;
};

/// Resolves C, A and B in the table and checks they are swapped records of
/// one target. Throws IntegrityError otherwise.
TripletIdentities triplet_identities(const TripletSample& sample, const EmbeddingTable& table);

/// Seeded split of the admitted samples honoring the mode's source/target
/// constraints between train and test. Throws InfeasibleSplitError naming the
/// binding constraint when no non-empty split exists.
SplitResult split_eval(std::span<const TripletSample> samples, const EmbeddingTable& table,
                       EvalMode mode, const SplitRatios& ratios, std::uint64_t seed);

struct AuditReport {
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Re-checks a split from scratch with plain set intersections: disjointness,
/// D2 within D1, consistency of D2 members and the mode constraints.
AuditReport audit_split(const SplitResult& split, std::span<const TripletSample> samples,
                        const EmbeddingTable& table);

std::string partition_to_json(const SplitResult& split);
SplitResult partition_from_json(std::string_view text);
void save_partition(const std::filesystem::path& path, const SplitResult& split);
SplitResult load_partition(const std::filesystem::path& path);

}  // namespace facesim
