#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "facesim/corpus.hpp"
#include "facesim/error.hpp"
#include "support.hpp"

using namespace facesim;
using facesim::testing::identity_corpus;
using facesim::testing::make_sample;

namespace {

struct Sets {
  std::set<std::string> sources, targets;
};

// Identities of a list of triplets, resolved without the library's helpers.
Sets identities(const std::vector<std::string>& ids, const std::vector<TripletSample>& samples,
                const EmbeddingTable& table) {
  Sets out;
  for (const auto& id : ids) {
    for (const auto& s : samples) {
      if (s.triplet_id != id) continue;
      for (const auto* img : {&s.ref_id, &s.option_a_id, &s.option_b_id}) {
        const auto& r = table.at(*img);
        out.sources.insert(r.identity_id);
        out.targets.insert(*r.target_id);
      }
    }
  }
  return out;
}

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a) {
    if (b.contains(x)) return false;
  }
  return true;
}

bool subset_of(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a) {
    if (!b.contains(x)) return false;
  }
  return true;
}

void check_mode(EvalMode mode, const SplitResult& split, const std::vector<TripletSample>& samples,
                const EmbeddingTable& table) {
  for (const auto* part : {&split.d1, &split.d2}) {
    const Sets train = identities(part->train, samples, table);
    const Sets test = identities(part->test, samples, table);
    if (part == &split.d1) REQUIRE_FALSE(part->test.empty());
    switch (mode) {
      case EvalMode::i:
        CHECK(disjoint(test.sources, train.sources));
        CHECK(disjoint(test.targets, train.targets));
        break;
      case EvalMode::ii:
        CHECK(disjoint(test.targets, train.targets));
        CHECK(subset_of(test.sources, train.sources));
        break;
      case EvalMode::iii:
        CHECK(disjoint(test.sources, train.sources));
        CHECK(subset_of(test.targets, train.targets));
        break;
    }
  }
}

}  // namespace

TEST_CASE("every mode satisfies its constraints on a multi-identity corpus") {
  const auto c = identity_corpus(12, 30, 400, 21, 0.2, 4, 3);
  for (EvalMode mode : {EvalMode::i, EvalMode::ii, EvalMode::iii}) {
    CAPTURE(to_string(mode));
    const SplitResult split = split_eval(c.samples, c.table, mode, {}, 5);
    CHECK(split.mode == mode);
    check_mode(mode, split, c.samples, c.table);
    const AuditReport audit = audit_split(split, c.samples, c.table);
    CHECK(audit.ok());
    for (const auto& v : audit.violations) MESSAGE(v);

    std::set<std::string> seen;
    for (const auto* ids : {&split.d1.train, &split.d1.val, &split.d1.test, &split.unassigned}) {
      for (const auto& id : *ids) CHECK(seen.insert(id).second);
    }
    CHECK(seen.size() == c.samples.size());
  }
}

TEST_CASE("d2 is the consistent part of d1") {
  const auto c = identity_corpus(10, 20, 300, 3, 0.4);
  const SplitResult split = split_eval(c.samples, c.table, EvalMode::ii, {}, 1);
  std::set<std::string> consistent;
  for (const auto& s : c.samples) {
    if (s.consistent) consistent.insert(s.triplet_id);
  }
  auto filter = [&](const std::vector<std::string>& ids) {
    std::vector<std::string> out;
    for (const auto& id : ids) {
      if (consistent.contains(id)) out.push_back(id);
    }
    return out;
  };
  CHECK(split.d2.train == filter(split.d1.train));
  CHECK(split.d2.val == filter(split.d1.val));
  CHECK(split.d2.test == filter(split.d1.test));
}

TEST_CASE("splits replay from the seed") {
  const auto c = identity_corpus(8, 24, 200, 14, 0.2, 4, 2);
  for (EvalMode mode : {EvalMode::i, EvalMode::ii, EvalMode::iii}) {
    const auto a = split_eval(c.samples, c.table, mode, {}, 77);
    const auto b = split_eval(c.samples, c.table, mode, {}, 77);
    CHECK(partition_to_json(a) == partition_to_json(b));
  }
  const auto a = split_eval(c.samples, c.table, EvalMode::ii, {}, 1);
  const auto b = split_eval(c.samples, c.table, EvalMode::ii, {}, 2);
  CHECK(partition_to_json(a) != partition_to_json(b));
}

TEST_CASE("a source present in every triplet lands in train under mode ii") {
  auto c = identity_corpus(8, 20, 0, 2);
  Rng rng(8);
  for (int i = 0; i < 120; ++i) {
    const std::size_t t = rng.uniform_index(8);
    std::size_t a = 1 + rng.uniform_index(19), b;
    do b = 1 + rng.uniform_index(19); while (b == a);
    auto name = [&](std::size_t s) { return "sw_t" + std::to_string(t) + "_s" + std::to_string(s); };
    c.samples.push_back(make_sample("h" + std::to_string(i), name(0), name(a), name(b),
                                    {Choice::A, Choice::A, Choice::A}));
  }
  const auto split = split_eval(c.samples, c.table, EvalMode::ii, {}, 4);
  CHECK(identities(split.d1.train, c.samples, c.table).sources.contains("s0"));
  CHECK(audit_split(split, c.samples, c.table).ok());
}

TEST_CASE("every mode rejects a single-target corpus") {
  const auto c = identity_corpus(1, 30, 100, 6);
  for (EvalMode mode : {EvalMode::i, EvalMode::ii, EvalMode::iii}) {
    CHECK_THROWS_AS(split_eval(c.samples, c.table, mode, {}, 0), InfeasibleSplitError);
  }
  try {
    split_eval(c.samples, c.table, EvalMode::iii, {}, 0);
  } catch (const InfeasibleSplitError& e) {
    CHECK(std::string(e.what()).find("target") != std::string::npos);
  }
}

TEST_CASE("the audit catches a tampered partition") {
  const auto c = identity_corpus(10, 30, 300, 9, 0.2, 4, 2);
  SplitResult split = split_eval(c.samples, c.table, EvalMode::i, {}, 3);
  REQUIRE(audit_split(split, c.samples, c.table).ok());

  SplitResult leaked = split;
  leaked.d1.train.push_back(leaked.d1.test.front());
  CHECK_FALSE(audit_split(leaked, c.samples, c.table).ok());

  // Move a test triplet into train: its target is now shared.
  SplitResult moved = split;
  moved.d1.train.push_back(moved.d1.test.back());
  moved.d1.test.pop_back();
  moved.d2 = split.d2;
  CHECK_FALSE(audit_split(moved, c.samples, c.table).ok());

  SplitResult wrong_d2 = split;
  for (const auto& s : c.samples) {
    if (!s.consistent) {
      wrong_d2.d2.train.push_back(s.triplet_id);
      break;
    }
  }
  CHECK_FALSE(audit_split(wrong_d2, c.samples, c.table).ok());
}

TEST_CASE("rejected samples are never placed") {
  auto c = identity_corpus(6, 20, 150, 12);
  c.samples[0] = make_sample(c.samples[0].triplet_id, c.samples[0].ref_id, c.samples[0].option_a_id,
                             c.samples[0].option_b_id, {Choice::A, Choice::B});
  const auto split = split_eval(c.samples, c.table, EvalMode::ii, {}, 0);
  for (const auto* ids : {&split.d1.train, &split.d1.val, &split.d1.test, &split.unassigned}) {
    CHECK(std::find(ids->begin(), ids->end(), c.samples[0].triplet_id) == ids->end());
  }
}

TEST_CASE("mixed-target triplets are integrity errors") {
  auto c = identity_corpus(3, 10, 20, 1);
  c.samples[0].option_a_id = "sw_t1_s5";
  c.samples[0].ref_id = "sw_t0_s4";
  CHECK_THROWS_AS(split_eval(c.samples, c.table, EvalMode::i, {}, 0), IntegrityError);
}

TEST_CASE("ratios are validated") {
  CHECK_THROWS_AS((SplitRatios{0.5, 0.1, 0.1}.validate()), ValidationError);
  CHECK_THROWS_AS((SplitRatios{0.8, 0.2, 0.0}.validate()), ValidationError);
  CHECK_NOTHROW((SplitRatios{0.7, 0.0, 0.3}.validate()));
}

TEST_CASE("partition json round trips") {
  const auto c = identity_corpus(8, 24, 200, 14, 0.2, 4, 2);
  const auto split = split_eval(c.samples, c.table, EvalMode::iii, {0.6, 0.2, 0.2}, 3);
  const std::string text = partition_to_json(split);
  const SplitResult back = partition_from_json(text);
  CHECK(back.mode == split.mode);
  CHECK(back.seed == 3);
  CHECK(back.d1.train == split.d1.train);
  CHECK(back.d2.test == split.d2.test);
  CHECK(back.unassigned == split.unassigned);
  CHECK(partition_to_json(back) == text);
  CHECK_THROWS_AS(partition_from_json("{\"format\": \"other\"}"), Error);
}
