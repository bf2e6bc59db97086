#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <sstream>

#include "facesim/corpus.hpp"
#include "facesim/error.hpp"
#include "support.hpp"

using namespace facesim;
using facesim::testing::make_sample;

namespace {

const char* kHeader4 = "image_id,identity_id,role,target_id,gender,age_group,v0,v1,v2,v3\n";

EmbeddingTable parse(const std::string& body) {
  std::istringstream in(std::string(kHeader4) + body);
  return parse_embeddings(in, "emb.csv");
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

RawAnnotation vote(std::string who, std::string triplet, Choice c) {
  return {std::move(who), std::move(triplet), c, false, std::nullopt};
}
RawAnnotation dummy(std::string who, std::string triplet, Choice given, Choice truth) {
  return {std::move(who), std::move(triplet), given, true, truth};
}

std::vector<TripletRef> manifest(std::initializer_list<const char*> ids) {
  std::vector<TripletRef> m;
  for (const char* id : ids) m.push_back({id, "c", "a", "b"});
  return m;
}

}  // namespace

TEST_CASE("three rows of dimension four") {
  const auto t = parse(
      "t1,i1,target,,male,young,1,0,0,0\n"
      "s01,i2,source,,female,older,0,1,0,0\n"
      "sw1,i2,swapped,t1,unknown,unknown,0.5,0.5,0,1\n");
  CHECK(t.size() == 3);
  CHECK(t.dim() == 4);
  const auto& sw = t.at("sw1");
  CHECK(sw.role == Role::swapped);
  CHECK(*sw.target_id == "t1");
  CHECK(sw.vector == Vector{0.5, 0.5, 0, 1});
  CHECK(t.at("s01").gender == Gender::female);
  CHECK(t.at("s01").age_group == AgeGroup::older);
  CHECK_FALSE(t.at("t1").target_id.has_value());
}

TEST_CASE("short row is a dimension error at that row") {
  const std::string body =
      "a,i1,source,,male,young,1,0,0,0\n"
      "b,i1,source,,male,young,1,0,0\n";
  CHECK_THROWS_AS(parse(body), FormatError);
  const std::string msg = message_of([&] { parse(body); });
  CHECK(msg.find("emb.csv:3") != std::string::npos);
  CHECK(msg.find("row 2") != std::string::npos);
}

TEST_CASE("duplicate image_id is named") {
  const std::string body =
      "s01,i1,source,,male,young,1,0,0,0\n"
      "s01,i2,source,,male,young,0,1,0,0\n";
  CHECK_THROWS_AS(parse(body), IntegrityError);
  CHECK(message_of([&] { parse(body); }).find("s01") != std::string::npos);
}

TEST_CASE("invalid vectors and records are rejected") {
  CHECK_THROWS_AS(parse("z,i1,source,,male,young,0,0,0,0\n"), ValidationError);
  CHECK_THROWS_AS(parse("z,i1,source,,male,young,1,nan,0,0\n"), Error);
  CHECK_THROWS_AS(parse("z,i1,swapped,,male,young,1,0,0,0\n"), ValidationError);
  CHECK_THROWS_AS(parse("z,i1,sideways,,male,young,1,0,0,0\n"), ParseError);
  CHECK_THROWS_AS(parse("z,i1,source,,male,young,1,abc,0,0\n"), ParseError);
  std::istringstream bad_header("id,identity_id\n");
  CHECK_THROWS_AS(parse_embeddings(bad_header, "h.csv"), Error);
}

TEST_CASE("embedding table written and read back is identical") {
  Rng rng(4);
  EmbeddingTable t(5);
  for (int i = 0; i < 10; ++i) {
    EmbeddingRecord r;
    r.image_id = "r" + std::to_string(i);
    r.identity_id = "id" + std::to_string(i % 3);
    r.role = i % 2 ? Role::swapped : Role::source;
    if (r.role == Role::swapped) r.target_id = "t0";
    r.gender = i % 3 ? Gender::male : Gender::female;
    r.vector = facesim::testing::random_vector(rng, 5);
    t.add(r);
  }
  std::ostringstream out;
  write_embeddings(out, t);
  std::istringstream in(out.str());
  const auto back = parse_embeddings(in, "rt");
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back.records()[i].vector == t.records()[i].vector);
    CHECK(back.records()[i].target_id == t.records()[i].target_id);
  }
}

TEST_CASE("annotators are screened on their dummy answers") {
  std::vector<RawAnnotation> raw;
  for (int k = 0; k < 5; ++k) {
    const std::string d = "d" + std::to_string(k);
    raw.push_back(dummy("p1", d, Choice::A, Choice::A));
    raw.push_back(dummy("p2", d, k == 3 ? Choice::B : Choice::A, Choice::A));
  }
  raw.push_back(vote("p3", "t1", Choice::A));
  raw.push_back(vote("p1", "t1", Choice::A));
  const auto valid = validate_annotators(raw);
  CHECK(valid == std::set<std::string>{"p1"});
  CHECK(validate_annotators(raw) == valid);
}

TEST_CASE("a dummy without an answer does not parse") {
  std::istringstream in(
      "annotator_id,triplet_id,choice,is_dummy,dummy_answer\n"
      "p1,d1,A,1,\n");
  CHECK_THROWS_AS(parse_annotations(in, "ann.csv"), ParseError);
  std::istringstream ok(
      "annotator_id,triplet_id,choice,is_dummy,dummy_answer\n"
      "p1,d1,A,1,B\n"
      "p1,t1,B,0,\n");
  const auto raw = parse_annotations(ok, "ann.csv");
  REQUIRE(raw.size() == 2);
  CHECK(raw[0].is_dummy);
  CHECK(*raw[0].dummy_answer == Choice::B);
  CHECK_FALSE(raw[1].dummy_answer.has_value());
}

TEST_CASE("votes aggregate by strict majority") {
  const std::set<std::string> valid{"p1", "p2", "p3"};
  std::vector<RawAnnotation> raw{vote("p1", "aab", Choice::A), vote("p2", "aab", Choice::A),
                                 vote("p3", "aab", Choice::B), vote("p1", "aaa", Choice::A),
                                 vote("p2", "aaa", Choice::A), vote("p3", "aaa", Choice::A),
                                 vote("p1", "two", Choice::A), vote("p2", "two", Choice::B),
                                 vote("bad", "two", Choice::A), dummy("p1", "dz", Choice::A, Choice::A)};
  const auto s = aggregate_triplets(raw, valid, manifest({"aab", "aaa", "two"}));
  REQUIRE(s.size() == 3);
  CHECK(*s[0].majority == Choice::A);
  CHECK_FALSE(s[0].consistent);
  CHECK(s[0].admitted());
  CHECK(*s[1].majority == Choice::A);
  CHECK(s[1].consistent);
  CHECK(s[2].rejection == Rejection::too_few_votes);
  CHECK_FALSE(s[2].admitted());
  CHECK(s[2].votes.size() == 2);

  const auto ds = build_datasets(s);
  CHECK(ds.d1 == std::vector<std::string>{"aab", "aaa"});
  CHECK(ds.d2 == std::vector<std::string>{"aaa"});
}

TEST_CASE("even vote counts can tie") {
  const std::set<std::string> valid{"p1", "p2", "p3", "p4"};
  std::vector<RawAnnotation> raw{vote("p1", "t", Choice::A), vote("p2", "t", Choice::B),
                                 vote("p3", "t", Choice::A), vote("p4", "t", Choice::B)};
  const auto s = aggregate_triplets(raw, valid, manifest({"t"}));
  CHECK(s[0].rejection == Rejection::tied);
  CHECK_FALSE(s[0].majority.has_value());
  CHECK(build_datasets(s).d1.empty());
}

TEST_CASE("min_votes floor is configurable") {
  const std::set<std::string> valid{"p1", "p2"};
  std::vector<RawAnnotation> raw{vote("p1", "t", Choice::B), vote("p2", "t", Choice::B)};
  CHECK_FALSE(aggregate_triplets(raw, valid, manifest({"t"}))[0].admitted());
  CHECK(aggregate_triplets(raw, valid, manifest({"t"}), {2})[0].admitted());
}

TEST_CASE("integrity errors in the vote stream") {
  const std::set<std::string> valid{"p1"};
  std::vector<RawAnnotation> unknown{vote("p1", "ghost", Choice::A)};
  CHECK_THROWS_AS(aggregate_triplets(unknown, valid, manifest({"t"})), IntegrityError);
  std::vector<RawAnnotation> twice{vote("p1", "t", Choice::A), vote("p1", "t", Choice::B)};
  CHECK_THROWS_AS(aggregate_triplets(twice, valid, manifest({"t"})), IntegrityError);
}

TEST_CASE("dataset filter semantics") {
  std::vector<TripletSample> ten;
  for (int i = 0; i < 10; ++i) {
    std::vector<Choice> v{Choice::A, Choice::A, i < 6 ? Choice::A : Choice::B};
    ten.push_back(make_sample("t" + std::to_string(i), "c", "a", "b", v));
  }
  auto ds = build_datasets(ten);
  CHECK(ds.d1.size() == 10);
  CHECK(ds.d2.size() == 6);
  CHECK(ds.warnings.empty());

  for (auto& s : ten) s = make_sample(s.triplet_id, "c", "a", "b", {Choice::A, Choice::B, Choice::B});
  ds = build_datasets(ten);
  CHECK(ds.d1.size() == 10);
  CHECK(ds.d2.empty());
  CHECK_FALSE(ds.warnings.empty());

  for (auto& s : ten) s = make_sample(s.triplet_id, "c", "a", "b", {Choice::B, Choice::B, Choice::B});
  ds = build_datasets(ten);
  CHECK(ds.d1 == ds.d2);
}

TEST_CASE("aggregated triplets round trip through csv") {
  std::vector<TripletSample> s{make_sample("a", "c", "x", "y", {Choice::A, Choice::A, Choice::B}),
                               make_sample("b", "c", "x", "y", {Choice::B, Choice::B, Choice::B}),
                               make_sample("c", "c", "x", "y", {Choice::A, Choice::B})};
  std::ostringstream out;
  write_triplets(out, s);
  std::istringstream in(out.str());
  const auto back = parse_triplets(in, "trip.csv");
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].votes == s[i].votes);
    CHECK(back[i].majority == s[i].majority);
    CHECK(back[i].consistent == s[i].consistent);
    CHECK(back[i].rejection == s[i].rejection);
  }
  CHECK(back[0].positive_id() == "x");
  CHECK(back[0].negative_id() == "y");
  CHECK(back[1].positive_id() == "y");
}
