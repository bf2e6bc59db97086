#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "facesim/corpus.hpp"
#include "facesim/csv.hpp"
#include "facesim/error.hpp"

namespace facesim {

std::string_view to_string(Choice v) noexcept { return v == Choice::A ? "A" : "B"; }

std::optional<Choice> parse_choice(std::string_view text) noexcept {
  if (text == "A") return Choice::A;
  if (text == "B") return Choice::B;
  return std::nullopt;
}

std::string_view to_string(Rejection v) noexcept {
  switch (v) {
    case Rejection::none:
      return "";
    case Rejection::too_few_votes:
      return "too_few_votes";
    case Rejection::tied:
      return "tied";
  }
  return "?";
}

std::optional<Rejection> parse_rejection(std::string_view text) noexcept {
  if (text.empty()) return Rejection::none;
  if (text == "too_few_votes") return Rejection::too_few_votes;
  if (text == "tied") return Rejection::tied;
  return std::nullopt;
}

const std::string& TripletSample::positive_id() const {
  if (!majority) throw IntegrityError("triplet '" + triplet_id + "' has no majority");
  return *majority == Choice::A ? option_a_id : option_b_id;
}

const std::string& TripletSample::negative_id() const {
  if (!majority) throw IntegrityError("triplet '" + triplet_id + "' has no majority");
  return *majority == Choice::A ? option_b_id : option_a_id;
}

namespace {

void expect_header(csv::Reader& reader, const std::vector<std::string>& expected) {
  auto header = reader.next();
  if (!header) throw ParseError(reader.source(), 1, "missing header");
  if (*header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw ParseError(reader.source(), reader.line(), "expected header '" + want + "'");
  }
}

bool parse_bool(std::string_view text, bool& out) {
  if (text == "1" || text == "true") {
    out = true;
    return true;
  }
  if (text == "0" || text == "false") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

std::vector<RawAnnotation> parse_annotations(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  expect_header(reader, {"annotator_id", "triplet_id", "choice", "is_dummy", "dummy_answer"});
  std::vector<RawAnnotation> out;
  while (auto row = reader.next()) {
    const std::size_t line = reader.line();
    if (row->size() != 5) throw ParseError(source, line, "expected 5 columns");
    RawAnnotation a;
    a.annotator_id = (*row)[0];
    a.triplet_id = (*row)[1];
    if (a.annotator_id.empty() || a.triplet_id.empty()) {
      throw ParseError(source, line, "empty annotator_id or triplet_id");
    }
    auto choice = parse_choice((*row)[2]);
    if (!choice) throw ParseError(source, line, "choice must be A or B");
    a.choice = *choice;
    if (!parse_bool((*row)[3], a.is_dummy)) {
      throw ParseError(source, line, "is_dummy must be 0/1/true/false");
    }
    if (!(*row)[4].empty()) {
      auto answer = parse_choice((*row)[4]);
      if (!answer) throw ParseError(source, line, "dummy_answer must be A, B or empty");
      a.dummy_answer = *answer;
    }
    if (a.is_dummy && !a.dummy_answer) {
      throw ParseError(source, line, "dummy annotation without dummy_answer");
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<RawAnnotation> load_annotations(const std::filesystem::path& path) {
  std::ifstream in;
  csv::open_for_read(in, path);
  return parse_annotations(in, path.string());
}

void write_annotations(std::ostream& out, std::span<const RawAnnotation> annotations) {
  out << "annotator_id,triplet_id,choice,is_dummy,dummy_answer\n";
  for (const auto& a : annotations) {
    csv::check_field(a.annotator_id, "annotator_id");
    csv::check_field(a.triplet_id, "triplet_id");
    out << a.annotator_id << ',' << a.triplet_id << ',' << to_string(a.choice) << ','
        << (a.is_dummy ? 1 : 0) << ',' << (a.dummy_answer ? to_string(*a.dummy_answer) : "")
        << '\n';
  }
}

void save_annotations(const std::filesystem::path& path,
                      std::span<const RawAnnotation> annotations) {
  std::ofstream out;
  csv::open_for_write(out, path);
  write_annotations(out, annotations);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<TripletRef> parse_manifest(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  expect_header(reader, {"triplet_id", "ref_id", "option_a_id", "option_b_id"});
  std::vector<TripletRef> out;
  std::unordered_map<std::string, std::size_t> seen;
  while (auto row = reader.next()) {
    const std::size_t line = reader.line();
    if (row->size() != 4) throw ParseError(source, line, "expected 4 columns");
    for (const auto& f : *row) {
      if (f.empty()) throw ParseError(source, line, "empty field");
    }
    TripletRef t{(*row)[0], (*row)[1], (*row)[2], (*row)[3]};
    if (!seen.emplace(t.triplet_id, line).second) {
      throw IntegrityError(source + ":" + std::to_string(line) + ": duplicate triplet_id '" +
                           t.triplet_id + "'");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TripletRef> load_manifest(const std::filesystem::path& path) {
  std::ifstream in;
  csv::open_for_read(in, path);
  return parse_manifest(in, path.string());
}

void write_manifest(std::ostream& out, std::span<const TripletRef> manifest) {
  out << "triplet_id,ref_id,option_a_id,option_b_id\n";
  for (const auto& t : manifest) {
    out << t.triplet_id << ',' << t.ref_id << ',' << t.option_a_id << ',' << t.option_b_id
        << '\n';
  }
}

void save_manifest(const std::filesystem::path& path, std::span<const TripletRef> manifest) {
  std::ofstream out;
  csv::open_for_write(out, path);
  write_manifest(out, manifest);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::set<std::string> validate_annotators(std::span<const RawAnnotation> annotations) {
  // annotator -> passed every dummy seen so far
  std::map<std::string, bool> verdict;
  for (const auto& a : annotations) {
    if (!a.is_dummy) continue;
    const bool correct = a.dummy_answer && a.choice == *a.dummy_answer;
    auto [it, inserted] = verdict.emplace(a.annotator_id, correct);
    if (!inserted) it->second = it->second && correct;
  }
  std::set<std::string> valid;
  for (const auto& [id, passed] : verdict) {
    if (passed) valid.insert(id);
  }
  return valid;
}

std::vector<TripletSample> aggregate_triplets(std::span<const RawAnnotation> annotations,
                                              const std::set<std::string>& valid_annotators,
                                              std::span<const TripletRef> manifest,
                                              const AggregateOptions& options) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<TripletSample> samples;
  samples.reserve(manifest.size());
  for (const auto& t : manifest) {
    if (!slot.emplace(t.triplet_id, samples.size()).second) {
      throw IntegrityError("duplicate triplet_id '" + t.triplet_id + "' in manifest");
    }
    TripletSample s;
    s.triplet_id = t.triplet_id;
    s.ref_id = t.ref_id;
    s.option_a_id = t.option_a_id;
    s.option_b_id = t.option_b_id;
    samples.push_back(std::move(s));
  }

  std::set<std::pair<std::string, std::string>> voted;
  for (const auto& a : annotations) {
    if (a.is_dummy) continue;
    auto it = slot.find(a.triplet_id);
    if (it == slot.end()) {
      throw IntegrityError("annotation by '" + a.annotator_id + "' references unknown triplet '" +
                           a.triplet_id + "'");
    }
    if (!voted.emplace(a.annotator_id, a.triplet_id).second) {
      throw IntegrityError("annotator '" + a.annotator_id + "' voted twice on triplet '" +
                           a.triplet_id + "'");
    }
    if (!valid_annotators.contains(a.annotator_id)) continue;
    samples[it->second].votes.push_back(a.choice);
  }

  for (auto& s : samples) {
    const auto a_votes = static_cast<std::size_t>(std::count(s.votes.begin(), s.votes.end(), Choice::A));
    const std::size_t b_votes = s.votes.size() - a_votes;
    s.consistent = !s.votes.empty() && (a_votes == 0 || b_votes == 0);
    if (a_votes > b_votes) {
      s.majority = Choice::A;
    } else if (b_votes > a_votes) {
      s.majority = Choice::B;
    }
    if (s.votes.size() < options.min_votes || s.votes.empty()) {
      s.rejection = Rejection::too_few_votes;
    } else if (!s.majority) {
      s.rejection = Rejection::tied;
    }
  }
  return samples;
}

std::vector<TripletSample> parse_triplets(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  expect_header(reader, {"triplet_id", "ref_id", "option_a_id", "option_b_id", "votes",
                         "majority", "consistent", "rejection"});
  std::vector<TripletSample> out;
  while (auto row = reader.next()) {
    const std::size_t line = reader.line();
    if (row->size() != 8) throw ParseError(source, line, "expected 8 columns");
    TripletSample s;
    s.triplet_id = (*row)[0];
    s.ref_id = (*row)[1];
    s.option_a_id = (*row)[2];
    s.option_b_id = (*row)[3];
    for (char c : (*row)[4]) {
      auto choice = parse_choice(std::string_view(&c, 1));
      if (!choice) throw ParseError(source, line, "votes must be a string of A/B");
      s.votes.push_back(*choice);
    }
    if (!(*row)[5].empty()) {
      auto m = parse_choice((*row)[5]);
      if (!m) throw ParseError(source, line, "majority must be A, B or empty");
      s.majority = *m;
    }
    if (!parse_bool((*row)[6], s.consistent)) throw ParseError(source, line, "bad consistent flag");
    auto rej = parse_rejection((*row)[7]);
    if (!rej) throw ParseError(source, line, "unknown rejection '" + (*row)[7] + "'");
    s.rejection = *rej;
    if (s.admitted() && !s.majority) {
      throw ParseError(source, line, "admitted triplet without majority");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TripletSample> load_triplets(const std::filesystem::path& path) {
  std::ifstream in;
  csv::open_for_read(in, path);
  return parse_triplets(in, path.string());
}

void write_triplets(std::ostream& out, std::span<const TripletSample> samples) {
  out << "triplet_id,ref_id,option_a_id,option_b_id,votes,majority,consistent,rejection\n";
  for (const auto& s : samples) {
    out << s.triplet_id << ',' << s.ref_id << ',' << s.option_a_id << ',' << s.option_b_id << ',';
    for (Choice c : s.votes) out << to_string(c);
    out << ',' << (s.majority ? to_string(*s.majority) : "") << ',' << (s.consistent ? 1 : 0)
        << ',' << to_string(s.rejection) << '\n';
  }
}

void save_triplets(const std::filesystem::path& path, std::span<const TripletSample> samples) {
  std::ofstream out;
  csv::open_for_write(out, path);
  write_triplets(out, samples);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace facesim
