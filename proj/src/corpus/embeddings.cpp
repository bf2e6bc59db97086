#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "facesim/corpus.hpp"
#include "facesim/csv.hpp"
#include "facesim/error.hpp"

namespace facesim {

std::string_view to_string(Role v) noexcept {
  switch (v) {
    case Role::target:
      return "target";
    case Role::source:
      return "source";
    case Role::swapped:
      return "swapped";
  }
  return "?";
}

std::string_view to_string(Gender v) noexcept {
  switch (v) {
    case Gender::male:
      return "male";
    case Gender::female:
      return "female";
    case Gender::unknown:
      return "unknown";
  }
  return "?";
}

std::string_view to_string(AgeGroup v) noexcept {
  switch (v) {
    case AgeGroup::young:
      return "young";
    case AgeGroup::older:
      return "older";
    case AgeGroup::unknown:
      return "unknown";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
  if (text == "target") return Role::target;
  if (text == "source") return Role::source;
  if (text == "swapped") return Role::swapped;
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view text) noexcept {
  if (text == "male") return Gender::male;
  if (text == "female") return Gender::female;
  if (text == "unknown" || text.empty()) return Gender::unknown;
  return std::nullopt;
}

std::optional<AgeGroup> parse_age_group(std::string_view text) noexcept {
  if (text == "young") return AgeGroup::young;
  if (text == "older") return AgeGroup::older;
  if (text == "unknown" || text.empty()) return AgeGroup::unknown;
  return std::nullopt;
}

void validate_record(const EmbeddingRecord& record, std::size_t dim) {
  if (record.image_id.empty()) throw ValidationError("record with empty image_id");
  if (record.vector.size() != dim) {
    throw FormatError("record '" + record.image_id + "' has " +
                      std::to_string(record.vector.size()) + " components, expected " +
                      std::to_string(dim));
  }
  if (!all_finite(record.vector)) {
    throw ValidationError("record '" + record.image_id + "' has a non-finite component");
  }
  double sq = 0.0;
  for (double v : record.vector) sq += v * v;
  if (!(sq > 0.0)) throw ValidationError("record '" + record.image_id + "' is a zero vector");
  if (record.role == Role::swapped && (!record.target_id || record.target_id->empty())) {
    throw ValidationError("swapped record '" + record.image_id + "' has no target_id");
  }
}

void EmbeddingTable::add(EmbeddingRecord record) {
  if (records_.empty() && dim_ == 0) dim_ = record.vector.size();
  validate_record(record, dim_);
  if (index_.contains(record.image_id)) {
    throw IntegrityError("duplicate image_id '" + record.image_id + "'");
  }
  index_.emplace(record.image_id, records_.size());
  records_.push_back(std::move(record));
}

const EmbeddingRecord* EmbeddingTable::find(std::string_view image_id) const noexcept {
  auto it = index_.find(std::string(image_id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

const EmbeddingRecord& EmbeddingTable::at(std::string_view image_id) const {
  if (const auto* r = find(image_id)) return *r;
  throw IntegrityError("unknown image_id '" + std::string(image_id) + "'");
}

namespace {

constexpr std::size_t kMetaColumns = 6;

}  // namespace

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source) {
  static const std::vector<std::string> expected_meta = {"image_id", "identity_id", "role",
                                                         "target_id", "gender", "age_group"};
  csv::Reader reader(in, source);
  auto header = reader.next();
  if (!header) throw ParseError(source, 1, "missing header");
  if (header->size() <= kMetaColumns) {
    throw ParseError(source, reader.line(), "header has no vector columns");
  }
  for (std::size_t c = 0; c < kMetaColumns; ++c) {
    if ((*header)[c] != expected_meta[c]) {
      throw ParseError(source, reader.line(),
                       "expected column '" + expected_meta[c] + "', found '" + (*header)[c] + "'");
    }
  }
  const std::size_t dim = header->size() - kMetaColumns;
  for (std::size_t c = 0; c < dim; ++c) {
    if ((*header)[kMetaColumns + c] != "v" + std::to_string(c)) {
      throw ParseError(source, reader.line(),
                       "expected column 'v" + std::to_string(c) + "', found '" +
                           (*header)[kMetaColumns + c] + "'");
    }
  }

  EmbeddingTable table(dim);
  std::size_t row_number = 0;
  while (auto row = reader.next()) {
    const std::size_t line = reader.line();
    ++row_number;
    if (row->size() < kMetaColumns) throw ParseError(source, line, "too few columns");
    const std::size_t components = row->size() - kMetaColumns;
    if (components != dim) {
      throw FormatError(source + ":" + std::to_string(line) + ": row " +
                        std::to_string(row_number) + " has " + std::to_string(components) + " components, header declares " +
                        std::to_string(dim));
    }
    EmbeddingRecord rec;
    rec.image_id = (*row)[0];
    rec.identity_id = (*row)[1];
    auto role = parse_role((*row)[2]);
    if (!role) throw ParseError(source, line, "unknown role '" + (*row)[2] + "'");
    rec.role = *role;
    if (!(*row)[3].empty()) rec.target_id = (*row)[3];
    auto gender = parse_gender((*row)[4]);
    if (!gender) throw ParseError(source, line, "unknown gender '" + (*row)[4] + "'");
    rec.gender = *gender;
    auto age = parse_age_group((*row)[5]);
    if (!age) throw ParseError(source, line, "unknown age_group '" + (*row)[5] + "'");
    rec.age_group = *age;
    rec.vector.reserve(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      auto v = csv::parse_double((*row)[kMetaColumns + c]);
      if (!v) {
        throw ParseError(source, line,
                         "component v" + std::to_string(c) + " is not a number: '" +
                             (*row)[kMetaColumns + c] + "'");
      }
      rec.vector.push_back(*v);
    }
    try {
      table.add(std::move(rec));
    } catch (const ValidationError& e) {
      throw ValidationError(source + ":" + std::to_string(line) + ": " + e.what());
    } catch (const IntegrityError& e) {
      throw IntegrityError(source + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in;
  csv::open_for_read(in, path);
  return parse_embeddings(in, path.string());
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << "image_id,identity_id,role,target_id,gender,age_group";
  for (std::size_t c = 0; c < table.dim(); ++c) out << ",v" << c;
  out << '\n';
  for (const auto& r : table) {
    csv::check_field(r.image_id, "image_id");
    csv::check_field(r.identity_id, "identity_id");
    out << r.image_id << ',' << r.identity_id << ',' << to_string(r.role) << ','
        << r.target_id.value_or("") << ',' << to_string(r.gender) << ','
        << to_string(r.age_group);
    for (double v : r.vector) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out;
  csv::open_for_write(out, path);
  write_embeddings(out, table);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace facesim
