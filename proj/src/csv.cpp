#include "facesim/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <system_error>

#include "facesim/error.hpp"

namespace facesim::csv {

Reader::Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

std::optional<std::vector<std::string>> Reader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    return split(line);
  }
  return std::nullopt;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

void check_field(std::string_view field, std::string_view what) {
  if (field.find_first_of(",\n\r\"") != std::string_view::npos) {
    throw ValidationError(std::string(what) + " '" + std::string(field) +
                          "' contains a comma, quote or newline");
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw ValidationError("cannot format value");
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view text) {
  if (text.empty()) return std::nullopt;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

void open_for_write(std::ofstream& out, const std::filesystem::path& path) {
  out.open(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
}

void open_for_read(std::ifstream& in, const std::filesystem::path& path) {
  in.open(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
}

}  // namespace facesim::csv
