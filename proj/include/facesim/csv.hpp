#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace facesim::csv {

/// Line-oriented reader for the unquoted comma-separated files this tool
/// reads and writes. Blank lines are skipped; CR before LF is stripped.
class Reader {
 public:
  Reader(std::istream& in, std::string source);

  /// Next non-blank row split on commas; nullopt at end of input.
  std::optional<std::vector<std::string>> next();
  /// 1-based line number of the row last returned by next().
  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

std::vector<std::string> split(std::string_view line);

/// Rejects a field that would break the unquoted format.
void check_field(std::string_view field, std::string_view what);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Strict full-field parse; nullopt on trailing garbage or overflow.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Opens for writing, throwing IoError on failure.
void open_for_write(std::ofstream& out, const std::filesystem::path& path);
/// Opens for reading, throwing IoError on failure.
void open_for_read(std::ifstream& in, const std::filesystem::path& path);

}  // namespace facesim::csv
