#include <fstream>
#include <sstream>

#include <json.hpp>

#include "facesim/corpus.hpp"
#include "facesim/csv.hpp"
#include "facesim/error.hpp"

namespace facesim {
namespace {

using nlohmann::ordered_json;

ordered_json partition_json(const DatasetPartition& p) {
  return ordered_json{{"train", p.train}, {"val", p.val}, {"test", p.test}};
}

DatasetPartition partition_from(const ordered_json& j, std::string name, EvalMode mode) {
  DatasetPartition p;
  p.name = std::move(name);
  p.mode = mode;
  p.train = j.at("train").get<std::vector<std::string>>();
  p.val = j.at("val").get<std::vector<std::string>>();
  p.test = j.at("test").get<std::vector<std::string>>();
  return p;
}

}  // namespace

std::string partition_to_json(const SplitResult& split) {
  ordered_json j;
  j["format"] = "facesim-partition/1";
  j["mode"] = std::string(to_string(split.mode));
  j["seed"] = split.seed;
  j["ratios"] = {{"train", split.ratios.train}, {"val", split.ratios.val}, {"test", split.ratios.test}};
  j["datasets"] = {{"D1", partition_json(split.d1)}, {"D2", partition_json(split.d2)}};
  j["unassigned"] = split.unassigned;
  return j.dump(2) + "\n";
}

SplitResult partition_from_json(std::string_view text) {
  try {
    const auto j = ordered_json::parse(text);
    if (j.at("format") != "facesim-partition/1") {
      throw FormatError("unsupported partition format");
    }
    SplitResult out;
    auto mode = parse_eval_mode(j.at("mode").get<std::string>());
    if (!mode) throw FormatError("partition has unknown mode");
    out.mode = *mode;
    out.seed = j.at("seed").get<std::uint64_t>();
    out.ratios.train = j.at("ratios").at("train").get<double>();
    out.ratios.val = j.at("ratios").at("val").get<double>();
    out.ratios.test = j.at("ratios").at("test").get<double>();
    out.d1 = partition_from(j.at("datasets").at("D1"), "D1", out.mode);
    out.d2 = partition_from(j.at("datasets").at("D2"), "D2", out.mode);
    out.unassigned = j.at("unassigned").get<std::vector<std::string>>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed partition JSON: ") + e.what());
  }
}

void save_partition(const std::filesystem::path& path, const SplitResult& split) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << partition_to_json(split);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

SplitResult load_partition(const std::filesystem::path& path) {
  std::ifstream in;
  csv::open_for_read(in, path);
  std::stringstream buf;
  buf << in.rdbuf();
  return partition_from_json(buf.str());
}

}  // namespace facesim
