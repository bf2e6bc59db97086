#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "facesim/csv.hpp"
#include "facesim/error.hpp"
#include "facesim/metric.hpp"

namespace facesim {

// Doubles are emitted with the shortest representation that round-trips
// (at most 17 significant digits), so load(save(m)) == m bit for bit.
std::string model_to_json(const ProjectionModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["input_dim"] = model.dim();
  j["output_dim"] = model.dim();
  auto values = model.weight().values();
  j["weight"] = std::vector<double>(values.begin(), values.end());
  return j.dump() + "\n";
}

ProjectionModel model_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw FormatError("unsupported model format '" + j.at("format").get<std::string>() + "'");
    }
    const auto in_dim = j.at("input_dim").get<std::size_t>();
    const auto out_dim = j.at("output_dim").get<std::size_t>();
    if (in_dim != out_dim) throw FormatError("model must be square");
    const auto& weight = j.at("weight");
    if (!weight.is_array() || weight.size() != in_dim * out_dim) {
      throw FormatError("model weight must hold " + std::to_string(in_dim * out_dim) + " values");
    }
    Matrix w(out_dim, in_dim);
    auto dst = w.values();
    for (std::size_t k = 0; k < dst.size(); ++k) {
      if (!weight[k].is_number()) throw FormatError("model weight entry is not a number");
      dst[k] = weight[k].get<double>();
    }
    return ProjectionModel(std::move(w));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid model JSON: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ProjectionModel& model) {
  std::ofstream out;
  csv::open_for_write(out, path);
  out << model_to_json(model);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ProjectionModel load_model(const std::filesystem::path& path) {
  std::ifstream in;
  csv::open_for_read(in, path);
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace facesim
