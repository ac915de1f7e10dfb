#include "robusthedge/io.hpp"

#include "robusthedge/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace robusthedge {

ModelConfig model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("model must be a JSON object");
  nlohmann::json lattice = nlohmann::json::object();
  DpConfig dp;
  std::vector<LawSpec> laws;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  for (const auto& [key, value] : j.items()) {
    if (key == "grids" || key == "uniform" || key == "spot" || key == "times" || key == "domain") {
      lattice[key] = value;
    } else if (key == "dp") {
      dp = dp_config_from_json(value);
    } else if (key == "laws") {
      for (const auto& law : value) laws.push_back(law_from_json(law));
    } else if (key == "seed") {
      seed = value.get<std::uint64_t>();
    } else if (key == "paths") {
      paths = value.get<std::size_t>();
    } else {
      throw DomainError("unknown field in model: " + key);
    }
  }
  return ModelConfig{lattice_from_json(lattice), dp, std::move(laws), seed, paths};
}

std::string config_hash(const nlohmann::json& canonical) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(canonical.dump())));
  return buf;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << content;
}

std::string csv_hash_line(const std::string& hash) { return "# config_hash=" + hash + "\n"; }

}  // namespace robusthedge
