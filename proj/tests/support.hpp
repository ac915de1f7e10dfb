#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace robusthedge::testing {

/// Fresh scratch directory under the system temp dir, unique per process and name.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("robusthedge_" + std::to_string(::getpid())) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  std::ofstream(file) << j.dump(2);
  return file.string();
}

inline std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline nlohmann::json read_json(const std::filesystem::path& file) { return nlohmann::json::parse(slurp(file)); }

inline nlohmann::json call_model(int steps = 2) {
  return {{"uniform", {{"lo", 0}, {"hi", 4}, {"step", 1}, {"steps", steps}}}, {"spot", 2}};
}

inline nlohmann::json call_payoff_json(int steps = 2) {
  return {{"kernel", {{"name", "call"}, {"strike", 1}}}, {"mu", std::vector<double>(static_cast<std::size_t>(steps), 0.0)}};
}

}  // namespace robusthedge::testing
