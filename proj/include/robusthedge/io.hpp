#pragma once

#include "robusthedge/measures.hpp"
#include "robusthedge/value_dp.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace robusthedge {

/// Lattice plus the numerical settings and sampling laws that go with it.
struct ModelConfig {
  StateLattice lattice;
  DpConfig dp;
  std::vector<LawSpec> laws;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
};

/// Keys: the lattice keys (grids | uniform, spot, times, domain), and optional
/// dp, laws, seed, paths. Unknown keys are rejected.
ModelConfig model_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hex FNV-1a of the compact dump of a JSON value (object keys are sorted).
std::string config_hash(const nlohmann::json& canonical);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// First line of every CSV artifact.
std::string csv_hash_line(const std::string& hash);

}  // namespace robusthedge
