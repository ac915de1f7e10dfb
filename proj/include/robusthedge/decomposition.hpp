#pragma once

#include "robusthedge/duality.hpp"
#include "robusthedge/measures.hpp"
#include "robusthedge/value_dp.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace robusthedge {

/// G_k = sum_{j<k} H_j (w_{j+1} - w_j), G_0 = 0.
std::vector<double> pathwise_integral(const std::vector<double>& hedges, const CadlagPath& path);
/// Same with H_j read from the strategy at the state of knot j.
std::vector<double> pathwise_integral(const ValueSurface& surface, const CadlagPath& path);

/// C_k = V_0 + G_k - V_k(state_k); the last entry uses the terminal value.
std::vector<double> residual_series(const ValueSurface& surface, const CadlagPath& path);

struct SupergradientReport {
  bool passed = true;
  double max_violation = 0.0;
  double tolerance = 0.0;
  Eigen::Index worst_step = -1;
  double worst_probe = 0.0;
  std::size_t checks = 0;
};

/// At each knot k < N: V_{k+1}(splice(predictable state, y)) <= V_k(state_k) + H_k (y - w_k)
/// for `probes` equally spaced y over the hull of S_{k+1}; tolerance
/// tolerance_factor * (1 + |V_k|). hedge_shift perturbs H for negative controls.
SupergradientReport verify_supergradient_along_path(const ValueSurface& surface, const CadlagPath& path,
                                                    Eigen::Index probes = 32, double hedge_shift = 0.0,
                                                    double tolerance_factor = 1e-6);

struct LawStatistics {
  std::string law;
  std::uint64_t law_seed = 0;
  std::size_t paths = 0;
  double min_increment = 0.0;
  std::size_t violations = 0;
  double max_c0 = 0.0;
  double max_supergradient_violation = 0.0;
  std::size_t supergradient_violations = 0;
  double mean_terminal_residual = 0.0;
  /// Path indices of the first violating paths, replayable via sample_path(lattice, law, law_seed, i).
  std::vector<std::size_t> witnesses;
  std::size_t worst_path = 0;
};

struct DecompositionReport {
  double v0 = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  std::vector<LawStatistics> laws;

  bool c0_exact() const;
  bool passed() const;
  std::size_t violations() const;
};

struct DecompositionOptions {
  std::size_t paths = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double tolerance_factor = 1e-6;
  std::size_t max_witnesses = 5;
};

/// Samples paths under every law and checks that C is nondecreasing, C_0 = 0, and
/// that H_k is a super-gradient on the nodes of S_{k+1} along each path.
DecompositionReport verify_decomposition(const ValueSurface& surface, const std::vector<LawSpec>& laws,
                                         const DecompositionOptions& options);

/// Seed of the sampling stream for law number i.
std::uint64_t law_seed(std::uint64_t seed, std::size_t law_index);

/// E[C_N] under leaf probabilities on the full tree of the surface's lattice.
double expected_terminal_residual(const ValueSurface& surface, const PathTree& tree, const Eigen::VectorXd& probs);

nlohmann::json to_json(const DecompositionReport& report);

/// law,path,k,t,spot,V,G,C,H rows for every witness path.
void write_witnesses_csv(std::ostream& out, const ValueSurface& surface, const std::vector<LawSpec>& laws,
                         const DecompositionReport& report);

}  // namespace robusthedge
