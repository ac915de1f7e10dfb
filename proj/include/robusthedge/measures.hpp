#pragma once

#include "robusthedge/path.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace robusthedge {

/// Sorted spot grids S_0, ..., S_N on a time grid, with the spot x_0 in S_0.
/// Every S_k lies in conv(S_{k+1}), so a martingale kernel always exists.
class StateLattice {
 public:
  StateLattice(TimeGrid grid, std::vector<Eigen::VectorXd> slices, double spot, DomainE domain = {});

  /// S_0 = {spot}, S_k = {lo, lo + step, ..., hi} for k >= 1, unit time steps.
  static StateLattice uniform(double lo, double hi, double step, Eigen::Index steps, double spot,
                              DomainE domain = {});

  const TimeGrid& grid() const { return grid_; }
  const DomainE& domain() const { return domain_; }
  Eigen::Index steps() const { return grid_.steps(); }
  double spot() const { return spot_; }
  const Eigen::VectorXd& slice(Eigen::Index k) const { return slices_.at(static_cast<std::size_t>(k)); }
  const std::vector<Eigen::VectorXd>& slices() const { return slices_; }

  bool on_slice(Eigen::Index k, double x) const;
  /// Sorted union of all slices.
  std::vector<double> union_grid() const;
  /// Product of the slice sizes |S_1| ... |S_N|.
  double leaf_count() const;

 private:
  TimeGrid grid_;
  std::vector<Eigen::VectorXd> slices_;
  double spot_;
  DomainE domain_;
};

/// One-step law with the mean constraint sum p_i x_i = x.
struct MartingaleKernel {
  Eigen::VectorXd support;
  Eigen::VectorXd probs;

  double mean() const { return support.dot(probs); }
  double expectation(const std::function<double(double)>& f) const;
};

/// One-step law without mean constraint.
struct SemimartingaleKernel {
  Eigen::VectorXd support;
  Eigen::VectorXd probs;
  std::optional<double> drift;
  double jump_floor = 0.0;

  double mean() const { return support.dot(probs); }
};

/// Point mass at x; x must lie on the next slice.
MartingaleKernel dirac_kernel(double x, const Eigen::VectorXd& next_slice);

/// Two-point kernel on {x1, x2} with mean x.
MartingaleKernel binomial_split(double x, double x1, double x2);

/// Extreme points of {p >= 0 : sum p = 1, sum p_i x_i = x} over the support:
/// the Dirac at x when x is a support point and every split x_i < x < x_j.
std::vector<MartingaleKernel> enumerate_extreme_kernels(double x, const Eigen::VectorXd& support);

/// Chooses the one-step law from (step k, current spot, next slice).
using KernelPolicy = std::function<SemimartingaleKernel(Eigen::Index, double, const Eigen::VectorXd&)>;

/// Named policy family with parameters.
struct LawSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

/// Families: "dirac", "martingale_binomial" {width}, "drifted" {drift, width},
/// "big_jump" {delta, intensity}, "small_jump" {jumps, intensity, tick}.
KernelPolicy make_policy(const LawSpec& law);

/// The four default law families (martingale binomial, drifted, big-jump, small-jump).
std::vector<LawSpec> default_laws();

LawSpec law_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LawSpec& law);

/// n independent paths; path i draws from a stream derived from (seed, i), so
/// the output is identical for any thread count.
std::vector<CadlagPath> sample_paths(const StateLattice& lattice, const KernelPolicy& policy, std::size_t n_paths,
                                     std::uint64_t seed, unsigned threads = 1);

/// Single path i of the stream, for witness replay.
CadlagPath sample_path(const StateLattice& lattice, const KernelPolicy& policy, std::uint64_t seed, std::size_t index);

StateLattice lattice_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StateLattice& lattice);

}  // namespace robusthedge
