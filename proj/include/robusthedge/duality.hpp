#pragma once

#include "robusthedge/lp.hpp"
#include "robusthedge/measures.hpp"
#include "robusthedge/payoff.hpp"
#include "robusthedge/value_dp.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace robusthedge {

/// Fully enumerated scenario tree of a lattice: node (k, history), children one
/// per point of S_{k+1}, leaves the full paths in lexicographic order.
class PathTree {
 public:
  struct Node {
    Eigen::Index step = 0;
    Eigen::Index parent = -1;
    double spot = 0.0;
    Eigen::Index first_child = -1;
    Eigen::Index child_count = 0;
    /// Leaves below this node form [first_leaf, first_leaf + leaf_span).
    Eigen::Index first_leaf = 0;
    Eigen::Index leaf_span = 0;
    /// Index among non-leaf nodes, -1 for leaves.
    Eigen::Index internal_index = -1;
  };

  explicit PathTree(const StateLattice& lattice, double leaf_cap = 1e6);

  const StateLattice& lattice() const { return lattice_; }
  Eigen::Index steps() const { return lattice_.steps(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  Eigen::Index leaf_count() const { return leaf_count_; }
  Eigen::Index internal_count() const { return internal_count_; }
  /// Node id of leaf i.
  Eigen::Index leaf_node(Eigen::Index leaf) const { return leaf_offset_ + leaf; }
  /// Node ids from the root to leaf i.
  std::vector<Eigen::Index> ancestry(Eigen::Index leaf) const;
  CadlagPath leaf_path(Eigen::Index leaf) const;

 private:
  StateLattice lattice_;
  std::vector<Node> nodes_;
  Eigen::Index leaf_count_ = 0;
  Eigen::Index internal_count_ = 0;
  Eigen::Index leaf_offset_ = 0;
};

/// Phi at every leaf; with concavify, the terminal concave envelope in the last spot.
Eigen::VectorXd leaf_payoffs(const PathTree& tree, const PayoffSpec& payoff, bool concavify = false);

/// min v s.t. v + sum_k H(node_k) (w_{k+1} - w_k) >= Phi on every leaf. Variable 0
/// is v, variable 1 + i the hedge at internal node i; all free.
DenseLP<double> build_primal(const PathTree& tree, const Eigen::VectorXd& payoffs);

/// max sum p Phi over leaf probabilities with total mass one and the martingale
/// condition at every internal node.
DenseLP<double> build_dual(const PathTree& tree, const Eigen::VectorXd& payoffs);

/// Tree dynamic program over the extreme one-step kernels; equals the dual optimum.
double extreme_kernel_value(const PathTree& tree, const Eigen::VectorXd& payoffs);

/// E[Phi] under a random composition of extreme one-step kernels.
double random_extreme_composition(const PathTree& tree, const Eigen::VectorXd& payoffs, std::uint64_t seed);

struct DualityOptions {
  double tolerance = 1e-8;
  double weak_tolerance = 1e-10;
  bool concavify = false;
  /// Cross-check the primal with exact rational pivots when small enough.
  bool exact = true;
  std::size_t random_compositions = 64;
  std::uint64_t seed = 0;
  DpConfig dp;
};

struct DualityReport {
  std::string label;
  LpStatus primal_status = LpStatus::infeasible;
  LpStatus dual_status = LpStatus::infeasible;
  double primal = 0.0;
  double dual = 0.0;
  double dp = 0.0;
  double extreme = 0.0;
  std::optional<double> exact_primal;
  double gap_primal_dual = 0.0;
  double gap_primal_dp = 0.0;
  double gap_extreme = 0.0;
  double tolerance = 0.0;
  double v = 0.0;
  Eigen::VectorXd hedges;
  Eigen::VectorXd dual_probs;
  /// Largest E[Phi] over dual simplex iterates and extreme-kernel compositions.
  double weak_best_lower = 0.0;
  /// Smallest v over primal phase-two iterates.
  double weak_best_upper = 0.0;
  std::size_t weak_checks = 0;
  bool weak_duality = true;
  /// min over leaves of v_DP + sum H_DP dX - Phi.
  double dp_hedge_slack = 0.0;
  bool dp_superhedges = true;
  bool structure_ok = true;
  StructureReport structure;
  Eigen::Index leaves = 0;

  bool strong_duality() const;
  bool passed() const;
};

DualityReport verify_strong_duality(const PathTree& tree, const PayoffSpec& payoff, const DualityOptions& options = {});

nlohmann::json to_json(const DualityReport& report);

struct BatteryInstance {
  std::string label;
  StateLattice lattice;
  PayoffSpec payoff;
  bool concavify = false;
};

/// Random instances with 2-3 steps and at most 5 states per step, rotating
/// through a call, the lookback-barrier kernel with an integral term, and a
/// tabulated non-concave terminal payoff run with concavification.
std::vector<BatteryInstance> random_battery(std::size_t count, std::uint64_t seed);

struct BatteryReport {
  std::vector<DualityReport> reports;
  double seconds = 0.0;

  bool passed() const;
  double worst_gap() const;
};

BatteryReport run_battery(const std::vector<BatteryInstance>& instances, const DualityOptions& options,
                          unsigned threads = 1);

nlohmann::json to_json(const BatteryReport& report);

}  // namespace robusthedge
