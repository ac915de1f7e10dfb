#include "robusthedge/duality.hpp"

#include "robusthedge/errors.hpp"
#include "robusthedge/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace robusthedge {

namespace {

Eigen::VectorXd child_spots(const PathTree& tree, const PathTree::Node& node) {
  Eigen::VectorXd spots(node.child_count);
  for (Eigen::Index c = 0; c < node.child_count; ++c) {
    spots(c) = tree.nodes()[static_cast<std::size_t>(node.first_child + c)].spot;
  }
  return spots;
}

// Maps each kernel atom to the child holding that spot.
Eigen::Index child_of(const Eigen::VectorXd& spots, double x) {
  for (Eigen::Index c = 0; c < spots.size(); ++c) {
    if (spots(c) == x) return c;
  }
  throw DomainError("kernel atom is not a child of the node");
}

}  // namespace

PathTree::PathTree(const StateLattice& lattice, double leaf_cap) : lattice_(lattice) {
  if (lattice_.leaf_count() > leaf_cap) throw CapExceeded("path tree exceeds the leaf cap");
  const Eigen::Index n = lattice_.steps();
  nodes_.push_back(Node{0, -1, lattice_.spot()});
  std::size_t level_begin = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& next = lattice_.slice(k + 1);
    const std::size_t level_end = nodes_.size();
    for (std::size_t id = level_begin; id < level_end; ++id) {
      nodes_[id].first_child = static_cast<Eigen::Index>(nodes_.size());
      nodes_[id].child_count = next.size();
      nodes_[id].internal_index = static_cast<Eigen::Index>(id);
      for (Eigen::Index j = 0; j < next.size(); ++j) {
        nodes_.push_back(Node{k + 1, static_cast<Eigen::Index>(id), next(j)});
      }
    }
    level_begin = level_end;
  }
  leaf_offset_ = static_cast<Eigen::Index>(level_begin);
  internal_count_ = leaf_offset_;
  leaf_count_ = static_cast<Eigen::Index>(nodes_.size()) - leaf_offset_;
  for (auto id = static_cast<Eigen::Index>(nodes_.size()) - 1; id >= 0; --id) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    if (node.child_count == 0) {
      node.first_leaf = id - leaf_offset_;
      node.leaf_span = 1;
    } else {
      node.first_leaf = nodes_[static_cast<std::size_t>(node.first_child)].first_leaf;
      node.leaf_span = 0;
      for (Eigen::Index c = 0; c < node.child_count; ++c) {
        node.leaf_span += nodes_[static_cast<std::size_t>(node.first_child + c)].leaf_span;
      }
    }
  }
}

std::vector<Eigen::Index> PathTree::ancestry(Eigen::Index leaf) const {
  if (leaf < 0 || leaf >= leaf_count_) throw DomainError("leaf index out of range");
  std::vector<Eigen::Index> out(static_cast<std::size_t>(steps() + 1));
  Eigen::Index id = leaf_node(leaf);
  for (auto k = steps(); k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = id;
    id = nodes_[static_cast<std::size_t>(id)].parent;
  }
  return out;
}

CadlagPath PathTree::leaf_path(Eigen::Index leaf) const {
  const auto ids = ancestry(leaf);
  Eigen::VectorXd values(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) values(static_cast<Eigen::Index>(k)) = nodes_[static_cast<std::size_t>(ids[k])].spot;
  return CadlagPath::scalar(lattice_.grid(), values, lattice_.domain());
}

Eigen::VectorXd leaf_payoffs(const PathTree& tree, const PayoffSpec& payoff, bool concavify) {
  const auto& last = tree.lattice().slice(tree.steps());
  const std::vector<double> grid(last.data(), last.data() + last.size());
  Eigen::VectorXd out(tree.leaf_count());
  for (Eigen::Index leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    const auto path = tree.leaf_path(leaf);
    if (!concavify) {
      out(leaf) = evaluate(payoff, path);
      continue;
    }
    const auto before = state_along(path, payoff.mu, tree.steps() - 1);
    const auto p = advance(before, payoff.mu);
    const double w = path.spot(tree.steps());
    out(leaf) = terminal_concavify(payoff, StateSummary{p.M, p.m, p.a, w}, grid)(w);
  }
  return out;
}

DenseLP<double> build_primal(const PathTree& tree, const Eigen::VectorXd& payoffs) {
  if (payoffs.size() != tree.leaf_count()) throw DomainError("one payoff per leaf is required");
  DenseLP<double> lp;
  const Eigen::Index n = 1 + tree.internal_count();
  lp.reset(n);
  for (Eigen::Index j = 0; j < n; ++j) lp.set_free(j);
  lp.c(0) = 1.0;
  lp.A = Eigen::MatrixXd::Zero(tree.leaf_count(), n);
  lp.b = payoffs;
  lp.senses.assign(static_cast<std::size_t>(tree.leaf_count()), Sense::ge);
  const auto& nodes = tree.nodes();
  for (Eigen::Index leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    lp.A(leaf, 0) = 1.0;
    const auto ids = tree.ancestry(leaf);
    for (std::size_t k = 0; k + 1 < ids.size(); ++k) {
      const auto& node = nodes[static_cast<std::size_t>(ids[k])];
      const auto& child = nodes[static_cast<std::size_t>(ids[k + 1])];
      lp.A(leaf, 1 + node.internal_index) = child.spot - node.spot;
    }
  }
  return lp;
}

DenseLP<double> build_dual(const PathTree& tree, const Eigen::VectorXd& payoffs) {
  if (payoffs.size() != tree.leaf_count()) throw DomainError("one payoff per leaf is required");
  DenseLP<double> lp;
  lp.reset(tree.leaf_count());
  lp.objective = Objective::maximize;
  lp.c = payoffs;
  const Eigen::Index rows = 1 + tree.internal_count();
  lp.A = Eigen::MatrixXd::Zero(rows, tree.leaf_count());
  lp.b = Eigen::VectorXd::Zero(rows);
  lp.senses.assign(static_cast<std::size_t>(rows), Sense::eq);
  lp.A.row(0).setOnes();
  lp.b(0) = 1.0;
  for (const auto& node : tree.nodes()) {
    if (node.internal_index < 0) continue;
    for (Eigen::Index c = 0; c < node.child_count; ++c) {
      const auto& child = tree.nodes()[static_cast<std::size_t>(node.first_child + c)];
      lp.A.block(1 + node.internal_index, child.first_leaf, 1, child.leaf_span).setConstant(child.spot - node.spot);
    }
  }
  return lp;
}

double extreme_kernel_value(const PathTree& tree, const Eigen::VectorXd& payoffs) {
  const auto& nodes = tree.nodes();
  std::vector<double> value(nodes.size());
  for (auto id = static_cast<Eigen::Index>(nodes.size()) - 1; id >= 0; --id) {
    const auto& node = nodes[static_cast<std::size_t>(id)];
    if (node.child_count == 0) {
      value[static_cast<std::size_t>(id)] = payoffs(node.first_leaf);
      continue;
    }
    const auto spots = child_spots(tree, node);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& kernel : enumerate_extreme_kernels(node.spot, spots)) {
      best = std::max(best, kernel.expectation([&](double x) {
        return value[static_cast<std::size_t>(node.first_child + child_of(spots, x))];
      }));
    }
    value[static_cast<std::size_t>(id)] = best;
  }
  return value[0];
}

double random_extreme_composition(const PathTree& tree, const Eigen::VectorXd& payoffs, std::uint64_t seed) {
  const auto& nodes = tree.nodes();
  std::mt19937_64 rng(seed);
  std::vector<double> value(nodes.size());
  for (auto id = static_cast<Eigen::Index>(nodes.size()) - 1; id >= 0; --id) {
    const auto& node = nodes[static_cast<std::size_t>(id)];
    if (node.child_count == 0) {
      value[static_cast<std::size_t>(id)] = payoffs(node.first_leaf);
      continue;
    }
    const auto spots = child_spots(tree, node);
    const auto kernels = enumerate_extreme_kernels(node.spot, spots);
    const auto pick = std::min(kernels.size() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(kernels.size())));
    value[static_cast<std::size_t>(id)] = kernels[pick].expectation(
        [&](double x) { return value[static_cast<std::size_t>(node.first_child + child_of(spots, x))]; });
  }
  return value[0];
}

bool DualityReport::strong_duality() const {
  return primal_status == LpStatus::optimal && dual_status == LpStatus::optimal && gap_primal_dual <= tolerance &&
         gap_primal_dp <= tolerance && gap_extreme <= tolerance &&
         (!exact_primal || std::abs(*exact_primal - primal) <= tolerance);
}

bool DualityReport::passed() const { return strong_duality() && weak_duality && dp_superhedges && structure_ok; }

DualityReport verify_strong_duality(const PathTree& tree, const PayoffSpec& payoff, const DualityOptions& options) {
  DualityReport r;
  r.leaves = tree.leaf_count();
  const auto payoffs = leaf_payoffs(tree, payoff, options.concavify);

  // Primal with the smallest phase-two objective seen.
  const auto primal_lp = build_primal(tree, payoffs);
  r.weak_best_upper = std::numeric_limits<double>::infinity();
  SimplexOptions<double> primal_options;
  primal_options.on_iterate = [&](const SimplexIterate<double>& it) {
    if (it.phase == 2) r.weak_best_upper = std::min(r.weak_best_upper, it.objective);
  };
  const auto primal = solve(primal_lp, primal_options);
  r.primal_status = primal.status;

  // Dual with every phase-two vertex as a lower bound.
  const auto dual_lp = build_dual(tree, payoffs);
  r.weak_best_lower = -std::numeric_limits<double>::infinity();
  SimplexOptions<double> dual_options;
  dual_options.on_iterate = [&](const SimplexIterate<double>& it) {
    if (it.phase != 2) return;
    r.weak_best_lower = std::max(r.weak_best_lower, it.objective);
    ++r.weak_checks;
  };
  const auto dual = solve(dual_lp, dual_options);
  r.dual_status = dual.status;
  if (!primal.optimal() || !dual.optimal()) {
    r.weak_duality = false;
    r.structure_ok = false;
    return r;
  }
  r.primal = primal.value;
  r.dual = dual.value;
  r.v = primal.x(0);
  r.hedges = primal.x.tail(primal.x.size() - 1);
  r.dual_probs = dual.x;
  r.tolerance = options.tolerance * (1.0 + std::abs(r.primal));
  r.gap_primal_dual = std::abs(r.primal - r.dual);
  r.extreme = extreme_kernel_value(tree, payoffs);
  r.gap_extreme = std::abs(r.extreme - r.dual);

  for (std::size_t i = 0; i < options.random_compositions; ++i) {
    r.weak_best_lower = std::max(r.weak_best_lower, random_extreme_composition(tree, payoffs, derive_seed(options.seed, i)));
    ++r.weak_checks;
  }
  r.weak_duality = r.weak_best_lower <= r.primal + options.weak_tolerance &&
                   r.weak_best_lower <= r.weak_best_upper + options.weak_tolerance;

  if (options.exact && primal_lp.variables() <= 200) {
    const auto exact = solve_exact(primal_lp);
    if (exact.optimal()) r.exact_primal = exact.value;
  }

  DpConfig dp = options.dp;
  dp.concavify = options.concavify;
  const auto surface = backward_induction(tree.lattice(), payoff, dp);
  r.dp = surface.price();
  r.gap_primal_dp = std::abs(r.primal - r.dp);
  r.structure = check_structure(surface);
  r.structure_ok = r.structure.passed();

  r.dp_hedge_slack = std::numeric_limits<double>::infinity();
  for (Eigen::Index leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    const auto path = tree.leaf_path(leaf);
    const auto h = surface.hedges_along(path);
    double wealth = r.dp;
    for (Eigen::Index k = 0; k < path.steps(); ++k) wealth += h[static_cast<std::size_t>(k)] * (path.spot(k + 1) - path.spot(k));
    r.dp_hedge_slack = std::min(r.dp_hedge_slack, wealth - payoffs(leaf));
  }
  r.dp_superhedges = r.dp_hedge_slack >= -options.tolerance;
  return r;
}

nlohmann::json to_json(const DualityReport& r) {
  auto finite = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json j{{"label", r.label},
                   {"status", {{"primal", to_string(r.primal_status)}, {"dual", to_string(r.dual_status)}}},
                   {"primal", r.primal},
                   {"dual", r.dual},
                   {"dp", r.dp},
                   {"extreme_kernel_value", r.extreme},
                   {"gaps", {{"primal_dual", r.gap_primal_dual}, {"primal_dp", r.gap_primal_dp}, {"extreme", r.gap_extreme}}},
                   {"tolerance", r.tolerance},
                   {"leaves", r.leaves},
                   {"weak_duality",
                    {{"passed", r.weak_duality},
                     {"best_lower", finite(r.weak_best_lower)},
                     {"best_upper", finite(r.weak_best_upper)},
                     {"checks", r.weak_checks}}},
                   {"dp_strategy", {{"superhedges", r.dp_superhedges}, {"min_slack", finite(r.dp_hedge_slack)}}},
                   {"structure",
                    {{"passed", r.structure_ok},
                     {"concavity", r.structure.concavity},
                     {"time_monotone", r.structure.time_monotone},
                     {"growth", r.structure.growth},
                     {"lipschitz", r.structure.lipschitz}}},
                   {"v", r.v},
                   {"hedges", std::vector<double>(r.hedges.data(), r.hedges.data() + r.hedges.size())},
                   {"passed", r.passed()}};
  j["exact_primal"] = r.exact_primal ? nlohmann::json(*r.exact_primal) : nlohmann::json(nullptr);
  return j;
}

std::vector<BatteryInstance> random_battery(std::size_t count, std::uint64_t seed) {
  std::vector<BatteryInstance> out;
  const double spacing = 0.5;
  const int top = 12;  // levels 0, 0.5, ..., 6
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    auto uniform_int = [&](int lo, int hi) {
      return lo + static_cast<int>(std::min<double>(hi - lo, std::floor(uniform01(rng) * (hi - lo + 1))));
    };
    const Eigen::Index steps = uniform_int(2, 3);
    const int x0 = uniform_int(2, 6);
    std::vector<Eigen::VectorXd> slices{Eigen::VectorXd::Constant(1, x0 * spacing)};
    int lo_prev = x0;
    int hi_prev = x0;
    for (Eigen::Index k = 1; k <= steps; ++k) {
      // Bracket the previous slice, then add interior points up to five states.
      const int lo = uniform_int(0, lo_prev - (lo_prev > 0 ? 1 : 0));
      const int hi = uniform_int(hi_prev + (hi_prev < top ? 1 : 0), top);
      std::vector<int> levels{lo, hi};
      const int extra = uniform_int(0, 3);
      for (int e = 0; e < extra && hi - lo > 1; ++e) levels.push_back(uniform_int(lo + 1, hi - 1));
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      Eigen::VectorXd slice(static_cast<Eigen::Index>(levels.size()));
      for (std::size_t s = 0; s < levels.size(); ++s) slice(static_cast<Eigen::Index>(s)) = levels[s] * spacing;
      slices.push_back(slice);
      lo_prev = lo;
      hi_prev = hi;
    }
    StateLattice lattice(TimeGrid::uniform(static_cast<double>(steps), steps), slices, x0 * spacing);

    PayoffSpec payoff;
    payoff.mu = SignedMeasureOnGrid::zero(steps);
    payoff.eps_lip = 1.0;
    bool concavify = false;
    std::string label;
    switch (i % 3) {
      case 0: {
        const double strike = uniform_int(0, 8) * spacing;
        payoff.kernel = kernels::Call{strike};
        payoff.growth_K = 1.0;
        label = "call";
        break;
      }
      case 1: {
        kernels::LookbackBarrier lb;
        lb.f_slope = 2.0 * uniform01(rng) - 1.0;
        lb.f_intercept = uniform01(rng);
        lb.g_level = 2.0 * uniform01(rng);
        lb.g_slope = uniform01(rng);
        payoff.kernel = lb;
        Eigen::VectorXd mu(steps);
        for (Eigen::Index k = 0; k < steps; ++k) mu(k) = 0.5 * uniform01(rng);
        payoff.mu = SignedMeasureOnGrid(mu);
        payoff.growth_K = std::max({1.0, std::abs(lb.f_slope), std::abs(lb.f_intercept)});
        label = "lookback_barrier";
        break;
      }
      default: {
        kernels::Table table;
        table.axes = {std::vector<double>{0.0}, std::vector<double>{0.0}, std::vector<double>{0.0}, {}};
        const auto& last = slices.back();
        double max_abs = 0.0;
        double max_slope = 0.0;
        for (Eigen::Index s = 0; s < last.size(); ++s) {
          table.axes[3].push_back(last(s));
          table.values.push_back(2.0 * uniform01(rng));
          max_abs = std::max(max_abs, std::abs(table.values.back()));
          if (s > 0) {
            max_slope = std::max(max_slope, std::abs(table.values[static_cast<std::size_t>(s)] -
                                                     table.values[static_cast<std::size_t>(s - 1)]) /
                                                (last(s) - last(s - 1)));
          }
        }
        payoff.kernel = std::move(table);
        payoff.growth_K = std::max({1.0, max_abs, max_slope});
        concavify = true;
        label = "table";
        break;
      }
    }
    out.push_back({label + "-" + std::to_string(i), std::move(lattice), std::move(payoff), concavify});
  }
  return out;
}

bool BatteryReport::passed() const {
  return !reports.empty() && std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed(); });
}

double BatteryReport::worst_gap() const {
  double worst = 0.0;
  for (const auto& r : reports) worst = std::max({worst, r.gap_primal_dual, r.gap_primal_dp});
  return worst;
}

BatteryReport run_battery(const std::vector<BatteryInstance>& instances, const DualityOptions& options,
                          unsigned threads) {
  BatteryReport report;
  report.reports.resize(instances.size());
  const auto start = std::chrono::steady_clock::now();
  auto work = [&](std::size_t i) {
    const auto& inst = instances[i];
    DualityOptions o = options;
    o.concavify = inst.concavify;
    o.seed = derive_seed(options.seed, i);
    report.reports[i] = verify_strong_duality(PathTree(inst.lattice), inst.payoff, o);
    report.reports[i].label = inst.label;
  };
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, instances.size()))));
  if (workers == 1) {
    for (std::size_t i = 0; i < instances.size(); ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < instances.size(); i += workers) work(i);
      });
    }
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

nlohmann::json to_json(const BatteryReport& report) {
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& r : report.reports) instances.push_back(to_json(r));
  return nlohmann::json{{"instances", instances},
                        {"count", report.reports.size()},
                        {"worst_gap", report.worst_gap()},
                        {"passed", report.passed()}};
}

}  // namespace robusthedge
