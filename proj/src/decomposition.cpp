#include "robusthedge/decomposition.hpp"

#include "robusthedge/errors.hpp"
#include "robusthedge/format.hpp"
#include "robusthedge/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace robusthedge {

std::vector<double> pathwise_integral(const std::vector<double>& hedges, const CadlagPath& path) {
  if (static_cast<Eigen::Index>(hedges.size()) != path.steps()) throw DomainError("one hedge per step is required");
  std::vector<double> g(hedges.size() + 1, 0.0);
  for (std::size_t k = 0; k < hedges.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    g[k + 1] = g[k] + hedges[k] * (path.spot(j + 1) - path.spot(j));
  }
  return g;
}

std::vector<double> pathwise_integral(const ValueSurface& surface, const CadlagPath& path) {
  return pathwise_integral(surface.hedges_along(path), path);
}

std::vector<double> residual_series(const ValueSurface& surface, const CadlagPath& path) {
  const auto values = surface.values_along(path);
  const auto g = pathwise_integral(surface, path);
  std::vector<double> c(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) c[k] = values[0] + g[k] - values[k];
  return c;
}

SupergradientReport verify_supergradient_along_path(const ValueSurface& surface, const CadlagPath& path,
                                                    Eigen::Index probes, double hedge_shift, double tolerance_factor) {
  if (probes < 2) throw DomainError("at least two probes are required");
  const auto& lattice = surface.lattice();
  const auto& mu = surface.payoff().mu;
  SupergradientReport r;
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < surface.steps(); ++k) {
    if (!lattice.on_slice(k, path.spot(k))) throw DomainError("path leaves the lattice");
    const auto s = state_along(path, mu, k);
    const double v = surface.value(s);
    const double h = surface.hedge(s) + hedge_shift;
    const auto p = advance(s, mu);
    const auto& next = lattice.slice(k + 1);
    const double lo = next(0);
    const double hi = next(next.size() - 1);
    const double tol = tolerance_factor * (1.0 + std::abs(v));
    for (Eigen::Index i = 0; i < probes; ++i) {
      const double y = i + 1 == probes ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(probes - 1);
      const double violation = surface.splice_value(k + 1, p, y) - v - h * (y - s.w);
      ++r.checks;
      if (violation - tol > r.max_violation - r.tolerance) {
        r.max_violation = violation;
        r.tolerance = tol;
        r.worst_step = k;
        r.worst_probe = y;
      }
      if (violation > tol) r.passed = false;
    }
  }
  return r;
}

std::uint64_t law_seed(std::uint64_t seed, std::size_t law_index) { return derive_seed(seed, 0x1000 + law_index); }

bool DecompositionReport::c0_exact() const {
  return std::all_of(laws.begin(), laws.end(), [](const auto& l) { return l.max_c0 == 0.0; });
}

std::size_t DecompositionReport::violations() const {
  std::size_t n = 0;
  for (const auto& l : laws) n += l.violations + l.supergradient_violations;
  return n;
}

bool DecompositionReport::passed() const { return !laws.empty() && c0_exact() && violations() == 0; }

namespace {

struct PathOutcome {
  double min_increment = std::numeric_limits<double>::infinity();
  double c0 = 0.0;
  double terminal = 0.0;
  double supergradient = -std::numeric_limits<double>::infinity();
};

PathOutcome check_path(const ValueSurface& surface, const CadlagPath& path) {
  PathOutcome out;
  const auto values = surface.values_along(path);
  const auto hedges = surface.hedges_along(path);
  const auto g = pathwise_integral(hedges, path);
  const auto& lattice = surface.lattice();
  const auto& mu = surface.payoff().mu;
  std::vector<double> c(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) c[k] = values[0] + g[k] - values[k];
  out.c0 = std::abs(c[0]);
  out.terminal = c.back();
  for (std::size_t k = 0; k + 1 < c.size(); ++k) out.min_increment = std::min(out.min_increment, c[k + 1] - c[k]);
  // Super-gradient on the nodes of the next slice.
  for (Eigen::Index k = 0; k < surface.steps(); ++k) {
    const auto s = state_along(path, mu, k);
    const auto p = advance(s, mu);
    const auto& next = lattice.slice(k + 1);
    const double v = values[static_cast<std::size_t>(k)];
    const double h = hedges[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < next.size(); ++i) {
      const double excess = (surface.splice_value(k + 1, p, next(i)) - v - h * (next(i) - s.w)) / (1.0 + std::abs(v));
      out.supergradient = std::max(out.supergradient, excess);
    }
  }
  return out;
}

}  // namespace

DecompositionReport verify_decomposition(const ValueSurface& surface, const std::vector<LawSpec>& laws,
                                         const DecompositionOptions& options) {
  DecompositionReport report;
  report.v0 = surface.price();
  report.seed = options.seed;
  report.tolerance = options.tolerance_factor * (1.0 + std::abs(report.v0));
  for (std::size_t l = 0; l < laws.size(); ++l) {
    const auto policy = make_policy(laws[l]);
    LawStatistics stats;
    stats.law = laws[l].name;
    stats.law_seed = law_seed(options.seed, l);
    stats.paths = options.paths;
    std::vector<PathOutcome> outcomes(options.paths);
    auto work = [&](std::size_t i) {
      outcomes[i] = check_path(surface, sample_path(surface.lattice(), policy, stats.law_seed, i));
    };
    const unsigned workers = std::max(1U, options.threads);
    if (workers == 1) {
      for (std::size_t i = 0; i < options.paths; ++i) work(i);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t i = t; i < options.paths; i += workers) work(i);
        });
      }
    }
    // Sequential reduction keeps the report independent of the thread count.
    stats.min_increment = std::numeric_limits<double>::infinity();
    stats.max_supergradient_violation = -std::numeric_limits<double>::infinity();
    double terminal_sum = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto& o = outcomes[i];
      if (o.min_increment < stats.min_increment) {
        stats.min_increment = o.min_increment;
        stats.worst_path = i;
      }
      stats.max_c0 = std::max(stats.max_c0, o.c0);
      stats.max_supergradient_violation = std::max(stats.max_supergradient_violation, o.supergradient);
      terminal_sum += o.terminal;
      const bool increment_bad = o.min_increment < -report.tolerance;
      const bool gradient_bad = o.supergradient > options.tolerance_factor;
      if (increment_bad) ++stats.violations;
      if (gradient_bad) ++stats.supergradient_violations;
      if ((increment_bad || gradient_bad) && stats.witnesses.size() < options.max_witnesses) stats.witnesses.push_back(i);
    }
    stats.mean_terminal_residual = outcomes.empty() ? 0.0 : terminal_sum / static_cast<double>(outcomes.size());
    report.laws.push_back(std::move(stats));
  }
  return report;
}

double expected_terminal_residual(const ValueSurface& surface, const PathTree& tree, const Eigen::VectorXd& probs) {
  if (probs.size() != tree.leaf_count()) throw DomainError("one probability per leaf is required");
  double total = 0.0;
  for (Eigen::Index leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    if (probs(leaf) == 0.0) continue;
    total += probs(leaf) * residual_series(surface, tree.leaf_path(leaf)).back();
  }
  return total;
}

nlohmann::json to_json(const DecompositionReport& report) {
  auto finite = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json laws = nlohmann::json::array();
  for (const auto& l : report.laws) {
    laws.push_back({{"law", l.law},
                    {"law_seed", l.law_seed},
                    {"paths", l.paths},
                    {"min_increment", finite(l.min_increment)},
                    {"violations", l.violations},
                    {"max_abs_c0", l.max_c0},
                    {"max_supergradient_violation", finite(l.max_supergradient_violation)},
                    {"supergradient_violations", l.supergradient_violations},
                    {"mean_terminal_residual", l.mean_terminal_residual},
                    {"worst_path", l.worst_path},
                    {"witnesses", l.witnesses}});
  }
  return nlohmann::json{{"v0", report.v0},
                        {"tolerance", report.tolerance},
                        {"seed", report.seed},
                        {"laws", laws},
                        {"c0_exact", report.c0_exact()},
                        {"violations", report.violations()},
                        {"passed", report.passed()},
                        {"coverage",
                         "finite battery of sampled laws; a pass is evidence on these paths, not a proof for "
                         "every semimartingale law"}};
}

void write_witnesses_csv(std::ostream& out, const ValueSurface& surface, const std::vector<LawSpec>& laws,
                         const DecompositionReport& report) {
  out << "law,path,k,t,spot,V,G,C,H\n";
  for (std::size_t l = 0; l < report.laws.size() && l < laws.size(); ++l) {
    const auto& stats = report.laws[l];
    const auto policy = make_policy(laws[l]);
    for (const auto i : stats.witnesses) {
      const auto path = sample_path(surface.lattice(), policy, stats.law_seed, i);
      const auto values = surface.values_along(path);
      const auto hedges = surface.hedges_along(path);
      const auto g = pathwise_integral(hedges, path);
      for (std::size_t k = 0; k < values.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        out << stats.law << ',' << i << ',' << k << ',' << format_double(path.grid()[kk]) << ','
            << format_double(path.spot(kk)) << ',' << format_double(values[k]) << ',' << format_double(g[k]) << ','
            << format_double(values[0] + g[k] - values[k]) << ','
            << (k < hedges.size() ? format_double(hedges[k]) : std::string()) << '\n';
      }
    }
  }
}

}  // namespace robusthedge
