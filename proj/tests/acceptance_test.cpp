// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include "robusthedge/calculus.hpp"
#include "robusthedge/cli.hpp"
#include "robusthedge/decomposition.hpp"
#include "robusthedge/duality.hpp"
#include "robusthedge/value_dp.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace robusthedge;
using namespace robusthedge::testing;

namespace {

using Clock = std::chrono::steady_clock;

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

unsigned workers() { return std::max(1U, std::min(8U, std::thread::hardware_concurrency())); }

// Every value surface built by the suite, re-checked for structure at the end.
std::vector<std::pair<std::string, ValueSurface>> surfaces;

ValueSurface build(const std::string& label, const StateLattice& lattice, const PayoffSpec& payoff,
                   const DpConfig& config = {}) {
  auto surface = backward_induction(lattice, payoff, config);
  if (config.mode == DpMode::envelope) surfaces.emplace_back(label, surface);
  return surface;
}

PayoffSpec call_payoff(Eigen::Index steps) {
  return PayoffSpec{kernels::Call{1.0}, SignedMeasureOnGrid::zero(steps), 1.0, 1.0};
}

PayoffSpec lookback_payoff(Eigen::Index steps) {
  return PayoffSpec{kernels::LookbackBarrier{0.5, 0.0, 0.2, 1.0, 0.5},
                    SignedMeasureOnGrid(Eigen::VectorXd::Constant(steps, 0.1)), 1.0, 1.0};
}

struct Outcome {
  bool passed = true;
  std::string detail;
};

// Criteria 1 and 2 share the battery run.
BatteryReport battery;
double battery_seconds = 0.0;
std::vector<BatteryInstance> battery_instances;

Outcome strong_duality_battery() {
  const auto start = Clock::now();
  battery_instances = random_battery(20, 7);
  DualityOptions options;
  options.seed = 7;
  battery = run_battery(battery_instances, options, workers());
  battery_seconds = seconds_since(start);
  Outcome o;
  for (const auto& inst : battery_instances) {
    const auto n = inst.lattice.steps();
    o.passed = o.passed && n >= 2 && n <= 3;
    for (Eigen::Index k = 1; k <= n; ++k) o.passed = o.passed && inst.lattice.slice(k).size() <= 5;
  }
  double worst = 0.0;
  for (const auto& r : battery.reports) {
    const double scale = 1e-8 * (1.0 + std::abs(r.primal));
    o.passed = o.passed && r.primal_status == LpStatus::optimal && r.dual_status == LpStatus::optimal &&
               std::abs(r.primal - r.dual) <= scale && std::abs(r.primal - r.dp) <= scale;
    worst = std::max({worst, std::abs(r.primal - r.dual), std::abs(r.primal - r.dp)});
  }
  o.passed = o.passed && battery.reports.size() == 20 && battery_seconds < 60.0;
  o.detail = "20 instances, worst gap " + sci(worst) + ", " + sci(battery_seconds) + " s";
  return o;
}

Outcome weak_duality() {
  Outcome o;
  std::size_t checks = 0;
  for (const auto& r : battery.reports) {
    o.passed = o.passed && r.weak_duality && r.weak_best_lower <= r.primal + 1e-10 && r.weak_checks > 0;
    checks += r.weak_checks;
  }
  o.passed = o.passed && !battery.reports.empty();
  o.detail = std::to_string(checks) + " dual-feasible points checked against the primal";
  return o;
}

Outcome call_benchmark() {
  Outcome o;
  double worst_price = 0.0;
  double worst_hedge = 0.0;
  for (Eigen::Index steps = 1; steps <= 5; ++steps) {
    const auto lattice = StateLattice::uniform(0.0, 4.0, 1.0, steps, 2.0);
    const auto surface = build("call " + std::to_string(steps), lattice, call_payoff(steps));
    worst_price = std::max(worst_price, std::abs(surface.price() - 1.5));
    for (Eigen::Index k = 0; k < steps; ++k) {
      for (const auto& e : surface.entries(k)) {
        if (e.state.w > 0.0 && e.state.w < 4.0) worst_hedge = std::max(worst_hedge, std::abs(surface.hedge(e.state) - 0.75));
      }
    }
    if (steps <= 3) {
      const auto r = verify_strong_duality(PathTree(lattice), call_payoff(steps));
      o.passed = o.passed && r.passed() && std::abs(r.primal - 1.5) <= 1e-8;
    }
  }
  o.passed = o.passed && worst_price <= 1e-8 && worst_hedge <= 1e-6;
  o.detail = "steps 1..5, price error " + sci(worst_price) + ", hedge error " + sci(worst_hedge);
  return o;
}

Outcome decomposition() {
  const auto start = Clock::now();
  Outcome o;
  DecompositionOptions options;
  options.paths = 10000;
  options.seed = 2024;
  options.threads = workers();
  const auto laws = default_laws();
  const auto call_lattice = StateLattice::uniform(0.0, 4.0, 0.25, 8, 2.0);
  const auto look_lattice = StateLattice::uniform(0.0, 4.0, 0.5, 6, 2.0);
  const auto call = build("decomposition call", call_lattice, call_payoff(8));
  const auto look = build("decomposition lookback", look_lattice, lookback_payoff(6));
  std::ostringstream detail;
  for (const auto& [name, surface] : {std::pair{"call", &call}, std::pair{"lookback", &look}}) {
    const auto r = verify_decomposition(*surface, laws, options);
    o.passed = o.passed && r.passed() && r.c0_exact() && r.laws.size() == 4;
    for (const auto& l : r.laws) {
      o.passed = o.passed && l.paths == 10000 && l.min_increment >= -1e-6 * (1.0 + r.v0);
      detail << name << '/' << l.law << " min dC " << sci(l.min_increment) << "; ";
    }
  }
  DpConfig frozen;
  frozen.mode = DpMode::frozen;
  const auto convex = build("negative control", call_lattice,
                            PayoffSpec{kernels::Power{2.0, 1.0}, SignedMeasureOnGrid::zero(8), 1.0, 1.0}, frozen);
  const auto negative = verify_decomposition(convex, laws, options);
  const double elapsed = seconds_since(start);
  o.passed = o.passed && negative.violations() >= 1 && elapsed < 120.0;
  detail << "negative control violations " << negative.violations() << ", " << sci(elapsed) << " s";
  o.detail = detail.str();
  return o;
}

Outcome superdifferential() {
  Outcome o;
  const auto lattice = StateLattice::uniform(0.0, 4.0, 0.25, 8, 2.0);
  const auto look_lattice = StateLattice::uniform(0.0, 4.0, 0.5, 6, 2.0);
  const auto call = build("super-differential call", lattice, call_payoff(8));
  const auto look = build("super-differential lookback", look_lattice, lookback_payoff(6));
  std::size_t checks = 0;
  std::size_t perturbed_failures = 0;
  double worst = -1.0;
  const auto laws = default_laws();
  for (const auto* surface : {&call, &look}) {
    for (std::size_t l = 0; l < laws.size(); ++l) {
      const auto paths = sample_paths(surface->lattice(), make_policy(laws[l]), 250, law_seed(99, l), workers());
      for (const auto& p : paths) {
        const auto r = verify_supergradient_along_path(*surface, p, 32);
        o.passed = o.passed && r.passed;
        checks += r.checks;
        worst = std::max(worst, r.max_violation);
        if (!verify_supergradient_along_path(*surface, p, 32, 0.5).passed) ++perturbed_failures;
      }
    }
  }
  o.passed = o.passed && perturbed_failures > 0;
  o.detail = "1000 paths per model, " + std::to_string(checks) + " probes, worst excess " + sci(worst) +
             ", perturbed H failed on " + std::to_string(perturbed_failures) + " paths";
  return o;
}

Outcome directional_identity() {
  Outcome o;
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TimeGrid grid = TimeGrid::uniform(1.0, 1);
  const std::vector<double> ladder{0.2, 0.1, 0.05};
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    // min of affine pieces with kinks at 1, 2, 3, 4, 5 and decreasing slopes.
    std::vector<double> slopes(6);
    slopes[0] = 2.0 + 3.0 * u(rng);
    for (std::size_t i = 1; i < slopes.size(); ++i) slopes[i] = slopes[i - 1] - 0.1 - 2.0 * u(rng);
    std::vector<double> values(7, 0.0);
    values[0] = 4.0 * u(rng) - 2.0;
    for (std::size_t i = 0; i < slopes.size(); ++i) values[i + 1] = values[i] + slopes[i];
    auto f = [slopes, values](double x) {
      const auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, 5.0));
      return values[i] + slopes[i] * (x - static_cast<double>(i));
    };
    const Functional F = [f](double t, const CadlagPath& p) { return f(p.at(t)(0)); };
    for (double x : {1.0, 2.0, 3.0, 4.0, 5.0, 1.5, 2.5, 3.5, 4.5}) {
      const auto i = static_cast<std::size_t>(std::floor(x));
      const bool kink = x == std::floor(x);
      const double right = slopes[std::min<std::size_t>(i, 5)];
      const double left = kink ? slopes[i - 1] : right;
      const auto path = CadlagPath::scalar(grid, Eigen::Vector2d(x, x));
      for (double y : {1.0, -1.0, 0.5, -0.5}) {
        const double expected = std::min(y * left, y * right);
        const double got = directional_upper_derivative(F, 1.0, path, Eigen::VectorXd::Constant(1, y), ladder).value;
        worst = std::max(worst, std::abs(got - expected));
      }
    }
  }
  o.passed = worst <= 1e-10;
  o.detail = "10 functionals, 36 directions each, worst error " + sci(worst);
  return o;
}

Outcome mollified_convergence() {
  Outcome o;
  const TimeGrid grid = TimeGrid::uniform(1.0, 1);
  const auto path = CadlagPath::scalar(grid, Eigen::Vector2d(1.0, 1.0));
  const Functional quadratic = [](double t, const CadlagPath& p) {
    const double x = p.at(t)(0);
    return -(x - 2.0) * (x - 2.0);
  };
  std::vector<double> eps{0.2, 0.1, 0.05};
  std::vector<double> errors;
  std::ostringstream detail;
  for (double e : eps) {
    const MollifierKernel kernel({e, 32, KernelPlacement::right_sided}, 1);
    const double h = strategy_kernel(quadratic, 1.0, path, kernel)(0);
    errors.push_back(std::abs(h - 2.0));
    detail << "eps " << e << " H " << h << "; ";
  }
  const double slope = std::log(errors.front() / errors.back()) / std::log(eps.front() / eps.back());
  const Functional kink = [](double t, const CadlagPath& p) {
    const double x = p.at(t)(0);
    return std::min(x, 2.0 - x);
  };
  const double h_kink = strategy_kernel(kink, 1.0, path, MollifierKernel({0.2, 32, KernelPlacement::right_sided}, 1))(0);
  o.passed = slope >= 0.8 && errors.back() < errors.front() && std::abs(h_kink + 1.0) <= 1e-3;
  detail << "log-log slope " << slope << ", kink H " << h_kink;
  o.detail = detail.str();
  return o;
}

Outcome structure() {
  Outcome o;
  std::size_t runs = 0;
  for (const auto& [label, surface] : surfaces) {
    const auto r = check_structure(surface, 1e-9, true);
    if (!r.passed()) {
      o.passed = false;
      o.detail += label + " failed; ";
    }
    ++runs;
  }
  for (const auto& r : battery.reports) {
    o.passed = o.passed && r.structure_ok;
    ++runs;
  }
  o.detail += std::to_string(runs) + " DP runs checked";
  return o;
}

Outcome concavification_identity() {
  Outcome o;
  double worst = 0.0;
  std::vector<std::pair<StateLattice, PayoffSpec>> cases;
  kernels::Table digital;
  digital.axes = {std::vector<double>{0.0}, std::vector<double>{0.0}, std::vector<double>{0.0},
                  std::vector<double>{0.0, 1.0, 1.5, 2.0, 3.0}};
  digital.values = {0.0, 0.0, 1.0, 1.0, 0.5};
  kernels::Table straddle;
  straddle.axes = digital.axes;
  straddle.axes[3] = {0.0, 2.0, 4.0};
  straddle.values = {2.0, 0.0, 2.0};
  for (Eigen::Index steps = 2; steps <= 4; ++steps) {
    const auto lattice = StateLattice::uniform(0.0, 4.0, 0.5, steps, 2.0);
    cases.emplace_back(lattice, call_payoff(steps));
    cases.emplace_back(lattice, lookback_payoff(steps));
    cases.emplace_back(lattice, PayoffSpec{digital, SignedMeasureOnGrid::zero(steps), 1.0, 1.0});
    cases.emplace_back(lattice, PayoffSpec{straddle, SignedMeasureOnGrid::zero(steps), 2.0, 1.0});
    cases.emplace_back(lattice, PayoffSpec{kernels::Put{1.0}, SignedMeasureOnGrid::zero(steps), 1.0, 1.0});
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& [lattice, payoff] = cases[i];
    DpConfig hat;
    hat.concavify = true;
    const double plain = build("identity plain " + std::to_string(i), lattice, payoff).price();
    const double concavified = build("identity hat " + std::to_string(i), lattice, payoff, hat).price();
    worst = std::max(worst, std::abs(plain - concavified));
  }
  o.passed = worst <= 1e-8;
  o.detail = std::to_string(cases.size()) + " payoffs, worst gap " + sci(worst);
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto dir = scratch("acceptance_determinism");
  auto m = call_model(6);
  m["uniform"]["step"] = 0.5;
  const auto model = write_json(dir / "model.json", m);
  const auto payoff = write_json(dir / "payoff.json", call_payoff_json(6));
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> commands{
      {{"verify-decomposition", "--model", model, "--payoff", payoff, "--seed", "31", "--paths", "2000"},
       {"decomposition.json", "witnesses.csv", "manifest.json"}},
      {{"verify-decomposition", "--model", model, "--seed", "31", "--paths", "500", "--negative-control"},
       {"decomposition.json", "witnesses.csv", "manifest.json"}},
      {{"verify-duality", "--seed", "31", "--instances", "5"}, {"duality.json", "manifest.json"}},
      {{"price", "--model", model, "--payoff", payoff}, {"price.json", "surface.csv", "strategy.csv", "manifest.json"}},
  };
  std::size_t compared = 0;
  std::ostringstream sink;
  auto* saved = std::cout.rdbuf(sink.rdbuf());
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<int> codes;
    for (const char* run : {"first", "second"}) {
      auto args = commands[c].first;
      args.insert(args.end(), {"--threads", run[0] == 'f' ? "1" : "4", "--out",
                               (dir / (std::to_string(c) + run)).string()});
      codes.push_back(run_cli(args));
    }
    o.passed = o.passed && codes[0] == codes[1] && codes[0] != exit_usage;
    for (const auto& file : commands[c].second) {
      const auto a = slurp(dir / (std::to_string(c) + "first") / file);
      const auto b = slurp(dir / (std::to_string(c) + "second") / file);
      o.passed = o.passed && !a.empty() && a == b;
      ++compared;
    }
  }
  std::cout.rdbuf(saved);
  o.detail = std::to_string(compared) + " artifacts byte-identical across runs with 1 and 4 threads";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"strong duality battery", strong_duality_battery},
      {"weak duality", weak_duality},
      {"call benchmark", call_benchmark},
      {"optional decomposition", decomposition},
      {"super-differential membership", superdifferential},
      {"directional derivative identity", directional_identity},
      {"mollified gradient convergence", mollified_convergence},
      {"value function structure", structure},
      {"concavification identity", concavification_identity},
      {"determinism", determinism},
  };
  // Structure runs after every other DP-producing criterion.
  const std::vector<std::size_t> order{0, 1, 2, 3, 4, 5, 6, 8, 9, 7};
  std::vector<std::string> lines(criteria.size());
  bool all = true;
  for (const auto i : order) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.passed;
    lines[i] = std::string(o.passed ? "PASS" : "FAIL") + " criterion " + std::to_string(i + 1) + " (" +
               criteria[i].first + "): " + o.detail;
  }
  for (const auto& line : lines) std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / ("robusthedge_" + std::to_string(::getpid())));
  return all ? 0 : 1;
}
