#include "robusthedge/cli.hpp"

#include "robusthedge/calculus.hpp"
#include "robusthedge/decomposition.hpp"
#include "robusthedge/duality.hpp"
#include "robusthedge/errors.hpp"
#include "robusthedge/format.hpp"
#include "robusthedge/io.hpp"
#include "robusthedge/value_dp.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#ifndef ROBUSTHEDGE_VERSION
#define ROBUSTHEDGE_VERSION "0.0.0"
#endif

namespace robusthedge {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string command;
  std::string model;
  std::string payoff;
  std::string kernel;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  unsigned threads = 1;
  std::optional<double> tolerance;
  bool negative_control = false;
  std::optional<std::size_t> paths;
  std::size_t instances = 20;
  bool concavify = false;
  std::string grid;
  std::optional<double> state_M;
  std::optional<double> state_m;
  double state_a = 0.0;
  std::string path;
};

std::shared_ptr<spdlog::logger> logger() {
  auto log = spdlog::get("robusthedge");
  if (!log) {
    log = spdlog::stderr_logger_mt("robusthedge");
    const char* level = std::getenv("ROBUSTHEDGE_LOG");
    log->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
  }
  return log;
}

std::optional<json> load(const std::string& file) {
  if (file.empty()) return std::nullopt;
  return read_json_file(file);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number list: " + text);
    }
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

// Parsed inputs plus the canonical configuration they hash to.
struct Context {
  RunOptions opt;
  std::optional<json> model_json;
  std::optional<json> payoff_json;
  std::optional<json> kernel_json;
  std::string hash;
  fs::path out;
};

Context make_context(const RunOptions& opt) {
  Context ctx{opt, load(opt.model), load(opt.payoff), load(opt.kernel), {}, opt.out};
  auto opt_json = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  const json canonical{{"command", opt.command},
                       {"model", opt_json(ctx.model_json)},
                       {"payoff", opt_json(ctx.payoff_json)},
                       {"kernel", opt_json(ctx.kernel_json)},
                       {"seed", opt_json(opt.seed)},
                       {"tolerance", opt_json(opt.tolerance)},
                       {"negative_control", opt.negative_control},
                       {"paths", opt_json(opt.paths)},
                       {"instances", opt.instances},
                       {"concavify", opt.concavify},
                       {"grid", opt.grid},
                       {"M", opt_json(opt.state_M)},
                       {"m", opt_json(opt.state_m)},
                       {"a", opt.state_a},
                       {"path", opt.path}};
  ctx.hash = config_hash(canonical);
  return ctx;
}

void write_json(const Context& ctx, const std::string& name, json body) {
  body["config_hash"] = ctx.hash;
  write_text_file(ctx.out / name, body.dump(2) + "\n");
}

void write_csv(const Context& ctx, const std::string& name, const std::string& body) {
  write_text_file(ctx.out / name, csv_hash_line(ctx.hash) + body);
}

void write_manifest(const Context& ctx, const std::optional<std::uint64_t>& seed) {
  const json manifest{{"config_hash", ctx.hash},
                      {"seed", seed ? json(*seed) : json(nullptr)},
                      {"command", ctx.opt.command},
                      {"versions",
                       {{"robusthedge", ROBUSTHEDGE_VERSION},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"boost", BOOST_LIB_VERSION},
                        {"compiler", __VERSION__}}}};
  write_text_file(ctx.out / "manifest.json", manifest.dump(2) + "\n");
}

ModelConfig require_model(const Context& ctx) {
  if (!ctx.model_json) throw UsageError("--model is required");
  return model_from_json(*ctx.model_json);
}

PayoffSpec require_payoff(const Context& ctx, Eigen::Index segments) {
  if (!ctx.payoff_json) throw UsageError("--payoff is required");
  return payoff_from_json(*ctx.payoff_json, segments);
}

DpConfig dp_for(const Context& ctx, const ModelConfig& model) {
  DpConfig dp = model.dp;
  dp.threads = ctx.opt.threads;
  if (ctx.kernel_json) dp.kernel = kernel_config_from_json(*ctx.kernel_json);
  return dp;
}

int cmd_price(const Context& ctx) {
  const auto model = require_model(ctx);
  const auto payoff = require_payoff(ctx, model.lattice.steps());
  auto dp = dp_for(ctx, model);
  dp.concavify = false;
  const auto surface = backward_induction(model.lattice, payoff, dp);
  dp.concavify = true;
  const auto hat = backward_induction(model.lattice, payoff, dp);
  const double tol = ctx.opt.tolerance.value_or(1e-8);
  const double value = surface.price();
  const double concavified = hat.price();
  const double gap = std::abs(value - concavified);
  const auto structure = check_structure(surface);

  const auto& lattice = model.lattice;
  json bounds = json::object();
  bool dirac_feasible = true;
  for (Eigen::Index k = 0; k <= lattice.steps(); ++k) dirac_feasible = dirac_feasible && lattice.on_slice(k, lattice.spot());
  if (dirac_feasible) {
    const Eigen::VectorXd flat = Eigen::VectorXd::Constant(lattice.steps() + 1, lattice.spot());
    bounds["dirac_lower"] = evaluate(payoff, CadlagPath::scalar(lattice.grid(), flat, lattice.domain()));
  }
  if (lattice.domain().kind == DomainKind::nonnegative_orthant) {
    const double x0 = lattice.spot();
    bounds["growth_upper"] = payoff.growth_K * (1.0 + x0 + x0 * payoff.mu.total_variation());
  }
  json body{{"price", value},
            {"concavified_price", concavified},
            {"identity_gap", gap},
            {"bounds", bounds},
            {"states", surface.state_count()},
            {"structure",
             {{"passed", structure.passed()},
              {"concavity", structure.concavity},
              {"time_monotone", structure.time_monotone},
              {"growth", structure.growth},
              {"lipschitz", structure.lipschitz}}}};
  if (dp.a_axis == AxisMode::uniform) body["a_axis_drift"] = a_axis_refinement_drift(lattice, payoff, dp);
  write_json(ctx, "price.json", body);
  std::ostringstream surface_csv;
  surface.write_surface_csv(surface_csv);
  write_csv(ctx, "surface.csv", surface_csv.str());
  std::ostringstream strategy_csv;
  surface.write_strategy_csv(strategy_csv);
  write_csv(ctx, "strategy.csv", strategy_csv.str());
  write_manifest(ctx, std::nullopt);
  logger()->info("price {} (concavified {})", value, concavified);
  std::cout << json{{"price", value}, {"concavified_price", concavified}}.dump() << "\n";
  return gap <= tol * (1.0 + std::abs(value)) ? exit_ok : exit_verification_failure;
}

int cmd_verify_duality(const Context& ctx) {
  DualityOptions options;
  options.tolerance = ctx.opt.tolerance.value_or(options.tolerance);
  options.seed = ctx.opt.seed.value_or(0);
  json body;
  bool passed = false;
  if (ctx.model_json || ctx.payoff_json) {
    const auto model = require_model(ctx);
    const auto payoff = require_payoff(ctx, model.lattice.steps());
    options.dp = dp_for(ctx, model);
    options.concavify = ctx.opt.concavify;
    const auto report = verify_strong_duality(PathTree(model.lattice), payoff, options);
    body = to_json(report);
    body["mode"] = "model";
    passed = report.passed();
  } else {
    if (!ctx.opt.seed) throw UsageError("--seed is required for the randomized battery");
    const auto battery = run_battery(random_battery(ctx.opt.instances, *ctx.opt.seed), options, ctx.opt.threads);
    body = to_json(battery);
    body["mode"] = "battery";
    body["seed"] = *ctx.opt.seed;
    passed = battery.passed();
    logger()->info("battery of {} instances in {:.2f}s", battery.reports.size(), battery.seconds);
  }
  write_json(ctx, "duality.json", body);
  write_manifest(ctx, ctx.opt.seed);
  std::cout << json{{"passed", passed}}.dump() << "\n";
  return passed ? exit_ok : exit_verification_failure;
}

int cmd_verify_decomposition(const Context& ctx) {
  const auto model = require_model(ctx);
  const auto seed = ctx.opt.seed ? ctx.opt.seed : model.seed;
  if (!seed) throw UsageError("--seed is required for sampling commands");
  auto dp = dp_for(ctx, model);
  PayoffSpec payoff;
  if (ctx.opt.negative_control) {
    // Convex payoff priced without the envelope step: C must fail to be monotone.
    payoff.kernel = kernels::Power{2.0, 1.0};
    payoff.mu = SignedMeasureOnGrid::zero(model.lattice.steps());
    dp.mode = DpMode::frozen;
  } else {
    payoff = require_payoff(ctx, model.lattice.steps());
  }
  const auto surface = backward_induction(model.lattice, payoff, dp);
  const auto laws = model.laws.empty() ? default_laws() : model.laws;
  DecompositionOptions options;
  options.paths = ctx.opt.paths.value_or(model.paths.value_or(10000));
  options.seed = *seed;
  options.threads = ctx.opt.threads;
  options.tolerance_factor = ctx.opt.tolerance.value_or(options.tolerance_factor);
  const auto report = verify_decomposition(surface, laws, options);
  json body = to_json(report);
  body["negative_control"] = ctx.opt.negative_control;
  write_json(ctx, "decomposition.json", body);
  std::ostringstream witnesses;
  write_witnesses_csv(witnesses, surface, laws, report);
  write_csv(ctx, "witnesses.csv", witnesses.str());
  write_manifest(ctx, seed);
  std::cout << json{{"passed", report.passed()}, {"violations", report.violations()}}.dump() << "\n";
  return report.passed() ? exit_ok : exit_verification_failure;
}

int cmd_concavify(const Context& ctx) {
  std::vector<double> grid;
  Eigen::Index segments = 1;
  if (!ctx.opt.grid.empty()) {
    grid = parse_list(ctx.opt.grid);
  } else if (ctx.model_json) {
    const auto model = model_from_json(*ctx.model_json);
    const auto& last = model.lattice.slice(model.lattice.steps());
    grid.assign(last.data(), last.data() + last.size());
    segments = model.lattice.steps();
  } else {
    throw UsageError("concavify needs --grid or --model");
  }
  if (!ctx.payoff_json) throw UsageError("--payoff is required");
  if (ctx.payoff_json->contains("mu")) segments = static_cast<Eigen::Index>(ctx.payoff_json->at("mu").size());
  const auto payoff = payoff_from_json(*ctx.payoff_json, segments);
  const StateSummary s{ctx.opt.state_M.value_or(-std::numeric_limits<double>::infinity()),
                       ctx.opt.state_m.value_or(std::numeric_limits<double>::infinity()), ctx.opt.state_a, 0.0};
  const auto envelope = terminal_concavify(payoff, s, grid);
  std::ostringstream csv;
  csv << "w,psi,envelope\n";
  for (const double y : grid) {
    const double psi = payoff(StateSummary{std::max(s.running_max, y), std::min(s.running_min, y), s.integral, y});
    csv << format_double(y) << ',' << format_double(psi) << ',' << format_double(envelope(y)) << '\n';
  }
  write_csv(ctx, "envelope.csv", csv.str());
  write_manifest(ctx, std::nullopt);
  return exit_ok;
}

int cmd_calc_derivatives(const Context& ctx) {
  const auto model = require_model(ctx);
  const auto payoff = require_payoff(ctx, model.lattice.steps());
  const auto& lattice = model.lattice;
  const auto surface = backward_induction(lattice, payoff, dp_for(ctx, model));
  Eigen::VectorXd values;
  if (ctx.opt.path.empty()) {
    values = Eigen::VectorXd::Constant(lattice.steps() + 1, lattice.spot());
  } else {
    const auto v = parse_list(ctx.opt.path);
    values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  const auto path = CadlagPath::scalar(lattice.grid(), values, lattice.domain());
  const auto& kernel = surface.kernel();
  std::ostringstream csv;
  csv << "k,t,spot,value,horizontal,vertical_left,vertical_right,upper_up,upper_down,hedge\n";
  auto cell = [](std::optional<double> x) { return x ? format_double(*x) : std::string(); };
  for (Eigen::Index k = 0; k < lattice.steps(); ++k) {
    if (!lattice.on_slice(k, path.spot(k))) throw DomainError("path leaves the lattice");
    const auto s = state_along(path, payoff.mu, k);
    const auto envelope = surface.continuation_envelope(s);
    const Section section = [&envelope](const Eigen::VectorXd& y) { return envelope(y(0)); };
    const double v = surface.value(s);
    std::optional<double> horizontal;
    if (lattice.on_slice(k + 1, s.w)) {
      horizontal = (surface.splice_value(k + 1, advance(s, payoff.mu), s.w) - v) / (lattice.grid()[k + 1] - lattice.grid()[k]);
    }
    std::optional<double> left;
    std::optional<double> right;
    if (s.w > envelope.lower()) left = envelope.left_slope(s.w);
    if (s.w < envelope.upper()) right = envelope.right_slope(s.w);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, s.w);
    auto upper = [&](double direction) -> std::optional<double> {
      if (!envelope.covers(s.w + kernel.eps() * direction)) return std::nullopt;
      return directional_upper_derivative(section, x, Eigen::VectorXd::Constant(1, direction), kernel.ladder(),
                                          lattice.domain())
          .value;
    };
    csv << k << ',' << format_double(lattice.grid()[k]) << ',' << format_double(s.w) << ',' << format_double(v) << ','
        << cell(horizontal) << ',' << cell(left) << ',' << cell(right) << ',' << cell(upper(1.0)) << ','
        << cell(upper(-1.0)) << ',' << format_double(surface.hedge(s)) << '\n';
  }
  write_csv(ctx, "derivatives.csv", csv.str());
  write_manifest(ctx, std::nullopt);
  return exit_ok;
}

void error_body(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  RunOptions opt;
  CLI::App app{"Robust super-hedging prices and verification on lattice models", "robusthedge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ROBUSTHEDGE_VERSION);

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--model", opt.model, "Model JSON (lattice, dp settings, laws)");
    sub->add_option("--payoff", opt.payoff, "Payoff JSON");
    sub->add_option("--kernel", opt.kernel, "Mollifier kernel JSON");
    sub->add_option("--seed", opt.seed, "Seed for sampling commands");
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads, "Worker cap")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--tolerance", opt.tolerance, "Tolerance override");
    sub->add_flag("--negative-control", opt.negative_control,
                  "Replace the payoff by a convex one priced without the envelope");
  };
  auto* price = app.add_subcommand("price", "Robust price, value surface and strategy");
  auto* duality = app.add_subcommand("verify-duality", "Primal and dual LPs against the dynamic program");
  auto* decomposition = app.add_subcommand("verify-decomposition", "Sampled check of the optional decomposition");
  auto* concavify = app.add_subcommand("concavify", "Concave envelope of the terminal payoff in the last spot");
  auto* derivatives = app.add_subcommand("calc-derivatives", "Pathwise derivatives of the value functional");
  for (auto* sub : {price, duality, decomposition, concavify, derivatives}) common(sub);
  duality->add_option("--instances", opt.instances, "Randomized instances when no model is given")->capture_default_str();
  duality->add_flag("--concavify", opt.concavify, "Use the concavified terminal payoff");
  decomposition->add_option("--paths", opt.paths, "Paths per law");
  concavify->add_option("--grid", opt.grid, "Comma-separated spot grid");
  concavify->add_option("--M", opt.state_M, "Running maximum before the last step");
  concavify->add_option("--m", opt.state_m, "Running minimum before the last step");
  concavify->add_option("--a", opt.state_a, "Integral value");
  derivatives->add_option("--path", opt.path, "Comma-separated lattice path (default: constant at the spot)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    std::cout << ROBUSTHEDGE_VERSION << "\n";
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    error_body("usage", e.what(), exit_usage);
    return exit_usage;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    const auto ctx = make_context(opt);
    logger()->debug("{} with config hash {}", opt.command, ctx.hash);
    if (opt.command == "price") return cmd_price(ctx);
    if (opt.command == "verify-duality") return cmd_verify_duality(ctx);
    if (opt.command == "verify-decomposition") return cmd_verify_decomposition(ctx);
    if (opt.command == "concavify") return cmd_concavify(ctx);
    return cmd_calc_derivatives(ctx);
  } catch (const UsageError& e) {
    error_body("usage", e.what(), exit_usage);
  } catch (const InfeasibleModel& e) {
    error_body("infeasible_model", e.what(), exit_usage);
  } catch (const CapExceeded& e) {
    error_body("cap_exceeded", e.what(), exit_usage);
  } catch (const DomainError& e) {
    error_body("config", e.what(), exit_usage);
  } catch (const json::exception& e) {
    error_body("config", e.what(), exit_usage);
  } catch (const ConcavityViolation& e) {
    error_body("concavity_violation", e.what(), exit_verification_failure);
    return exit_verification_failure;
  } catch (const std::exception& e) {
    error_body("internal", e.what(), exit_usage);
  }
  return exit_usage;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"robusthedge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace robusthedge
