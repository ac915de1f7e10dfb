#include "robusthedge/payoff.hpp"

#include "robusthedge/errors.hpp"
#include "robusthedge/random.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace robusthedge {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

// Bracketing index and weight of x on a sorted axis, flat outside.
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double x) {
  if (axis.size() == 1 || x <= axis.front()) return {0, 0.0};
  if (x >= axis.back()) return {axis.size() - 2, 1.0};
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - axis.begin()) - 1;
  return {i, (x - axis[i]) / (axis[i + 1] - axis[i])};
}

double interpolate(const kernels::Table& table, const StateSummary& s) {
  const std::array<double, 4> point{s.running_max, s.running_min, s.integral, s.spot};
  std::array<std::size_t, 4> base{};
  std::array<double, 4> weight{};
  std::array<std::size_t, 4> stride{};
  std::size_t running = 1;
  for (int d = 3; d >= 0; --d) {
    const auto& axis = table.axes[static_cast<std::size_t>(d)];
    std::tie(base[d], weight[d]) = locate(axis, point[static_cast<std::size_t>(d)]);
    stride[d] = running;
    running *= axis.size();
  }
  double result = 0.0;
  for (unsigned corner = 0; corner < 16; ++corner) {
    double w = 1.0;
    std::size_t offset = 0;
    bool skip = false;
    for (std::size_t d = 0; d < 4; ++d) {
      const bool upper = (corner >> d) & 1U;
      if (table.axes[d].size() == 1) {
        if (upper) skip = true;
        continue;
      }
      w *= upper ? weight[d] : 1.0 - weight[d];
      offset += (base[d] + (upper ? 1 : 0)) * stride[d];
    }
    if (skip || w == 0.0) continue;
    result += w * table.values[offset];
  }
  return result;
}

void validate(const kernels::Table& table) {
  std::size_t size = 1;
  for (const auto& axis : table.axes) {
    if (axis.empty()) throw DomainError("payoff table axis is empty");
    if (!std::is_sorted(axis.begin(), axis.end()) || std::adjacent_find(axis.begin(), axis.end()) != axis.end()) {
      throw DomainError("payoff table axis must be strictly increasing");
    }
    size *= axis.size();
  }
  if (table.values.size() != size) throw DomainError("payoff table has the wrong number of values");
}

void validate(const PayoffKernel& kernel) {
  std::visit(overloaded{
                 [](const kernels::LookbackBarrier& k) {
                   if (k.g_level < 0.0 || k.g_slope < 0.0) throw DomainError("barrier g must be nonnegative on R_+");
                 },
                 [](const kernels::Table& k) { validate(k); },
                 [](const auto&) {},
             },
             kernel);
}

std::vector<double> axis_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {0.0};
  return j.at(key).get<std::vector<double>>();
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw DomainError("unknown field in " + what + ": " + key);
    }
  }
}

PayoffKernel kernel_from_json(const nlohmann::json& j) {
  const auto name = j.at("name").get<std::string>();
  auto num = [&](const char* key, double fallback) { return j.contains(key) ? j.at(key).get<double>() : fallback; };
  PayoffKernel kernel;
  if (name == "call") {
    reject_unknown(j, {"name", "strike"}, "call kernel");
    kernel = kernels::Call{num("strike", 0.0)};
  } else if (name == "put") {
    reject_unknown(j, {"name", "strike"}, "put kernel");
    kernel = kernels::Put{num("strike", 0.0)};
  } else if (name == "lookback_barrier") {
    reject_unknown(j, {"name", "f_slope", "f_abs", "f_intercept", "g_level", "g_slope"}, "lookback_barrier kernel");
    kernel = kernels::LookbackBarrier{num("f_slope", 0.0), num("f_abs", 0.0), num("f_intercept", 0.0),
                                      num("g_level", 0.0), num("g_slope", 0.0)};
  } else if (name == "running_max") {
    reject_unknown(j, {"name"}, "running_max kernel");
    kernel = kernels::RunningMax{};
  } else if (name == "linear") {
    reject_unknown(j, {"name", "slope", "intercept"}, "linear kernel");
    kernel = kernels::Linear{num("slope", 1.0), num("intercept", 0.0)};
  } else if (name == "constant") {
    reject_unknown(j, {"name", "value"}, "constant kernel");
    kernel = kernels::Constant{num("value", 0.0)};
  } else if (name == "power") {
    reject_unknown(j, {"name", "exponent", "scale"}, "power kernel");
    kernel = kernels::Power{num("exponent", 2.0), num("scale", 1.0)};
  } else if (name == "table") {
    reject_unknown(j, {"name", "M", "m", "a", "w", "values"}, "table kernel");
    kernels::Table table;
    table.axes = {axis_from_json(j, "M"), axis_from_json(j, "m"), axis_from_json(j, "a"), axis_from_json(j, "w")};
    table.values = j.at("values").get<std::vector<double>>();
    kernel = std::move(table);
  } else {
    throw DomainError("unknown payoff kernel: " + name);
  }
  validate(kernel);
  return kernel;
}

nlohmann::json kernel_to_json(const PayoffKernel& kernel) {
  return std::visit(overloaded{
                        [](const kernels::Call& k) { return nlohmann::json{{"name", "call"}, {"strike", k.strike}}; },
                        [](const kernels::Put& k) { return nlohmann::json{{"name", "put"}, {"strike", k.strike}}; },
                        [](const kernels::LookbackBarrier& k) {
                          return nlohmann::json{{"name", "lookback_barrier"}, {"f_slope", k.f_slope},
                                                {"f_abs", k.f_abs},           {"f_intercept", k.f_intercept},
                                                {"g_level", k.g_level},       {"g_slope", k.g_slope}};
                        },
                        [](const kernels::RunningMax&) { return nlohmann::json{{"name", "running_max"}}; },
                        [](const kernels::Linear& k) {
                          return nlohmann::json{{"name", "linear"}, {"slope", k.slope}, {"intercept", k.intercept}};
                        },
                        [](const kernels::Constant& k) { return nlohmann::json{{"name", "constant"}, {"value", k.value}}; },
                        [](const kernels::Power& k) {
                          return nlohmann::json{{"name", "power"}, {"exponent", k.exponent}, {"scale", k.scale}};
                        },
                        [](const kernels::Table& k) {
                          return nlohmann::json{{"name", "table"}, {"M", k.axes[0]}, {"m", k.axes[1]},
                                                {"a", k.axes[2]},  {"w", k.axes[3]}, {"values", k.values}};
                        },
                    },
                    kernel);
}

}  // namespace

double apply_kernel(const PayoffKernel& kernel, const StateSummary& s) {
  return std::visit(overloaded{
                        [&](const kernels::Call& k) { return positive_part(s.spot - k.strike); },
                        [&](const kernels::Put& k) { return positive_part(k.strike - s.spot); },
                        [&](const kernels::LookbackBarrier& k) {
                          const double f = k.f_slope * s.integral + k.f_abs * std::abs(s.integral) + k.f_intercept;
                          return f + positive_part(s.spot - (k.g_level + k.g_slope * s.running_max));
                        },
                        [&](const kernels::RunningMax&) { return s.running_max; },
                        [&](const kernels::Linear& k) { return k.slope * s.spot + k.intercept; },
                        [&](const kernels::Constant& k) { return k.value; },
                        [&](const kernels::Power& k) { return k.scale * std::pow(s.spot, k.exponent); },
                        [&](const kernels::Table& k) { return interpolate(k, s); },
                    },
                    kernel);
}

std::string kernel_name(const PayoffKernel& kernel) { return kernel_to_json(kernel).at("name").get<std::string>(); }

StateSummary summarize_until(const CadlagPath& path, const SignedMeasureOnGrid& mu, Eigen::Index k) {
  if (path.dim() != 1) throw DomainError("path summaries are defined for one-dimensional paths only");
  if (k < 0 || k > path.steps()) throw DomainError("summary index outside the grid");
  StateSummary s{path.spot(0), path.spot(0), 0.0, path.spot(k)};
  for (Eigen::Index j = 0; j <= k; ++j) {
    s.running_max = std::max(s.running_max, path.spot(j));
    s.running_min = std::min(s.running_min, path.spot(j));
    if (j < k) s.integral += path.spot(j) * mu.weight(j);
  }
  return s;
}

StateSummary summarize(const CadlagPath& path, const SignedMeasureOnGrid& mu) {
  return summarize_until(path, mu, path.steps());
}

double evaluate(const PayoffSpec& payoff, const CadlagPath& path) { return payoff(summarize(path, payoff.mu)); }

GrowthReport check_growth(const PayoffSpec& payoff, const std::vector<CadlagPath>& samples) {
  GrowthReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& path = samples[i];
    if ((path.values().array() < 0.0).any()) throw DomainError("growth check needs nonnegative paths");
    double weighted = 0.0;
    for (Eigen::Index k = 0; k < path.steps(); ++k) weighted += path.spot(k) * std::abs(payoff.mu.weight(k));
    const double bound = payoff.growth_K * (1.0 + path.spot(path.steps()) + weighted);
    const double ratio = std::abs(evaluate(payoff, path)) / bound;
    report.worst_ratio = std::max(report.worst_ratio, ratio);
    if (ratio > 1.0 + 1e-12) {
      report.passed = false;
      report.violations.push_back(i);
    }
  }
  return report;
}

LipschitzReport check_lipschitz_near_zero(const PayoffSpec& payoff, const std::vector<LipschitzSample>& samples) {
  LipschitzReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.min1 < 0.0 || s.min1 > std::min(s.spot1, payoff.eps_lip) || s.max0 < 0.0 || s.max0 > s.max1) {
      throw DomainError("Lipschitz sample outside the admissible region");
    }
    const double lhs = std::abs(payoff(StateSummary{s.max1, s.min1, s.integral1, s.spot1}) -
                                payoff(StateSummary{s.max0, 0.0, s.integral0, 0.0}));
    const double rhs = payoff.growth_K * (std::abs(s.integral1 - s.integral0) + s.spot1);
    const double excess = lhs - rhs;
    report.worst_excess = std::max(report.worst_excess, excess);
    if (excess > 1e-12 * (1.0 + rhs)) {
      report.passed = false;
      report.violations.push_back(i);
    }
  }
  return report;
}

std::vector<LipschitzSample> lipschitz_samples(const PayoffSpec& payoff, std::size_t count, std::uint64_t seed,
                                               double max_level, double integral_range) {
  std::mt19937_64 rng(splitmix64(seed));
  std::vector<LipschitzSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    LipschitzSample s;
    // Mix tiny spots with O(1) ones so both regimes are probed.
    const double scale = (i % 2 == 0) ? 1e-3 : max_level;
    s.spot1 = scale * uniform01(rng);
    s.min1 = std::min(s.spot1, payoff.eps_lip) * uniform01(rng);
    s.max1 = s.spot1 + max_level * uniform01(rng);
    s.max0 = s.max1 * uniform01(rng);
    s.integral0 = integral_range * (2.0 * uniform01(rng) - 1.0);
    s.integral1 = s.integral0 + ((i % 3 == 0) ? 0.0 : integral_range * (2.0 * uniform01(rng) - 1.0));
    out.push_back(s);
  }
  return out;
}

ConcaveEnvelope<double> terminal_concavify(const PayoffSpec& payoff, const StateSummary& s,
                                           const std::vector<double>& w_grid) {
  if (w_grid.empty()) throw DomainError("concavification grid is empty");
  std::vector<double> g(w_grid.size());
  for (std::size_t i = 0; i < w_grid.size(); ++i) {
    const double y = w_grid[i];
    g[i] = payoff(StateSummary{std::max(s.running_max, y), std::min(s.running_min, y), s.integral, y});
  }
  return upper_concave_envelope<double>(w_grid, g);
}

PayoffSpec payoff_from_json(const nlohmann::json& j, Eigen::Index segments) {
  reject_unknown(j, {"kernel", "mu", "K", "eps_lip"}, "payoff spec");
  PayoffSpec spec;
  spec.kernel = kernel_from_json(j.at("kernel"));
  if (j.contains("mu")) {
    const auto mu = j.at("mu").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(mu.size()) != segments) throw DomainError("mu needs one weight per grid segment");
    spec.mu = SignedMeasureOnGrid(Eigen::Map<const Eigen::VectorXd>(mu.data(), segments));
  } else {
    spec.mu = SignedMeasureOnGrid::zero(segments);
  }
  spec.growth_K = j.value("K", 1.0);
  spec.eps_lip = j.value("eps_lip", 1.0);
  if (!(spec.growth_K > 0.0) || !(spec.eps_lip > 0.0)) throw DomainError("K and eps_lip must be positive");
  return spec;
}

nlohmann::json to_json(const PayoffSpec& payoff) {
  const auto& w = payoff.mu.weights();
  return nlohmann::json{{"kernel", kernel_to_json(payoff.kernel)},
                        {"mu", std::vector<double>(w.data(), w.data() + w.size())},
                        {"K", payoff.growth_K},
                        {"eps_lip", payoff.eps_lip}};
}

}  // namespace robusthedge
