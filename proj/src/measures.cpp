#include "robusthedge/measures.hpp"

#include "robusthedge/errors.hpp"
#include "robusthedge/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

namespace robusthedge {

namespace {

double slice_tolerance(const Eigen::VectorXd& slice) { return 1e-12 * (1.0 + slice.cwiseAbs().maxCoeff()); }

std::optional<Eigen::Index> find_on_slice(const Eigen::VectorXd& slice, double x) {
  const double tol = slice_tolerance(slice);
  for (Eigen::Index i = 0; i < slice.size(); ++i) {
    if (std::abs(slice(i) - x) <= tol) return i;
  }
  return std::nullopt;
}

double min_spacing(const Eigen::VectorXd& slice) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i < slice.size(); ++i) best = std::min(best, slice(i) - slice(i - 1));
  return std::isfinite(best) ? best : 1.0;
}

SemimartingaleKernel as_semimartingale(const MartingaleKernel& k) { return {k.support, k.probs, std::nullopt, 0.0}; }

// Two slice points bracketing [x - width, x + width], clipped to the slice range.
std::pair<double, double> bracket(const Eigen::VectorXd& slice, double x, double width) {
  const double tol = slice_tolerance(slice);
  if (x < slice(0) - tol || x > slice(slice.size() - 1) + tol) {
    throw InfeasibleModel("spot outside the hull of the next slice");
  }
  double lo = slice(0);
  double hi = slice(slice.size() - 1);
  for (Eigen::Index i = 0; i < slice.size(); ++i) {
    if (slice(i) <= x - width + tol) lo = slice(i);
  }
  for (Eigen::Index i = slice.size() - 1; i >= 0; --i) {
    if (slice(i) >= x + width - tol) hi = slice(i);
  }
  return {lo, hi};
}

// Two-point law on {lo, hi} with the given mean, clipped into [lo, hi].
SemimartingaleKernel two_point(double lo, double hi, double mean) {
  if (hi - lo <= 0.0) return {Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Ones(1), std::nullopt, 0.0};
  const double target = std::clamp(mean, lo, hi);
  const double p_lo = (hi - target) / (hi - lo);
  SemimartingaleKernel k;
  k.support = Eigen::Vector2d(lo, hi);
  k.probs = Eigen::Vector2d(p_lo, 1.0 - p_lo);
  return k;
}

double param(const nlohmann::json& params, const char* key, double fallback) {
  return params.contains(key) ? params.at(key).get<double>() : fallback;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw DomainError("unknown field in " + what + ": " + key);
    }
  }
}

double draw(const SemimartingaleKernel& kernel, double u) {
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < kernel.probs.size(); ++i) {
    cumulative += kernel.probs(i);
    if (u < cumulative) return kernel.support(i);
  }
  // u within rounding of 1: take the last atom with positive mass.
  for (Eigen::Index i = kernel.probs.size() - 1; i >= 0; --i) {
    if (kernel.probs(i) > 0.0) return kernel.support(i);
  }
  throw DomainError("kernel without mass");
}

void validate_kernel(const SemimartingaleKernel& kernel, const Eigen::VectorXd& slice) {
  if (kernel.support.size() != kernel.probs.size() || kernel.support.size() == 0) {
    throw DomainError("kernel support and probabilities differ in size");
  }
  if ((kernel.probs.array() < 0.0).any() || std::abs(kernel.probs.sum() - 1.0) > 1e-12) {
    throw DomainError("kernel is not a probability vector");
  }
  for (Eigen::Index i = 0; i < kernel.support.size(); ++i) {
    if (!find_on_slice(slice, kernel.support(i))) throw DomainError("policy kernel supported off the lattice");
  }
}

}  // namespace

StateLattice::StateLattice(TimeGrid grid, std::vector<Eigen::VectorXd> slices, double spot, DomainE domain)
    : grid_(std::move(grid)), slices_(std::move(slices)), spot_(spot), domain_(domain) {
  if (domain_.dim != 1) throw DomainError("lattices are one-dimensional");
  if (static_cast<Eigen::Index>(slices_.size()) != grid_.steps() + 1) throw DomainError("lattice needs one slice per knot");
  for (std::size_t k = 0; k < slices_.size(); ++k) {
    const auto& s = slices_[k];
    if (s.size() == 0) throw DomainError("lattice slice is empty");
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (!domain_.contains(s(i))) throw DomainError("lattice slice leaves E");
      if (i > 0 && !(s(i) > s(i - 1))) throw DomainError("lattice slice must be strictly increasing");
    }
    if (k > 0) {
      const auto& prev = slices_[k - 1];
      if (prev(0) < s(0) || prev(prev.size() - 1) > s(s.size() - 1)) {
        throw InfeasibleModel("slice " + std::to_string(k - 1) + " is not inside the hull of the next slice");
      }
    }
  }
  if (!on_slice(0, spot_)) throw DomainError("spot must lie on the first slice");
}

StateLattice StateLattice::uniform(double lo, double hi, double step, Eigen::Index steps, double spot, DomainE domain) {
  if (!(step > 0.0) || !(hi > lo)) throw DomainError("uniform lattice needs lo < hi and step > 0");
  const auto count = static_cast<Eigen::Index>(std::llround((hi - lo) / step)) + 1;
  if (std::abs(lo + static_cast<double>(count - 1) * step - hi) > 1e-9 * (1.0 + std::abs(hi))) {
    throw DomainError("uniform lattice step must divide the range");
  }
  Eigen::VectorXd level(count);
  for (Eigen::Index i = 0; i < count; ++i) level(i) = i + 1 == count ? hi : lo + static_cast<double>(i) * step;
  std::vector<Eigen::VectorXd> slices(static_cast<std::size_t>(steps + 1), level);
  slices[0] = Eigen::VectorXd::Constant(1, spot);
  return StateLattice(TimeGrid::uniform(static_cast<double>(steps), steps), std::move(slices), spot, domain);
}

bool StateLattice::on_slice(Eigen::Index k, double x) const { return find_on_slice(slice(k), x).has_value(); }

std::vector<double> StateLattice::union_grid() const {
  std::vector<double> all;
  for (const auto& s : slices_) all.insert(all.end(), s.data(), s.data() + s.size());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

double StateLattice::leaf_count() const {
  double count = 1.0;
  for (std::size_t k = 1; k < slices_.size(); ++k) count *= static_cast<double>(slices_[k].size());
  return count;
}

double MartingaleKernel::expectation(const std::function<double(double)>& f) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < support.size(); ++i) total += probs(i) * f(support(i));
  return total;
}

MartingaleKernel dirac_kernel(double x, const Eigen::VectorXd& next_slice) {
  if (!find_on_slice(next_slice, x)) throw DomainError("Dirac point is not on the next slice");
  return {Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Ones(1)};
}

MartingaleKernel binomial_split(double x, double x1, double x2) {
  if (x1 == x2) throw DomainError("binomial split needs two distinct points");
  if (x < std::min(x1, x2) || x > std::max(x1, x2)) throw DomainError("spot outside the split segment");
  const double theta = (x2 - x) / (x2 - x1);
  if (theta == 1.0) return {Eigen::VectorXd::Constant(1, x1), Eigen::VectorXd::Ones(1)};
  if (theta == 0.0) return {Eigen::VectorXd::Constant(1, x2), Eigen::VectorXd::Ones(1)};
  return {Eigen::Vector2d(x1, x2), Eigen::Vector2d(theta, 1.0 - theta)};
}

std::vector<MartingaleKernel> enumerate_extreme_kernels(double x, const Eigen::VectorXd& support) {
  const double tol = slice_tolerance(support);
  if (support.size() == 0 || x < support.minCoeff() - tol || x > support.maxCoeff() + tol) {
    throw DomainError("spot outside the hull of the support");
  }
  std::vector<MartingaleKernel> out;
  if (auto i = find_on_slice(support, x)) out.push_back({Eigen::VectorXd::Constant(1, support(*i)), Eigen::VectorXd::Ones(1)});
  for (Eigen::Index i = 0; i < support.size(); ++i) {
    if (!(support(i) < x - tol)) continue;
    for (Eigen::Index j = 0; j < support.size(); ++j) {
      if (support(j) > x + tol) out.push_back(binomial_split(x, support(i), support(j)));
    }
  }
  return out;
}

KernelPolicy make_policy(const LawSpec& law) {
  const auto& p = law.params;
  if (law.name == "dirac") {
    reject_unknown(p, {}, "dirac law");
    return [](Eigen::Index, double x, const Eigen::VectorXd& next) { return as_semimartingale(dirac_kernel(x, next)); };
  }
  if (law.name == "martingale_binomial") {
    reject_unknown(p, {"width"}, "martingale_binomial law");
    const std::optional<double> width = p.contains("width") ? std::optional(p.at("width").get<double>()) : std::nullopt;
    return [width](Eigen::Index, double x, const Eigen::VectorXd& next) {
      const auto [lo, hi] = bracket(next, x, width.value_or(min_spacing(next)));
      if (lo == hi) return as_semimartingale(dirac_kernel(x, next));
      return as_semimartingale(binomial_split(x, lo, hi));
    };
  }
  if (law.name == "drifted") {
    reject_unknown(p, {"drift", "width"}, "drifted law");
    const double drift = param(p, "drift", 0.1);
    const std::optional<double> width = p.contains("width") ? std::optional(p.at("width").get<double>()) : std::nullopt;
    return [drift, width](Eigen::Index, double x, const Eigen::VectorXd& next) {
      const auto [lo, hi] = bracket(next, x, width.value_or(min_spacing(next)));
      auto k = two_point(lo, hi, x + drift);
      k.drift = drift;
      return k;
    };
  }
  if (law.name == "big_jump") {
    reject_unknown(p, {"delta", "intensity"}, "big_jump law");
    const double delta = param(p, "delta", 2.0);
    const double intensity = param(p, "intensity", 0.5);
    if (!(delta > 0.0) || intensity < 0.0 || intensity > 1.0) throw DomainError("big_jump needs delta > 0, intensity in [0,1]");
    return [delta, intensity](Eigen::Index, double x, const Eigen::VectorXd& next) {
      std::vector<std::pair<double, double>> atoms;
      for (auto [y, mass] : {std::pair{x - delta, intensity / 2.0}, std::pair{x, 1.0 - intensity},
                             std::pair{x + delta, intensity / 2.0}}) {
        if (auto i = find_on_slice(next, y); i && mass > 0.0) atoms.emplace_back(next(*i), mass);
      }
      if (atoms.empty()) throw DomainError("big_jump law has no admissible atom on the next slice");
      double total = 0.0;
      for (const auto& a : atoms) total += a.second;
      SemimartingaleKernel k;
      k.support.resize(static_cast<Eigen::Index>(atoms.size()));
      k.probs.resize(static_cast<Eigen::Index>(atoms.size()));
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        k.support(static_cast<Eigen::Index>(i)) = atoms[i].first;
        k.probs(static_cast<Eigen::Index>(i)) = atoms[i].second / total;
      }
      k.jump_floor = delta;
      return k;
    };
  }
  if (law.name == "small_jump") {
    reject_unknown(p, {"jumps", "intensity", "tick"}, "small_jump law");
    const int jumps = p.contains("jumps") ? p.at("jumps").get<int>() : 4;
    const double intensity = param(p, "intensity", 0.3);
    const std::optional<double> tick = p.contains("tick") ? std::optional(p.at("tick").get<double>()) : std::nullopt;
    if (jumps < 1 || intensity < 0.0 || intensity > 1.0) throw DomainError("small_jump needs jumps >= 1, intensity in [0,1]");
    return [jumps, intensity, tick](Eigen::Index, double x, const Eigen::VectorXd& next) {
      const double h = tick.value_or(min_spacing(next));
      // Distribution of the sum of iid {-h, 0, +h} jumps by repeated convolution.
      std::vector<double> mass{1.0};
      for (int j = 0; j < jumps; ++j) {
        std::vector<double> out(mass.size() + 2, 0.0);
        for (std::size_t i = 0; i < mass.size(); ++i) {
          out[i] += mass[i] * intensity / 2.0;
          out[i + 1] += mass[i] * (1.0 - intensity);
          out[i + 2] += mass[i] * intensity / 2.0;
        }
        mass = std::move(out);
      }
      std::map<Eigen::Index, double> atoms;
      const double lo = next(0);
      const double hi = next(next.size() - 1);
      for (std::size_t i = 0; i < mass.size(); ++i) {
        const double y = std::clamp(x + (static_cast<double>(i) - jumps) * h, lo, hi);
        Eigen::Index nearest = 0;
        for (Eigen::Index s = 1; s < next.size(); ++s) {
          if (std::abs(next(s) - y) < std::abs(next(nearest) - y)) nearest = s;
        }
        atoms[nearest] += mass[i];
      }
      SemimartingaleKernel k;
      k.support.resize(static_cast<Eigen::Index>(atoms.size()));
      k.probs.resize(static_cast<Eigen::Index>(atoms.size()));
      Eigen::Index i = 0;
      double total = 0.0;
      for (const auto& [s, m] : atoms) total += m;
      for (const auto& [s, m] : atoms) {
        k.support(i) = next(s);
        k.probs(i++) = m / total;
      }
      return k;
    };
  }
  throw DomainError("unknown law family: " + law.name);
}

std::vector<LawSpec> default_laws() {
  return {LawSpec{"martingale_binomial", nlohmann::json::object()},
          LawSpec{"drifted", nlohmann::json{{"drift", 0.1}}},
          LawSpec{"big_jump", nlohmann::json{{"delta", 2.0}, {"intensity", 0.5}}},
          LawSpec{"small_jump", nlohmann::json{{"jumps", 4}, {"intensity", 0.3}}}};
}

LawSpec law_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"name", "params"}, "law");
  LawSpec law{j.at("name").get<std::string>(), j.value("params", nlohmann::json::object())};
  make_policy(law);  // validates name and parameters
  return law;
}

nlohmann::json to_json(const LawSpec& law) { return nlohmann::json{{"name", law.name}, {"params", law.params}}; }

CadlagPath sample_path(const StateLattice& lattice, const KernelPolicy& policy, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(derive_seed(seed, index));
  Eigen::VectorXd values(lattice.steps() + 1);
  values(0) = lattice.spot();
  for (Eigen::Index k = 0; k < lattice.steps(); ++k) {
    const auto& next = lattice.slice(k + 1);
    const auto kernel = policy(k, values(k), next);
    validate_kernel(kernel, next);
    values(k + 1) = draw(kernel, uniform01(rng));
  }
  return CadlagPath::scalar(lattice.grid(), values, lattice.domain());
}

std::vector<CadlagPath> sample_paths(const StateLattice& lattice, const KernelPolicy& policy, std::size_t n_paths,
                                     std::uint64_t seed, unsigned threads) {
  std::vector<std::optional<CadlagPath>> slots(n_paths);
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n_paths))));
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < n_paths; i += workers) slots[i] = sample_path(lattice, policy, seed, i);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  std::vector<CadlagPath> out;
  out.reserve(n_paths);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

StateLattice lattice_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"grids", "uniform", "spot", "times", "domain"}, "lattice");
  DomainE domain;
  if (j.contains("domain")) {
    const auto kind = j.at("domain").get<std::string>();
    if (kind == "full_space") {
      domain.kind = DomainKind::full_space;
    } else if (kind != "nonnegative") {
      throw DomainError("unknown domain: " + kind);
    }
  }
  const double spot = j.at("spot").get<double>();
  if (j.contains("grids") == j.contains("uniform")) throw DomainError("lattice needs exactly one of grids or uniform");
  if (j.contains("uniform")) {
    const auto& u = j.at("uniform");
    reject_unknown(u, {"lo", "hi", "step", "steps"}, "uniform lattice");
    if (j.contains("times")) throw DomainError("uniform lattices use unit time steps");
    return StateLattice::uniform(u.at("lo").get<double>(), u.at("hi").get<double>(), u.at("step").get<double>(),
                                 u.at("steps").get<Eigen::Index>(), spot, domain);
  }
  std::vector<Eigen::VectorXd> slices;
  for (const auto& g : j.at("grids")) {
    const auto v = g.get<std::vector<double>>();
    slices.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  const auto steps = static_cast<Eigen::Index>(slices.size()) - 1;
  TimeGrid grid = TimeGrid::uniform(static_cast<double>(std::max<Eigen::Index>(steps, 1)), std::max<Eigen::Index>(steps, 1));
  if (j.contains("times")) {
    const auto t = j.at("times").get<std::vector<double>>();
    grid = TimeGrid(Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size())));
  }
  return StateLattice(std::move(grid), std::move(slices), spot, domain);
}

nlohmann::json to_json(const StateLattice& lattice) {
  nlohmann::json grids = nlohmann::json::array();
  for (const auto& s : lattice.slices()) grids.push_back(std::vector<double>(s.data(), s.data() + s.size()));
  const auto& t = lattice.grid().knots();
  return nlohmann::json{{"grids", grids},
                        {"spot", lattice.spot()},
                        {"times", std::vector<double>(t.data(), t.data() + t.size())},
                        {"domain", lattice.domain().kind == DomainKind::full_space ? "full_space" : "nonnegative"}};
}

}  // namespace robusthedge
