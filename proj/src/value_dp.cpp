#include "robusthedge/value_dp.hpp"

#include "robusthedge/errors.hpp"
#include "robusthedge/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

namespace robusthedge {

namespace {

constexpr double kIntegralQuantum = 1e-9;

struct Key {
  std::int64_t M;
  std::int64_t m;
  std::int64_t a;
  std::int64_t w;
  friend bool operator==(const Key&, const Key&) = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t v : {k.M, k.m, k.a, k.w}) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

double scale_of(double v) { return std::max(1.0, std::abs(v)); }

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Index of the slice node equal to y, if any.
std::optional<Eigen::Index> slice_node(const Eigen::VectorXd& slice, double y) {
  const double tol = 1e-12 * (1.0 + std::abs(y));
  const auto* begin = slice.data();
  const auto* end = begin + slice.size();
  const auto* it = std::lower_bound(begin, end, y - tol);
  if (it != end && std::abs(*it - y) <= tol) return static_cast<Eigen::Index>(it - begin);
  return std::nullopt;
}

// Averaged one-sided slopes of the linear interpolant of (xs, ys) at w.
double averaged_slope(const std::vector<double>& xs, const std::vector<double>& ys, double w) {
  if (xs.size() < 2) return 0.0;
  auto slope = [&](std::size_t i) { return (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]); };
  const auto it = std::upper_bound(xs.begin(), xs.end(), w);
  if (it == xs.begin() || w > xs.back()) throw DomainError("slope requested outside the grid");
  std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  if (i + 1 == xs.size()) return slope(i - 1);
  if (xs[i] == w && i > 0) return 0.5 * (slope(i - 1) + slope(i));
  if (xs[i] == w) return slope(i);
  return slope(i);
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += workers) fn(i);
    });
  }
}

}  // namespace

ReducedState step_state(const ReducedState& s, double w_next, const SignedMeasureOnGrid& mu,
                        const StateLattice& lattice) {
  if (s.k >= lattice.steps()) throw DomainError("no step after the terminal knot");
  if (!lattice.on_slice(s.k + 1, w_next)) throw DomainError("next spot is not on the lattice");
  return {s.k + 1, std::max(s.M, w_next), std::min(s.m, w_next), s.a + s.w * mu.weight(s.k), w_next};
}

PredictableState advance(const ReducedState& s, const SignedMeasureOnGrid& mu) {
  return {s.M, s.m, s.a + s.w * mu.weight(s.k)};
}

ReducedState state_along(const CadlagPath& path, const SignedMeasureOnGrid& mu, Eigen::Index k) {
  const auto s = summarize_until(path, mu, k);
  return {k, s.running_max, s.running_min, s.integral, s.spot};
}

DpConfig dp_config_from_json(const nlohmann::json& j) {
  DpConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "concavify") {
      c.concavify = value.get<bool>();
    } else if (key == "mode") {
      const auto mode = value.get<std::string>();
      if (mode == "envelope") {
        c.mode = DpMode::envelope;
      } else if (mode == "frozen") {
        c.mode = DpMode::frozen;
      } else {
        throw DomainError("unknown dp mode: " + mode);
      }
    } else if (key == "a_axis") {
      const auto axis = value.get<std::string>();
      if (axis == "exact") {
        c.a_axis = AxisMode::exact;
      } else if (axis == "uniform") {
        c.a_axis = AxisMode::uniform;
      } else {
        throw DomainError("unknown a_axis: " + axis);
      }
    } else if (key == "a_points") {
      c.a_points = value.get<Eigen::Index>();
      if (c.a_points < 2) throw DomainError("a_points must be at least 2");
    } else if (key == "state_cap") {
      c.state_cap = value.get<std::size_t>();
    } else if (key == "kernel") {
      c.kernel = kernel_config_from_json(value);
    } else {
      throw DomainError("unknown field in dp config: " + key);
    }
  }
  return c;
}

nlohmann::json to_json(const DpConfig& c) {
  return nlohmann::json{{"concavify", c.concavify},
                        {"mode", c.mode == DpMode::frozen ? "frozen" : "envelope"},
                        {"a_axis", c.a_axis == AxisMode::exact ? "exact" : "uniform"},
                        {"a_points", c.a_points},
                        {"state_cap", c.state_cap},
                        {"kernel", to_json(c.kernel)}};
}

struct ValueSurface::Impl {
  StateLattice lattice;
  PayoffSpec payoff;
  DpConfig config;
  MollifierKernel kernel;
  std::vector<double> levels;
  std::vector<std::vector<double>> a_grids;
  std::vector<std::vector<Entry>> tables;
  std::vector<std::unordered_map<Key, std::size_t, KeyHash>> index;
  mutable std::vector<std::unordered_map<Key, double, KeyHash>> hedge_cache;
  mutable std::mutex hedge_mutex;

  Impl(const StateLattice& l, const PayoffSpec& p, const DpConfig& c)
      : lattice(l), payoff(p), config(c), kernel(c.kernel, 1), levels(l.union_grid()) {}

  Eigen::Index N() const { return lattice.steps(); }

  std::int64_t level_index(double x) const {
    const double tol = 1e-12 * (1.0 + std::abs(x));
    auto it = std::lower_bound(levels.begin(), levels.end(), x - tol);
    if (it == levels.end() || std::abs(*it - x) > tol) throw DomainError("value off the lattice levels");
    return it - levels.begin();
  }

  Key key(Eigen::Index k, double M, double m, std::int64_t a_key, double w) const {
    (void)k;
    return {level_index(M), level_index(m), a_key, level_index(w)};
  }

  std::int64_t exact_a_key(double a) const { return std::llround(a / kIntegralQuantum); }

  Key exact_key(const ReducedState& s) const { return key(s.k, s.M, s.m, exact_a_key(s.a), s.w); }

  std::optional<double> find(Eigen::Index k, const Key& key) const {
    const auto& map = index[static_cast<std::size_t>(k)];
    auto it = map.find(key);
    if (it == map.end()) return std::nullopt;
    return tables[static_cast<std::size_t>(k)][it->second].value;
  }

  // V_k(M, m, a, w) from the table, interpolating in a on the uniform axis.
  double lookup(Eigen::Index k, double M, double m, double a, double w) const {
    if (config.a_axis == AxisMode::exact) {
      if (auto v = find(k, key(k, M, m, exact_a_key(a), w))) return *v;
      throw DomainError("state not reachable on the lattice");
    }
    const auto& grid = a_grids[static_cast<std::size_t>(k)];
    auto value_at = [&](std::size_t i) {
      if (auto v = find(k, key(k, M, m, static_cast<std::int64_t>(i), w))) return *v;
      throw DomainError("state outside the value table");
    };
    if (grid.size() == 1 || a <= grid.front()) return value_at(0);
    if (a >= grid.back()) return value_at(grid.size() - 1);
    const auto it = std::upper_bound(grid.begin(), grid.end(), a);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double lambda = (a - grid[i]) / (grid[i + 1] - grid[i]);
    if (lambda == 0.0) return value_at(i);
    return (1.0 - lambda) * value_at(i) + lambda * value_at(i + 1);
  }

  double terminal(const PredictableState& p, double y) const {
    if (!config.concavify) return payoff(StateSummary{std::max(p.M, y), std::min(p.m, y), p.a, y});
    const auto env = terminal_concavify(payoff, StateSummary{p.M, p.m, p.a, y}, to_vector(lattice.slice(N())));
    return env(y);
  }

  double splice(Eigen::Index j, const PredictableState& p, double y) const {
    if (j == N()) return terminal(p, y);
    const auto& slice = lattice.slice(j);
    if (slice_node(slice, y)) return lookup(j, std::max(p.M, y), std::min(p.m, y), p.a, y);
    if (y < slice(0) || y > slice(slice.size() - 1)) throw DomainError("splice outside the slice hull");
    const auto* it = std::upper_bound(slice.data(), slice.data() + slice.size(), y);
    const double hi = *it;
    const double lo = *(it - 1);
    const double lambda = (y - lo) / (hi - lo);
    return (1.0 - lambda) * splice(j, p, lo) + lambda * splice(j, p, hi);
  }

  std::vector<double> continuation(const ReducedState& s) const {
    const auto p = advance(s, payoff.mu);
    const auto& next = lattice.slice(s.k + 1);
    std::vector<double> g(static_cast<std::size_t>(next.size()));
    for (Eigen::Index i = 0; i < next.size(); ++i) g[static_cast<std::size_t>(i)] = splice(s.k + 1, p, next(i));
    return g;
  }

  double compute_value(const ReducedState& s) const {
    const auto g = continuation(s);
    const auto xs = to_vector(lattice.slice(s.k + 1));
    if (s.w < xs.front() || s.w > xs.back()) throw InfeasibleModel("spot outside the hull of the next slice");
    if (config.mode == DpMode::frozen) {
      const auto env = ConcaveEnvelope<double>(xs, g);  // linear interpolant, not an envelope
      return env(s.w);
    }
    return upper_concave_envelope<double>(xs, g)(s.w);
  }

  void build() {
    const auto n = static_cast<std::size_t>(N());
    tables.assign(n, {});
    index.assign(n, {});
    hedge_cache.assign(n, {});
    if (config.a_axis == AxisMode::exact) {
      forward_exact();
    } else {
      enumerate_uniform();
    }
    for (Eigen::Index k = N() - 1; k >= 0; --k) {
      auto& table = tables[static_cast<std::size_t>(k)];
      parallel_for(table.size(), config.threads, [&](std::size_t i) { table[i].value = compute_value(table[i].state); });
    }
  }

  void insert(Eigen::Index k, const ReducedState& s, const Key& key, std::size_t& total) {
    auto& map = index[static_cast<std::size_t>(k)];
    auto& table = tables[static_cast<std::size_t>(k)];
    if (map.emplace(key, table.size()).second) {
      table.push_back({s, 0.0});
      if (++total > config.state_cap) throw CapExceeded("reduced state count exceeds the configured cap");
    }
  }

  void forward_exact() {
    std::size_t total = 0;
    const double x0 = lattice.spot();
    const ReducedState s0{0, x0, x0, 0.0, x0};
    insert(0, s0, exact_key(s0), total);
    for (Eigen::Index k = 0; k + 1 < N(); ++k) {
      const auto& next = lattice.slice(k + 1);
      const auto& current = tables[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < current.size(); ++i) {
        const ReducedState s = current[i].state;
        for (Eigen::Index j = 0; j < next.size(); ++j) {
          const auto ns = step_state(s, next(j), payoff.mu, lattice);
          insert(k + 1, ns, exact_key(ns), total);
        }
      }
    }
  }

  void enumerate_uniform() {
    std::size_t total = 0;
    const double x0 = lattice.spot();
    a_grids.assign(static_cast<std::size_t>(N()), {});
    double a_lo = 0.0;
    double a_hi = 0.0;
    double level_lo = x0;
    double level_hi = x0;
    for (Eigen::Index k = 0; k < N(); ++k) {
      const auto& slice = lattice.slice(k);
      level_lo = std::min(level_lo, slice(0));
      level_hi = std::max(level_hi, slice(slice.size() - 1));
      auto& grid = a_grids[static_cast<std::size_t>(k)];
      if (a_hi - a_lo <= 0.0) {
        grid = {a_lo};
      } else {
        grid.resize(static_cast<std::size_t>(config.a_points));
        for (Eigen::Index i = 0; i < config.a_points; ++i) {
          grid[static_cast<std::size_t>(i)] =
              i + 1 == config.a_points ? a_hi : a_lo + (a_hi - a_lo) * static_cast<double>(i) / (config.a_points - 1);
        }
      }
      for (Eigen::Index iw = 0; iw < slice.size(); ++iw) {
        const double w = slice(iw);
        for (double M : levels) {
          if (M < std::max(w, x0) || M > level_hi) continue;
          if (k == 0 && M != x0) continue;
          for (double m : levels) {
            if (m > std::min(w, x0) || m < level_lo) continue;
            if (k == 0 && m != x0) continue;
            for (std::size_t ia = 0; ia < grid.size(); ++ia) {
              const ReducedState s{k, M, m, grid[ia], w};
              insert(k, s, key(k, M, m, static_cast<std::int64_t>(ia), w), total);
            }
          }
        }
      }
      const double mu = payoff.mu.weight(k);
      a_lo += std::min(mu * slice(0), mu * slice(slice.size() - 1));
      a_hi += std::max(mu * slice(0), mu * slice(slice.size() - 1));
    }
  }
};

const StateLattice& ValueSurface::lattice() const { return impl_->lattice; }
const PayoffSpec& ValueSurface::payoff() const { return impl_->payoff; }
const DpConfig& ValueSurface::config() const { return impl_->config; }
const MollifierKernel& ValueSurface::kernel() const { return impl_->kernel; }
Eigen::Index ValueSurface::steps() const { return impl_->N(); }

ReducedState ValueSurface::initial_state() const {
  const double x0 = impl_->lattice.spot();
  return {0, x0, x0, 0.0, x0};
}

double ValueSurface::price() const { return value(initial_state()); }

const std::vector<ValueSurface::Entry>& ValueSurface::entries(Eigen::Index k) const {
  if (k < 0 || k >= steps()) throw DomainError("value tables exist for k < N only");
  return impl_->tables[static_cast<std::size_t>(k)];
}

std::size_t ValueSurface::state_count() const {
  std::size_t n = 0;
  for (const auto& t : impl_->tables) n += t.size();
  return n;
}

double ValueSurface::splice_value(Eigen::Index j, const PredictableState& p, double y) const {
  if (j < 0 || j > steps()) throw DomainError("splice index outside the grid");
  return impl_->splice(j, p, y);
}

std::vector<double> ValueSurface::continuation(const ReducedState& s) const {
  if (s.k < 0 || s.k >= steps()) throw DomainError("continuation needs k < N");
  return impl_->continuation(s);
}

ConcaveEnvelope<double> ValueSurface::continuation_envelope(const ReducedState& s) const {
  return upper_concave_envelope<double>(to_vector(impl_->lattice.slice(s.k + 1)), continuation(s));
}

double ValueSurface::value(const ReducedState& s) const {
  if (s.k < 0 || s.k >= steps()) throw DomainError("value tables exist for k < N only");
  if (impl_->config.a_axis == AxisMode::exact) {
    if (auto v = impl_->find(s.k, impl_->exact_key(s))) return *v;
  }
  return impl_->compute_value(s);
}

double ValueSurface::hedge(const ReducedState& s) const {
  if (s.k < 0 || s.k >= steps()) throw DomainError("hedge needs k < N");
  const bool cacheable = impl_->config.a_axis == AxisMode::exact;
  Key key{};
  if (cacheable) {
    key = impl_->exact_key(s);
    std::lock_guard lock(impl_->hedge_mutex);
    const auto& cache = impl_->hedge_cache[static_cast<std::size_t>(s.k)];
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const auto xs = to_vector(impl_->lattice.slice(s.k + 1));
  const auto g = continuation(s);
  double h = 0.0;
  if (impl_->config.mode == DpMode::frozen) {
    h = averaged_slope(xs, g, s.w);
  } else {
    h = envelope_hedge(upper_concave_envelope<double>(xs, g), s.w, impl_->kernel, impl_->lattice.domain());
  }
  if (cacheable) {
    std::lock_guard lock(impl_->hedge_mutex);
    impl_->hedge_cache[static_cast<std::size_t>(s.k)].emplace(key, h);
  }
  return h;
}

std::vector<double> ValueSurface::values_along(const CadlagPath& path) const {
  const auto n = steps();
  if (path.steps() != n) throw DomainError("path and lattice have different step counts");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  ReducedState s;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!impl_->lattice.on_slice(k, path.spot(k))) throw DomainError("path leaves the lattice");
    s = state_along(path, impl_->payoff.mu, k);
    out.push_back(value(s));
  }
  if (!impl_->lattice.on_slice(n, path.spot(n))) throw DomainError("path leaves the lattice");
  out.push_back(impl_->terminal(advance(s, impl_->payoff.mu), path.spot(n)));
  return out;
}

std::vector<double> ValueSurface::hedges_along(const CadlagPath& path) const {
  const auto n = steps();
  if (path.steps() != n) throw DomainError("path and lattice have different step counts");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!impl_->lattice.on_slice(k, path.spot(k))) throw DomainError("path leaves the lattice");
    out.push_back(hedge(state_along(path, impl_->payoff.mu, k)));
  }
  return out;
}

void ValueSurface::write_surface_csv(std::ostream& out) const {
  out << "k,M,m,a,w,V\n";
  for (Eigen::Index k = 0; k < steps(); ++k) {
    for (const auto& e : entries(k)) {
      out << k << ',' << format_double(e.state.M) << ',' << format_double(e.state.m) << ','
          << format_double(e.state.a) << ',' << format_double(e.state.w) << ',' << format_double(e.value) << '\n';
    }
  }
}

void ValueSurface::write_strategy_csv(std::ostream& out) const {
  out << "k,M,m,a,w,H\n";
  for (Eigen::Index k = 0; k < steps(); ++k) {
    for (const auto& e : entries(k)) {
      out << k << ',' << format_double(e.state.M) << ',' << format_double(e.state.m) << ','
          << format_double(e.state.a) << ',' << format_double(e.state.w) << ',' << format_double(hedge(e.state))
          << '\n';
    }
  }
}

ValueSurface backward_induction(const StateLattice& lattice, const PayoffSpec& payoff, const DpConfig& config) {
  if (payoff.mu.segments() != lattice.steps()) throw DomainError("mu needs one weight per lattice step");
  auto impl = std::make_shared<ValueSurface::Impl>(lattice, payoff, config);
  impl->build();
  return ValueSurface(std::move(impl));
}

double price(const StateLattice& lattice, const PayoffSpec& payoff, bool concavify, const DpConfig& config) {
  DpConfig c = config;
  c.concavify = concavify;
  return backward_induction(lattice, payoff, c).price();
}

double envelope_hedge(const ConcaveEnvelope<double>& envelope, double w, const MollifierKernel& kernel,
                      const DomainE& domain) {
  const auto& xs = envelope.xs();
  if (xs.size() < 2) return 0.0;
  if (!envelope.covers(w)) throw DomainError("hedge requested outside the envelope grid");
  if (w <= envelope.lower()) return envelope.right_slope(w);
  if (w >= envelope.upper()) return envelope.left_slope(w);
  const auto it = std::upper_bound(xs.begin(), xs.end(), w);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double window_lo = xs[i] == w ? xs[i - 1] : xs[i];
  const double window_hi = *it;
  const double lo = w + kernel.eps() * kernel.support_lower();
  const double hi = w + kernel.eps() * kernel.support_upper();
  if (lo < window_lo || hi > window_hi) return 0.5 * (envelope.left_slope(w) + envelope.right_slope(w));
  const Section section = [&envelope](const Eigen::VectorXd& y) { return envelope(y(0)); };
  return strategy_kernel(section, Eigen::VectorXd::Constant(1, w), kernel, domain)(0);
}

StructureReport check_structure(const ValueSurface& surface, double tolerance, bool check_hedges) {
  StructureReport r;
  const auto& lattice = surface.lattice();
  const auto& payoff = surface.payoff();
  const auto n = surface.steps();
  const double K = payoff.growth_K;

  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& entries = surface.entries(k);
    // Concavity on (M, m, a) slices.
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), 0);
    auto slice_key = [&](std::size_t i) {
      const auto& s = entries[i].state;
      return std::tuple(s.M, s.m, std::llround(s.a / kIntegralQuantum));
    };
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return std::tuple_cat(slice_key(x), std::tuple(entries[x].state.w)) <
             std::tuple_cat(slice_key(y), std::tuple(entries[y].state.w));
    });
    for (std::size_t i = 1; i + 1 < order.size(); ++i) {
      const auto p = order[i - 1];
      const auto c = order[i];
      const auto q = order[i + 1];
      if (slice_key(p) != slice_key(c) || slice_key(c) != slice_key(q)) continue;
      const double w0 = entries[p].state.w;
      const double w1 = entries[c].state.w;
      const double w2 = entries[q].state.w;
      const double lambda = (w2 - w1) / (w2 - w0);
      const double gap = lambda * entries[p].value + (1.0 - lambda) * entries[q].value - entries[c].value;
      const double excess = gap / scale_of(entries[c].value);
      r.worst_concavity = std::max(r.worst_concavity, excess);
      if (excess > tolerance) r.concavity = false;
    }

    for (const auto& e : entries) {
      const auto& s = e.state;
      // Dirac continuation.
      if (lattice.on_slice(k + 1, s.w)) {
        const double next = surface.splice_value(k + 1, advance(s, payoff.mu), s.w);
        const double excess = (next - e.value) / scale_of(e.value);
        r.worst_time = std::max(r.worst_time, excess);
        if (excess > tolerance) r.time_monotone = false;
      }
      if (check_hedges) {
        const double h = surface.hedge(s);
        const double bound = surface.continuation_envelope(s).max_abs_slope();
        if (std::abs(h) > bound + tolerance * scale_of(bound)) r.hedge_bounded = false;
      }
    }
  }

  // Growth bound.
  const bool nonneg = lattice.domain().kind == DomainKind::nonnegative_orthant;
  r.growth_all_states = nonneg && (payoff.mu.nonnegative() || payoff.mu.nonpositive());
  auto growth = [&](double value, double bound) {
    const double excess = (std::abs(value) - bound) / scale_of(bound);
    r.worst_growth = std::max(r.worst_growth, excess);
    if (excess > tolerance) r.growth = false;
  };
  if (r.growth_all_states) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double tail = payoff.mu.tail_variation(k);
      for (const auto& e : surface.entries(k)) {
        const auto& s = e.state;
        growth(e.value, K * (1.0 + s.w + std::abs(s.a) + s.w * tail));
      }
    }
  } else if (nonneg) {
    const double x0 = lattice.spot();
    growth(surface.price(), K * (1.0 + x0 + x0 * payoff.mu.total_variation()));
  }

  // Near-zero Lipschitz bound on splices from reachable predictable states.
  for (Eigen::Index k = 1; k <= n && nonneg; ++k) {
    const auto& slice = lattice.slice(k);
    if (!lattice.on_slice(k, 0.0)) continue;
    const double bound_rate = 2.0 * K * std::max(1.0, payoff.mu.tail_variation(k));
    for (const auto& e : surface.entries(k - 1)) {
      const auto p = advance(e.state, payoff.mu);
      const double at_zero = surface.splice_value(k, p, 0.0);
      for (Eigen::Index i = 0; i < slice.size(); ++i) {
        const double y = slice(i);
        if (!(y > 0.0) || y > payoff.eps_lip) continue;
        const double diff = std::abs(surface.splice_value(k, p, y) - at_zero);
        const double excess = (diff - bound_rate * y) / scale_of(bound_rate * y);
        ++r.lipschitz_checks;
        r.worst_lipschitz = std::max(r.worst_lipschitz, excess);
        if (excess > tolerance) r.lipschitz = false;
      }
    }
  }
  return r;
}

double a_axis_refinement_drift(const StateLattice& lattice, const PayoffSpec& payoff, DpConfig config) {
  config.a_axis = AxisMode::uniform;
  const double coarse = backward_induction(lattice, payoff, config).price();
  config.a_points = 2 * config.a_points - 1;
  const double fine = backward_induction(lattice, payoff, config).price();
  return std::abs(fine - coarse);
}

}  // namespace robusthedge
