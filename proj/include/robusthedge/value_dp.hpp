#pragma once

#include "robusthedge/calculus.hpp"
#include "robusthedge/envelope.hpp"
#include "robusthedge/measures.hpp"
#include "robusthedge/payoff.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

namespace robusthedge {

/// Summary (M, m, a, w) at knot k, with a = sum_{j<k} v_j mu_j.
struct ReducedState {
  Eigen::Index k = 0;
  double M = 0.0;
  double m = 0.0;
  double a = 0.0;
  double w = 0.0;

  StateSummary summary() const { return {M, m, a, w}; }
};

/// Information available just before the move to knot k: running max/min of
/// v_0..v_{k-1} and the integral a_k. At k = 0, M = -inf and m = +inf.
struct PredictableState {
  double M = 0.0;
  double m = 0.0;
  double a = 0.0;
};

/// (M v w', m ^ w', a + w mu_k, w'); w' must lie on S_{k+1}.
ReducedState step_state(const ReducedState& s, double w_next, const SignedMeasureOnGrid& mu,
                        const StateLattice& lattice);

/// Predictable state for knot k+1 after leaving s.
PredictableState advance(const ReducedState& s, const SignedMeasureOnGrid& mu);

/// State at knot k along a lattice path.
ReducedState state_along(const CadlagPath& path, const SignedMeasureOnGrid& mu, Eigen::Index k);

enum class AxisMode { exact, uniform };

enum class DpMode {
  envelope,
  /// Negative control: V_k = continuation at w with no envelope, H from averaged slopes.
  frozen,
};

struct DpConfig {
  /// Replace the terminal payoff by its concave envelope in the last spot.
  bool concavify = false;
  DpMode mode = DpMode::envelope;
  /// exact: reachable integral values; uniform: a_points-point grid per step
  /// with linear interpolation in a.
  AxisMode a_axis = AxisMode::exact;
  Eigen::Index a_points = 33;
  std::size_t state_cap = 5'000'000;
  unsigned threads = 1;
  KernelConfig kernel;
};

DpConfig dp_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DpConfig& config);

/// Value tables V_0..V_{N-1} on reduced states; the terminal layer is the payoff
/// (or its concavification) evaluated on demand.
class ValueSurface {
 public:
  struct Entry {
    ReducedState state;
    double value = 0.0;
  };

  const StateLattice& lattice() const;
  const PayoffSpec& payoff() const;
  const DpConfig& config() const;
  const MollifierKernel& kernel() const;
  Eigen::Index steps() const;

  ReducedState initial_state() const;
  double price() const;

  /// Table entries at step k < N.
  const std::vector<Entry>& entries(Eigen::Index k) const;
  std::size_t state_count() const;

  /// V_j(M v y, m ^ y, a, y) for j < N, the terminal value for j = N. Off-lattice
  /// y inside the slice hull is linearly interpolated between slice nodes.
  double splice_value(Eigen::Index j, const PredictableState& p, double y) const;

  /// y -> splice_value(k+1, advance(s), y) on S_{k+1}, and its envelope.
  std::vector<double> continuation(const ReducedState& s) const;
  ConcaveEnvelope<double> continuation_envelope(const ReducedState& s) const;

  /// V_k(s) for k < N.
  double value(const ReducedState& s) const;

  /// H_k(s): strategy kernel on the continuation envelope at w, or averaged
  /// one-sided envelope slopes when the kernel window is not resolved by the grid.
  double hedge(const ReducedState& s) const;

  /// V_k(state_k) for k = 0..N along a path; the last entry is the terminal value.
  std::vector<double> values_along(const CadlagPath& path) const;
  std::vector<double> hedges_along(const CadlagPath& path) const;

  void write_surface_csv(std::ostream& out) const;
  void write_strategy_csv(std::ostream& out) const;

  struct Impl;

 private:
  friend ValueSurface backward_induction(const StateLattice&, const PayoffSpec&, const DpConfig&);
  explicit ValueSurface(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
};

/// Backward dynamic programming over martingale kernels: V_k(s) is the upper
/// concave envelope in w' of the continuation, evaluated at w.
ValueSurface backward_induction(const StateLattice& lattice, const PayoffSpec& payoff, const DpConfig& config = {});

/// V_0 at (x0, x0, 0, x0).
double price(const StateLattice& lattice, const PayoffSpec& payoff, bool concavify = false,
             const DpConfig& config = {});

/// Supergradient of a one-dimensional concave envelope at w via the mollifier
/// kernel, falling back to averaged one-sided slopes.
double envelope_hedge(const ConcaveEnvelope<double>& envelope, double w, const MollifierKernel& kernel,
                      const DomainE& domain);

struct StructureReport {
  bool concavity = true;
  bool time_monotone = true;
  bool growth = true;
  bool lipschitz = true;
  bool hedge_bounded = true;
  double worst_concavity = 0.0;
  double worst_time = 0.0;
  double worst_growth = 0.0;
  double worst_lipschitz = 0.0;
  /// Growth is checked at every state when mu has constant sign, at V_0 otherwise.
  bool growth_all_states = false;
  std::size_t lipschitz_checks = 0;

  bool passed() const { return concavity && time_monotone && growth && lipschitz && hedge_bounded; }
};

/// Concavity of w -> V_k(M, m, a, w) on fixed (M, m, a) slices, V_k >= V_{k+1}
/// after a Dirac step, the linear growth bound and the near-zero Lipschitz bound.
StructureReport check_structure(const ValueSurface& surface, double tolerance = 1e-9, bool check_hedges = false);

/// |price(a_points) - price(2 a_points - 1)| on the uniform integral axis.
double a_axis_refinement_drift(const StateLattice& lattice, const PayoffSpec& payoff, DpConfig config);

}  // namespace robusthedge
