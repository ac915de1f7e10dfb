#pragma once

#include "robusthedge/envelope.hpp"
#include "robusthedge/path.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace robusthedge {

/// Running summary (M, m, a, w) of a one-dimensional path.
struct StateSummary {
  double running_max = 0.0;
  double running_min = 0.0;
  double integral = 0.0;
  double spot = 0.0;

  friend bool operator==(const StateSummary&, const StateSummary&) = default;
};

/// Signed measure without atoms, carried as one weight per grid segment
/// [t_k, t_{k+1}). The terminal point never carries mass.
class SignedMeasureOnGrid {
 public:
  SignedMeasureOnGrid() = default;
  explicit SignedMeasureOnGrid(Eigen::VectorXd weights) : weights_(std::move(weights)) {}

  static SignedMeasureOnGrid zero(Eigen::Index segments) {
    return SignedMeasureOnGrid(Eigen::VectorXd::Zero(segments));
  }

  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index segments() const { return weights_.size(); }
  double weight(Eigen::Index k) const { return k < weights_.size() ? weights_(k) : 0.0; }

  double total_variation() const { return weights_.cwiseAbs().sum(); }
  /// |mu|([t_k, T]).
  double tail_variation(Eigen::Index k) const {
    return k >= weights_.size() ? 0.0 : weights_.tail(weights_.size() - k).cwiseAbs().sum();
  }
  bool nonnegative() const { return (weights_.array() >= 0.0).all(); }
  bool nonpositive() const { return (weights_.array() <= 0.0).all(); }

 private:
  Eigen::VectorXd weights_;
};

namespace kernels {

struct Call {
  double strike = 0.0;
};
struct Put {
  double strike = 0.0;
};
/// f(a) + (w - g(M))_+ with f(a) = f_slope a + f_abs |a| + f_intercept and
/// g(M) = g_level + g_slope M (nonnegative on R_+).
struct LookbackBarrier {
  double f_slope = 0.0;
  double f_abs = 0.0;
  double f_intercept = 0.0;
  double g_level = 0.0;
  double g_slope = 0.0;
};
/// psi = M.
struct RunningMax {};
struct Linear {
  double slope = 1.0;
  double intercept = 0.0;
};
struct Constant {
  double value = 0.0;
};
/// scale * w^exponent.
struct Power {
  double exponent = 2.0;
  double scale = 1.0;
};
/// Multilinear interpolation on a (M, m, a, w) table, flat outside the axes.
/// Values are row-major with w varying fastest.
struct Table {
  std::array<std::vector<double>, 4> axes;
  std::vector<double> values;
};

}  // namespace kernels

using PayoffKernel = std::variant<kernels::Call, kernels::Put, kernels::LookbackBarrier, kernels::RunningMax,
                                  kernels::Linear, kernels::Constant, kernels::Power, kernels::Table>;

/// psi(M, m, a, w) for a catalog kernel.
double apply_kernel(const PayoffKernel& kernel, const StateSummary& s);

std::string kernel_name(const PayoffKernel& kernel);

/// Phi(omega) = psi(M_T, m_T, A_T, omega_T) together with the measure driving A
/// and the constants of the growth and near-zero Lipschitz conditions.
struct PayoffSpec {
  PayoffKernel kernel = kernels::Constant{};
  SignedMeasureOnGrid mu;
  double growth_K = 1.0;
  double eps_lip = 1.0;

  double operator()(const StateSummary& s) const { return apply_kernel(kernel, s); }
};

/// M = max v_k, m = min v_k, a = sum_{k<N} v_k mu_k, w = v_N.
StateSummary summarize(const CadlagPath& path, const SignedMeasureOnGrid& mu);

/// Running summary at knot k: max/min over v_0..v_k and a = sum_{j<k} v_j mu_j.
StateSummary summarize_until(const CadlagPath& path, const SignedMeasureOnGrid& mu, Eigen::Index k);

double evaluate(const PayoffSpec& payoff, const CadlagPath& path);

struct GrowthReport {
  bool passed = true;
  double worst_ratio = 0.0;
  std::vector<std::size_t> violations;
};

/// |Phi(omega)| <= K (1 + omega_T + sum_k v_k |mu_k|) on every sample.
GrowthReport check_growth(const PayoffSpec& payoff, const std::vector<CadlagPath>& samples);

/// One comparison point for the near-zero Lipschitz condition.
struct LipschitzSample {
  double max0 = 0.0;
  double integral0 = 0.0;
  double max1 = 0.0;
  double min1 = 0.0;
  double integral1 = 0.0;
  double spot1 = 0.0;
};

struct LipschitzReport {
  bool passed = true;
  double worst_excess = 0.0;
  std::vector<std::size_t> violations;
};

/// |psi(M1, m1, a1, w1) - psi(M0, 0, a0, 0)| <= K (|a1 - a0| + w1), for samples
/// with 0 <= m1 <= min(w1, eps) and M0 <= M1. Samples outside that region are
/// rejected with DomainError.
LipschitzReport check_lipschitz_near_zero(const PayoffSpec& payoff, const std::vector<LipschitzSample>& samples);

/// Random samples from the admissible region of the near-zero Lipschitz check.
std::vector<LipschitzSample> lipschitz_samples(const PayoffSpec& payoff, std::size_t count, std::uint64_t seed,
                                               double max_level = 10.0, double integral_range = 10.0);

/// Upper concave envelope over y in w_grid of y -> psi(M v y, m ^ y, a, y),
/// the terminal concavification at the pre-terminal summary s.
ConcaveEnvelope<double> terminal_concavify(const PayoffSpec& payoff, const StateSummary& s,
                                           const std::vector<double>& w_grid);

PayoffSpec payoff_from_json(const nlohmann::json& j, Eigen::Index segments);
nlohmann::json to_json(const PayoffSpec& payoff);

}  // namespace robusthedge
