#pragma once

#include "robusthedge/path.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <functional>
#include <vector>

namespace robusthedge {

/// Non-anticipative functional F(t, omega).
using Functional = std::function<double(double, const CadlagPath&)>;

/// Vertical section y -> F(t, omega (+)_t y) of a functional at a fixed (t, omega).
using Section = std::function<double(const Eigen::VectorXd&)>;

Section vertical_section(const Functional& functional, double t, const CadlagPath& path);

enum class KernelPlacement { centered, right_sided };

struct KernelConfig {
  double eps = 0.2;
  int order = 32;
  KernelPlacement placement = KernelPlacement::right_sided;
};

KernelConfig kernel_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KernelConfig& config);

/// Normalized bump u -> C exp(-1 / (1 - |u - c|^2 / rho^2)) with a tensor
/// Gauss-Legendre rule on its support box. Centered placement uses the unit
/// ball; right-sided placement uses the ball of radius 1/2 around (1/2, ..., 1/2),
/// so the support sits in [0, 1]^d and translates of it stay inside R_+^d.
class MollifierKernel {
 public:
  explicit MollifierKernel(KernelConfig config = {}, Eigen::Index dim = 1);

  const KernelConfig& config() const { return config_; }
  Eigen::Index dim() const { return dim_; }
  double eps() const { return config_.eps; }

  double density(const Eigen::VectorXd& u) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;

  /// Quadrature nodes (dim x n), weights, and -grad(phi) at the nodes.
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& density_at_nodes() const { return density_; }
  const Eigen::MatrixXd& neg_gradient_at_nodes() const { return neg_gradient_; }

  /// sum_i w_i phi(y_i); equals one up to quadrature error.
  double quadrature_mass() const { return density_.dot(weights_); }
  /// sum_i w_i y_i (-grad phi(y_i))^T; the identity up to quadrature error.
  const Eigen::MatrixXd& moment_matrix() const { return moments_; }

  /// Scales used for the directional limit: eps, eps/2, eps/4.
  std::vector<double> ladder() const { return {config_.eps, config_.eps / 2.0, config_.eps / 4.0}; }

  /// Support box [lower, upper] per coordinate, in unit coordinates.
  double support_lower() const { return center_ - radius_; }
  double support_upper() const { return center_ + radius_; }

 private:
  KernelConfig config_;
  Eigen::Index dim_;
  double center_;
  double radius_;
  double normalizer_;
  Eigen::MatrixXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd density_;
  Eigen::MatrixXd neg_gradient_;
  Eigen::MatrixXd moments_;
};

/// (F(t+h, omega_{t^.}) - F(t, omega_{t^.})) / h.
double horizontal_derivative(const Functional& functional, double t, const CadlagPath& path, double h);

struct VerticalDerivative {
  Eigen::VectorXd gradient;
  Eigen::VectorXd left;   // backward quotients (NaN when not admissible)
  Eigen::VectorXd right;  // forward quotients (NaN when not admissible)
  bool differentiable = true;
};

/// Central differences of the vertical section where both sides stay in E,
/// one-sided otherwise. Flags a kink when the one-sided quotients differ by more
/// than sqrt(delta) (1 + |gradient|).
VerticalDerivative vertical_derivative(const Section& section, const Eigen::VectorXd& x, double delta,
                                       const DomainE& domain);
VerticalDerivative vertical_derivative(const Functional& functional, double t, const CadlagPath& path,
                                       double delta);

/// Quadrature of y' -> F(t, omega (+)_t y') phi^eps(y' - omega_t), mass-normalized.
double mollified_value(const Section& section, const Eigen::VectorXd& x, const MollifierKernel& kernel);
double mollified_value(const Functional& functional, double t, const CadlagPath& path, const MollifierKernel& kernel);

/// Gradient of the mollified functional in difference-quotient form,
/// eps^{-1} [F(omega (+) (omega_t + eps y)) - F(omega)] (-grad phi(y)). The rule is
/// moment-corrected so affine sections are differentiated exactly.
Eigen::VectorXd mollified_gradient(const Section& section, const Eigen::VectorXd& x, const MollifierKernel& kernel);
Eigen::VectorXd mollified_gradient(const Functional& functional, double t, const CadlagPath& path,
                                   const MollifierKernel& kernel);

struct DirectionalDerivative {
  double value = 0.0;
  std::vector<double> quotients;
  /// Largest decrease of the quotient along the decreasing ladder (0 if monotone).
  double monotonicity_defect = 0.0;
};

/// Limit of (f(x + eps y) - f(x)) / eps along a decreasing ladder. For a concave
/// section the quotients are nondecreasing as eps shrinks; the supremum is
/// returned. Throws ConcavityViolation when the defect exceeds tolerance * scale.
DirectionalDerivative directional_upper_derivative(const Section& section, const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& direction, const std::vector<double>& ladder,
                                                   const DomainE& domain, double tolerance = 1e-8);
DirectionalDerivative directional_upper_derivative(const Functional& functional, double t, const CadlagPath& path,
                                                   const Eigen::VectorXd& direction, const std::vector<double>& ladder,
                                                   double tolerance = 1e-8);

/// H = int dir_derivative(y) (-grad phi(y)) dy, a super-gradient of a concave section.
Eigen::VectorXd strategy_kernel(const Section& section, const Eigen::VectorXd& x, const MollifierKernel& kernel,
                                const DomainE& domain);
Eigen::VectorXd strategy_kernel(const Functional& functional, double t, const CadlagPath& path,
                                const MollifierKernel& kernel);

struct SuperdifferentialReport {
  bool passed = true;
  double max_violation = 0.0;
  double tolerance = 0.0;
  Eigen::VectorXd worst_probe;
};

/// Checks f(y) <= f(x) + z . (y - x) on every probe column, within
/// tolerance_factor * (1 + |f(x)|).
SuperdifferentialReport superdifferential_check(const Section& section, const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& z, const Eigen::MatrixXd& probes,
                                                double tolerance_factor = 1e-6);
SuperdifferentialReport superdifferential_check(const Functional& functional, double t, const CadlagPath& path,
                                                const Eigen::VectorXd& z, const Eigen::MatrixXd& probes,
                                                double tolerance_factor = 1e-6);

struct ConcavityReport {
  bool passed = true;
  /// min over theta of F(mix) - [theta F(w1) + (1 - theta) F(w2)].
  double min_gap = 0.0;
  double worst_theta = 0.0;
};

/// Dupire-concavity along the segment between two paths that agree on [0, t).
ConcavityReport dupire_concavity_check(const Functional& functional, double t, const CadlagPath& first,
                                       const CadlagPath& second, const std::vector<double>& thetas,
                                       double tolerance = 1e-9);

/// |F(t, omega) - F(t, omega_{t^.})| <= tolerance.
bool is_non_anticipative(const Functional& functional, double t, const CadlagPath& path, double tolerance = 1e-12);

}  // namespace robusthedge
