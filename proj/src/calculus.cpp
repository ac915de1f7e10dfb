#include "robusthedge/calculus.hpp"

#include "robusthedge/errors.hpp"
#include "robusthedge/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace robusthedge {

namespace {

double bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

// Integral of the unnormalized bump over the unit ball of R^d, by a radial
// rule of much higher order than the kernel's own quadrature.
double unit_ball_mass(Eigen::Index dim) {
  const auto rule = gauss_legendre(200, 0.0, 1.0);
  double radial = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double r = rule.nodes(i);
    radial += rule.weights(i) * std::pow(r, static_cast<double>(dim - 1)) * bump(r * r);
  }
  const double d = static_cast<double>(dim);
  const double sphere = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
  return sphere * radial;
}

Eigen::VectorXd unit(Eigen::Index dim, Eigen::Index i) { return Eigen::VectorXd::Unit(dim, i); }

}  // namespace

Section vertical_section(const Functional& functional, double t, const CadlagPath& path) {
  return [functional, t, path](const Eigen::VectorXd& y) { return functional(t, splice(path, t, y)); };
}

KernelConfig kernel_config_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items()) {
    if (key != "eps" && key != "order" && key != "placement") throw DomainError("unknown kernel field: " + key);
  }
  KernelConfig config;
  config.eps = j.value("eps", config.eps);
  config.order = j.value("order", config.order);
  const auto placement = j.value("placement", std::string("right"));
  if (placement == "right" || placement == "right_sided") {
    config.placement = KernelPlacement::right_sided;
  } else if (placement == "centered") {
    config.placement = KernelPlacement::centered;
  } else {
    throw DomainError("unknown kernel placement: " + placement);
  }
  if (!(config.eps > 0.0) || config.order < 2) throw DomainError("kernel needs eps > 0 and order >= 2");
  return config;
}

nlohmann::json to_json(const KernelConfig& config) {
  return nlohmann::json{{"eps", config.eps},
                        {"order", config.order},
                        {"placement", config.placement == KernelPlacement::centered ? "centered" : "right"}};
}

MollifierKernel::MollifierKernel(KernelConfig config, Eigen::Index dim) : config_(config), dim_(dim) {
  if (dim_ < 1) throw DomainError("kernel dimension must be positive");
  if (!(config_.eps > 0.0) || config_.order < 2) throw DomainError("kernel needs eps > 0 and order >= 2");
  center_ = config_.placement == KernelPlacement::centered ? 0.0 : 0.5;
  radius_ = config_.placement == KernelPlacement::centered ? 1.0 : 0.5;
  normalizer_ = unit_ball_mass(dim_) * std::pow(radius_, static_cast<double>(dim_));

  const auto rule = gauss_legendre(config_.order, center_ - radius_, center_ + radius_);
  const Eigen::Index q = rule.nodes.size();
  Eigen::Index count = 1;
  for (Eigen::Index d = 0; d < dim_; ++d) count *= q;
  nodes_.resize(dim_, count);
  weights_.resize(count);
  for (Eigen::Index n = 0; n < count; ++n) {
    Eigen::Index rest = n;
    double w = 1.0;
    for (Eigen::Index d = 0; d < dim_; ++d) {
      const Eigen::Index i = rest % q;
      rest /= q;
      nodes_(d, n) = rule.nodes(i);
      w *= rule.weights(i);
    }
    weights_(n) = w;
  }
  density_.resize(count);
  neg_gradient_.resize(dim_, count);
  for (Eigen::Index n = 0; n < count; ++n) {
    const Eigen::VectorXd u = nodes_.col(n);
    density_(n) = density(u);
    neg_gradient_.col(n) = -gradient(u);
  }
  moments_ = nodes_ * weights_.asDiagonal() * neg_gradient_.transpose();
}

double MollifierKernel::density(const Eigen::VectorXd& u) const {
  const double r2 = (u.array() - center_).square().sum() / (radius_ * radius_);
  return bump(r2) / normalizer_;
}

Eigen::VectorXd MollifierKernel::gradient(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd offset = u.array() - center_;
  const double r2 = offset.squaredNorm() / (radius_ * radius_);
  if (r2 >= 1.0) return Eigen::VectorXd::Zero(u.size());
  const double gap = 1.0 - r2;
  return density(u) * (-2.0 / (gap * gap * radius_ * radius_)) * offset;
}

double horizontal_derivative(const Functional& functional, double t, const CadlagPath& path, double h) {
  if (!(h > 0.0)) throw DomainError("horizontal step must be positive");
  if (t >= path.grid().horizon()) throw DomainError("no horizontal derivative at T");
  if (t + h > path.grid().horizon() * (1.0 + 1e-12)) throw DomainError("t + h beyond the horizon");
  const CadlagPath frozen = stop(path, t);
  return (functional(t + h, frozen) - functional(t, frozen)) / h;
}

VerticalDerivative vertical_derivative(const Section& section, const Eigen::VectorXd& x, double delta,
                                       const DomainE& domain) {
  if (!(delta > 0.0)) throw DomainError("vertical step must be positive");
  const Eigen::Index d = x.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  VerticalDerivative out{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Constant(d, nan), Eigen::VectorXd::Constant(d, nan),
                         true};
  const double centre = section(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::VectorXd up = x + delta * unit(d, i);
    const Eigen::VectorXd down = x - delta * unit(d, i);
    const bool has_up = domain.contains(up);
    const bool has_down = domain.contains(down);
    if (!has_up && !has_down) throw DomainError("no admissible vertical perturbation");
    double f_up = 0.0;
    double f_down = 0.0;
    if (has_up) {
      f_up = section(up);
      out.right(i) = (f_up - centre) / delta;
    }
    if (has_down) {
      f_down = section(down);
      out.left(i) = (centre - f_down) / delta;
    }
    if (has_up && has_down) {
      out.gradient(i) = (f_up - f_down) / (2.0 * delta);
      if (std::abs(out.right(i) - out.left(i)) > std::sqrt(delta) * (1.0 + std::abs(out.gradient(i)))) {
        out.differentiable = false;
      }
    } else {
      out.gradient(i) = has_up ? out.right(i) : out.left(i);
    }
  }
  return out;
}

VerticalDerivative vertical_derivative(const Functional& functional, double t, const CadlagPath& path, double delta) {
  const auto k = path.grid().knot_index(t);
  if (!k) throw DomainError("vertical derivative needs a grid knot");
  return vertical_derivative(vertical_section(functional, t, path), path.value(*k), delta, path.domain());
}

double mollified_value(const Section& section, const Eigen::VectorXd& x, const MollifierKernel& kernel) {
  double total = 0.0;
  double mass = 0.0;
  for (Eigen::Index n = 0; n < kernel.weights().size(); ++n) {
    const double w = kernel.weights()(n) * kernel.density_at_nodes()(n);
    if (w == 0.0) continue;
    total += w * section(x + kernel.eps() * kernel.nodes().col(n));
    mass += w;
  }
  return total / mass;
}

double mollified_value(const Functional& functional, double t, const CadlagPath& path, const MollifierKernel& kernel) {
  const auto k = path.grid().knot_index(t);
  if (!k) throw DomainError("mollification needs a grid knot");
  return mollified_value(vertical_section(functional, t, path), path.value(*k), kernel);
}

Eigen::VectorXd mollified_gradient(const Section& section, const Eigen::VectorXd& x, const MollifierKernel& kernel) {
  if (x.size() != kernel.dim()) throw DomainError("kernel dimension does not match the state");
  const double base = section(x);
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index n = 0; n < kernel.weights().size(); ++n) {
    const Eigen::VectorXd g = kernel.weights()(n) * kernel.neg_gradient_at_nodes().col(n);
    if (g.isZero(0.0)) continue;
    const double quotient = (section(x + kernel.eps() * kernel.nodes().col(n)) - base) / kernel.eps();
    raw += quotient * g;
  }
  return kernel.moment_matrix().transpose().partialPivLu().solve(raw);
}

Eigen::VectorXd mollified_gradient(const Functional& functional, double t, const CadlagPath& path,
                                   const MollifierKernel& kernel) {
  const auto k = path.grid().knot_index(t);
  if (!k) throw DomainError("mollification needs a grid knot");
  return mollified_gradient(vertical_section(functional, t, path), path.value(*k), kernel);
}

DirectionalDerivative directional_upper_derivative(const Section& section, const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& direction, const std::vector<double>& ladder,
                                                   const DomainE& domain, double tolerance) {
  if (ladder.empty()) throw DomainError("empty epsilon ladder");
  DirectionalDerivative out;
  const double base = section(x);
  double scale = 1.0;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (i > 0 && !(ladder[i] < ladder[i - 1])) throw DomainError("epsilon ladder must decrease");
    const Eigen::VectorXd moved = x + ladder[i] * direction;
    if (!domain.contains(moved)) throw DomainError("directional perturbation leaves E");
    out.quotients.push_back((section(moved) - base) / ladder[i]);
    scale = std::max(scale, 1.0 + std::abs(out.quotients.back()));
  }
  for (std::size_t i = 1; i < out.quotients.size(); ++i) {
    out.monotonicity_defect = std::max(out.monotonicity_defect, out.quotients[i - 1] - out.quotients[i]);
  }
  if (out.monotonicity_defect > tolerance * scale) {
    throw ConcavityViolation("difference quotients decrease along the epsilon ladder");
  }
  out.value = *std::max_element(out.quotients.begin(), out.quotients.end());
  return out;
}

DirectionalDerivative directional_upper_derivative(const Functional& functional, double t, const CadlagPath& path,
                                                   const Eigen::VectorXd& direction, const std::vector<double>& ladder,
                                                   double tolerance) {
  const auto k = path.grid().knot_index(t);
  if (!k) throw DomainError("directional derivative needs a grid knot");
  return directional_upper_derivative(vertical_section(functional, t, path), path.value(*k), direction, ladder,
                                      path.domain(), tolerance);
}

Eigen::VectorXd strategy_kernel(const Section& section, const Eigen::VectorXd& x, const MollifierKernel& kernel,
                                const DomainE& domain) {
  if (x.size() != kernel.dim()) throw DomainError("kernel dimension does not match the state");
  const auto ladder = kernel.ladder();
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index n = 0; n < kernel.weights().size(); ++n) {
    const Eigen::VectorXd g = kernel.weights()(n) * kernel.neg_gradient_at_nodes().col(n);
    if (g.isZero(0.0)) continue;
    const auto upper = directional_upper_derivative(section, x, kernel.nodes().col(n), ladder, domain);
    raw += upper.value * g;
  }
  return kernel.moment_matrix().transpose().partialPivLu().solve(raw);
}

Eigen::VectorXd strategy_kernel(const Functional& functional, double t, const CadlagPath& path,
                                const MollifierKernel& kernel) {
  const auto k = path.grid().knot_index(t);
  if (!k) throw DomainError("strategy kernel needs a grid knot");
  return strategy_kernel(vertical_section(functional, t, path), path.value(*k), kernel, path.domain());
}

SuperdifferentialReport superdifferential_check(const Section& section, const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& z, const Eigen::MatrixXd& probes,
                                                double tolerance_factor) {
  const double base = section(x);
  SuperdifferentialReport report;
  report.tolerance = tolerance_factor * (1.0 + std::abs(base));
  report.max_violation = -std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < probes.cols(); ++p) {
    const Eigen::VectorXd y = probes.col(p);
    const double violation = section(y) - base - z.dot(y - x);
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_probe = y;
    }
  }
  report.passed = report.max_violation <= report.tolerance;
  return report;
}

SuperdifferentialReport superdifferential_check(const Functional& functional, double t, const CadlagPath& path,
                                                const Eigen::VectorXd& z, const Eigen::MatrixXd& probes,
                                                double tolerance_factor) {
  const auto k = path.grid().knot_index(t);
  if (!k) throw DomainError("super-differential check needs a grid knot");
  return superdifferential_check(vertical_section(functional, t, path), path.value(*k), z, probes, tolerance_factor);
}

ConcavityReport dupire_concavity_check(const Functional& functional, double t, const CadlagPath& first,
                                       const CadlagPath& second, const std::vector<double>& thetas,
                                       double tolerance) {
  if (!(first.grid() == second.grid()) || first.dim() != second.dim()) throw DomainError("paths live on different grids");
  const auto& knots = first.grid().knots();
  for (Eigen::Index k = 0; k < knots.size() && knots(k) < t; ++k) {
    if (first.value(k) != second.value(k)) throw DomainError("paths must agree before t");
  }
  ConcavityReport report;
  report.min_gap = std::numeric_limits<double>::infinity();
  const double f1 = functional(t, first);
  const double f2 = functional(t, second);
  for (double theta : thetas) {
    if (theta < 0.0 || theta > 1.0) throw DomainError("mixing weight outside [0, 1]");
    const CadlagPath mix(first.grid(), theta * first.values() + (1.0 - theta) * second.values(), first.domain());
    const double gap = functional(t, mix) - (theta * f1 + (1.0 - theta) * f2);
    if (gap < report.min_gap) {
      report.min_gap = gap;
      report.worst_theta = theta;
    }
  }
  report.passed = report.min_gap >= -tolerance * (1.0 + std::abs(f1) + std::abs(f2));
  return report;
}

bool is_non_anticipative(const Functional& functional, double t, const CadlagPath& path, double tolerance) {
  return std::abs(functional(t, path) - functional(t, stop(path, t))) <= tolerance;
}

}  // namespace robusthedge
