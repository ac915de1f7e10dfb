#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace robusthedge {

/// Strictly increasing knots 0 = t_0 < ... < t_N = T with N >= 1.
class TimeGrid {
 public:
  explicit TimeGrid(Eigen::VectorXd knots);

  static TimeGrid uniform(double horizon, Eigen::Index steps);

  double horizon() const { return knots_(knots_.size() - 1); }
  Eigen::Index steps() const { return knots_.size() - 1; }
  const Eigen::VectorXd& knots() const { return knots_; }
  double operator[](Eigen::Index k) const { return knots_(k); }

  /// Index k with s in [t_k, t_{k+1}); N for s = T.
  Eigen::Index segment(double s) const;

  /// Index of the knot equal to t (within a relative tolerance), if any.
  std::optional<Eigen::Index> knot_index(double t) const;

  bool contains(double s) const { return s >= 0.0 && s <= horizon(); }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.knots_.size() == b.knots_.size() && a.knots_ == b.knots_;
  }

 private:
  Eigen::VectorXd knots_;
};

enum class DomainKind { full_space, nonnegative_orthant };

/// The closed convex state space E: R^d or the nonnegative orthant.
struct DomainE {
  DomainKind kind = DomainKind::nonnegative_orthant;
  Eigen::Index dim = 1;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& y) const;
  bool contains(double y) const { return kind == DomainKind::full_space || y >= 0.0; }

  friend bool operator==(const DomainE&, const DomainE&) = default;
};

/// Piecewise-constant right-continuous path: value column k holds on
/// [t_k, t_{k+1}); column N is the value at T.
class CadlagPath {
 public:
  CadlagPath(TimeGrid grid, Eigen::MatrixXd values, DomainE domain = {});

  /// One-dimensional path from a list of values.
  static CadlagPath scalar(TimeGrid grid, const Eigen::VectorXd& values,
                           DomainE domain = {});

  const TimeGrid& grid() const { return grid_; }
  const DomainE& domain() const { return domain_; }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::Index dim() const { return values_.rows(); }
  Eigen::Index steps() const { return grid_.steps(); }

  /// Value column at knot index k.
  auto value(Eigen::Index k) const { return values_.col(k); }
  /// First component at knot k (convenience for d = 1).
  double spot(Eigen::Index k) const { return values_(0, k); }

  /// Right-continuous evaluation omega(s).
  Eigen::VectorXd at(double s) const;
  /// Left limit omega(t-), t in (0, T].
  Eigen::VectorXd left_limit(double t) const;

 private:
  TimeGrid grid_;
  Eigen::MatrixXd values_;
  DomainE domain_;
};

/// s -> omega(t ^ s).
CadlagPath stop(const CadlagPath& path, double t);

/// Equal to omega before t, frozen at omega(t-) from t on.
CadlagPath predictable_stop(const CadlagPath& path, double t);

/// omega on [0, t), constant y on [t, T]. t must be a knot.
CadlagPath splice(const CadlagPath& path, double t, const Eigen::VectorXd& y);
CadlagPath splice(const CadlagPath& path, double t, double y);

/// max over knots of the max-norm of value differences.
double sup_distance(const CadlagPath& a, const CadlagPath& b);

nlohmann::json to_json(const CadlagPath& path);
CadlagPath path_from_json(const nlohmann::json& j, DomainE domain = {});
std::string to_csv(const CadlagPath& path);

}  // namespace robusthedge
