#pragma once

#include <Eigen/Dense>

namespace robusthedge {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Gauss-Legendre rule of the given order on [lo, hi] (Golub-Welsch).
QuadratureRule gauss_legendre(int order, double lo = -1.0, double hi = 1.0);

}  // namespace robusthedge
