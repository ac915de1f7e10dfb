#include "robusthedge/quadrature.hpp"

#include "robusthedge/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace robusthedge {

QuadratureRule gauss_legendre(int order, double lo, double hi) {
  if (order < 1) throw DomainError("quadrature order must be positive");
  if (!(hi > lo)) throw DomainError("quadrature interval must be nonempty");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  QuadratureRule rule;
  rule.nodes = mid + half * solver.eigenvalues().array();
  rule.weights = (2.0 * half) * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace robusthedge
