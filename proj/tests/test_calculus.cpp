#include "robusthedge/calculus.hpp"
#include "robusthedge/errors.hpp"
#include "robusthedge/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace robusthedge;

namespace {

const TimeGrid grid = TimeGrid::uniform(2.0, 2);

CadlagPath path_at(double spot) { return CadlagPath::scalar(grid, Eigen::Vector3d(1.5, 1.0, spot)); }

Functional spot_functional(std::function<double(double)> f) {
  return [f](double t, const CadlagPath& p) { return f(p.at(t)(0)); };
}

Eigen::VectorXd vec(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST(Quadrature, GaussLegendreIntegratesPolynomials) {
  const auto rule = gauss_legendre(8, 0.0, 2.0);
  EXPECT_NEAR(rule.weights.sum(), 2.0, 1e-14);
  double cubic = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) cubic += rule.weights(i) * std::pow(rule.nodes(i), 15);
  EXPECT_NEAR(cubic, std::pow(2.0, 16) / 16.0, 1e-8);
  EXPECT_THROW(gauss_legendre(0), DomainError);
}

TEST(Mollifier, MassAndMomentsAreNearIdentity) {
  for (auto placement : {KernelPlacement::centered, KernelPlacement::right_sided}) {
    const MollifierKernel k({0.2, 32, placement}, 1);
    EXPECT_NEAR(k.quadrature_mass(), 1.0, 1e-3);
    EXPECT_NEAR(k.moment_matrix()(0, 0), 1.0, 1e-3);
  }
  const MollifierKernel right({0.2, 32, KernelPlacement::right_sided}, 1);
  EXPECT_GE(right.support_lower(), 0.0);
  EXPECT_LE(right.support_upper(), 1.0);
  EXPECT_THROW(MollifierKernel({0.0, 32, KernelPlacement::centered}, 1), DomainError);
}

TEST(KernelConfig, StrictJson) {
  const auto c = kernel_config_from_json({{"eps", 0.1}, {"order", 16}, {"placement", "centered"}});
  EXPECT_EQ(c.order, 16);
  EXPECT_EQ(c.placement, KernelPlacement::centered);
  EXPECT_THROW(kernel_config_from_json({{"epsilon", 0.1}}), DomainError);
  EXPECT_THROW(kernel_config_from_json({{"placement", "left"}}), DomainError);
}

TEST(Derivatives, HorizontalOfFrozenPath) {
  const Functional f = [](double t, const CadlagPath& p) { return t * p.at(t)(0); };
  // The stopped path is constant after t = 1, so the quotient is the frozen spot.
  EXPECT_NEAR(horizontal_derivative(f, 1.0, path_at(3.0), 0.5), 1.0, 1e-14);
  EXPECT_THROW(horizontal_derivative(f, 2.0, path_at(3.0), 0.5), DomainError);
}

TEST(Derivatives, VerticalCentralAndOneSided) {
  const auto square = spot_functional([](double x) { return x * x; });
  const auto d = vertical_derivative(square, 1.0, path_at(3.0), 1e-4);
  EXPECT_NEAR(d.gradient(0), 2.0, 1e-8);
  EXPECT_TRUE(d.differentiable);
  // At the boundary of R_+ only the forward quotient is admissible.
  const auto edge = vertical_derivative(square, 1.0, CadlagPath::scalar(grid, Eigen::Vector3d(1, 0, 0)), 1e-4);
  EXPECT_NEAR(edge.gradient(0), 1e-4, 1e-10);
  EXPECT_TRUE(std::isnan(edge.left(0)));
  const auto kink = spot_functional([](double x) { return std::min(x, 2.0 - x); });
  EXPECT_FALSE(vertical_derivative(kink, 2.0, path_at(1.0), 1e-4).differentiable);
}

TEST(Derivatives, DirectionalUpperOfKink) {
  const auto kink = spot_functional([](double x) { return std::min(x, 2.0 - x); });
  const std::vector<double> ladder{0.2, 0.1, 0.05};
  EXPECT_NEAR(directional_upper_derivative(kink, 2.0, path_at(1.0), vec(1.0), ladder).value, -1.0, 1e-12);
  EXPECT_NEAR(directional_upper_derivative(kink, 2.0, path_at(1.0), vec(-1.0), ladder).value, -1.0, 1e-12);
  const auto convex = spot_functional([](double x) { return x * x; });
  EXPECT_THROW(directional_upper_derivative(convex, 2.0, path_at(1.0), vec(1.0), ladder), ConcavityViolation);
  EXPECT_THROW(directional_upper_derivative(kink, 2.0, path_at(1.0), vec(1.0), {0.1, 0.2}), DomainError);
}

TEST(Derivatives, StrategyKernelOnAffineSectionIsExact) {
  const auto affine = spot_functional([](double x) { return 3.0 * x - 1.0; });
  const MollifierKernel k;
  EXPECT_NEAR(strategy_kernel(affine, 2.0, path_at(1.0), k)(0), 3.0, 1e-12);
  EXPECT_NEAR(mollified_gradient(affine, 2.0, path_at(1.0), k)(0), 3.0, 1e-12);
}

TEST(Derivatives, MollifiedValueOfConstant) {
  const auto c = spot_functional([](double) { return 4.0; });
  EXPECT_NEAR(mollified_value(c, 2.0, path_at(1.0), MollifierKernel()), 4.0, 1e-12);
}

TEST(Derivatives, SuperdifferentialCheck) {
  const auto kink = spot_functional([](double x) { return std::min(x, 2.0 - x); });
  Eigen::MatrixXd probes(1, 5);
  probes << 0.0, 0.5, 1.0, 1.5, 3.0;
  EXPECT_TRUE(superdifferential_check(kink, 2.0, path_at(1.0), vec(0.3), probes).passed);
  EXPECT_FALSE(superdifferential_check(kink, 2.0, path_at(1.0), vec(1.5), probes).passed);
}

TEST(Derivatives, DupireConcavityAndAnticipation) {
  const auto concave = spot_functional([](double x) { return -(x - 2.0) * (x - 2.0); });
  const auto convex = spot_functional([](double x) { return x * x; });
  const std::vector<double> thetas{0.25, 0.5, 0.75};
  EXPECT_TRUE(dupire_concavity_check(concave, 2.0, path_at(0.0), path_at(4.0), thetas).passed);
  EXPECT_FALSE(dupire_concavity_check(convex, 2.0, path_at(0.0), path_at(4.0), thetas).passed);
  const Functional peek = [](double, const CadlagPath& p) { return p.spot(p.steps()); };
  EXPECT_FALSE(is_non_anticipative(peek, 1.0, path_at(3.0)));
  EXPECT_TRUE(is_non_anticipative(concave, 1.0, path_at(3.0)));
}
