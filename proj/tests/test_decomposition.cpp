#include "robusthedge/decomposition.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace robusthedge;

namespace {

PayoffSpec payoff_of(PayoffKernel kernel, Eigen::Index segments) {
  return PayoffSpec{std::move(kernel), SignedMeasureOnGrid::zero(segments), 1.0, 1.0};
}

}  // namespace

TEST(PathwiseIntegral, TrivialCases) {
  const auto p = CadlagPath::scalar(TimeGrid::uniform(3.0, 3), Eigen::Vector4d(2, 3, 1, 4));
  const auto zero = pathwise_integral(std::vector<double>{0, 0, 0}, p);
  for (double g : zero) EXPECT_EQ(g, 0.0);
  const auto tele = pathwise_integral(std::vector<double>{1, 1, 1}, p);
  for (Eigen::Index k = 0; k <= 3; ++k) EXPECT_DOUBLE_EQ(tele[static_cast<std::size_t>(k)], p.spot(k) - 2.0);
  EXPECT_ANY_THROW(pathwise_integral(std::vector<double>{1, 1}, p));
}

TEST(Residual, LinearPayoffReplicatesExactly) {
  const auto lattice = StateLattice::uniform(0.0, 4.0, 0.5, 4, 2.0);
  const auto surface = backward_induction(lattice, payoff_of(kernels::Linear{0.5, 1.0}, 4));
  const auto paths = sample_paths(lattice, make_policy(default_laws()[2]), 50, 4);
  for (const auto& p : paths) {
    const auto g = pathwise_integral(surface, p);
    EXPECT_NEAR(g.back(), 0.5 * (p.spot(4) - 2.0), 1e-9);
    for (double c : residual_series(surface, p)) EXPECT_NEAR(c, 0.0, 1e-9);
  }
}

TEST(Residual, ConstantPathIsNondecreasing) {
  const auto lattice = StateLattice::uniform(0.0, 4.0, 1.0, 3, 2.0);
  const auto surface = backward_induction(lattice, payoff_of(kernels::Call{1.0}, 3));
  const auto flat = CadlagPath::scalar(lattice.grid(), Eigen::Vector4d(2, 2, 2, 2));
  const auto c = residual_series(surface, flat);
  EXPECT_EQ(c[0], 0.0);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) EXPECT_GE(c[k + 1] - c[k], -1e-12);
  EXPECT_NEAR(c.back(), 0.5, 1e-9);
}

TEST(Residual, DualOptimalMeasureHasZeroMeanResidual) {
  const auto lattice = StateLattice::uniform(0.0, 4.0, 1.0, 2, 2.0);
  const auto payoff = payoff_of(kernels::Call{1.0}, 2);
  const auto surface = backward_induction(lattice, payoff);
  const PathTree tree(lattice);
  const auto report = verify_strong_duality(tree, payoff);
  ASSERT_TRUE(report.passed());
  EXPECT_NEAR(expected_terminal_residual(surface, tree, report.dual_probs), 0.0, 1e-9);
}

TEST(Supergradient, DpHedgePassesAndShiftedHedgeFails) {
  const auto lattice = StateLattice::uniform(0.0, 4.0, 1.0, 3, 2.0);
  const auto surface = backward_induction(lattice, payoff_of(kernels::Call{1.0}, 3));
  const auto paths = sample_paths(lattice, make_policy(default_laws()[0]), 40, 8);
  bool shifted_fails = false;
  for (const auto& p : paths) {
    EXPECT_TRUE(verify_supergradient_along_path(surface, p).passed);
    shifted_fails |= !verify_supergradient_along_path(surface, p, 32, 0.5).passed;
  }
  EXPECT_TRUE(shifted_fails);
}

TEST(Supergradient, LinearValueAcceptsItsSlope) {
  const auto lattice = StateLattice::uniform(0.0, 4.0, 1.0, 2, 2.0);
  const auto surface = backward_induction(lattice, payoff_of(kernels::Linear{1.25, 0.0}, 2));
  const auto p = CadlagPath::scalar(lattice.grid(), Eigen::Vector3d(2, 4, 0));
  EXPECT_TRUE(verify_supergradient_along_path(surface, p, 17).passed);
}

TEST(Decomposition, CallModelPassesUnderEveryLaw) {
  const auto lattice = StateLattice::uniform(0.0, 4.0, 0.5, 4, 2.0);
  const auto surface = backward_induction(lattice, payoff_of(kernels::Call{1.0}, 4));
  DecompositionOptions options;
  options.paths = 500;
  options.seed = 12;
  options.threads = 3;
  const auto report = verify_decomposition(surface, default_laws(), options);
  EXPECT_TRUE(report.passed());
  EXPECT_TRUE(report.c0_exact());
  EXPECT_EQ(report.laws.size(), 4U);
  options.threads = 1;
  EXPECT_EQ(to_json(report).dump(), to_json(verify_decomposition(surface, default_laws(), options)).dump());
}

TEST(Decomposition, FrozenConvexValueProducesReplayableWitnesses) {
  const auto lattice = StateLattice::uniform(0.0, 4.0, 0.5, 4, 2.0);
  DpConfig cfg;
  cfg.mode = DpMode::frozen;
  const auto surface = backward_induction(lattice, payoff_of(kernels::Power{2.0, 1.0}, 4), cfg);
  DecompositionOptions options;
  options.paths = 300;
  options.seed = 5;
  const auto laws = default_laws();
  const auto report = verify_decomposition(surface, laws, options);
  EXPECT_FALSE(report.passed());
  EXPECT_GT(report.violations(), 0U);
  std::size_t replayed = 0;
  for (std::size_t l = 0; l < laws.size(); ++l) {
    for (const auto i : report.laws[l].witnesses) {
      const auto c = residual_series(surface, sample_path(lattice, make_policy(laws[l]), report.laws[l].law_seed, i));
      double min_inc = 0.0;
      for (std::size_t k = 0; k + 1 < c.size(); ++k) min_inc = std::min(min_inc, c[k + 1] - c[k]);
      const bool bad_increment = min_inc < -report.tolerance;
      // Nine probes land exactly on the nodes of each slice.
      const auto path = sample_path(lattice, make_policy(laws[l]), report.laws[l].law_seed, i);
      const bool bad_gradient = !verify_supergradient_along_path(surface, path, 9).passed;
      EXPECT_TRUE(bad_increment || bad_gradient);
      ++replayed;
    }
  }
  EXPECT_GT(replayed, 0U);
  std::ostringstream csv;
  write_witnesses_csv(csv, surface, laws, report);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "law,path,k,t,spot,V,G,C,H");
}
