#include "robusthedge/lp.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

using namespace robusthedge;

namespace {

// min v s.t. v + H (y - 2) >= (y - 1)_+ for y in {0, 4}, v and H free.
DenseLP<double> two_by_two() {
  DenseLP<double> lp;
  lp.reset(2);
  lp.c << 1.0, 0.0;
  lp.set_free(0);
  lp.set_free(1);
  lp.add_row(Eigen::Vector2d(1.0, -2.0), Sense::ge, 0.0);
  lp.add_row(Eigen::Vector2d(1.0, 2.0), Sense::ge, 3.0);
  return lp;
}

// Brute-force optimum over every vertex of {A x (senses) b, 0 <= x <= ub}.
double vertex_oracle(const DenseLP<double>& lp, double ub) {
  const Eigen::Index n = lp.variables();
  Eigen::MatrixXd rows(lp.constraints() + 2 * n, n);
  Eigen::VectorXd rhs(rows.rows());
  rows.topRows(lp.constraints()) = lp.A;
  rhs.head(lp.constraints()) = lp.b;
  for (Eigen::Index j = 0; j < n; ++j) {
    rows.row(lp.constraints() + 2 * j) = Eigen::RowVectorXd::Unit(n, j);
    rhs(lp.constraints() + 2 * j) = 0.0;
    rows.row(lp.constraints() + 2 * j + 1) = Eigen::RowVectorXd::Unit(n, j);
    rhs(lp.constraints() + 2 * j + 1) = ub;
  }
  const Eigen::Index total = rows.rows();
  double best = lp.objective == Objective::minimize ? std::numeric_limits<double>::infinity()
                                                    : -std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start, Eigen::Index depth) {
    if (depth == n) {
      Eigen::MatrixXd S(n, n);
      Eigen::VectorXd r(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        S.row(i) = rows.row(pick[static_cast<std::size_t>(i)]);
        r(i) = rhs(pick[static_cast<std::size_t>(i)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(r);
      if ((x.array() < -1e-9).any() || (x.array() > ub + 1e-9).any()) return;
      for (Eigen::Index i = 0; i < lp.constraints(); ++i) {
        const double ax = lp.A.row(i).dot(x);
        const auto s = lp.senses[static_cast<std::size_t>(i)];
        if ((s == Sense::le && ax > lp.b(i) + 1e-9) || (s == Sense::ge && ax < lp.b(i) - 1e-9) ||
            (s == Sense::eq && std::abs(ax - lp.b(i)) > 1e-9)) {
          return;
        }
      }
      const double v = lp.c.dot(x);
      best = lp.objective == Objective::minimize ? std::min(best, v) : std::max(best, v);
      return;
    }
    for (Eigen::Index i = start; i < total; ++i) {
      pick[static_cast<std::size_t>(depth)] = static_cast<int>(i);
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST(Simplex, TwoByTwoSuperhedge) {
  const auto r = solve(two_by_two());
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.value, 1.5, 1e-12);
  EXPECT_NEAR(r.x(1), 0.75, 1e-12);
  // Duals are the martingale weights 1/2 on y = 0 and on y = 4.
  EXPECT_NEAR(r.duals(0), 0.5, 1e-12);
  EXPECT_NEAR(r.duals(1), 0.5, 1e-12);
  EXPECT_NEAR(r.duals.dot(Eigen::Vector2d(0.0, 3.0)), r.value, 1e-12);
}

TEST(Simplex, ExactRationalMode) {
  const auto q = solve(to_rational(two_by_two()));
  ASSERT_TRUE(q.optimal());
  EXPECT_EQ(q.value, Rational(3, 2));
  EXPECT_EQ(q.x(1), Rational(3, 4));
  EXPECT_DOUBLE_EQ(solve_exact(two_by_two()).value, 1.5);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  DenseLP<double> lp;
  lp.reset(1);
  lp.c << 1.0;
  lp.add_row(Eigen::VectorXd::Constant(1, 1.0), Sense::le, -1.0);
  EXPECT_EQ(solve(lp).status, LpStatus::infeasible);
  DenseLP<double> up;
  up.reset(1);
  up.c << 1.0;
  up.objective = Objective::maximize;
  EXPECT_EQ(solve(up).status, LpStatus::unbounded);
  DenseLP<double> crossing;
  crossing.reset(1);
  crossing.c << 1.0;
  crossing.lower[0] = 2.0;
  crossing.upper[0] = 1.0;
  EXPECT_EQ(solve(crossing).status, LpStatus::infeasible);
}

TEST(Simplex, RedundantEqualityRows) {
  DenseLP<double> lp;
  lp.reset(2);
  lp.c << 1.0, 2.0;
  lp.add_row(Eigen::Vector2d(1.0, 1.0), Sense::eq, 1.0);
  lp.add_row(Eigen::Vector2d(2.0, 2.0), Sense::eq, 2.0);
  const auto r = solve(lp);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_EQ(r.redundant_rows.size(), 1U);
}

TEST(Simplex, DegenerateCycleProneInstance) {
  // Beale's example cycles under the textbook rule; Bland's rule terminates.
  DenseLP<double> lp;
  lp.reset(4);
  lp.c << -0.75, 150.0, -0.02, 6.0;
  Eigen::Vector4d r1(0.25, -60.0, -0.04, 9.0);
  Eigen::Vector4d r2(0.5, -90.0, -0.02, 3.0);
  Eigen::Vector4d r3(0.0, 0.0, 1.0, 0.0);
  lp.add_row(r1, Sense::le, 0.0);
  lp.add_row(r2, Sense::le, 0.0);
  lp.add_row(r3, Sense::le, 1.0);
  const auto r = solve(lp);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.value, -0.05, 1e-12);
}

TEST(Simplex, MatchesVertexEnumeration) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int trial = 0; trial < 60; ++trial) {
    DenseLP<double> lp;
    const Eigen::Index n = 3;
    lp.reset(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      lp.c(j) = std::round(4.0 * u(rng));
      lp.upper[static_cast<std::size_t>(j)] = 2.0;
    }
    lp.objective = trial % 2 == 0 ? Objective::minimize : Objective::maximize;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d row;
      for (Eigen::Index j = 0; j < n; ++j) row(j) = std::round(3.0 * u(rng));
      const auto sense = static_cast<Sense>(pick(rng));
      lp.add_row(row, sense == Sense::eq ? Sense::le : sense, std::round(2.0 * u(rng)));
    }
    const double oracle = vertex_oracle(lp, 2.0);
    const auto r = solve(lp);
    if (!std::isfinite(oracle)) {
      EXPECT_EQ(r.status, LpStatus::infeasible) << trial;
      continue;
    }
    ASSERT_TRUE(r.optimal()) << trial;
    EXPECT_NEAR(r.value, oracle, 1e-9) << trial;
    const auto q = solve(to_rational(lp));
    ASSERT_TRUE(q.optimal());
    EXPECT_NEAR(static_cast<double>(q.value), oracle, 1e-12) << trial;
  }
}

TEST(Simplex, IterateCallbackSeesFeasiblePhaseTwoPoints) {
  const auto lp = two_by_two();
  SimplexOptions<double> options;
  std::vector<double> objectives;
  options.on_iterate = [&](const SimplexIterate<double>& it) {
    if (it.phase == 2) objectives.push_back(it.objective);
  };
  const auto r = solve(lp, options);
  ASSERT_FALSE(objectives.empty());
  for (double v : objectives) EXPECT_GE(v, r.value - 1e-12);
}
