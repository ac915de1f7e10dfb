#include "robusthedge/errors.hpp"
#include "robusthedge/path.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace robusthedge;

namespace {

CadlagPath path123() { return CadlagPath::scalar(TimeGrid::uniform(2.0, 2), Eigen::Vector3d(1, 2, 3)); }

std::vector<double> values_of(const CadlagPath& p) {
  return {p.values().data(), p.values().data() + p.values().size()};
}

}  // namespace

TEST(TimeGrid, RejectsBadKnots) {
  EXPECT_THROW(TimeGrid(Eigen::Vector3d(0, 1, 1)), DomainError);
  EXPECT_THROW(TimeGrid(Eigen::Vector2d(0.5, 1)), DomainError);
  EXPECT_THROW(TimeGrid(Eigen::VectorXd::Zero(1)), DomainError);
}

TEST(TimeGrid, SegmentsAndKnots) {
  const auto g = TimeGrid::uniform(2.0, 4);
  EXPECT_EQ(g.steps(), 4);
  EXPECT_DOUBLE_EQ(g.horizon(), 2.0);
  EXPECT_EQ(g.segment(0.0), 0);
  EXPECT_EQ(g.segment(0.6), 1);
  EXPECT_EQ(g.segment(2.0), 4);
  EXPECT_EQ(g.knot_index(1.5).value(), 3);
  EXPECT_FALSE(g.knot_index(1.2).has_value());
}

TEST(CadlagPath, RightContinuousEvaluation) {
  const auto p = path123();
  EXPECT_DOUBLE_EQ(p.at(0.5)(0), 1.0);
  EXPECT_DOUBLE_EQ(p.at(1.0)(0), 2.0);
  EXPECT_DOUBLE_EQ(p.at(2.0)(0), 3.0);
  EXPECT_DOUBLE_EQ(p.left_limit(1.0)(0), 1.0);
  EXPECT_THROW(CadlagPath::scalar(TimeGrid::uniform(1.0, 1), Eigen::Vector2d(1, -1)), DomainError);
  EXPECT_NO_THROW(CadlagPath::scalar(TimeGrid::uniform(1.0, 1), Eigen::Vector2d(1, -1), {DomainKind::full_space, 1}));
}

TEST(Stop, Examples) {
  const auto p = path123();
  EXPECT_EQ(values_of(stop(p, 1.0)), (std::vector<double>{1, 2, 2}));
  EXPECT_EQ(values_of(stop(p, 2.0)), values_of(p));
  EXPECT_EQ(values_of(stop(p, 0.0)), (std::vector<double>{1, 1, 1}));
  EXPECT_THROW(stop(p, 2.5), DomainError);
}

TEST(PredictableStop, Examples) {
  const auto p = path123();
  EXPECT_EQ(values_of(predictable_stop(p, 1.0)), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(values_of(predictable_stop(p, 1.5)), values_of(stop(p, 1.5)));
  const auto flat = CadlagPath::scalar(TimeGrid::uniform(2.0, 2), Eigen::Vector3d(4, 4, 4));
  EXPECT_EQ(values_of(predictable_stop(flat, 1.0)), values_of(flat));
  EXPECT_THROW(predictable_stop(p, 0.0), DomainError);
}

TEST(Splice, Examples) {
  const auto p = path123();
  EXPECT_EQ(values_of(splice(p, 1.0, 5.0)), (std::vector<double>{1, 5, 5}));
  EXPECT_EQ(values_of(splice(p, 0.0, 7.0)), (std::vector<double>{7, 7, 7}));
  const auto q = CadlagPath::scalar(TimeGrid::uniform(2.0, 2), Eigen::Vector3d(1, 2, 2));
  EXPECT_EQ(values_of(splice(q, 1.0, 2.0)), values_of(stop(q, 1.0)));
  EXPECT_THROW(splice(p, 1.0, -1.0), DomainError);
  EXPECT_THROW(splice(p, 0.5, 1.0), DomainError);
}

TEST(SupDistance, Examples) {
  const auto p = path123();
  const auto q = CadlagPath::scalar(TimeGrid::uniform(2.0, 2), Eigen::Vector3d(1, 2, 5));
  EXPECT_DOUBLE_EQ(sup_distance(p, p), 0.0);
  EXPECT_DOUBLE_EQ(sup_distance(p, q), 2.0);
  EXPECT_DOUBLE_EQ(sup_distance(q, p), 2.0);
  const auto other = CadlagPath::scalar(TimeGrid::uniform(3.0, 2), Eigen::Vector3d(1, 2, 5));
  EXPECT_THROW(sup_distance(p, other), DomainError);
}

TEST(PathProperties, RandomStopSpliceAndTriangle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  const auto grid = TimeGrid::uniform(1.0, 6);
  auto random_path = [&] {
    Eigen::VectorXd v(7);
    for (int i = 0; i < 7; ++i) v(i) = u(rng);
    return CadlagPath::scalar(grid, v);
  };
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_path();
    const auto b = random_path();
    const auto c = random_path();
    EXPECT_LE(sup_distance(a, c), sup_distance(a, b) + sup_distance(b, c) + 1e-15);
    for (int i = 0; i <= 6; ++i) {
      for (int j = 0; j <= 6; ++j) {
        const double s = grid[i];
        const double t = grid[j];
        EXPECT_EQ(values_of(stop(stop(a, t), s)), values_of(stop(a, std::min(s, t))));
      }
      const double t = grid[i];
      const auto spliced = splice(a, t, a.at(t));
      for (int k = 0; k <= 6; ++k) {
        EXPECT_DOUBLE_EQ(spliced.spot(k), k < i ? a.spot(k) : stop(a, t).spot(k));
      }
    }
  }
}

TEST(PathIo, JsonRoundTripAndCsv) {
  const auto p = path123();
  const auto j = to_json(p);
  const auto back = path_from_json(j);
  EXPECT_EQ(values_of(back), values_of(p));
  EXPECT_TRUE(back.grid() == p.grid());
  auto bad = j;
  bad["extra"] = 1;
  EXPECT_THROW(path_from_json(bad), DomainError);
  const auto csv = to_csv(p);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,value0");
}
