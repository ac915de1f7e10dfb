#include "robusthedge/cli.hpp"
#include "robusthedge/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace robusthedge;
using namespace robusthedge::testing;

TEST(Cli, PriceOfTheCallModel) {
  const auto dir = scratch("cli_price");
  const auto model = write_json(dir / "model.json", call_model());
  const auto payoff = write_json(dir / "payoff.json", call_payoff_json());
  const auto out = (dir / "out").string();
  ASSERT_EQ(run_cli({"price", "--model", model, "--payoff", payoff, "--out", out}), exit_ok);
  const auto price = read_json(dir / "out" / "price.json");
  EXPECT_NEAR(price["price"].get<double>(), 1.5, 1e-12);
  EXPECT_NEAR(price["concavified_price"].get<double>(), 1.5, 1e-12);
  EXPECT_TRUE(price["structure"]["passed"].get<bool>());
  const auto hash = price["config_hash"].get<std::string>();
  EXPECT_EQ(hash.size(), 16U);
  EXPECT_EQ(slurp(dir / "out" / "surface.csv").rfind("# config_hash=" + hash, 0), 0U);
  EXPECT_EQ(slurp(dir / "out" / "strategy.csv").rfind("# config_hash=" + hash, 0), 0U);
  const auto manifest = read_json(dir / "out" / "manifest.json");
  EXPECT_EQ(manifest["config_hash"], hash);
  EXPECT_TRUE(manifest["versions"].contains("eigen"));
}

TEST(Cli, ZeroPayoffPricesToZero) {
  const auto dir = scratch("cli_zero");
  const auto model = write_json(dir / "model.json", call_model());
  const auto payoff = write_json(dir / "payoff.json", {{"kernel", {{"name", "constant"}, {"value", 0}}}});
  ASSERT_EQ(run_cli({"price", "--model", model, "--payoff", payoff, "--out", (dir / "out").string()}), exit_ok);
  EXPECT_EQ(read_json(dir / "out" / "price.json")["price"].get<double>(), 0.0);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  const auto dir = scratch("cli_usage");
  const auto model = write_json(dir / "model.json", call_model());
  const auto payoff = write_json(dir / "payoff.json", call_payoff_json());
  const auto out = (dir / "out").string();
  EXPECT_EQ(run_cli({"verify-decomposition", "--model", model, "--payoff", payoff, "--out", out}), exit_usage);
  EXPECT_EQ(run_cli({"verify-duality", "--out", out}), exit_usage);
  EXPECT_EQ(run_cli({"price", "--model", model, "--out", out}), exit_usage);
  EXPECT_EQ(run_cli({"price", "--bogus"}), exit_usage);
  EXPECT_EQ(run_cli(std::vector<std::string>{}), exit_usage);
  auto strict = call_model();
  strict["colour"] = "blue";
  const auto bad = write_json(dir / "bad.json", strict);
  EXPECT_EQ(run_cli({"price", "--model", bad, "--payoff", payoff, "--out", out}), exit_usage);
  EXPECT_EQ(run_cli({"price", "--model", (dir / "missing.json").string(), "--payoff", payoff, "--out", out}),
            exit_usage);
}

TEST(Cli, ConcavifyChord) {
  const auto dir = scratch("cli_concavify");
  const auto payoff = write_json(dir / "payoff.json", {{"kernel", {{"name", "call"}, {"strike", 1}}}});
  ASSERT_EQ(run_cli({"concavify", "--grid", "0,1,2,3,4", "--payoff", payoff, "--out", (dir / "out").string()}),
            exit_ok);
  const auto csv = slurp(dir / "out" / "envelope.csv");
  EXPECT_NE(csv.find("\n2,1,1.5\n"), std::string::npos) << csv;
}

TEST(Cli, NegativeControlExitsWithOneAndWitnesses) {
  const auto dir = scratch("cli_negative");
  auto m = call_model(4);
  m["uniform"]["step"] = 0.5;
  const auto model = write_json(dir / "model.json", m);
  const auto out = (dir / "out").string();
  ASSERT_EQ(run_cli({"verify-decomposition", "--model", model, "--seed", "3", "--paths", "200", "--negative-control",
                     "--out", out}),
            exit_verification_failure);
  const auto csv = slurp(dir / "out" / "witnesses.csv");
  EXPECT_GT(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_FALSE(read_json(dir / "out" / "decomposition.json")["passed"].get<bool>());
}

TEST(Cli, VerifyDualityOnAModel) {
  const auto dir = scratch("cli_duality");
  const auto model = write_json(dir / "model.json", call_model());
  const auto payoff = write_json(dir / "payoff.json", call_payoff_json());
  ASSERT_EQ(run_cli({"verify-duality", "--model", model, "--payoff", payoff, "--out", (dir / "out").string()}),
            exit_ok);
  EXPECT_NEAR(read_json(dir / "out" / "duality.json")["primal"].get<double>(), 1.5, 1e-10);
}

TEST(Cli, CalcDerivativesAlongAPath) {
  const auto dir = scratch("cli_derivatives");
  const auto model = write_json(dir / "model.json", call_model());
  const auto payoff = write_json(dir / "payoff.json", call_payoff_json());
  ASSERT_EQ(run_cli({"calc-derivatives", "--model", model, "--payoff", payoff, "--path", "2,3,4", "--out",
                     (dir / "out").string()}),
            exit_ok);
  const auto csv = slurp(dir / "out" / "derivatives.csv");
  EXPECT_NE(csv.find("k,t,spot,value,horizontal"), std::string::npos);
  EXPECT_NE(csv.find("\n0,0,2,1.5,"), std::string::npos) << csv;
}

TEST(Cli, SamplingRunsAreByteIdentical) {
  const auto dir = scratch("cli_determinism");
  auto m = call_model(4);
  m["uniform"]["step"] = 0.5;
  const auto model = write_json(dir / "model.json", m);
  const auto payoff = write_json(dir / "payoff.json", call_payoff_json(4));
  for (const char* run : {"a", "b"}) {
    ASSERT_EQ(run_cli({"verify-decomposition", "--model", model, "--payoff", payoff, "--seed", "9", "--paths", "300",
                       "--threads", run[0] == 'a' ? "1" : "3", "--out", (dir / run).string()}),
              exit_ok);
  }
  for (const char* file : {"decomposition.json", "witnesses.csv", "manifest.json"}) {
    EXPECT_EQ(slurp(dir / "a" / file), slurp(dir / "b" / file)) << file;
  }
}
