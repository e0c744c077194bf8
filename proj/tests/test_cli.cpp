#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "requ_gap/requ_gap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using requ_gap::cli::run_cli;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
  [[nodiscard]] json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream o, e;
  Run r;
  r.code = run_cli(args, o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "requ_gap_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, BuildHatWritesNetworkAndPasses) {
  const auto out = scratch("hat.json");
  const auto r = run({"build-hat", "--out", out.string(), "--param", "n=1", "--param", "L=5", "--param", "C=1",
                      "--param", "M=1", "--param", "d=1", "--param", "y=0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = r.doc();
  EXPECT_TRUE(doc["pass"].get<bool>());
  EXPECT_LE(doc["result"]["weight_count"].get<int>(), 51);
  EXPECT_LE(doc["result"]["max_rel_err"].get<double>(), 1e-9);
  // defaults are recorded in the envelope
  EXPECT_EQ(doc["params"]["points"], 10000);
  const auto net = requ_gap::deserialize(slurp(out));
  EXPECT_EQ(net.depth(), 5u);
  const std::vector<double> x{0.5};
  EXPECT_NEAR(requ_gap::realize_scalar(net, x), 0.25, 1e-15);
}

TEST(Cli, BuildHatPreconditionsNameTheConstraint) {
  const auto out = scratch("bad.json").string();
  auto r = run({"build-hat", "--out", out, "--param", "L=4"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("L >= 5"), std::string::npos) << r.err;
  r = run({"build-hat", "--out", out, "--param", "C=2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("C^8 <= c(n)"), std::string::npos) << r.err;
}

TEST(Cli, UnknownKeysAndBadFlagsRejected) {
  auto r = run({"build-hat", "--out", scratch("x.json").string(), "--param", "bogus=1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
  r = run({"rates", "--param", "policy.nope=1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("policy.nope"), std::string::npos);
  r = run({"rates", "--seed", "3"});
  EXPECT_EQ(r.code, 2);
  r = run({"no-such-command"});
  EXPECT_EQ(r.code, 2);
  r = run({"hardness", "--out", scratch("h.csv").string(), "--format", "xml"});
  EXPECT_EQ(r.code, 2);
  const auto cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"alpha": 1, "extra": 2})";
  r = run({"rates", "--config", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("extra"), std::string::npos);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const auto cfg = scratch("rates.json");
  std::ofstream(cfg) << R"({"alpha": 2, "d": 3, "policy": {"depth_cap": 6}})";
  const auto r = run({"rates", "--config", cfg.string(), "--param", "d=1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = r.doc();
  EXPECT_EQ(doc["params"]["d"], 1);
  EXPECT_EQ(doc["params"]["alpha"], 2);
  EXPECT_DOUBLE_EQ(doc["result"]["gamma"].get<double>(), 31.5);
}

TEST(Cli, RatesExamples) {
  auto r = run({"rates"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto res = r.doc()["result"];
  EXPECT_EQ(res["gamma"].get<double>(), 15.5);
  EXPECT_NEAR(res["lower"].get<double>(), 0.0606060606, 1e-9);
  EXPECT_NEAR(res["upper"].get<double>(), 2.7234042553, 1e-9);

  r = run({"rates", "--param", "policy.depth_cap=null", "--param", "policy.depth_per_doubling=1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(r.doc()["result"]["degenerate"].get<bool>());

  r = run({"rates", "--param", "policy.rows=[[1,5,1],[10,5,10],[100,5,100]]", "--param", "n_max=1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.doc()["result"]["method"], "numeric");

  r = run({"rates", "--param", "policy.rows=[[1,5,1]]", "--param", "method=closed_form"});
  EXPECT_EQ(r.code, 2);

  r = run({"rates", "--param", "quantity=radius", "--param", "j=3"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.doc()["result"]["value"], 128.0);
}

TEST(Cli, LipschitzExamples) {
  auto r = run({"lipschitz"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.doc()["result"]["pass"].get<bool>());

  r = run({"lipschitz", "--param", "net=affine", "--param", "bound_L=1", "--param", "norm=l1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.doc()["result"]["empirical"].get<double>(), 2.0, 1e-9);

  r = run({"lipschitz", "--param", "bound_L=12"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = r.doc()["result"];
  EXPECT_TRUE(res["overflow"].get<bool>());
  EXPECT_TRUE(res["bound"].is_null());
  EXPECT_TRUE(std::isfinite(res["bound_log2"].get<double>()));
}

TEST(Cli, LipschitzReadsNetworkFiles) {
  const auto out = scratch("hat2.json");
  ASSERT_EQ(run({"build-hat", "--out", out.string(), "--param", "points=100"}).code, 0);
  const auto r = run({"lipschitz", "--param", "net=file", "--param", "network=" + out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto bad = scratch("broken.json");
  std::ofstream(bad) << "{\"layers\": [}";
  EXPECT_EQ(run({"lipschitz", "--param", "net=file", "--param", "network=" + bad.string()}).code, 2);
}

TEST(Cli, HardnessDefaultSweepPasses) {
  const auto out = scratch("hardness.csv");
  const auto r = run({"hardness", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = r.doc();
  EXPECT_EQ(doc["params"]["gamma"], 15.0);
  EXPECT_EQ(doc["params"]["m_list"], json({4, 16, 64, 256}));
  const auto csv = slurp(out);
  EXPECT_EQ(csv.rfind("m,measured_avg_error,lower_bound,unseen_count,amplitude,pass\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  // byte-identical rerun
  ASSERT_EQ(run({"hardness", "--out", out.string()}).code, 0);
  EXPECT_EQ(slurp(out), csv);
}

TEST(Cli, HardnessOverrideAndMissingOut) {
  const auto out = scratch("hardness.json");
  const auto r = run({"hardness", "--out", out.string(), "--format", "json", "--param", "kappa1_override=0.001",
                      "--m-list", "4,16", "--grid-res", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto file = json::parse(slurp(out));
  ASSERT_EQ(file["rows"].size(), 2u);
  EXPECT_TRUE(file["rows"][0].contains("lower_bound"));
  EXPECT_TRUE(file["rows"][0].contains("lower_bound_override"));
  EXPECT_EQ(file["kappa1_override"], 0.001);
  EXPECT_GT(file["kappa1"].get<double>(), 0.0);

  // checked before any parameter is looked at
  const auto miss = run({"hardness", "--param", "bogus=1"});
  EXPECT_EQ(miss.code, 2);
  EXPECT_NE(miss.err.find("--out"), std::string::npos);
  EXPECT_EQ(run({"hardness", "--out", out.string(), "--m-list", "16,4"}).code, 2);
  EXPECT_EQ(run({"hardness", "--out", out.string(), "--m-list", "4,x"}).code, 2);
}

TEST(Cli, McHardnessIsReproducible) {
  const auto a = scratch("mc_a.csv"), b = scratch("mc_b.csv");
  const auto ra = run({"mc-hardness", "--out", a.string(), "--m-list", "4,16", "--seed", "11", "--param", "draws=30"});
  ASSERT_EQ(ra.code, 0) << ra.err;
  EXPECT_EQ(ra.doc()["result"]["seed"], 11);
  ASSERT_EQ(run({"mc-hardness", "--out", b.string(), "--m-list", "4,16", "--seed", "11"}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(run({"mc-hardness", "--out", a.string(), "--param", "draws=5"}).code, 2);
  EXPECT_EQ(run({"mc-hardness", "--out", a.string(), "--m-list", "4", "--param", "algorithm=thinned"}).code, 0);
}

TEST(Cli, UpperBoundAndSumCheck) {
  auto r = run({"upper-bound", "--m-list", "16,64,256"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(r.doc()["result"]["fitted_exponent"].get<double>(), -1.0 / 16.5 + 0.1);
  r = run({"sum-check", "--param", "trials=5", "--param", "points=100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(r.doc()["result"]["worst_weight_ratio"].get<double>(), 9.0);
}

TEST(Cli, VerifyHatBranches) {
  auto r = run({"verify-hat", "--param", "gamma=15"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.doc()["result"]["branch2_checked"].get<bool>());
  r = run({"verify-hat", "--param", "gamma=15", "--param", "M=1.0289", "--param", "amplitude_factor=10"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.doc()["result"]["branch1_pass"].get<bool>());
  r = run({"verify-hat", "--param", "gamma=15.5"});
  EXPECT_EQ(r.code, 2);
}
