#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "tlts/io.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / (std::string("tlts_cli_") +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(TLTS_CLI_PATH) + " --out-dir " + dir_.string() + " " + args +
                            " >" + (dir_ / "stdout.txt").string() + " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST_F(Cli, ArgumentErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("simulate --model foo --params '{}' --n 5 --out x.csv"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("simulate --model ma --params '{\"theta\":[-1]}' --n 5 --out x.csv"), 2);
  EXPECT_EQ(run("simulate --model garch --params '{\"alpha0\":0.2,\"alpha1\":0.6,\"beta1\":0.5}' --n 5 --out x.csv"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, IoErrorsExitFour) {
  EXPECT_EQ(run("fit-marginal --in " + (dir_ / "missing.csv").string() + " --out f.json"), 4);
  EXPECT_EQ(run("--config " + (dir_ / "missing.json").string() + " pipeline"), 4);
}

TEST_F(Cli, EstimationErrorsExitThree) {
  ASSERT_EQ(run("simulate --model ma --params '{\"theta\":[0.5]}' --n 50 --seed 1 --out s.csv"), 0);
  EXPECT_EQ(run("fit-marginal --in " + (dir_ / "s.csv").string() + " --out f.json"), 3);
}

TEST_F(Cli, SimulateIsDeterministic) {
  ASSERT_EQ(run("--seed 9 simulate --model logistic --params '{\"beta\":0.4}' --n 200 --out a.csv"), 0);
  ASSERT_EQ(run("--seed 9 simulate --model logistic --params '{\"beta\":0.4}' --n 200 --out b.csv"), 0);
  ASSERT_EQ(run("--seed 10 simulate --model logistic --params '{\"beta\":0.4}' --n 200 --out c.csv"), 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  EXPECT_NE(read("a.csv"), read("c.csv"));
  EXPECT_EQ(read("a.csv").rfind("value\n", 0), 0u);
}

TEST_F(Cli, EndToEndChain) {
  const std::string d = dir_.string() + "/";
  ASSERT_EQ(run("simulate --model ma --params '{\"theta\":[0.8,0.4],\"noise_scale\":1}' --n 20000 --seed 4 --out x.csv"), 0);
  ASSERT_EQ(run("preprocess --in " + d + "x.csv --scale frechet2_unit --out p.csv"), 0);
  ASSERT_EQ(run("tpdf --in " + d + "p.csv --max-lag 30 --radial-quantile 0.98 --out t.csv"), 0);
  EXPECT_EQ(read("t.csv").rfind("lag,sigma,n_pairs\n0,1,", 0), 0u);
  ASSERT_EQ(run("fit-ma --tpdf " + d + "t.csv --n-max 30 --q-max 5 --trunc-eps 0 --conv-tol 0.05 --conv-rows 5 --out m.json"), 0);
  const auto model = tlts::io::read_json(dir_ / "m.json");
  EXPECT_EQ(model["theta"].size(), 5u);
  EXPECT_EQ(model["nu_trace"].size(), 31u);
  ASSERT_EQ(run("predict --in " + d + "x.csv --model " + d + "m.json --window 10 --out pr.csv"), 0);
  EXPECT_EQ(read("pr.csv").rfind("index,x_hat,actual\n", 0), 0u);
  ASSERT_EQ(run("intervals --in " + d + "x.csv --tpdf " + d + "t.csv --window 10 --train-size 14000 --n-decomp 10 --seed 3 --out iv.csv"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "iv.json"));
  const auto side = tlts::io::read_json(dir_ / "iv.json");
  EXPECT_TRUE(side.contains("coverage"));
  EXPECT_TRUE(side.contains("joint_region_deg"));
  ASSERT_EQ(run("diagnose --in " + d + "x.csv --window 3 --bootstrap 20 --out dg.csv"), 0);
  EXPECT_EQ(read("dg.csv").rfind("statistic,window,quantile,value,std_err,n\n", 0), 0u);
  ASSERT_EQ(run("baseline-gaussian --in " + d + "x.csv --window 5 --train-size 14000 --out bg.csv"), 0);
  ASSERT_EQ(run("fit-marginal --in " + d + "x.csv --quantile 0.99 --out f.json"), 0);
  ASSERT_EQ(run("transform --in " + d + "x.csv --fit " + d + "f.json --out tr.csv"), 0);
  ASSERT_EQ(run("transform --in " + d + "tr.csv --fit " + d + "f.json --inverse --out back.csv"), 0);
  const auto x = tlts::io::read_series_csv(dir_ / "x.csv", tlts::ScaleTag::original);
  const auto back = tlts::io::read_series_csv(dir_ / "back.csv", tlts::ScaleTag::original);
  for (Eigen::Index i = 0; i < x.size(); i += 997) EXPECT_NEAR(back[i], x[i], 1e-10 * x[i]);
}

TEST_F(Cli, PipelineCommand) {
  tlts::io::Json cfg = tlts::io::Json::parse(R"({
    "schema_version": 1, "name": "cli", "seed": 3,
    "data": {"source": "simulate", "model": "ma", "params": {"theta": [0.5]}, "n": 10000},
    "marginal": {"method": "fixed"},
    "tpdf": {"max_lag": 20, "radial_quantile": 0.98},
    "innovations": {"n_max": 20, "trunc_eps": 0.0, "q_max": 3, "conv_tol": 0.05, "conv_rows": 5},
    "diagnostics": {"sum_window": 3, "bootstrap_resamples": 10, "compare_lags": 5}
  })");
  tlts::io::write_json(dir_ / "cfg.json", cfg);
  EXPECT_EQ(run("--config " + (dir_ / "cfg.json").string() + " pipeline"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "manifest.json"));
  cfg["bogus"] = true;
  tlts::io::write_json(dir_ / "bad.json", cfg);
  EXPECT_EQ(run("--config " + (dir_ / "bad.json").string() + " pipeline"), 2);
}

}  // namespace
