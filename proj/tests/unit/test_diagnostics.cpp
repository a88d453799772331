#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tlts/diagnostics.hpp"
#include "tlts/errors.hpp"
#include "tlts/rng.hpp"
#include "tlts/simulators.hpp"
#include "tlts/stats.hpp"

namespace {

TEST(RunLengths, Alternating) {
  Eigen::VectorXd v(1000);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = double(i % 2);
  const auto r = tlts::run_lengths(tlts::Series(v, tlts::ScaleTag::original), 0.5);
  EXPECT_EQ(r.mean_run, 1.0);
  EXPECT_EQ(r.std_err, 0.0);
  EXPECT_EQ(r.n_runs, 500u);
}

TEST(RunLengths, KnownRuns) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(40);
  v.segment(2, 3).setConstant(5.0);
  v.segment(10, 1).setConstant(5.0);
  v.tail(2).setConstant(5.0);
  const auto r = tlts::run_lengths(tlts::Series(v, tlts::ScaleTag::original), 0.8);
  EXPECT_EQ(r.n_runs, 3u);
  EXPECT_DOUBLE_EQ(r.mean_run, 2.0);
  EXPECT_DOUBLE_EQ(r.std_err, 1.0 / std::sqrt(3.0));
}

TEST(RunLengths, IndependentGeometric) {
  const auto z = tlts::frechet_noise(100000, 1.0, 101);
  const auto r = tlts::run_lengths(z, 0.95);
  EXPECT_NEAR(r.mean_run, 1.0 / 0.95, 0.03);
  EXPECT_GE(r.std_err, 0.0);
}

TEST(RunLengths, Errors) {
  const tlts::Series c(Eigen::VectorXd::Ones(100), tlts::ScaleTag::original);
  EXPECT_THROW(tlts::run_lengths(c, 0.9), tlts::EstimationError);
  EXPECT_THROW(tlts::run_lengths(c, 0.4), tlts::ArgumentError);
  EXPECT_THROW(tlts::run_lengths(c, 1.0), tlts::ArgumentError);
}

TEST(SumQuantiles, WindowOneIsMarginal) {
  const auto z = tlts::frechet_noise(5000, 1.0, 102);
  const std::vector<double> qs{0.5, 0.9, 0.99};
  const auto s = tlts::sum_quantiles(z, 1, qs, 7, 50);
  ASSERT_EQ(s.size(), 3u);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    EXPECT_EQ(s[i].value, tlts::empirical_quantile(z.values(), qs[i]));
    EXPECT_EQ(s[i].window, 1);
  }
}

TEST(SumQuantiles, MonotoneWithPositiveErrors) {
  const auto x = tlts::simulate_garch11(0.2, 0.5, 0.3, 30000, 103);
  const auto s = tlts::sum_quantiles(x, 12, {0.95, 0.98, 0.99, 0.995, 0.999}, 8, 100);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GE(s[i].value, s[i - 1].value);
  for (const auto& r : s) EXPECT_GT(r.std_err, 0.0);
}

TEST(SumQuantiles, Deterministic) {
  const auto x = tlts::frechet_noise(3000, 1.0, 104);
  const auto a = tlts::sum_quantiles(x, 3, {0.9, 0.99}, 11, 60);
  const auto b = tlts::sum_quantiles(x, 3, {0.9, 0.99}, 11, 60);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].std_err, b[i].std_err);
}

TEST(SumQuantiles, MonteCarloOracle) {
  const auto z = tlts::frechet_noise(100000, 1.0, 105);
  const double est = tlts::sum_quantiles(z, 3, {0.99}, 12, 20).front().value;
  tlts::Rng rng(106);
  std::vector<double> sums(10000000);
  for (auto& s : sums) {
    s = 0.0;
    for (int k = 0; k < 3; ++k) s += 1.0 / std::sqrt(-std::log(rng.uniform()));
  }
  const auto k = static_cast<std::ptrdiff_t>(0.99 * double(sums.size() - 1));
  std::nth_element(sums.begin(), sums.begin() + k, sums.end());
  const double oracle = sums[static_cast<std::size_t>(k)];
  EXPECT_NEAR(est, oracle, 0.05 * oracle);
}

TEST(SumQuantiles, Errors) {
  const auto z = tlts::frechet_noise(100, 1.0, 107);
  EXPECT_THROW(tlts::sum_quantiles(z, 0, {0.5}, 1), tlts::ArgumentError);
  EXPECT_THROW(tlts::sum_quantiles(z, 10, {0.5}, 1), tlts::ArgumentError);
  EXPECT_THROW(tlts::sum_quantiles(z, 2, {1.5}, 1), tlts::ArgumentError);
}

TEST(Coverage, TrivialCases) {
  tlts::IntervalSet all;
  tlts::IntervalSet none;
  for (int i = 0; i < 10; ++i) {
    all.push_back({i, 1.0, 0.0, 1e300, double(i)});
    none.push_back({i, 1.0, 2.0, 2.0, 3.0});
  }
  EXPECT_EQ(tlts::evaluate_coverage(all).coverage, 1.0);
  EXPECT_EQ(tlts::evaluate_coverage(all).n, 10u);
  EXPECT_EQ(tlts::evaluate_coverage(none).coverage, 0.0);
}

TEST(Coverage, Errors) {
  EXPECT_THROW(tlts::evaluate_coverage({}), tlts::ArgumentError);
  tlts::IntervalSet missing{{0, 1.0, 0.0, 2.0, std::nullopt}};
  EXPECT_THROW(tlts::evaluate_coverage(missing), tlts::ArgumentError);
}

}  // namespace
