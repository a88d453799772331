#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "tlts/errors.hpp"
#include "tlts/simulators.hpp"
#include "tlts/tail_estimation.hpp"

namespace {

tlts::Series pareto_grid(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::pow(double(i + 1) / double(n), -0.5);
  return tlts::Series(v, tlts::ScaleTag::original);
}

tlts::Series scaled(const tlts::Series& s, double f) {
  return tlts::Series(s.values() * f, s.scale());
}

TEST(Hill, ParetoGrid) {
  EXPECT_NEAR(tlts::hill_estimator(pareto_grid(10000), 0.9), 2.0, 0.05);
}

TEST(Hill, FrechetSample) {
  const auto z = tlts::frechet_noise(100000, 1.0, 41);
  const double a = tlts::hill_estimator(z, 0.99);
  EXPECT_GE(a, 1.85);
  EXPECT_LE(a, 2.15);
}

TEST(Hill, ScaleInvariant) {
  const auto z = tlts::frechet_noise(20000, 1.0, 42);
  const double a = tlts::hill_estimator(z, 0.98);
  EXPECT_EQ(tlts::hill_estimator(scaled(z, 4.0), 0.98), a);
  EXPECT_NEAR(tlts::hill_estimator(scaled(z, 3.7), 0.98), a, 1e-12 * a);
}

TEST(Hill, TooFewExceedances) {
  EXPECT_THROW(tlts::hill_estimator(pareto_grid(1000), 0.99), tlts::EstimationError);
  EXPECT_THROW(tlts::hill_estimator(pareto_grid(50), 0.5), tlts::EstimationError);
  EXPECT_THROW(tlts::hill_estimator(pareto_grid(1000), 1.0), tlts::ArgumentError);
}

TEST(Scale, ParetoGrid) {
  const auto x = pareto_grid(10000);
  EXPECT_NEAR(tlts::scale_estimator(x, tlts::hill_estimator(x, 0.9), 0.9), 1.0, 0.05);
}

TEST(Scale, ScalingLaw) {
  const auto z = tlts::frechet_noise(20000, 1.0, 43);
  const double a = tlts::hill_estimator(z, 0.98);
  const double c = tlts::scale_estimator(z, a, 0.98);
  const double s = 2.5;
  const double cs = tlts::scale_estimator(scaled(z, s), a, 0.98);
  EXPECT_NEAR(cs, c * std::pow(s, a), 1e-10 * cs);
}

TEST(FitMarginal, RecordsThreshold) {
  const auto x = pareto_grid(10000);
  const auto fit = tlts::fit_marginal(x, 0.9);
  EXPECT_EQ(fit.threshold_quantile, 0.9);
  EXPECT_EQ(fit.n_exceed, 1000u);
  EXPECT_GT(fit.threshold, 0.0);
}

TEST(MarginalTransform, UnitFitIsIdentity) {
  const auto x = pareto_grid(100);
  tlts::MarginalFit fit;
  fit.alpha_hat = 2.0;
  fit.c_hat = 1.0;
  const auto y = tlts::marginal_transform(x, fit);
  EXPECT_EQ(y.scale(), tlts::ScaleTag::frechet2_unit);
  for (Eigen::Index i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y[i], x[i]);
  const auto back = tlts::back_transform(y, fit);
  for (Eigen::Index i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(back[i], x[i]);
}

TEST(MarginalTransform, RoundTrip) {
  const auto x = tlts::simulate_garch11(0.2, 0.5, 0.3, 1000, 44);
  tlts::MarginalFit fit;
  fit.alpha_hat = 3.27;
  fit.c_hat = 0.47;
  const auto back = tlts::back_transform(tlts::marginal_transform(x, fit), fit);
  EXPECT_EQ(back.scale(), tlts::ScaleTag::original);
  for (Eigen::Index i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-10 * x[i]);
}

TEST(MarginalTransform, Monotone) {
  tlts::MarginalFit fit;
  fit.alpha_hat = 0.7;
  fit.c_hat = 3.0;
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(200, 0.01, 50.0);
  const auto y = tlts::back_transform(tlts::Series(v, tlts::ScaleTag::frechet2_unit), fit);
  EXPECT_TRUE(std::is_sorted(y.values().begin(), y.values().end()));
}

TEST(MarginalTransform, RejectsNegative) {
  tlts::MarginalFit fit;
  Eigen::Vector2d v(1.0, -1.0);
  EXPECT_THROW(tlts::marginal_transform(tlts::Series(v, tlts::ScaleTag::original), fit),
               tlts::DomainError);
  EXPECT_THROW(tlts::back_transform(tlts::Series(v, tlts::ScaleTag::frechet2_unit), fit),
               tlts::DomainError);
}

TEST(EmpiricalTransform, RankMap) {
  Eigen::Vector4d v(-3.0, 10.0, 0.5, -1.0);
  const auto y = tlts::empirical_frechet_transform(tlts::Series(v, tlts::ScaleTag::original));
  EXPECT_NEAR(y[0], 1.0 / std::sqrt(-std::log(0.2)), 1e-15);
  EXPECT_NEAR(y[1], 1.0 / std::sqrt(-std::log(0.8)), 1e-15);
  EXPECT_LT(y[3], y[2]);
}

TEST(RankBackTransform, ReproducesReferenceMarginal) {
  const auto ref = tlts::simulate_garch11(0.2, 0.5, 0.3, 2000, 51);
  const auto z = tlts::frechet_noise(2000, 1.0, 52);
  const auto y = tlts::rank_back_transform(z, ref);
  EXPECT_EQ(y.scale(), tlts::ScaleTag::original);
  Eigen::VectorXd a = y.values();
  Eigen::VectorXd b = ref.values();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  for (Eigen::Index i = 1; i < z.size(); ++i)
    ASSERT_EQ(z[i] < z[i - 1], y[i] < y[i - 1]) << i;
}

TEST(RankBackTransform, TiesAndErrors) {
  Eigen::Vector3d v(2.0, 1.0, 2.0);
  Eigen::Vector3d r(10.0, 20.0, 30.0);
  const auto y = tlts::rank_back_transform(tlts::Series(v, tlts::ScaleTag::frechet2_unit),
                                           tlts::Series(r, tlts::ScaleTag::original));
  EXPECT_EQ(y[1], 10.0);
  EXPECT_EQ(y[0], 20.0);
  EXPECT_EQ(y[2], 30.0);
  EXPECT_THROW(tlts::rank_back_transform(tlts::Series(Eigen::VectorXd::Ones(1), tlts::ScaleTag::frechet2_unit),
                                         tlts::Series(r, tlts::ScaleTag::original)),
               tlts::ArgumentError);
}

TEST(Preprocess, ConstantBecomesZero) {
  const tlts::Series c(Eigen::VectorXd::Constant(50, 3.0), tlts::ScaleTag::frechet2_unit);
  EXPECT_TRUE(tlts::preprocess(c).values().isZero());
}

TEST(Preprocess, ShrinksMean) {
  const auto z = tlts::frechet_noise(5000, 1.0, 45);
  const auto p = tlts::preprocess(z);
  EXPECT_EQ(p.scale(), tlts::ScaleTag::preprocessed);
  EXPECT_LE(p.values().mean(), z.values().mean());
  EXPECT_GE(p.values().minCoeff(), 0.0);
}

TEST(Preprocess, NotIdempotent) {
  const auto z = tlts::frechet_noise(5000, 1.0, 46);
  const auto once = tlts::preprocess(z);
  const auto twice = tlts::preprocess(once);
  EXPECT_NE(once.values(), twice.values());
  EXPECT_LT(twice.values().sum(), once.values().sum());
}

TEST(Preprocess, RejectsOriginalScale) {
  EXPECT_THROW(tlts::preprocess(pareto_grid(10)), tlts::ArgumentError);
}

TEST(Tpdf, IndependentNoise) {
  const auto z = tlts::preprocess(tlts::frechet_noise(100000, 1.0, 47));
  const auto t = tlts::estimate_tpdf(z, 5, 0.99);
  EXPECT_EQ(t.sigma(0), 1.0);
  for (Eigen::Index h = 1; h <= 5; ++h) EXPECT_LE(t.sigma(h), 0.1);
  ASSERT_EQ(t.n_pairs.size(), 6u);
  EXPECT_GE(t.n_pairs[1], 900u);
}

TEST(Tpdf, EqualWeightMa1) {
  tlts::MaModel m;
  m.theta = Eigen::VectorXd::Constant(1, 1.0);
  m.noise_scale = std::sqrt(0.5);
  const auto x = tlts::preprocess(tlts::simulate_ma(m, 100000, 48));
  const auto t = tlts::estimate_tpdf(x, 3, 0.99);
  EXPECT_NEAR(t.sigma(1), 0.5, 0.05);
  EXPECT_LE(t.sigma(2), 0.1);
}

TEST(Tpdf, Preconditions) {
  const auto z = tlts::frechet_noise(1000, 1.0, 49);
  EXPECT_THROW(tlts::estimate_tpdf(z, 5, 0.99), tlts::ArgumentError);
  const auto p = tlts::preprocess(z);
  EXPECT_THROW(tlts::estimate_tpdf(p, 100, 0.99), tlts::ArgumentError);
  EXPECT_THROW(tlts::estimate_tpdf(p, 5, 0.99), tlts::EstimationError);
}

TEST(Tpdf, AtIsZeroBeyondGrid) {
  tlts::Tpdf t;
  t.sigma = Eigen::Vector3d(1.0, 0.4, 0.1);
  EXPECT_EQ(t.at(-1), 0.4);
  EXPECT_EQ(t.at(7), 0.0);
}

TEST(Chi, Independent) {
  const auto z = tlts::frechet_noise(100000, 1.0, 50);
  EXPECT_NEAR(tlts::chi_estimator(z, 1, 0.98), 0.02, 0.02);
}

TEST(Chi, PerfectDependence) {
  // x_{t+1} is an increasing function of x_t, so every exceedance is followed by one.
  const tlts::Series ramp(Eigen::VectorXd::LinSpaced(3000, 1.0, 3000.0), tlts::ScaleTag::original);
  EXPECT_EQ(tlts::chi_estimator(ramp, 1, 0.95), 1.0);
}

TEST(Chi, Preconditions) {
  const auto z = tlts::frechet_noise(1000, 1.0, 51);
  EXPECT_THROW(tlts::chi_estimator(z, 1, 0.5), tlts::ArgumentError);
  EXPECT_THROW(tlts::chi_estimator(z, 0, 0.9), tlts::ArgumentError);
  EXPECT_THROW(tlts::chi_estimator(z, 1, 0.99), tlts::EstimationError);
}

}  // namespace
