#include <array>
#include <cmath>
#include <numbers>
#include <span>

#include <gtest/gtest.h>

#include "tlts/errors.hpp"
#include "tlts/translinear.hpp"
#include "ulp.hpp"

namespace {

using tlts::testing::ulp_distance;
constexpr double kLn2 = std::numbers::ln2;

TEST(Tau, ZeroMapsToLog2) { EXPECT_EQ(tlts::tau(0.0), kLn2); }

TEST(Tau, LargeArgumentIsIdentity) { EXPECT_NEAR(tlts::tau(50.0), 50.0, 50.0 * 1e-15); }

TEST(Tau, NegativeArgument) {
  EXPECT_NEAR(tlts::tau(-10.0), 4.539889921686465e-05, 1e-18);
}

TEST(Tau, BranchesAgreeAtThreshold) {
  const double below = std::nextafter(tlts::kSoftplusBranch, 0.0);
  EXPECT_LE(ulp_distance(tlts::tau(below), tlts::tau(tlts::kSoftplusBranch)), 2u);
}

TEST(Tau, RejectsNonFinite) {
  EXPECT_THROW(tlts::tau(std::numeric_limits<double>::infinity()), tlts::DomainError);
  EXPECT_THROW(tlts::tau(std::numeric_limits<double>::quiet_NaN()), tlts::DomainError);
}

TEST(TauInv, Log2MapsToZero) { EXPECT_NEAR(double(tlts::tau_inv(kLn2)), 0.0, 1e-16); }

TEST(TauInv, LargeArgumentIsIdentity) {
  EXPECT_NEAR(double(tlts::tau_inv(50.0)), 50.0, 50.0 * 1e-15);
}

TEST(TauInv, ZeroAndNegativeAreDomainErrors) {
  EXPECT_THROW(tlts::tau_inv(0.0), tlts::DomainError);
  EXPECT_THROW(tlts::tau_inv(-1.0), tlts::DomainError);
}

TEST(TauInv, RoundTripAtExtremes) {
  for (double x : {1e-300, 1e-100, 1e-12, 1e-3, 0.5, 1.0, 7.0, 1e3, 1e12, 1e100, 1e300})
    EXPECT_LE(ulp_distance(double(tlts::tau(tlts::tau_inv(x))), x), 4u) << x;
}

TEST(TAdd, Log2IsIdentity) {
  for (double x : {1e-12, 0.01, 1.0, 3.5, 1e6})
    EXPECT_LE(ulp_distance(tlts::t_add(x, kLn2), x), 4u) << x;
}

TEST(TAdd, LargeValuesAdd) { EXPECT_NEAR(tlts::t_add(100.0, 100.0), 200.0, 200.0 * 1e-12); }

TEST(TAdd, Commutes) {
  for (auto [a, b] : std::array<std::pair<double, double>, 3>{{{0.1, 3.0}, {2.0, 1e-5}, {40.0, 0.7}}})
    EXPECT_EQ(tlts::t_add(a, b), tlts::t_add(b, a));
}

TEST(TAdd, RejectsNonpositive) { EXPECT_THROW(tlts::t_add(0.0, 1.0), tlts::DomainError); }

TEST(TScale, UnitScalarIsIdentity) {
  for (double x : {1e-8, 0.3, 2.0, 45.0}) EXPECT_LE(ulp_distance(tlts::t_scale(1.0, x), x), 1u);
}

TEST(TScale, ZeroScalarGivesZeroElement) { EXPECT_EQ(tlts::t_scale(0.0, 3.0), kLn2); }

TEST(TScale, ZeroElementIsFixed) { EXPECT_NEAR(tlts::t_scale(2.0, kLn2), kLn2, 1e-16); }

TEST(TScale, NegativeScalarAllowed) {
  const double x = 2.0;
  const double neg = tlts::t_scale(-1.0, x);
  EXPECT_GT(neg, 0.0);
  EXPECT_NEAR(tlts::t_add(x, neg), kLn2, 1e-15);
}

TEST(TCombine, SingleTerm) {
  const std::array<double, 1> a{1.0};
  const std::array<double, 1> x{2.5};
  EXPECT_EQ(tlts::t_combine<double>(a, x), 2.5);
}

TEST(TCombine, HalvesRecombine) {
  const std::array<double, 2> a{0.5, 0.5};
  const std::array<double, 2> x{1.7, 1.7};
  EXPECT_LE(ulp_distance(tlts::t_combine<double>(a, x), 1.7), 1u);
}

TEST(TCombine, MatchesFold) {
  const std::array<double, 4> a{0.3, -0.2, 1.1, 0.05};
  const std::array<double, 4> x{0.4, 2.0, 5.0, 30.0};
  double fold = tlts::t_scale(a[0], x[0]);
  for (std::size_t j = 1; j < a.size(); ++j) fold = tlts::t_add(fold, tlts::t_scale(a[j], x[j]));
  EXPECT_LE(ulp_distance(tlts::t_combine<double>(a, x), fold), 8u);
}

TEST(TCombine, EigenOverloadAgrees) {
  Eigen::Vector3d a(0.2, 0.5, 0.9);
  Eigen::Vector3d x(1.0, 0.01, 12.0);
  const std::array<double, 3> as{0.2, 0.5, 0.9};
  const std::array<double, 3> xs{1.0, 0.01, 12.0};
  EXPECT_EQ(tlts::t_combine(a, x), tlts::t_combine<double>(as, xs));
}

TEST(TCombine, Errors) {
  const std::array<double, 2> a{1.0, 1.0};
  const std::array<double, 1> x{1.0};
  EXPECT_THROW(tlts::t_combine<double>(a, x), tlts::DomainError);
  EXPECT_THROW(tlts::t_combine<double>(std::span<const double>{}, std::span<const double>{}),
               tlts::DomainError);
  const std::array<double, 2> bad{1.0, 0.0};
  EXPECT_THROW(tlts::t_combine<double>(a, bad), tlts::DomainError);
}

TEST(TSub, InvertsAdd) {
  const double s = tlts::t_add(3.0, 0.25);
  EXPECT_NEAR(tlts::t_sub(s, 0.25), 3.0, 1e-14);
}

TEST(ToLatent, FloorLiftsZeros) {
  Eigen::Vector3d x(0.0, 1.0, kLn2);
  const auto y = tlts::to_latent(x, 1e-10);
  EXPECT_NEAR(y(0), double(tlts::tau_inv(1e-10)), 1e-12);
  EXPECT_NEAR(y(2), 0.0, 1e-16);
  Eigen::Vector2d neg(1.0, -0.5);
  EXPECT_THROW(tlts::to_latent(neg, 1e-10), tlts::DomainError);
}

}  // namespace
