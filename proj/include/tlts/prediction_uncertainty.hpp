#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tlts/innovations.hpp"
#include "tlts/series.hpp"
#include "tlts/tail_estimation.hpp"

namespace tlts {

/// 2x2 TPDM of (predictor, predictand): [[s, s], [s, sigma(0)]] with
/// s = sigma_n' Sigma_n^{-1} sigma_n.
using PredictionTpdm = Eigen::Matrix2d;

template <typename Derived>
PredictionTpdm prediction_tpdm(const Eigen::MatrixBase<Derived>& sigma, Eigen::Index n) {
  const auto w = direct_predictor_weights(sigma, n);
  const double s = double(sigma(0) - w.nu);
  PredictionTpdm m;
  m << s, s, s, double(sigma(0));
  return m;
}

inline PredictionTpdm prediction_tpdm(const Tpdf& tpdf, Eigen::Index n) {
  return prediction_tpdm(detail::as_vector(tpdf), n);
}

struct CpOptions {
  double tolerance = 1e-10;      ///< Frobenius gap between CQ and its nonnegative part
  int max_iter = 5000;
  int max_retries = 20;          ///< fresh random starts before giving up
  double residual_tol = 1e-8;    ///< required ||B B' - A||_F
};

/// Nonnegative B (2 x q_star) with B B' = A, by alternating projection:
/// start from C = [A^{1/2} | 0] and a random orthogonal Q, then alternate
/// P = max(CQ, 0) and the orthogonal Procrustes update Q = polar(C' P) until
/// CQ is nonnegative to `tol`. Throws DecompositionError after max_iter.
Eigen::MatrixXd cp_decompose(const Eigen::Matrix2d& A, Eigen::Index q_star, std::uint64_t seed,
                             double tol = 1e-10, int max_iter = 5000);

/// cp_decompose with up to options.max_retries reseeded attempts.
Eigen::MatrixXd cp_decompose_retry(const Eigen::Matrix2d& A, Eigen::Index q_star,
                                   std::uint64_t seed, const CpOptions& options = {});

struct AngularPoint {
  Eigen::Vector2d direction;  ///< unit vector in the nonnegative quadrant
  double mass = 0.0;
  double angle() const;       ///< atan2(direction.y, direction.x) in [0, pi/2]
};

/// Discrete bivariate angular measure built from CP factors.
struct AngularMeasure {
  std::vector<AngularPoint> points;
  Eigen::Index n_decomp = 0;
  Eigen::Index q_star = 0;

  double total_mass() const;
};

/// Each column b of each B contributes mass |b|^2 / n_decomp at b / |b|;
/// zero columns are dropped.
AngularMeasure angular_measure(const std::vector<Eigen::MatrixXd>& factors);

/// n_decomp independent decompositions (replicate k = 1..n_decomp seeded with seed + k),
/// run concurrently, folded into one measure.
AngularMeasure build_angular_measure(const Eigen::Matrix2d& A, Eigen::Index q_star,
                                     Eigen::Index n_decomp, std::uint64_t seed,
                                     const CpOptions& options = {});

struct JointRegion {
  double angle_low = 0.0;   ///< radians
  double angle_high = 0.0;
  bool contains(double angle) const { return angle >= angle_low && angle <= angle_high; }
};

/// Mass-weighted (1-level)/2 and (1+level)/2 quantiles of the angle.
JointRegion joint_region(const AngularMeasure& H, double level);

/// Mass-weighted angle quantile: smallest atom angle with cumulative mass
/// fraction >= p.
double angle_quantile(const AngularMeasure& H, double p);

/// Kernel density of the angle on [0, pi/2], tabulated on a uniform grid.
struct AngularDensity {
  Eigen::VectorXd grid;     ///< angles, grid(0) = 0, grid(last) = pi/2
  Eigen::VectorXd density;  ///< integrates (trapezoid) to the total mass
  double bandwidth = 0.0;

  /// Linear interpolation; zero outside [0, pi/2].
  double operator()(double angle) const;
  double integral() const;
  /// Angle below which fraction p of the tabulated mass lies.
  double mass_quantile(double p) const;
};

inline constexpr Eigen::Index kDensityGridPoints = 1024;

/// Silverman's rule on the mass-weighted angle sample:
/// 0.9 min(sd, IQR/1.34) n_eff^{-1/5}, n_eff = (sum w)^2 / sum w^2.
double silverman_bandwidth(const AngularMeasure& H);

/// Mass-weighted Gaussian kernel estimate, reflected at 0 and pi/2.
/// Bandwidth defaults to silverman_bandwidth(H).
AngularDensity angular_density(const AngularMeasure& H, std::optional<double> bandwidth = {},
                               Eigen::Index grid_points = kDensityGridPoints);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Central `level` interval of X2 | X1 = x1 under the limiting conditional
/// law with density proportional to |(x1, x2)|^{-4} h(atan2(x2, x1)), where h
/// is the angular density in the angle parametrization.
Interval conditional_interval(double x1, const AngularDensity& h, double level);

struct IntervalRow {
  Eigen::Index index = 0;  ///< position in the full series
  double x_hat = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> actual;
};
using IntervalSet = std::vector<IntervalRow>;

/// Classical baseline: rank-transform `train` to normal scores, estimate the
/// autocovariance, form the n-step best linear predictor by the same Toeplitz
/// solve, and map x_hat +- z sqrt(MSPE) back through the training quantile
/// function. `test` continues `train`; one row per test observation.
IntervalSet gaussian_baseline(const Series& train, const Series& test, Eigen::Index n, double level);

struct IntervalStudyOptions {
  Eigen::Index window = 30;
  double level = 0.95;
  Eigen::Index q_star = 5;
  Eigen::Index n_decomp = 100;
  std::uint64_t seed = 0;
  double large_quantile = 0.95;  ///< x_hat above this test quantile gets an interval
  std::optional<double> bandwidth;
  CpOptions cp;
};

/// Everything the prediction-interval experiment produces.
struct IntervalStudy {
  PredictorWeights weights;
  PredictionTpdm tpdm;
  AngularMeasure measure;
  JointRegion region;
  AngularDensity density;
  IntervalSet rows;            ///< all test indices; lower/upper only meaningful when large
  std::vector<bool> large;     ///< x_hat above the large-quantile threshold
  double xhat_threshold = 0.0;
  double radius_threshold = 0.0;
  double joint_capture = 0.0;  ///< share of radially large test pairs inside the joint region
  std::size_t n_radial_large = 0;
  double coverage = 0.0;       ///< conditional-interval coverage on large rows
  std::size_t n_large = 0;
};

/// Fits weights and the angular measure from `tpdf`, predicts every test
/// observation series[train_size..] from the preceding `window` values, and
/// evaluates the joint region and conditional intervals on the test part.
/// `series` must be on the frechet2_unit scale.
IntervalStudy run_interval_study(const Series& series, Eigen::Index train_size, const Tpdf& tpdf,
                                 const IntervalStudyOptions& options);

}  // namespace tlts
