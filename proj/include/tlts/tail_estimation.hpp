#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "tlts/series.hpp"

namespace tlts {

inline constexpr std::size_t kMinExceedances = 30;

/// Power-law tail fit Pr(X > x) ~ c x^{-alpha} above an empirical quantile.
struct MarginalFit {
  double alpha_hat = 2.0;
  double c_hat = 1.0;
  double threshold_quantile = 0.99;
  double threshold = 0.0;  ///< the empirical quantile itself
  std::size_t n_exceed = 0;
};

/// Tail pairwise dependence function on lags 0..max_lag.
struct Tpdf {
  Eigen::VectorXd sigma;
  double radial_quantile = 0.0;  ///< 0 for analytic TPDFs
  std::vector<std::size_t> n_pairs;
  std::size_t n_clamped = 0;  ///< lags whose raw estimate fell outside [0, 1]

  Eigen::Index max_lag() const noexcept { return sigma.size() - 1; }
  /// sigma(h), zero beyond the grid.
  double at(Eigen::Index h) const noexcept {
    if (h < 0) h = -h;
    return h < sigma.size() ? sigma(h) : 0.0;
  }
};

/// Hill estimate of the tail index from the k observations strictly above
/// the empirical `threshold_quantile`, referenced to the (k+1)-th largest.
double hill_estimator(const Series& data, double threshold_quantile);

/// Tail scale c = (k / n) u^alpha from Pr(X > u) ~ c u^{-alpha}.
double scale_estimator(const Series& data, double alpha_hat, double threshold_quantile);

/// Hill index plus scale at one threshold.
MarginalFit fit_marginal(const Series& data, double threshold_quantile);

/// x -> c^{-1/2} x^{alpha/2}: tail index 2 and unit tail ratio.
Series marginal_transform(const Series& data, const MarginalFit& fit);

/// Exact inverse of marginal_transform: x -> (c^{1/2} x)^{2/alpha}.
Series back_transform(const Series& data, const MarginalFit& fit);

/// Rank-based alternative for data whose margin is not a clean power law
/// (e.g. signed anomalies): x -> (-log F_n(x))^{-1/2} with F_n = rank/(n+1).
Series empirical_frechet_transform(const Series& data);

/// Map frechet2-unit values back through the empirical quantile function of
/// `reference` (inverse of empirical_frechet_transform up to interpolation).
Series empirical_back_transform(const Series& data, const Series& reference);

/// Rank-preserving map onto the marginal of `reference`: the value of rank i
/// (0-based, ties in order of appearance) among n becomes the type-7 quantile
/// of `reference` at i / (n - 1). The result has exactly the reference
/// marginal when both lengths agree.
Series rank_back_transform(const Series& data, const Series& reference);

/// x <- max(x - mean(x), 0). Not idempotent: a second call shifts again.
Series preprocess(const Series& data);

/// For each lag h >= 1, over pairs (x_t, x_{t+h}) whose Euclidean radius
/// exceeds the lag's own empirical `radial_quantile`,
///   sigma(h) = 2 * mean(x_t x_{t+h} / r_t^2),
/// clamped to [0, 1]; sigma(0) = 1. Lags are estimated concurrently.
Tpdf estimate_tpdf(const Series& data, Eigen::Index max_lag, double radial_quantile);

/// Empirical #{x_t > u, x_{t+lag} > u} / #{x_t > u} at u = quantile.
double chi_estimator(const Series& data, Eigen::Index lag, double quantile);

}  // namespace tlts
