#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tlts/series.hpp"

namespace tlts {

/// Transformed-linear MA(q): X_t = Z_t (+) theta_1 (*) Z_{t-1} (+) ... (+)
/// theta_q (*) Z_{t-q}, with Z_t iid Frechet(alpha = 2, scale = noise_scale).
/// theta_0 = 1 is implicit and not stored.
struct MaModel {
  Eigen::VectorXd theta;     ///< theta_1..theta_q, all >= 0
  double noise_scale = 1.0;  ///< c > 0

  Eigen::Index order() const noexcept { return theta.size(); }
  /// Throws ArgumentError unless every theta_j >= 0 and noise_scale > 0.
  void validate() const;
};

/// iid Frechet(2, scale) draws z = scale * (-log U)^(-1/2).
Series frechet_noise(Eigen::Index n, double scale, std::uint64_t seed);

/// n values of the MA model; the first q noise draws are burn-in.
Series simulate_ma(const MaModel& model, Eigen::Index n, std::uint64_t seed);

inline constexpr Eigen::Index kGarchBurnIn = 1000;

/// |eps_t| for a Gaussian GARCH(1,1):
///   sigma_t^2 = alpha0 + alpha1 eps_{t-1}^2 + beta1 sigma_{t-1}^2,
///   eps_t = sigma_t eta_t.
/// Requires alpha1 + beta1 < 1.
Series simulate_garch11(double alpha0, double alpha1, double beta1, Eigen::Index n,
                        std::uint64_t seed, Eigen::Index burn_in = kGarchBurnIn);

/// Stationary first-order Markov chain whose consecutive pairs follow the
/// bivariate logistic law F(x, y) = exp(-(x^{-1/b} + y^{-1/b})^b) with unit
/// Frechet margins. beta in (0, 1]; beta = 1 is independence.
Series simulate_logistic_markov(double beta, Eigen::Index n, std::uint64_t seed);

/// Conditional CDF of the logistic Markov kernel, P(X_{t+1} <= y | X_t = x).
double logistic_conditional_cdf(double y, double x, double beta);

}  // namespace tlts
