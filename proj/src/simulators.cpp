#include "tlts/simulators.hpp"

#include <cmath>
#include <string>

#include "tlts/errors.hpp"
#include "tlts/rng.hpp"
#include "tlts/translinear.hpp"

namespace tlts {

void MaModel::validate() const {
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale))
    throw ArgumentError("MA noise scale must be finite and > 0");
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    if (!(theta(j) >= 0.0) || !std::isfinite(theta(j)))
      throw ArgumentError("MA coefficient theta_" + std::to_string(j + 1) + " must be finite and >= 0");
}

namespace {

Eigen::VectorXd frechet_draws(Eigen::Index n, double scale, Rng& rng) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = scale / std::sqrt(-std::log(rng.uniform()));
  return z;
}

}  // namespace

Series frechet_noise(Eigen::Index n, double scale, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("frechet_noise: n must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("frechet_noise: scale must be > 0");
  Rng rng(seed);
  return Series(frechet_draws(n, scale, rng), ScaleTag::frechet2_unit, "frechet_noise");
}

Series simulate_ma(const MaModel& model, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("simulate_ma: n must be >= 1");
  model.validate();
  const Eigen::Index q = model.order();
  Rng rng(seed);
  const Eigen::VectorXd noise = frechet_draws(n + q, model.noise_scale, rng);
  Eigen::VectorXd latent(noise.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) latent(i) = tau_inv(noise(i));

  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index now = t + q;
    double acc = latent(now);
    for (Eigen::Index j = 1; j <= q; ++j) acc += model.theta(j - 1) * latent(now - j);
    x(t) = tau(acc);
  }
  return Series(std::move(x), ScaleTag::frechet2_unit, "simulate_ma");
}

Series simulate_garch11(double alpha0, double alpha1, double beta1, Eigen::Index n,
                        std::uint64_t seed, Eigen::Index burn_in) {
  if (n < 1) throw ArgumentError("simulate_garch11: n must be >= 1");
  if (!(alpha0 > 0.0)) throw ArgumentError("simulate_garch11: alpha0 must be > 0");
  if (!(alpha1 >= 0.0) || !(beta1 >= 0.0))
    throw ArgumentError("simulate_garch11: alpha1 and beta1 must be >= 0");
  if (!(alpha1 + beta1 < 1.0))
    throw ArgumentError("simulate_garch11: alpha1 + beta1 must be < 1 for stationarity");
  if (burn_in < 0) throw ArgumentError("simulate_garch11: negative burn-in");

  Rng rng(seed);
  double sigma2 = alpha0 / (1.0 - alpha1 - beta1);
  double eps = 0.0;
  Eigen::VectorXd out(n);
  for (Eigen::Index t = 0; t < n + burn_in; ++t) {
    sigma2 = alpha0 + alpha1 * eps * eps + beta1 * sigma2;
    eps = std::sqrt(sigma2) * rng.normal();
    if (t >= burn_in) out(t - burn_in) = std::abs(eps);
  }
  return Series(std::move(out), ScaleTag::original, "simulate_garch11");
}

namespace {

// log P(Y <= y | X = x) for the logistic kernel, y = exp(log_y).
double logistic_log_conditional_cdf(double log_y, double log_x, double beta) {
  const double inv_beta = 1.0 / beta;
  const double s = std::exp(-log_x * inv_beta) + std::exp(-log_y * inv_beta);
  return std::exp(-log_x) - std::pow(s, beta) + (beta - 1.0) * std::log(s) +
         (1.0 - inv_beta) * log_x;
}

}  // namespace

double logistic_conditional_cdf(double y, double x, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ArgumentError("logistic beta must lie in (0, 1]");
  if (!(x > 0.0)) throw ArgumentError("logistic conditioning value must be > 0");
  if (!(y > 0.0)) return 0.0;
  return std::exp(logistic_log_conditional_cdf(std::log(y), std::log(x), beta));
}

Series simulate_logistic_markov(double beta, Eigen::Index n, std::uint64_t seed) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ArgumentError("logistic beta must lie in (0, 1]");
  if (n < 1) throw ArgumentError("simulate_logistic_markov: n must be >= 1");

  constexpr double kLogTol = 1e-10;  // relative tolerance on y
  Rng rng(seed);
  Eigen::VectorXd out(n);
  double x = -1.0 / std::log(rng.uniform());
  out(0) = x;
  for (Eigen::Index t = 1; t < n; ++t) {
    const double log_u = std::log(rng.uniform());
    const double log_x = std::log(x);
    double lo = log_x - 1.0;
    double hi = log_x + 1.0;
    while (logistic_log_conditional_cdf(lo, log_x, beta) > log_u) lo -= 2.0;
    while (logistic_log_conditional_cdf(hi, log_x, beta) < log_u) hi += 2.0;
    while (hi - lo > kLogTol) {
      const double mid = 0.5 * (lo + hi);
      if (logistic_log_conditional_cdf(mid, log_x, beta) < log_u)
        lo = mid;
      else
        hi = mid;
    }
    x = std::exp(0.5 * (lo + hi));
    out(t) = x;
  }
  return Series(std::move(out), ScaleTag::original, "simulate_logistic_markov");
}

}  // namespace tlts
