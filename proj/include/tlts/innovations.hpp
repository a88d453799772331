#pragma once

// Transformed-linear innovations algorithm and best one-step prediction.
//
// In the nonnegative-coefficient subspace the inner product of the
// transformed-linear space coincides with the TPDF, so the classical
// recursions carry over with sigma(h) in place of the autocovariance:
//
//   nu_0          = sigma(0)
//   theta_{n,n-k} = (sigma(n-k) - sum_{j<k} theta_{k,k-j} theta_{n,n-j} nu_j) / nu_k
//   nu_n          = sigma(0) - sum_{j<n} theta_{n,n-j}^2 nu_j
//
// and the predictor is  Xhat_{n+1} = (+)_j theta_{nj} (*) (X_{n+1-j} (-) Xhat_{n+1-j})
// with Xhat_1 the zero element tau(0). All of this is linear on the latent
// scale y = tau^-1(x), which is where the work is done.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "tlts/errors.hpp"
#include "tlts/series.hpp"
#include "tlts/simulators.hpp"
#include "tlts/tail_estimation.hpp"
#include "tlts/translinear.hpp"

namespace tlts {

/// nu_n below this fraction of sigma(0) is treated as a singular system.
inline constexpr double kSingularNuRatio = 1e-10;
/// Zero observations are lifted to this value before tau^-1.
inline constexpr double kDefaultZeroFloor = 1e-10;

template <typename Scalar>
struct InnovationsStateT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// theta(n, j) = theta_{n,j} for 1 <= j <= n <= n_max; zero elsewhere.
  Matrix theta;
  /// nu_0..nu_{n_max}.
  Vector nu;

  Eigen::Index n_max() const noexcept { return nu.size() - 1; }
  /// theta_{n,1..n}.
  auto row(Eigen::Index n) const { return theta.row(n).segment(1, n).transpose(); }
};
using InnovationsState = InnovationsStateT<double>;

template <typename Scalar>
struct PredictorWeightsT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b;  ///< b_{n1}..b_{nn}; b_{n1} weights the latest value
  Scalar nu{};                                 ///< sigma(0) - sigma_n' b
};
using PredictorWeights = PredictorWeightsT<double>;

namespace detail {

template <typename Derived>
typename Derived::Scalar sigma_at(const Eigen::MatrixBase<Derived>& sigma, Eigen::Index h) {
  if (h < 0) h = -h;
  return h < sigma.size() ? sigma(h) : typename Derived::Scalar(0);
}

inline Eigen::Map<const Eigen::VectorXd> as_vector(const Tpdf& tpdf) {
  return {tpdf.sigma.data(), tpdf.sigma.size()};
}

}  // namespace detail

/// Runs the recursion on sigma(0..) up to row n_max. Lags beyond the
/// supplied grid are taken as exactly zero. O(n_max^3) time.
template <typename Derived>
InnovationsStateT<typename Derived::Scalar> innovations_algorithm(
    const Eigen::MatrixBase<Derived>& sigma, Eigen::Index n_max) {
  using Scalar = typename Derived::Scalar;
  if (sigma.size() < 1) throw ArgumentError("innovations_algorithm: empty TPDF");
  if (n_max < 0) throw ArgumentError("innovations_algorithm: negative n_max");
  const Scalar s0 = sigma(0);
  const Scalar floor = Scalar(kSingularNuRatio) * s0;
  if (!(s0 > Scalar(0))) throw SingularityError("innovations_algorithm: sigma(0) must be > 0", 0);

  InnovationsStateT<Scalar> st;
  st.theta = InnovationsStateT<Scalar>::Matrix::Zero(n_max + 1, n_max + 1);
  st.nu.resize(n_max + 1);
  st.nu(0) = s0;
  auto& th = st.theta;
  for (Eigen::Index n = 1; n <= n_max; ++n) {
    for (Eigen::Index k = 0; k < n; ++k) {
      Scalar acc = detail::sigma_at(sigma, n - k);
      for (Eigen::Index j = 0; j < k; ++j) acc -= th(k, k - j) * th(n, n - j) * st.nu(j);
      th(n, n - k) = acc / st.nu(k);
    }
    Scalar v = s0;
    for (Eigen::Index j = 0; j < n; ++j) v -= th(n, n - j) * th(n, n - j) * st.nu(j);
    if (!(v >= floor))
      throw SingularityError("innovations_algorithm: nu_" + std::to_string(n) + " = " +
                                 std::to_string(double(v)) +
                                 " is not positive; the TPDF is singular or not nonnegative definite",
                             static_cast<std::size_t>(n));
    st.nu(n) = v;
  }
  return st;
}

inline InnovationsState innovations_algorithm(const Tpdf& tpdf, Eigen::Index n_max) {
  return innovations_algorithm(detail::as_vector(tpdf), n_max);
}

struct ConvergenceRule {
  double tolerance = 1e-6;  ///< max |theta_{N,j} - theta_{N-1,j}| over j <= q_max
  Eigen::Index rows = 10;   ///< consecutive rows that must satisfy it
};

/// Largest coefficient change between row m and row m-1 over j <= q_max.
template <typename Scalar>
double row_delta(const InnovationsStateT<Scalar>& st, Eigen::Index m, Eigen::Index q_max) {
  double d = 0.0;
  const Eigen::Index jmax = std::min(q_max, m - 1);
  for (Eigen::Index j = 1; j <= jmax; ++j)
    d = std::max(d, double(std::abs(st.theta(m, j) - st.theta(m - 1, j))));
  return d;
}

/// MA model read off the last row of a converged state. Coefficients past the
/// last one with |theta| >= trunc_eps (or past q_max) are dropped, negative
/// ones are clamped to zero (same TPDF), and the noise scale is sqrt(nu_N).
template <typename Scalar>
MaModel fit_ma(const InnovationsStateT<Scalar>& st, double trunc_eps, Eigen::Index q_max,
               ConvergenceRule rule = {}) {
  if (trunc_eps < 0.0) throw ArgumentError("fit_ma: trunc_eps must be >= 0");
  if (q_max < 0) throw ArgumentError("fit_ma: q_max must be >= 0");
  if (rule.rows < 1) throw ArgumentError("fit_ma: convergence rows must be >= 1");
  const Eigen::Index n = st.n_max();
  if (n < rule.rows + 1)
    throw ConvergenceError("fit_ma: need at least " + std::to_string(rule.rows + 1) +
                               " innovation rows to judge convergence",
                           std::numeric_limits<double>::infinity());
  const double last = row_delta(st, n, q_max);
  for (Eigen::Index m = n - rule.rows + 1; m <= n; ++m) {
    if (!(row_delta(st, m, q_max) < rule.tolerance))
      throw ConvergenceError("fit_ma: innovations not converged; last-row delta " +
                                 std::to_string(last) + " (tolerance " +
                                 std::to_string(rule.tolerance) + ")",
                             last);
  }

  Eigen::Index q = 0;
  for (Eigen::Index j = std::min(q_max, n); j >= 1; --j) {
    if (std::abs(double(st.theta(n, j))) >= trunc_eps) {
      q = j;
      break;
    }
  }
  MaModel model;
  model.theta.resize(q);
  for (Eigen::Index j = 1; j <= q; ++j) model.theta(j - 1) = std::max(0.0, double(st.theta(n, j)));
  model.noise_scale = std::sqrt(double(st.nu(n)));
  return model;
}

/// sigma(h) = c^2 sum_j theta_j theta_{j+h} (theta_0 = 1) for h = 0..max_lag.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> ma_tpdf_values(
    const Eigen::MatrixBase<Derived>& theta, typename Derived::Scalar noise_scale,
    Eigen::Index max_lag) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index q = theta.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> psi(q + 1);
  psi(0) = Scalar(1);
  psi.tail(q) = theta;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(max_lag + 1);
  for (Eigen::Index h = 0; h <= std::min(max_lag, q); ++h)
    out(h) = noise_scale * noise_scale * psi.head(q + 1 - h).dot(psi.tail(q + 1 - h));
  return out;
}

/// Analytic TPDF of an MA model on lags 0..max_lag (default: its order).
inline Tpdf ma_tpdf(const MaModel& model, Eigen::Index max_lag = -1) {
  model.validate();
  Tpdf out;
  out.sigma = ma_tpdf_values(model.theta, model.noise_scale, max_lag < 0 ? model.order() : max_lag);
  out.n_pairs.assign(static_cast<std::size_t>(out.sigma.size()), 0);
  return out;
}

/// Toeplitz matrix Sigma_n = [sigma(i - j)]_{i,j=1..n}.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> toeplitz(
    const Eigen::MatrixBase<Derived>& sigma, Eigen::Index n) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = detail::sigma_at(sigma, i - j);
  return m;
}

/// Projection weights b = Sigma_n^{-1} sigma_n by Cholesky factorization.
template <typename Derived>
PredictorWeightsT<typename Derived::Scalar> direct_predictor_weights(
    const Eigen::MatrixBase<Derived>& sigma, Eigen::Index n) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (n < 1) throw ArgumentError("direct_predictor_weights: n must be >= 1");
  Vector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = detail::sigma_at(sigma, i + 1);
  const auto gram = toeplitz(sigma, n);
  const Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(gram);
  if (llt.info() != Eigen::Success)
    throw SingularityError("direct_predictor_weights: Sigma_" + std::to_string(n) +
                               " is not positive definite",
                           static_cast<std::size_t>(n));
  PredictorWeightsT<Scalar> w;
  w.b = llt.solve(rhs);
  w.nu = detail::sigma_at(sigma, 0) - rhs.dot(w.b);
  if (!(w.nu >= Scalar(0)))
    throw SingularityError("direct_predictor_weights: negative prediction distance", static_cast<std::size_t>(n));
  return w;
}

inline PredictorWeights direct_predictor_weights(const Tpdf& tpdf, Eigen::Index n) {
  return direct_predictor_weights(detail::as_vector(tpdf), n);
}

/// (+)_j b_j (*) X_{n+1-j} for a window ordered oldest -> newest, so b_1
/// multiplies the last window entry. Zeros are lifted to `zero_floor`.
template <typename DerivedW, typename Scalar>
Scalar one_step_predict(const Eigen::MatrixBase<DerivedW>& window,
                        const PredictorWeightsT<Scalar>& weights,
                        Scalar zero_floor = Scalar(kDefaultZeroFloor)) {
  const Eigen::Index n = weights.b.size();
  if (window.size() != n)
    throw ArgumentError("one_step_predict: window length " + std::to_string(window.size()) +
                        " does not match " + std::to_string(n) + " weights");
  const auto latent = to_latent(window, zero_floor);
  Scalar acc(0);
  for (Eigen::Index j = 1; j <= n; ++j) acc += weights.b(j - 1) * latent(n - j);
  return tau(acc);
}

/// Latent-scale innovations predictions yhat_1..yhat_T for a series of length
/// T, with yhat_1 = 0 (the zero element tau(0) = log 2 on the data scale).
template <typename DerivedX, typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> innovations_predict_latent(
    const Eigen::MatrixBase<DerivedX>& data, const InnovationsStateT<Scalar>& st,
    Scalar zero_floor = Scalar(kDefaultZeroFloor)) {
  const Eigen::Index len = data.size();
  if (len < 1) throw ArgumentError("innovations_predict: empty series");
  if (st.n_max() < len - 1)
    throw ArgumentError("innovations_predict: state has " + std::to_string(st.n_max()) +
                        " rows but the series needs " + std::to_string(len - 1));
  const auto y = to_latent(data, zero_floor);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> yhat = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(len);
  for (Eigen::Index n = 1; n < len; ++n) {
    Scalar acc(0);
    for (Eigen::Index j = 1; j <= n; ++j) acc += st.theta(n, j) * (y(n - j) - yhat(n - j));
    yhat(n) = acc;
  }
  return yhat;
}

/// One-step predictions Xhat_1..Xhat_T on the data scale.
inline Series innovations_predict(const Series& data, const InnovationsState& st,
                                  double zero_floor = kDefaultZeroFloor) {
  const Eigen::VectorXd yhat = innovations_predict_latent(data.values(), st, zero_floor);
  Eigen::VectorXd out = yhat.unaryExpr([](double v) { return tau(v); });
  return Series(std::move(out), ScaleTag::frechet2_unit, "innovations_predict");
}

}  // namespace tlts
