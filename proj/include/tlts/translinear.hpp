#pragma once

// Transformed-linear arithmetic on the positive reals.
//
// The softplus transform tau(y) = log(1 + e^y) is a bijection R -> (0, inf).
// Addition and scalar multiplication are conjugated through it:
//
//   x1 (+) x2 = tau(tau^-1(x1) + tau^-1(x2))
//   a  (*) x  = tau(a * tau^-1(x))
//
// The additive identity is tau(0) = log 2. Everything here is a pure function
// templated on the scalar type. For double data the latent value tau^-1(x) is
// carried in long double: near zero tau^-1(x) ~ log x, and rounding it to a
// double would cost |log x| ulps on the way back.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include <Eigen/Core>

#include "tlts/errors.hpp"

namespace tlts {

/// Above this argument exp(-y) is below machine epsilon and tau(y) == y to
/// working precision.
inline constexpr double kSoftplusBranch = 30.0;

/// Zero element of the transformed-linear vector space.
template <typename Scalar = double>
constexpr Scalar zero_element() {
  return std::numbers::ln2_v<Scalar>;
}

template <typename Scalar>
Scalar tau(Scalar y) {
  using std::exp;
  using std::log1p;
  if (!std::isfinite(y)) throw DomainError("tau: non-finite argument");
  if (y >= Scalar(kSoftplusBranch)) return y + log1p(exp(-y));
  return log1p(exp(y));
}

template <typename Scalar>
Scalar tau_inv(Scalar x) {
  using std::expm1;
  using std::log;
  if (!(x > Scalar(0)) || !std::isfinite(x))
    throw DomainError("tau_inv: argument must be finite and > 0, got " + std::to_string(double(x)));
  return x + log(-expm1(-x));
}

/// Extended-precision latent value for double data.
inline long double tau_inv(double x) { return tau_inv<long double>(x); }

template <typename Scalar>
Scalar t_add(Scalar x1, Scalar x2) {
  return Scalar(tau(tau_inv(x1) + tau_inv(x2)));
}

template <typename Scalar>
Scalar t_scale(Scalar a, Scalar x) {
  if (!std::isfinite(a)) throw DomainError("t_scale: non-finite scalar");
  return Scalar(tau(a * tau_inv(x)));
}

/// Transformed-linear difference x1 (-) x2, i.e. t_combine([1, -1], [x1, x2]).
template <typename Scalar>
Scalar t_sub(Scalar x1, Scalar x2) {
  return Scalar(tau(tau_inv(x1) - tau_inv(x2)));
}

/// Fused (+)_j a_j (*) x_j, evaluated with a single pass through tau.
template <typename Scalar>
Scalar t_combine(std::span<const Scalar> coeffs, std::span<const Scalar> xs) {
  if (coeffs.size() != xs.size())
    throw DomainError("t_combine: coefficient/value length mismatch");
  if (xs.empty()) throw DomainError("t_combine: empty input");
  decltype(tau_inv(xs[0])) acc(0);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (!std::isfinite(coeffs[j])) throw DomainError("t_combine: non-finite coefficient");
    acc += coeffs[j] * tau_inv(xs[j]);
  }
  return Scalar(tau(acc));
}

template <typename DerivedA, typename DerivedX>
typename DerivedX::Scalar t_combine(const Eigen::MatrixBase<DerivedA>& coeffs,
                                    const Eigen::MatrixBase<DerivedX>& xs) {
  using Scalar = typename DerivedX::Scalar;
  if (coeffs.size() != xs.size())
    throw DomainError("t_combine: coefficient/value length mismatch");
  if (xs.size() == 0) throw DomainError("t_combine: empty input");
  decltype(tau_inv(Scalar(0))) acc(0);
  for (Eigen::Index j = 0; j < xs.size(); ++j) {
    if (!std::isfinite(coeffs(j))) throw DomainError("t_combine: non-finite coefficient");
    acc += Scalar(coeffs(j)) * tau_inv(Scalar(xs(j)));
  }
  return Scalar(tau(acc));
}

/// Elementwise tau^-1 over a vector. Values below `floor` are lifted to it
/// first, so exact zeros (left by clamping) map to a large negative latent
/// value instead of -inf.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> to_latent(
    const Eigen::MatrixBase<Derived>& xs, typename Derived::Scalar floor) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    const Scalar v = xs(i);
    if (!(v >= Scalar(0)) || !std::isfinite(v))
      throw DomainError("to_latent: values must be finite and >= 0");
    out(i) = Scalar(tau_inv(v < floor ? floor : v));
  }
  return out;
}

}  // namespace tlts
