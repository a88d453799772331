#pragma once

#include <Eigen/Eigenvalues>

#include "tlts/rng.hpp"
#include "tlts/simulators.hpp"

namespace tlts::testing {

/// True when 1 + theta_1 z + ... + theta_q z^q has every root outside the
/// unit circle (checked through the companion matrix).
inline bool ma_invertible(const Eigen::VectorXd& theta, double margin = 0.0) {
  Eigen::Index q = theta.size();
  while (q > 0 && theta(q - 1) == 0.0) --q;
  if (q == 0) return true;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(q, q);
  // Roots of z^q p(1/z) = z^q + theta_1 z^{q-1} + ... + theta_q are the
  // reciprocals of the roots of p; they must lie inside the unit circle.
  for (Eigen::Index j = 0; j < q; ++j) companion(0, j) = -theta(j);
  for (Eigen::Index i = 1; i < q; ++i) companion(i, i - 1) = 1.0;
  const Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff() < 1.0 - margin;
}

/// MA(q), q uniform in [1, q_max], theta_j uniform in [0, theta_max], redrawn
/// until invertible with the given root margin.
inline MaModel random_invertible_ma(Rng& rng, Eigen::Index q_max = 5, double theta_max = 0.9,
                                    double margin = 0.0) {
  const auto q = 1 + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(q_max)));
  MaModel m;
  m.theta.resize(q);
  do {
    for (Eigen::Index j = 0; j < q; ++j) m.theta(j) = theta_max * rng.uniform();
  } while (!ma_invertible(m.theta, margin));
  return m;
}

}  // namespace tlts::testing
