#include "tlts/prediction_uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "tlts/diagnostics.hpp"
#include "tlts/errors.hpp"
#include "tlts/rng.hpp"
#include "tlts/stats.hpp"

namespace tlts {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kMinBandwidth = 0.01;
constexpr double kUpperAngleCap = kHalfPi - 0.01;
constexpr double kUpperMassQuantile = 0.999;
constexpr Eigen::Index kGeometricNodes = 1024;
constexpr Eigen::Index kLinearNodes = 3072;

void check_level(double level, const char* who) {
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError(std::string(who) + ": level must lie in (0, 1)");
}

Eigen::Matrix2d psd_sqrt(const Eigen::Matrix2d& A) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(A);
  const Eigen::Vector2d w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd random_orthogonal(Eigen::Index q, Rng& rng) {
  Eigen::MatrixXd z(q, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < q; ++i) z(i, j) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(q, q);
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

struct SortedAtoms {
  std::vector<double> angle;
  std::vector<double> mass;
  std::vector<double> cum;  // cumulative mass fraction
};

SortedAtoms sorted_atoms(const AngularMeasure& H) {
  if (H.points.empty()) throw ArgumentError("angular measure has no atoms");
  std::vector<std::size_t> order(H.points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> ang(H.points.size());
  for (std::size_t i = 0; i < ang.size(); ++i) ang[i] = H.points[i].angle();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ang[a] < ang[b]; });
  SortedAtoms s;
  double total = 0.0;
  for (std::size_t i : order) {
    s.angle.push_back(ang[i]);
    s.mass.push_back(H.points[i].mass);
    total += H.points[i].mass;
  }
  if (!(total > 0.0)) throw ArgumentError("angular measure has zero total mass");
  double acc = 0.0;
  for (double m : s.mass) {
    acc += m;
    s.cum.push_back(acc / total);
  }
  return s;
}

double atom_quantile(const SortedAtoms& s, double p) {
  const auto it = std::lower_bound(s.cum.begin(), s.cum.end(), p - 1e-12);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - s.cum.begin()), s.angle.size() - 1);
  return s.angle[i];
}

double gauss_kernel(double u) {
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

/// Row scaling so that diag(B B') matches diag(A) exactly.
Eigen::MatrixXd diagonal_correction(Eigen::MatrixXd B, const Eigen::Matrix2d& A) {
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double g = B.row(i).squaredNorm();
    if (g > 0.0) B.row(i) *= std::sqrt(A(i, i) / g);
  }
  return B;
}

}  // namespace

Eigen::MatrixXd cp_decompose(const Eigen::Matrix2d& A, Eigen::Index q_star, std::uint64_t seed,
                             double tol, int max_iter) {
  if (q_star < 2) throw ArgumentError("cp_decompose: q_star must be >= 2");
  if (!A.isApprox(A.transpose())) throw ArgumentError("cp_decompose: A must be symmetric");
  if ((A.array() < 0.0).any()) throw ArgumentError("cp_decompose: A must be entrywise nonnegative");
  if (Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(A).eigenvalues().minCoeff() < -1e-12 * std::max(1.0, A.trace()))
    throw ArgumentError("cp_decompose: A must be positive semidefinite");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, q_star);
  C.leftCols(2) = psd_sqrt(A);
  Rng rng(seed);
  Eigen::MatrixXd Q = random_orthogonal(q_star, rng);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd CQ = C * Q;
    const Eigen::MatrixXd P = CQ.cwiseMax(0.0);
    if ((CQ - P).norm() < tol) return diagonal_correction(P, A);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(C.transpose() * P, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Q = svd.matrixU() * svd.matrixV().transpose();
  }
  throw DecompositionError("cp_decompose: no nonnegative factor after " + std::to_string(max_iter) +
                           " iterations");
}

Eigen::MatrixXd cp_decompose_retry(const Eigen::Matrix2d& A, Eigen::Index q_star, std::uint64_t seed,
                                   const CpOptions& options) {
  for (int r = 0; r < std::max(options.max_retries, 1); ++r) {
    const std::uint64_t s = r == 0 ? seed : splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * std::uint64_t(r)));
    try {
      Eigen::MatrixXd B = cp_decompose(A, q_star, s, options.tolerance, options.max_iter);
      if ((B * B.transpose() - A).norm() <= options.residual_tol) return B;
    } catch (const DecompositionError&) {
    }
  }
  throw DecompositionError("cp_decompose: all " + std::to_string(options.max_retries) +
                           " starts failed to converge");
}

double AngularPoint::angle() const {
  return std::atan2(direction.y(), direction.x());
}

double AngularMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& p : points) s += p.mass;
  return s;
}

AngularMeasure angular_measure(const std::vector<Eigen::MatrixXd>& factors) {
  if (factors.empty()) throw ArgumentError("angular_measure: no factors");
  AngularMeasure H;
  H.n_decomp = static_cast<Eigen::Index>(factors.size());
  H.q_star = factors.front().cols();
  const double inv = 1.0 / static_cast<double>(factors.size());
  for (const auto& B : factors) {
    if (B.rows() != 2) throw ArgumentError("angular_measure: factors must have two rows");
    if ((B.array() < 0.0).any()) throw ArgumentError("angular_measure: factors must be nonnegative");
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      const double n2 = B.col(j).squaredNorm();
      if (!(n2 > 0.0)) continue;
      H.points.push_back({B.col(j) / std::sqrt(n2), n2 * inv});
    }
  }
  return H;
}

AngularMeasure build_angular_measure(const Eigen::Matrix2d& A, Eigen::Index q_star, Eigen::Index n_decomp,
                                     std::uint64_t seed, const CpOptions& options) {
  if (n_decomp < 1) throw ArgumentError("build_angular_measure: n_decomp must be >= 1");
  std::vector<Eigen::MatrixXd> factors(static_cast<std::size_t>(n_decomp));
  parallel_for(factors.size(), [&](std::size_t k) {
    factors[k] = cp_decompose_retry(A, q_star, seed + k + 1, options);
  });
  return angular_measure(factors);
}

double angle_quantile(const AngularMeasure& H, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("angle_quantile: p must lie in [0, 1]");
  return atom_quantile(sorted_atoms(H), p);
}

JointRegion joint_region(const AngularMeasure& H, double level) {
  check_level(level, "joint_region");
  const auto s = sorted_atoms(H);
  return {atom_quantile(s, 0.5 * (1.0 - level)), atom_quantile(s, 0.5 * (1.0 + level))};
}

double silverman_bandwidth(const AngularMeasure& H) {
  const auto s = sorted_atoms(H);
  double sw = 0.0, sw2 = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < s.angle.size(); ++i) {
    sw += s.mass[i];
    sw2 += s.mass[i] * s.mass[i];
    swx += s.mass[i] * s.angle[i];
  }
  const double mu = swx / sw;
  double var = 0.0;
  for (std::size_t i = 0; i < s.angle.size(); ++i) var += s.mass[i] * (s.angle[i] - mu) * (s.angle[i] - mu);
  const double sd = std::sqrt(var / sw);
  const double iqr = atom_quantile(s, 0.75) - atom_quantile(s, 0.25);
  const double n_eff = sw * sw / sw2;
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = std::max(sd, iqr / 1.34);
  const double bw = 0.9 * spread * std::pow(n_eff, -0.2);
  return bw > kMinBandwidth ? bw : kMinBandwidth;
}

double AngularDensity::operator()(double angle) const {
  if (!(angle >= 0.0 && angle <= kHalfPi) || grid.size() < 2) return 0.0;
  const double step = grid(1) - grid(0);
  const double pos = angle / step;
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), grid.size() - 2);
  const double f = pos - static_cast<double>(i);
  return (1.0 - f) * density(i) + f * density(i + 1);
}

double AngularDensity::integral() const {
  if (grid.size() < 2) return 0.0;
  const double step = grid(1) - grid(0);
  return step * (density.sum() - 0.5 * (density(0) + density(density.size() - 1)));
}

double AngularDensity::mass_quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("mass_quantile: p must lie in [0, 1]");
  const Eigen::Index n = grid.size();
  std::vector<double> cum(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 1; i < n; ++i)
    cum[static_cast<std::size_t>(i)] =
        cum[static_cast<std::size_t>(i - 1)] + 0.5 * (density(i) + density(i - 1)) * (grid(i) - grid(i - 1));
  const double target = p * cum.back();
  const auto it = std::lower_bound(cum.begin(), cum.end(), target);
  if (it == cum.begin()) return grid(0);
  if (it == cum.end()) return grid(n - 1);
  const auto i = static_cast<Eigen::Index>(it - cum.begin());
  const double c0 = cum[static_cast<std::size_t>(i - 1)], c1 = cum[static_cast<std::size_t>(i)];
  const double f = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
  return grid(i - 1) + f * (grid(i) - grid(i - 1));
}

AngularDensity angular_density(const AngularMeasure& H, std::optional<double> bandwidth,
                               Eigen::Index grid_points) {
  if (grid_points < 2) throw ArgumentError("angular_density: need at least 2 grid points");
  const double bw = bandwidth ? *bandwidth : silverman_bandwidth(H);
  if (!(bw > 0.0)) throw ArgumentError("angular_density: bandwidth must be > 0");
  AngularDensity d;
  d.bandwidth = bw;
  d.grid = Eigen::VectorXd::LinSpaced(grid_points, 0.0, kHalfPi);
  d.density = Eigen::VectorXd::Zero(grid_points);
  for (const auto& p : H.points) {
    const double a = p.angle();
    for (Eigen::Index i = 0; i < grid_points; ++i) {
      const double g = d.grid(i);
      d.density(i) += p.mass *
                      (gauss_kernel((g - a) / bw) + gauss_kernel((g + a) / bw) +
                       gauss_kernel((g - (std::numbers::pi - a)) / bw)) /
                      bw;
    }
  }
  return d;
}

Interval conditional_interval(double x1, const AngularDensity& h, double level) {
  check_level(level, "conditional_interval");
  if (!(x1 > 0.0) || !std::isfinite(x1)) throw ArgumentError("conditional_interval: x1 must be positive and finite");
  const double theta_hi = std::min(h.mass_quantile(kUpperMassQuantile), kUpperAngleCap);
  const double upper = x1 * (std::tan(theta_hi) + 10.0);
  const double knee = x1 / 100.0;

  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(kGeometricNodes + kLinearNodes + 1));
  grid.push_back(0.0);
  const double g0 = std::log(x1 * 1e-6), g1 = std::log(knee);
  for (Eigen::Index i = 0; i < kGeometricNodes; ++i)
    grid.push_back(std::exp(g0 + (g1 - g0) * static_cast<double>(i) / static_cast<double>(kGeometricNodes)));
  for (Eigen::Index i = 0; i < kLinearNodes; ++i)
    grid.push_back(knee + (upper - knee) * static_cast<double>(i) / static_cast<double>(kLinearNodes - 1));

  std::vector<double> cdf(grid.size(), 0.0);
  auto f = [&](double x2) {
    const double r2 = x1 * x1 + x2 * x2;
    return h(std::atan2(x2, x1)) / (r2 * r2);
  };
  double prev = f(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = f(grid[i]);
    cdf[i] = cdf[i - 1] + 0.5 * (prev + cur) * (grid[i] - grid[i - 1]);
    prev = cur;
  }
  const double total = cdf.back();
  if (!(total > 0.0) || !std::isfinite(total))
    throw EstimationError("conditional_interval: conditional density has no mass");

  auto invert = [&](double p) {
    const double target = p * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.begin()) return grid.front();
    if (it == cdf.end()) return grid.back();
    const auto i = static_cast<std::size_t>(it - cdf.begin());
    const double c0 = cdf[i - 1], c1 = cdf[i];
    const double w = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
    return grid[i - 1] + w * (grid[i] - grid[i - 1]);
  };
  return {invert(0.5 * (1.0 - level)), invert(0.5 * (1.0 + level))};
}

IntervalSet gaussian_baseline(const Series& train, const Series& test, Eigen::Index n, double level) {
  check_level(level, "gaussian_baseline");
  const Eigen::Index n_train = train.size();
  if (n < 1) throw ArgumentError("gaussian_baseline: n must be >= 1");
  if (n >= n_train) throw ArgumentError("gaussian_baseline: window must be shorter than the training series");
  if (test.size() < 1) throw ArgumentError("gaussian_baseline: empty test series");

  std::vector<double> sorted(train.values().begin(), train.values().end());
  std::sort(sorted.begin(), sorted.end());
  const double nt = static_cast<double>(n_train);
  auto to_score = [&](double v) {
    const auto r = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
    const double rc = std::clamp(static_cast<double>(r), 1.0, nt);
    return normal_quantile((rc - 0.5) / nt);
  };
  auto from_score = [&](double z) { return sorted_quantile(sorted, std::clamp(normal_cdf(z), 0.0, 1.0)); };

  const Eigen::Index total = n_train + test.size();
  Eigen::VectorXd z(total);
  for (Eigen::Index t = 0; t < n_train; ++t) z(t) = to_score(train[t]);
  for (Eigen::Index t = 0; t < test.size(); ++t) z(n_train + t) = to_score(test[t]);

  const double mu = z.head(n_train).mean();
  const Eigen::VectorXd zc = z.head(n_train).array() - mu;
  Eigen::VectorXd gamma(n + 1);
  for (Eigen::Index h = 0; h <= n; ++h)
    gamma(h) = zc.head(n_train - h).dot(zc.tail(n_train - h)) / nt;

  const auto w = direct_predictor_weights(gamma, n);
  const double half = normal_quantile(0.5 * (1.0 + level)) * std::sqrt(std::max(w.nu, 0.0));

  IntervalSet rows;
  rows.reserve(static_cast<std::size_t>(test.size()));
  for (Eigen::Index t = n_train; t < total; ++t) {
    double zhat = mu;
    for (Eigen::Index j = 1; j <= n; ++j) zhat += w.b(j - 1) * (z(t - j) - mu);
    rows.push_back({t, from_score(zhat), from_score(zhat - half), from_score(zhat + half), test[t - n_train]});
  }
  return rows;
}

IntervalStudy run_interval_study(const Series& series, Eigen::Index train_size, const Tpdf& tpdf,
                                 const IntervalStudyOptions& options) {
  if (series.scale() != ScaleTag::frechet2_unit)
    throw ArgumentError("run_interval_study: series must be on the frechet2_unit scale");
  const Eigen::Index W = options.window;
  if (W < 1) throw ArgumentError("run_interval_study: window must be >= 1");
  if (train_size < W || train_size >= series.size())
    throw ArgumentError("run_interval_study: train_size must lie in [window, length)");
  check_level(options.level, "run_interval_study");
  check_level(options.large_quantile, "run_interval_study");

  IntervalStudy out;
  out.weights = direct_predictor_weights(tpdf, W);
  out.tpdm = prediction_tpdm(tpdf, W);
  out.measure = build_angular_measure(out.tpdm, options.q_star, options.n_decomp, options.seed, options.cp);
  out.region = joint_region(out.measure, options.level);
  out.density = angular_density(out.measure, options.bandwidth);

  const Eigen::Index n_test = series.size() - train_size;
  Eigen::VectorXd xhat(n_test), actual(n_test);
  for (Eigen::Index i = 0; i < n_test; ++i) {
    const Eigen::Index t = train_size + i;
    xhat(i) = one_step_predict(series.values().segment(t - W, W), out.weights);
    actual(i) = series[t];
  }

  Eigen::VectorXd radius = (xhat.array().square() + actual.array().square()).sqrt();
  out.radius_threshold = empirical_quantile(radius, options.large_quantile);
  std::size_t inside = 0;
  for (Eigen::Index i = 0; i < n_test; ++i) {
    if (radius(i) > out.radius_threshold) {
      ++out.n_radial_large;
      if (out.region.contains(std::atan2(actual(i), xhat(i)))) ++inside;
    }
  }
  out.joint_capture = out.n_radial_large ? double(inside) / double(out.n_radial_large) : 0.0;

  out.xhat_threshold = empirical_quantile(xhat, options.large_quantile);
  const Interval unit = conditional_interval(1.0, out.density, options.level);
  IntervalSet large_rows;
  out.rows.reserve(static_cast<std::size_t>(n_test));
  out.large.reserve(static_cast<std::size_t>(n_test));
  for (Eigen::Index i = 0; i < n_test; ++i) {
    const bool big = xhat(i) > out.xhat_threshold;
    IntervalRow row{train_size + i, xhat(i), 0.0, 0.0, actual(i)};
    if (big) {
      const Interval iv = conditional_interval(xhat(i), out.density, options.level);
      row.lower = iv.lower;
      row.upper = iv.upper;
      large_rows.push_back(row);
    } else {
      row.lower = unit.lower * xhat(i);
      row.upper = unit.upper * xhat(i);
    }
    out.rows.push_back(row);
    out.large.push_back(big);
  }
  const auto cov = evaluate_coverage(large_rows);
  out.coverage = cov.coverage;
  out.n_large = cov.n;
  return out;
}

}  // namespace tlts
