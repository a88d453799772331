#include "tlts/tail_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>

#include "tlts/errors.hpp"
#include "tlts/stats.hpp"

namespace tlts {

namespace {

std::span<const double> view(const Series& s) {
  return {s.values().data(), static_cast<std::size_t>(s.size())};
}

void check_quantile_level(double q, const char* who) {
  if (!(q > 0.0 && q < 1.0)) throw ArgumentError(std::string(who) + ": quantile must lie in (0, 1)");
}

struct Exceedances {
  double threshold;
  double reference;  // largest observation <= threshold
  std::vector<double> values;
};

Exceedances tail_sample(const Series& data, double q, const char* who) {
  check_quantile_level(q, who);
  const auto v = view(data);
  const auto positives = std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; });
  if (positives < 100)
    throw EstimationError(std::string(who) + ": need at least 100 positive values, got " +
                          std::to_string(positives));
  Exceedances out{empirical_quantile(v, q), -std::numeric_limits<double>::infinity(), {}};
  for (double x : v) {
    if (x > out.threshold)
      out.values.push_back(x);
    else
      out.reference = std::max(out.reference, x);
  }
  if (out.values.size() < kMinExceedances)
    throw EstimationError(std::string(who) + ": only " + std::to_string(out.values.size()) +
                          " exceedances above the " + std::to_string(q) + " quantile (need " +
                          std::to_string(kMinExceedances) + ")");
  if (!(out.reference > 0.0))
    throw EstimationError(std::string(who) + ": tail reference order statistic is not positive");
  return out;
}

void require_nonnegative(const Series& data, const char* who) {
  if ((data.values().array() < 0.0).any())
    throw DomainError(std::string(who) + ": negative input value");
}

}  // namespace

double hill_estimator(const Series& data, double threshold_quantile) {
  const auto tail = tail_sample(data, threshold_quantile, "hill_estimator");
  double acc = 0.0;
  for (double x : tail.values) acc += std::log(x / tail.reference);
  const double k = static_cast<double>(tail.values.size());
  if (!(acc > 0.0)) throw EstimationError("hill_estimator: degenerate tail sample");
  return k / acc;
}

double scale_estimator(const Series& data, double alpha_hat, double threshold_quantile) {
  if (!(alpha_hat > 0.0)) throw ArgumentError("scale_estimator: alpha_hat must be > 0");
  const auto tail = tail_sample(data, threshold_quantile, "scale_estimator");
  if (!(tail.threshold > 0.0)) throw EstimationError("scale_estimator: threshold is not positive");
  const double frac = static_cast<double>(tail.values.size()) / static_cast<double>(data.size());
  return frac * std::pow(tail.threshold, alpha_hat);
}

MarginalFit fit_marginal(const Series& data, double threshold_quantile) {
  const auto tail = tail_sample(data, threshold_quantile, "fit_marginal");
  MarginalFit fit;
  fit.alpha_hat = hill_estimator(data, threshold_quantile);
  fit.c_hat = scale_estimator(data, fit.alpha_hat, threshold_quantile);
  fit.threshold_quantile = threshold_quantile;
  fit.threshold = tail.threshold;
  fit.n_exceed = tail.values.size();
  return fit;
}

Series marginal_transform(const Series& data, const MarginalFit& fit) {
  if (!(fit.alpha_hat > 0.0) || !(fit.c_hat > 0.0))
    throw ArgumentError("marginal_transform: alpha_hat and c_hat must be > 0");
  require_nonnegative(data, "marginal_transform");
  const double a = 0.5 * fit.alpha_hat;
  const double s = 1.0 / std::sqrt(fit.c_hat);
  Eigen::VectorXd out = data.values().unaryExpr([&](double x) { return s * std::pow(x, a); });
  return Series(std::move(out), ScaleTag::frechet2_unit, data.source());
}

Series back_transform(const Series& data, const MarginalFit& fit) {
  if (!(fit.alpha_hat > 0.0) || !(fit.c_hat > 0.0))
    throw ArgumentError("back_transform: alpha_hat and c_hat must be > 0");
  if (data.scale() != ScaleTag::frechet2_unit)
    throw ArgumentError("back_transform: input must be on the frechet2_unit scale");
  require_nonnegative(data, "back_transform");
  const double p = 2.0 / fit.alpha_hat;
  const double s = std::sqrt(fit.c_hat);
  Eigen::VectorXd out = data.values().unaryExpr([&](double x) { return std::pow(s * x, p); });
  return Series(std::move(out), ScaleTag::original, data.source());
}

Series empirical_frechet_transform(const Series& data) {
  const Eigen::Index n = data.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return data[a] < data[b]; });
  Eigen::VectorXd out(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double f = static_cast<double>(r + 1) / static_cast<double>(n + 1);
    out(order[static_cast<std::size_t>(r)]) = 1.0 / std::sqrt(-std::log(f));
  }
  return Series(std::move(out), ScaleTag::frechet2_unit, data.source());
}

Series empirical_back_transform(const Series& data, const Series& reference) {
  if (data.scale() != ScaleTag::frechet2_unit)
    throw ArgumentError("empirical_back_transform: input must be on the frechet2_unit scale");
  std::vector<double> sorted(reference.values().begin(), reference.values().end());
  std::sort(sorted.begin(), sorted.end());
  Eigen::VectorXd out = data.values().unaryExpr([&](double x) {
    const double f = x > 0.0 ? std::exp(-1.0 / (x * x)) : 0.0;
    return sorted_quantile(sorted, std::clamp(f, 0.0, 1.0));
  });
  return Series(std::move(out), ScaleTag::original, data.source());
}

Series rank_back_transform(const Series& data, const Series& reference) {
  const Eigen::Index n = data.size();
  if (n < 2 || reference.size() < 1) throw ArgumentError("rank_back_transform: need at least 2 values");
  std::vector<double> sorted(reference.values().begin(), reference.values().end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return data[a] < data[b]; });
  const double m1 = double(sorted.size() - 1);
  Eigen::VectorXd out(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double pos = double(r) * m1 / double(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - double(lo);
    const double v = frac > 0.0 ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]) : sorted[lo];
    out(order[static_cast<std::size_t>(r)]) = v;
  }
  return Series(std::move(out), ScaleTag::original, data.source());
}

Series preprocess(const Series& data) {
  if (data.scale() == ScaleTag::original)
    throw ArgumentError("preprocess: input must be on the frechet2_unit scale");
  const double m = data.values().mean();
  Eigen::VectorXd out = (data.values().array() - m).max(0.0).matrix();
  return Series(std::move(out), ScaleTag::preprocessed, data.source());
}

Tpdf estimate_tpdf(const Series& data, Eigen::Index max_lag, double radial_quantile) {
  if (data.scale() != ScaleTag::preprocessed)
    throw ArgumentError("estimate_tpdf: input must be preprocessed");
  check_quantile_level(radial_quantile, "estimate_tpdf");
  if (max_lag < 0) throw ArgumentError("estimate_tpdf: negative max_lag");
  if (max_lag * 10 >= data.size())
    throw ArgumentError("estimate_tpdf: max_lag must be below length/10 (length " +
                        std::to_string(data.size()) + ")");

  Tpdf out;
  out.sigma = Eigen::VectorXd::Zero(max_lag + 1);
  out.sigma(0) = 1.0;
  out.radial_quantile = radial_quantile;
  out.n_pairs.assign(static_cast<std::size_t>(max_lag) + 1, 0);
  std::vector<std::size_t> clamped(static_cast<std::size_t>(max_lag) + 1, 0);
  out.n_pairs[0] = static_cast<std::size_t>(data.size());

  const Eigen::VectorXd& x = data.values();
  parallel_for(static_cast<std::size_t>(max_lag), [&](std::size_t i) {
    const Eigen::Index h = static_cast<Eigen::Index>(i) + 1;
    const Eigen::Index m = x.size() - h;
    std::vector<double> radius(static_cast<std::size_t>(m));
    for (Eigen::Index t = 0; t < m; ++t) radius[static_cast<std::size_t>(t)] = std::hypot(x(t), x(t + h));
    const double u = empirical_quantile(radius, radial_quantile);
    double acc = 0.0;
    std::size_t count = 0;
    for (Eigen::Index t = 0; t < m; ++t) {
      const double r = radius[static_cast<std::size_t>(t)];
      if (r > u) {
        acc += x(t) * x(t + h) / (r * r);
        ++count;
      }
    }
    if (count < kMinExceedances)
      throw EstimationError("estimate_tpdf: only " + std::to_string(count) +
                            " radial exceedances at lag " + std::to_string(h));
    double s = 2.0 * acc / static_cast<double>(count);
    if (s < 0.0 || s > 1.0) {
      s = std::clamp(s, 0.0, 1.0);
      clamped[static_cast<std::size_t>(h)] = 1;
    }
    out.sigma(h) = s;
    out.n_pairs[static_cast<std::size_t>(h)] = count;
  });
  out.n_clamped = std::accumulate(clamped.begin(), clamped.end(), std::size_t{0});
  return out;
}

double chi_estimator(const Series& data, Eigen::Index lag, double quantile) {
  if (!(quantile >= 0.8 && quantile < 1.0))
    throw ArgumentError("chi_estimator: quantile must lie in [0.8, 1)");
  if (lag < 1 || lag >= data.size()) throw ArgumentError("chi_estimator: lag out of range");
  const Eigen::VectorXd& x = data.values();
  const double u = empirical_quantile(x, quantile);
  std::size_t base = 0;
  std::size_t joint = 0;
  for (Eigen::Index t = 0; t + lag < x.size(); ++t) {
    if (x(t) > u) {
      ++base;
      if (x(t + lag) > u) ++joint;
    }
  }
  if (base < kMinExceedances)
    throw EstimationError("chi_estimator: only " + std::to_string(base) + " exceedances");
  return static_cast<double>(joint) / static_cast<double>(base);
}

}  // namespace tlts
