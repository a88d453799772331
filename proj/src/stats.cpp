#include "tlts/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "tlts/errors.hpp"

namespace tlts {

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ArgumentError("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile level outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double empirical_quantile(std::span<const double> data, double p) {
  if (data.empty()) throw ArgumentError("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile level outside [0, 1]");
  std::vector<double> work(data.begin(), data.end());
  const double h = (static_cast<double>(work.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(lo), work.end());
  const double a = work[lo];
  if (lo + 1 >= work.size()) return a;
  const double b = *std::min_element(work.begin() + static_cast<std::ptrdiff_t>(lo) + 1, work.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

double empirical_quantile(const Eigen::VectorXd& data, double p) {
  return empirical_quantile(std::span<const double>(data.data(), static_cast<std::size_t>(data.size())), p);
}

double mean(std::span<const double> data) {
  if (data.empty()) throw ArgumentError("mean of empty sample");
  return std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
}

double sample_sd(std::span<const double> data) {
  if (data.size() < 2) return 0.0;
  const double m = mean(data);
  double ss = 0.0;
  for (double v : data) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(data.size() - 1));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("normal_quantile: p must be in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tlts
