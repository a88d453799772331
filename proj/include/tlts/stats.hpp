#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace tlts {

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7, the R/numpy default).
double empirical_quantile(std::span<const double> data, double p);
double empirical_quantile(const Eigen::VectorXd& data, double p);

/// Type-7 quantiles of an already ascending-sorted sample.
double sorted_quantile(std::span<const double> sorted, double p);

double mean(std::span<const double> data);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> data);

/// Standard normal CDF and its inverse.
double normal_cdf(double z);
double normal_quantile(double p);

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. Each
/// index must write only to its own output slot; results are then independent
/// of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace tlts
