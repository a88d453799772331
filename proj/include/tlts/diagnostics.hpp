#pragma once

#include <cstdint>
#include <vector>

#include "tlts/prediction_uncertainty.hpp"
#include "tlts/series.hpp"

namespace tlts {

struct RunLengthSummary {
  double quantile = 0.0;
  double mean_run = 0.0;
  double std_err = 0.0;
  std::size_t n_runs = 0;
};

/// Maximal runs of consecutive values strictly above the empirical quantile.
RunLengthSummary run_lengths(const Series& data, double quantile);

struct SumQuantileSummary {
  Eigen::Index window = 0;
  double quantile = 0.0;
  double value = 0.0;
  double std_err = 0.0;
};

inline constexpr int kSumBootstrapResamples = 500;

/// Empirical quantiles of rolling `window`-sums. Standard errors come from a
/// nonoverlapping block bootstrap of the rolling sums (block = 10 * window,
/// `resamples` draws seeded from `seed`).
std::vector<SumQuantileSummary> sum_quantiles(const Series& data, Eigen::Index window,
                                              const std::vector<double>& quantiles,
                                              std::uint64_t seed,
                                              int resamples = kSumBootstrapResamples);

struct CoverageSummary {
  double coverage = 0.0;
  std::size_t n = 0;
};

CoverageSummary evaluate_coverage(const IntervalSet& intervals);

}  // namespace tlts
