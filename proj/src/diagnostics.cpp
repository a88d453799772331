#include "tlts/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tlts/errors.hpp"
#include "tlts/rng.hpp"
#include "tlts/stats.hpp"

namespace tlts {

RunLengthSummary run_lengths(const Series& data, double quantile) {
  if (!(quantile >= 0.5 && quantile < 1.0)) throw ArgumentError("run_lengths: quantile must lie in [0.5, 1)");
  const Eigen::VectorXd& x = data.values();
  const double u = empirical_quantile(x, quantile);
  std::vector<double> runs;
  double current = 0.0;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    if (x(t) > u) {
      current += 1.0;
    } else if (current > 0.0) {
      runs.push_back(current);
      current = 0.0;
    }
  }
  if (current > 0.0) runs.push_back(current);
  if (runs.empty()) throw EstimationError("run_lengths: no values above the " + std::to_string(quantile) + " quantile");

  RunLengthSummary out;
  out.quantile = quantile;
  out.n_runs = runs.size();
  out.mean_run = mean(runs);
  out.std_err = sample_sd(runs) / std::sqrt(static_cast<double>(runs.size()));
  return out;
}

std::vector<SumQuantileSummary> sum_quantiles(const Series& data, Eigen::Index window,
                                              const std::vector<double>& quantiles, std::uint64_t seed,
                                              int resamples) {
  if (window < 1) throw ArgumentError("sum_quantiles: window must be >= 1");
  if (window * 10 >= data.size())
    throw ArgumentError("sum_quantiles: window must be below length/10");
  if (resamples < 2) throw ArgumentError("sum_quantiles: need at least 2 bootstrap resamples");
  for (double q : quantiles)
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("sum_quantiles: quantiles must lie in [0, 1]");

  const Eigen::VectorXd& x = data.values();
  const Eigen::Index m = x.size() - window + 1;
  std::vector<double> sums(static_cast<std::size_t>(m));
  for (Eigen::Index t = 0; t < m; ++t) sums[static_cast<std::size_t>(t)] = x.segment(t, window).sum();

  std::vector<double> sorted = sums;
  std::sort(sorted.begin(), sorted.end());

  const std::size_t block = static_cast<std::size_t>(10 * window);
  const std::size_t n_blocks = std::max<std::size_t>(1, sums.size() / block);
  const std::size_t used = std::min(sums.size(), n_blocks * block);
  const std::size_t nq = quantiles.size();
  std::vector<std::vector<double>> boot(static_cast<std::size_t>(resamples), std::vector<double>(nq));
  const std::uint64_t base = splitmix64(seed);
  parallel_for(boot.size(), [&](std::size_t r) {
    Rng rng(base + r);
    std::vector<double> sample;
    sample.reserve(used);
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::size_t start = static_cast<std::size_t>(rng.below(n_blocks)) * block;
      const std::size_t len = std::min(block, sums.size() - start);
      sample.insert(sample.end(), sums.begin() + static_cast<std::ptrdiff_t>(start),
                    sums.begin() + static_cast<std::ptrdiff_t>(start + len));
    }
    std::sort(sample.begin(), sample.end());
    for (std::size_t i = 0; i < nq; ++i) boot[r][i] = sorted_quantile(sample, quantiles[i]);
  });

  std::vector<SumQuantileSummary> out;
  for (std::size_t i = 0; i < nq; ++i) {
    std::vector<double> draws(boot.size());
    for (std::size_t r = 0; r < boot.size(); ++r) draws[r] = boot[r][i];
    out.push_back({window, quantiles[i], sorted_quantile(sorted, quantiles[i]), sample_sd(draws)});
  }
  return out;
}

CoverageSummary evaluate_coverage(const IntervalSet& intervals) {
  if (intervals.empty()) throw ArgumentError("evaluate_coverage: empty interval set");
  std::size_t hit = 0;
  for (const auto& row : intervals) {
    if (!row.actual) throw ArgumentError("evaluate_coverage: row without an actual value");
    if (row.lower <= *row.actual && *row.actual <= row.upper) ++hit;
  }
  return {static_cast<double>(hit) / static_cast<double>(intervals.size()), intervals.size()};
}

}  // namespace tlts
