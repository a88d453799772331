#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tlts/io.hpp"

namespace tlts {

inline constexpr int kConfigSchemaVersion = 1;

struct DataConfig {
  std::string source = "simulate";  ///< "simulate" or "csv"
  std::string model;                ///< garch | logistic | ma (simulate only)
  io::Json params = io::Json::object();
  Eigen::Index n = 100000;
  std::filesystem::path path;       ///< csv only
  std::string column = "value";
};

struct MarginalConfig {
  std::string method = "hill";  ///< hill | fixed | empirical
  double threshold_quantile = 0.99;
  double alpha = 2.0;  ///< fixed only
  double c = 1.0;      ///< fixed only
  /// How simulated fitted series return to the original scale: "inverse"
  /// (the inverse of `method`) or "rank" (rank_back_transform onto the data).
  std::string back_transform = "inverse";
};

struct TpdfConfig {
  Eigen::Index max_lag = 500;
  double radial_quantile = 0.99;
};

struct InnovationsConfig {
  Eigen::Index n_max = 500;
  double trunc_eps = 1e-3;
  Eigen::Index q_max = 25;
  double conv_tol = 1e-6;
  Eigen::Index conv_rows = 10;
  double zero_floor = kDefaultZeroFloor;
};

struct DiagnosticsConfig {
  std::vector<double> run_quantiles{0.95, 0.98, 0.99, 0.995, 0.999};
  Eigen::Index sum_window = 12;
  std::vector<double> sum_quantiles{0.95, 0.98, 0.99, 0.995, 0.999};
  int bootstrap_resamples = 500;
  Eigen::Index chi_lag = 1;
  double chi_quantile = 0.95;
  Eigen::Index compare_lags = 25;
};

struct IntervalsConfig {
  bool enabled = false;
  Eigen::Index train_size = 70000;
  Eigen::Index window = 30;
  double level = 0.95;
  Eigen::Index q_star = 5;
  Eigen::Index n_decomp = 100;
  double large_quantile = 0.95;
  std::optional<double> bandwidth;
  bool baseline = true;
};

/// A complete, serializable description of one pipeline run.
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name = "experiment";
  std::uint64_t seed = 0;
  DataConfig data;
  MarginalConfig marginal;
  TpdfConfig tpdf;
  InnovationsConfig innovations;
  DiagnosticsConfig diagnostics;
  IntervalsConfig intervals;
};

/// Strict parse: unknown keys, wrong types and a schema_version other than
/// kConfigSchemaVersion are ArgumentErrors. Relative csv paths resolve
/// against `base_dir`.
ExperimentConfig parse_config(const io::Json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
io::Json to_json(const ExperimentConfig& config);
/// Range checks and input-file existence.
void validate(const ExperimentConfig& config);

/// Independent stream seeds derived from the master seed.
struct StageSeeds {
  std::uint64_t data = 0;
  std::uint64_t fitted = 0;
  std::uint64_t bootstrap = 0;
  std::uint64_t decomposition = 0;
};
StageSeeds derive_seeds(std::uint64_t master);

struct PipelineResult {
  std::filesystem::path out_dir;
  io::Json summary;
  std::map<std::string, std::string> hashes;  ///< artifact file name -> sha256
};

/// Draws n values of a named model: garch {alpha0, alpha1, beta1},
/// logistic {beta} or ma {theta, noise_scale}. Unknown parameter keys are
/// ArgumentErrors.
Series simulate_model(const std::string& model, const io::Json& params, Eigen::Index n,
                      std::uint64_t seed);

/// Moves original-scale data to the frechet2_unit scale with the configured
/// method; `fit` receives the marginal fit for hill and fixed.
Series to_frechet(const Series& data, const MarginalConfig& marginal, MarginalFit* fit = nullptr);

/// Inverse of to_frechet, or with back_transform = "rank" a rank map onto the
/// marginal of `reference` (the original-scale data).
Series from_frechet(const Series& data, const MarginalConfig& marginal, const MarginalFit& fit,
                    const Series& reference);

/// Runs simulate/ingest, marginal fit, transform, preprocess, TPDF,
/// innovations, MA fit, fitted simulation, back-transform, diagnostics and
/// (optionally) the interval study, writing every artifact plus
/// manifest.json and summary.{json,txt} into `out_dir`. A failing stage is
/// recorded in the manifest before the error is rethrown.
PipelineResult run_pipeline(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace tlts
