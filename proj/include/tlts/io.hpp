#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "tlts/innovations.hpp"
#include "tlts/series.hpp"
#include "tlts/simulators.hpp"
#include "tlts/tail_estimation.hpp"

namespace tlts::io {

using Json = nlohmann::ordered_json;

/// %.17g: enough digits for an exact round trip.
std::string format_double(double v);

/// Column-oriented table written as CSV with a header row and LF endings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

/// Reads one numeric column (by header name; first column when empty).
Series read_series_csv(const std::filesystem::path& path, ScaleTag scale,
                       const std::string& column = "value");
/// Single column `value`.
void write_series_csv(const std::filesystem::path& path, const Series& series);

/// Columns lag, sigma, n_pairs.
void write_tpdf_csv(const std::filesystem::path& path, const Tpdf& tpdf);
Tpdf read_tpdf_csv(const std::filesystem::path& path);

Json to_json(const MarginalFit& fit);
MarginalFit marginal_fit_from_json(const Json& j);

/// {theta, noise_scale, nu_trace}; nu_trace may be empty.
Json to_json(const MaModel& model, const Eigen::VectorXd& nu_trace = {});
MaModel ma_model_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace tlts::io
