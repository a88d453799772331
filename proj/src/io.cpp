#include "tlts/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "tlts/errors.hpp"

namespace tlts::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw IoError(path.string() + ":" + std::to_string(line) + ": not a number: '" + t + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw ArgumentError("table row width does not match header");
  rows.push_back(std::move(row));
}

void write_table(const std::filesystem::path& path, const Table& table) {
  auto out = open_out(path);
  auto put = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  put(table.header);
  for (const auto& r : table.rows) put(r);
  finish(out, path);
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  for (auto& h : split_line(line)) t.header.push_back(trim(h));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()));
    for (auto& c : cells) c = trim(c);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

Series read_series_csv(const std::filesystem::path& path, ScaleTag scale, const std::string& column) {
  const Table t = read_table(path);
  std::size_t col = 0;
  if (!column.empty()) {
    const auto it = std::find(t.header.begin(), t.header.end(), column);
    if (it == t.header.end()) throw IoError(path.string() + ": no column named '" + column + "'");
    col = static_cast<std::size_t>(it - t.header.begin());
  }
  if (t.rows.empty()) throw IoError(path.string() + ": no data rows");
  Eigen::VectorXd v(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = parse_double(t.rows[i][col], path, i + 2);
  return Series(std::move(v), scale, path.filename().string());
}

void write_series_csv(const std::filesystem::path& path, const Series& series) {
  auto out = open_out(path);
  out << "value\n";
  for (Eigen::Index i = 0; i < series.size(); ++i) out << format_double(series[i]) << '\n';
  finish(out, path);
}

void write_tpdf_csv(const std::filesystem::path& path, const Tpdf& tpdf) {
  Table t{{"lag", "sigma", "n_pairs"}, {}};
  for (Eigen::Index h = 0; h < tpdf.sigma.size(); ++h) {
    const auto idx = static_cast<std::size_t>(h);
    const std::size_t np = idx < tpdf.n_pairs.size() ? tpdf.n_pairs[idx] : 0;
    t.add_row({std::to_string(h), format_double(tpdf.sigma(h)), std::to_string(np)});
  }
  write_table(path, t);
}

Tpdf read_tpdf_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  const auto find = [&](const char* name) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw IoError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - t.header.begin());
  };
  const std::size_t c_lag = find("lag"), c_sigma = find("sigma");
  const auto c_pairs = std::find(t.header.begin(), t.header.end(), "n_pairs");
  if (t.rows.empty()) throw IoError(path.string() + ": no rows");
  Tpdf out;
  out.sigma.resize(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double lag = parse_double(t.rows[i][c_lag], path, i + 2);
    if (lag != static_cast<double>(i)) throw IoError(path.string() + ": lags must be 0, 1, 2, ... in order");
    out.sigma(static_cast<Eigen::Index>(i)) = parse_double(t.rows[i][c_sigma], path, i + 2);
    if (c_pairs != t.header.end()) {
      const double np = parse_double(t.rows[i][static_cast<std::size_t>(c_pairs - t.header.begin())], path, i + 2);
      out.n_pairs.push_back(static_cast<std::size_t>(np));
    }
  }
  return out;
}

Json to_json(const MarginalFit& fit) {
  Json j;
  j["alpha_hat"] = fit.alpha_hat;
  j["c_hat"] = fit.c_hat;
  j["threshold"] = fit.threshold;
  j["threshold_quantile"] = fit.threshold_quantile;
  j["n_exceed"] = fit.n_exceed;
  return j;
}

MarginalFit marginal_fit_from_json(const Json& j) {
  try {
    MarginalFit f;
    f.alpha_hat = j.at("alpha_hat").get<double>();
    f.c_hat = j.at("c_hat").get<double>();
    f.threshold = j.value("threshold", 0.0);
    f.threshold_quantile = j.value("threshold_quantile", 0.0);
    f.n_exceed = j.value("n_exceed", std::size_t{0});
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("marginal fit JSON: ") + e.what());
  }
}

Json to_json(const MaModel& model, const Eigen::VectorXd& nu_trace) {
  Json j;
  j["theta"] = std::vector<double>(model.theta.begin(), model.theta.end());
  j["noise_scale"] = model.noise_scale;
  j["nu_trace"] = std::vector<double>(nu_trace.begin(), nu_trace.end());
  return j;
}

MaModel ma_model_from_json(const Json& j) {
  MaModel m;
  try {
    const auto theta = j.at("theta").get<std::vector<double>>();
    m.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    m.noise_scale = j.value("noise_scale", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("MA model JSON: ") + e.what());
  }
  m.validate();
  return m;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("SHA-256 initialisation failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s.push_back(hex[md[i] >> 4]);
    s.push_back(hex[md[i] & 15]);
  }
  return s;
}

}  // namespace tlts::io
