#include "tlts/pipeline.hpp"

#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "tlts/diagnostics.hpp"
#include "tlts/errors.hpp"
#include "tlts/innovations.hpp"
#include "tlts/prediction_uncertainty.hpp"
#include "tlts/rng.hpp"
#include "tlts/simulators.hpp"
#include "tlts/tail_estimation.hpp"

namespace tlts {

namespace {

using io::Json;
namespace fs = std::filesystem;

/// Object reader that rejects keys it was never asked about.
class Strict {
public:
  Strict(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ArgumentError(where_ + ": expected a JSON object");
  }
  ~Strict() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ArgumentError(where_ + "." + key + ": wrong type");
    }
  }

  template <typename T>
  void require(const std::string& key, T& out) {
    if (!has(key)) throw ArgumentError(where_ + "." + key + ": required");
    get(key, out);
  }

  const Json& sub(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ArgumentError(where_ + ": unknown key '" + k + "'");
  }

private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& msg) {
  if (!ok) throw ArgumentError("config: " + msg);
}

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

Json tpdf_json(const Tpdf& t) {
  Json j;
  j["max_lag"] = t.max_lag();
  j["n_clamped"] = t.n_clamped;
  return j;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

StageSeeds derive_seeds(std::uint64_t master) {
  return {splitmix64(master ^ 0x1ULL), splitmix64(master ^ 0x2ULL), splitmix64(master ^ 0x3ULL),
          splitmix64(master ^ 0x4ULL)};
}

ExperimentConfig parse_config(const Json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  Strict top(j, "config");
  top.require("schema_version", c.schema_version);
  if (c.schema_version != kConfigSchemaVersion)
    throw ArgumentError("config: unsupported schema_version " + std::to_string(c.schema_version) +
                        " (expected " + std::to_string(kConfigSchemaVersion) + ")");
  top.get("name", c.name);
  top.require("seed", c.seed);

  if (top.has("data")) {
    Strict d(top.sub("data"), "config.data");
    d.require("source", c.data.source);
    d.get("model", c.data.model);
    if (d.has("params")) c.data.params = d.sub("params");
    d.get("n", c.data.n);
    std::string path;
    d.get("path", path);
    if (!path.empty()) c.data.path = fs::path(path).is_absolute() ? fs::path(path) : base_dir / path;
    d.get("column", c.data.column);
    d.finish();
  } else {
    throw ArgumentError("config.data: required");
  }
  if (top.has("marginal")) {
    Strict m(top.sub("marginal"), "config.marginal");
    m.require("method", c.marginal.method);
    m.get("threshold_quantile", c.marginal.threshold_quantile);
    m.get("alpha", c.marginal.alpha);
    m.get("c", c.marginal.c);
    m.get("back_transform", c.marginal.back_transform);
    m.finish();
  }
  if (top.has("tpdf")) {
    Strict t(top.sub("tpdf"), "config.tpdf");
    t.get("max_lag", c.tpdf.max_lag);
    t.get("radial_quantile", c.tpdf.radial_quantile);
    t.finish();
  }
  if (top.has("innovations")) {
    Strict s(top.sub("innovations"), "config.innovations");
    s.get("n_max", c.innovations.n_max);
    s.get("trunc_eps", c.innovations.trunc_eps);
    s.get("q_max", c.innovations.q_max);
    s.get("conv_tol", c.innovations.conv_tol);
    s.get("conv_rows", c.innovations.conv_rows);
    s.get("zero_floor", c.innovations.zero_floor);
    s.finish();
  }
  if (top.has("diagnostics")) {
    Strict s(top.sub("diagnostics"), "config.diagnostics");
    s.get("run_quantiles", c.diagnostics.run_quantiles);
    s.get("sum_window", c.diagnostics.sum_window);
    s.get("sum_quantiles", c.diagnostics.sum_quantiles);
    s.get("bootstrap_resamples", c.diagnostics.bootstrap_resamples);
    s.get("chi_lag", c.diagnostics.chi_lag);
    s.get("chi_quantile", c.diagnostics.chi_quantile);
    s.get("compare_lags", c.diagnostics.compare_lags);
    s.finish();
  }
  if (top.has("intervals")) {
    Strict s(top.sub("intervals"), "config.intervals");
    s.get("enabled", c.intervals.enabled);
    s.get("train_size", c.intervals.train_size);
    s.get("window", c.intervals.window);
    s.get("level", c.intervals.level);
    s.get("q_star", c.intervals.q_star);
    s.get("n_decomp", c.intervals.n_decomp);
    s.get("large_quantile", c.intervals.large_quantile);
    if (s.has("bandwidth")) {
      double bw = 0.0;
      s.get("bandwidth", bw);
      c.intervals.bandwidth = bw;
    }
    s.get("baseline", c.intervals.baseline);
    s.finish();
  }
  top.finish();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(io::read_json(path), path.parent_path());
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["seed"] = c.seed;
  Json d;
  d["source"] = c.data.source;
  if (c.data.source == "simulate") {
    d["model"] = c.data.model;
    d["params"] = c.data.params;
    d["n"] = c.data.n;
  } else {
    d["path"] = c.data.path.string();
    d["column"] = c.data.column;
  }
  j["data"] = d;
  Json m;
  m["method"] = c.marginal.method;
  if (c.marginal.method == "hill") m["threshold_quantile"] = c.marginal.threshold_quantile;
  if (c.marginal.method == "fixed") {
    m["alpha"] = c.marginal.alpha;
    m["c"] = c.marginal.c;
  }
  m["back_transform"] = c.marginal.back_transform;
  j["marginal"] = m;
  j["tpdf"] = {{"max_lag", c.tpdf.max_lag}, {"radial_quantile", c.tpdf.radial_quantile}};
  j["innovations"] = {{"n_max", c.innovations.n_max},         {"trunc_eps", c.innovations.trunc_eps},
                      {"q_max", c.innovations.q_max},         {"conv_tol", c.innovations.conv_tol},
                      {"conv_rows", c.innovations.conv_rows}, {"zero_floor", c.innovations.zero_floor}};
  j["diagnostics"] = {{"run_quantiles", c.diagnostics.run_quantiles},
                      {"sum_window", c.diagnostics.sum_window},
                      {"sum_quantiles", c.diagnostics.sum_quantiles},
                      {"bootstrap_resamples", c.diagnostics.bootstrap_resamples},
                      {"chi_lag", c.diagnostics.chi_lag},
                      {"chi_quantile", c.diagnostics.chi_quantile},
                      {"compare_lags", c.diagnostics.compare_lags}};
  Json iv = {{"enabled", c.intervals.enabled},
             {"train_size", c.intervals.train_size},
             {"window", c.intervals.window},
             {"level", c.intervals.level},
             {"q_star", c.intervals.q_star},
             {"n_decomp", c.intervals.n_decomp},
             {"large_quantile", c.intervals.large_quantile},
             {"baseline", c.intervals.baseline}};
  if (c.intervals.bandwidth) iv["bandwidth"] = *c.intervals.bandwidth;
  j["intervals"] = iv;
  return j;
}

void validate(const ExperimentConfig& c) {
  check(c.data.source == "simulate" || c.data.source == "csv", "data.source must be 'simulate' or 'csv'");
  if (c.data.source == "simulate") {
    check(c.data.model == "garch" || c.data.model == "logistic" || c.data.model == "ma",
          "data.model must be garch, logistic or ma");
    check(c.data.n > 0, "data.n must be positive");
  } else {
    check(!c.data.path.empty(), "data.path is required for csv input");
    if (!fs::exists(c.data.path)) throw IoError("config: data file not found: " + c.data.path.string());
  }
  const auto& m = c.marginal;
  check(m.method == "hill" || m.method == "fixed" || m.method == "empirical",
        "marginal.method must be hill, fixed or empirical");
  check(m.back_transform == "inverse" || m.back_transform == "rank",
        "marginal.back_transform must be inverse or rank");
  check(in_open_unit(m.threshold_quantile), "marginal.threshold_quantile must lie in (0, 1)");
  check(m.alpha > 0.0 && m.c > 0.0, "marginal.alpha and marginal.c must be positive");
  check(c.tpdf.max_lag >= 1, "tpdf.max_lag must be >= 1");
  check(in_open_unit(c.tpdf.radial_quantile), "tpdf.radial_quantile must lie in (0, 1)");
  const auto& s = c.innovations;
  check(s.n_max > s.conv_rows && s.n_max >= s.q_max, "innovations.n_max must exceed conv_rows and q_max");
  check(s.q_max >= 1, "innovations.q_max must be >= 1");
  check(s.trunc_eps >= 0.0 && s.conv_tol > 0.0 && s.zero_floor > 0.0,
        "innovations tolerances must be positive");
  check(s.conv_rows >= 1, "innovations.conv_rows must be >= 1");
  const auto& d = c.diagnostics;
  for (double q : d.run_quantiles) check(q >= 0.5 && q < 1.0, "diagnostics.run_quantiles must lie in [0.5, 1)");
  for (double q : d.sum_quantiles) check(in_open_unit(q), "diagnostics.sum_quantiles must lie in (0, 1)");
  check(d.sum_window >= 1, "diagnostics.sum_window must be >= 1");
  check(d.bootstrap_resamples >= 2, "diagnostics.bootstrap_resamples must be >= 2");
  check(d.chi_lag >= 1 && d.chi_quantile >= 0.8 && d.chi_quantile < 1.0, "diagnostics chi settings out of range");
  check(d.compare_lags >= 1 && d.compare_lags <= c.tpdf.max_lag, "diagnostics.compare_lags must lie in [1, tpdf.max_lag]");
  const auto& iv = c.intervals;
  if (iv.enabled) {
    check(iv.window >= 1 && iv.train_size > 10 * iv.window, "intervals.train_size must exceed 10 * window");
    check(in_open_unit(iv.level) && in_open_unit(iv.large_quantile), "intervals levels must lie in (0, 1)");
    check(iv.q_star >= 2 && iv.n_decomp >= 1, "intervals.q_star >= 2 and n_decomp >= 1 required");
    check(!iv.bandwidth || *iv.bandwidth > 0.0, "intervals.bandwidth must be positive");
    if (c.data.source == "simulate") check(iv.train_size < c.data.n, "intervals.train_size must be below data.n");
  }
}

Series simulate_model(const std::string& model, const Json& params, Eigen::Index n, std::uint64_t seed) {
  if (model == "garch") {
    double a0 = 0.0, a1 = 0.0, b1 = 0.0;
    Strict p(params, "params");
    p.require("alpha0", a0);
    p.require("alpha1", a1);
    p.require("beta1", b1);
    p.finish();
    return simulate_garch11(a0, a1, b1, n, seed);
  }
  if (model == "logistic") {
    double beta = 0.0;
    Strict p(params, "params");
    p.require("beta", beta);
    p.finish();
    return simulate_logistic_markov(beta, n, seed);
  }
  if (model == "ma") {
    std::vector<double> theta;
    MaModel m;
    Strict p(params, "params");
    p.require("theta", theta);
    p.get("noise_scale", m.noise_scale);
    p.finish();
    m.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    return simulate_ma(m, n, seed);
  }
  throw ArgumentError("unknown model '" + model + "' (expected ma, garch or logistic)");
}

Series to_frechet(const Series& data, const MarginalConfig& marginal, MarginalFit* fit) {
  MarginalFit f;
  if (marginal.method == "hill") {
    f = fit_marginal(data, marginal.threshold_quantile);
  } else if (marginal.method == "fixed") {
    f.alpha_hat = marginal.alpha;
    f.c_hat = marginal.c;
    f.threshold_quantile = 0.0;
  } else if (marginal.method == "empirical") {
    if (fit) *fit = f;
    return empirical_frechet_transform(data);
  } else {
    throw ArgumentError("unknown marginal method '" + marginal.method + "'");
  }
  if (fit) *fit = f;
  return marginal_transform(Series(data.values(), ScaleTag::original, data.source()), f);
}

Series from_frechet(const Series& data, const MarginalConfig& marginal, const MarginalFit& fit,
                    const Series& reference) {
  if (marginal.back_transform == "rank") return rank_back_transform(data, reference);
  if (marginal.method == "empirical") return empirical_back_transform(data, reference);
  return back_transform(data, fit);
}

PipelineResult run_pipeline(const ExperimentConfig& config, const fs::path& out_dir) {
  validate(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  const StageSeeds seeds = derive_seeds(config.seed);
  PipelineResult result;
  result.out_dir = out_dir;
  std::vector<std::string> artifacts;
  auto record = [&](const std::string& name) { artifacts.push_back(name); };
  auto path = [&](const std::string& name) { return out_dir / name; };

  auto write_manifest = [&](const std::string& status, const std::string& stage, const std::string& error) {
    Json m;
    m["schema_version"] = kConfigSchemaVersion;
    m["name"] = config.name;
    m["status"] = status;
    if (!stage.empty()) {
      m["failed_stage"] = stage;
      m["error"] = error;
    }
    m["seeds"] = {{"master", config.seed},
                  {"data", seeds.data},
                  {"fitted", seeds.fitted},
                  {"bootstrap", seeds.bootstrap},
                  {"decomposition", seeds.decomposition}};
    Json inputs = Json::object();
    if (config.data.source == "csv" && fs::exists(config.data.path))
      inputs[config.data.path.filename().string()] = io::sha256_file(config.data.path);
    m["inputs"] = inputs;
    Json hashes = Json::object();
    std::vector<std::string> sorted = artifacts;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& a : sorted) {
      const std::string h = io::sha256_file(path(a));
      hashes[a] = h;
      result.hashes[a] = h;
    }
    m["artifacts"] = hashes;
    io::write_json(path("manifest.json"), m);
  };

  std::string stage = "config";
  auto run = [&](const std::string& name, const std::function<void()>& fn) {
    stage = name;
    fn();
  };

  try {
    io::write_json(path("config.json"), to_json(config));
    record("config.json");

    Series original;
    run("ingest", [&] {
      if (config.data.source == "simulate") {
        original = simulate_model(config.data.model, config.data.params, config.data.n, seeds.data);
      } else {
        original = io::read_series_csv(config.data.path, ScaleTag::original, config.data.column);
      }
      io::write_series_csv(path("data.csv"), original);
      record("data.csv");
    });

    MarginalFit fit;
    Series frechet;
    run("fit-marginal", [&] {
      frechet = to_frechet(original, config.marginal, &fit);
      Json j = io::to_json(fit);
      j["method"] = config.marginal.method;
      io::write_json(path("marginal.json"), j);
      record("marginal.json");
    });
    run("transform", [&] {
      io::write_series_csv(path("transformed.csv"), frechet);
      record("transformed.csv");
    });

    Series prepped;
    run("preprocess", [&] {
      prepped = preprocess(frechet);
      io::write_series_csv(path("preprocessed.csv"), prepped);
      record("preprocessed.csv");
    });

    Tpdf tpdf;
    run("tpdf", [&] {
      tpdf = estimate_tpdf(prepped, config.tpdf.max_lag, config.tpdf.radial_quantile);
      io::write_tpdf_csv(path("tpdf.csv"), tpdf);
      record("tpdf.csv");
    });

    InnovationsState state;
    run("innovations", [&] { state = innovations_algorithm(tpdf, config.innovations.n_max); });

    MaModel model;
    run("fit-ma", [&] {
      const ConvergenceRule rule{config.innovations.conv_tol, config.innovations.conv_rows};
      Json conv;
      conv["n_max"] = config.innovations.n_max;
      conv["final_delta"] = row_delta(state, state.n_max(), config.innovations.q_max);
      conv["tolerance"] = rule.tolerance;
      io::write_json(path("innovations.json"), conv);
      record("innovations.json");
      model = fit_ma(state, config.innovations.trunc_eps, config.innovations.q_max, rule);
      io::write_json(path("model.json"), io::to_json(model, state.nu));
      record("model.json");
    });

    Series fitted_frechet;
    Series fitted_original;
    run("simulate-fitted", [&] {
      fitted_frechet = simulate_ma(model, original.size(), seeds.fitted);
      fitted_original = from_frechet(fitted_frechet, config.marginal, fit, original);
      io::write_series_csv(path("fitted.csv"), fitted_original);
      record("fitted.csv");
    });

    Tpdf tpdf_fit;
    const Eigen::Index L = config.diagnostics.compare_lags;
    double diff_mean = 0.0, diff_se = 0.0;
    run("tpdf-fitted", [&] {
      tpdf_fit = estimate_tpdf(preprocess(fitted_frechet), L, config.tpdf.radial_quantile);
      io::Table t{{"lag", "sigma_original", "sigma_fitted", "difference"}, {}};
      Eigen::VectorXd d(L);
      for (Eigen::Index h = 1; h <= L; ++h) {
        d(h - 1) = tpdf.sigma(h) - tpdf_fit.sigma(h);
        t.add_row({std::to_string(h), io::format_double(tpdf.sigma(h)), io::format_double(tpdf_fit.sigma(h)),
                   io::format_double(d(h - 1))});
      }
      diff_mean = d.mean();
      const double var = L > 1 ? (d.array() - diff_mean).square().sum() / double(L - 1) : 0.0;
      diff_se = std::sqrt(var / double(L));
      io::write_table(path("tpdf_comparison.csv"), t);
      record("tpdf_comparison.csv");
    });

    Json summary;
    summary["name"] = config.name;
    summary["n"] = original.size();
    summary["marginal"] = io::to_json(fit);
    summary["marginal"]["method"] = config.marginal.method;
    summary["tpdf"] = tpdf_json(tpdf);
    summary["nu_final"] = state.nu(state.n_max());
    summary["ma_order"] = model.order();
    summary["noise_scale"] = model.noise_scale;
    summary["tpdf_difference"] = {{"lags", L}, {"mean", diff_mean}, {"se", diff_se}};

    run("diagnostics", [&] {
      const auto& dc = config.diagnostics;
      summary["chi"] = {{"lag", dc.chi_lag},
                        {"quantile", dc.chi_quantile},
                        {"original", chi_estimator(original, dc.chi_lag, dc.chi_quantile)},
                        {"fitted", chi_estimator(fitted_original, dc.chi_lag, dc.chi_quantile)}};
      io::Table runs{{"series", "quantile", "mean_run", "std_err", "n_runs"}, {}};
      io::Table sums{{"series", "window", "quantile", "value", "std_err"}, {}};
      Json jr = Json::object(), js = Json::object();
      for (const auto& [label, s] : {std::pair<const char*, const Series*>{"original", &original},
                                     std::pair<const char*, const Series*>{"fitted", &fitted_original}}) {
        Json arr = Json::array();
        for (double q : dc.run_quantiles) {
          const auto r = run_lengths(*s, q);
          runs.add_row({label, io::format_double(q), io::format_double(r.mean_run), io::format_double(r.std_err),
                        std::to_string(r.n_runs)});
          arr.push_back({{"quantile", q}, {"mean_run", r.mean_run}, {"std_err", r.std_err}, {"n_runs", r.n_runs}});
        }
        jr[label] = arr;
        Json sarr = Json::array();
        for (const auto& r : sum_quantiles(*s, dc.sum_window, dc.sum_quantiles, seeds.bootstrap,
                                           dc.bootstrap_resamples)) {
          sums.add_row({label, std::to_string(r.window), io::format_double(r.quantile), io::format_double(r.value),
                        io::format_double(r.std_err)});
          sarr.push_back({{"quantile", r.quantile}, {"value", r.value}, {"std_err", r.std_err}});
        }
        js[label] = sarr;
      }
      io::write_table(path("run_lengths.csv"), runs);
      io::write_table(path("sum_quantiles.csv"), sums);
      record("run_lengths.csv");
      record("sum_quantiles.csv");
      summary["run_lengths"] = jr;
      summary["sum_quantiles"] = {{"window", dc.sum_window}, {"original", js["original"]}, {"fitted", js["fitted"]}};
    });

    if (config.intervals.enabled) {
      run("intervals", [&] {
        const auto& ic = config.intervals;
        const Tpdf train_tpdf = estimate_tpdf(preprocess(frechet.slice(0, ic.train_size)),
                                              std::max(ic.window, Eigen::Index{1}), config.tpdf.radial_quantile);
        IntervalStudyOptions opt;
        opt.window = ic.window;
        opt.level = ic.level;
        opt.q_star = ic.q_star;
        opt.n_decomp = ic.n_decomp;
        opt.seed = seeds.decomposition;
        opt.large_quantile = ic.large_quantile;
        opt.bandwidth = ic.bandwidth;
        const IntervalStudy st = run_interval_study(frechet, ic.train_size, train_tpdf, opt);

        io::Table rows{{"index", "x_hat", "lower", "upper", "actual", "large"}, {}};
        for (std::size_t i = 0; i < st.rows.size(); ++i) {
          const auto& r = st.rows[i];
          rows.add_row({std::to_string(r.index), io::format_double(r.x_hat), io::format_double(r.lower),
                        io::format_double(r.upper), io::format_double(*r.actual), st.large[i] ? "1" : "0"});
        }
        io::write_table(path("intervals.csv"), rows);
        io::Table atoms{{"angle", "mass"}, {}};
        for (const auto& p : st.measure.points) atoms.add_row({io::format_double(p.angle()), io::format_double(p.mass)});
        io::write_table(path("angular_measure.csv"), atoms);
        io::Table dens{{"angle", "density"}, {}};
        for (Eigen::Index i = 0; i < st.density.grid.size(); ++i)
          dens.add_row({io::format_double(st.density.grid(i)), io::format_double(st.density.density(i))});
        io::write_table(path("angular_density.csv"), dens);
        record("intervals.csv");
        record("angular_measure.csv");
        record("angular_density.csv");

        Json ji;
        ji["train_size"] = ic.train_size;
        ji["window"] = ic.window;
        ji["level"] = ic.level;
        ji["prediction_tpdm_offdiag"] = st.tpdm(0, 1);
        ji["joint_region_deg"] = {st.region.angle_low * 180.0 / M_PI, st.region.angle_high * 180.0 / M_PI};
        ji["joint_capture"] = st.joint_capture;
        ji["n_radial_large"] = st.n_radial_large;
        ji["bandwidth"] = st.density.bandwidth;
        ji["coverage"] = st.coverage;
        ji["n_large"] = st.n_large;
        ji["calibration_error"] = std::abs(st.coverage - ic.level);

        if (ic.baseline) {
          const Series train = frechet.slice(0, ic.train_size);
          const Series test = frechet.slice(ic.train_size, frechet.size() - ic.train_size);
          const IntervalSet base = gaussian_baseline(train, test, ic.window, ic.level);
          io::Table bt{{"index", "x_hat", "lower", "upper", "actual"}, {}};
          IntervalSet subset;
          for (std::size_t i = 0; i < base.size(); ++i) {
            const auto& r = base[i];
            bt.add_row({std::to_string(r.index), io::format_double(r.x_hat), io::format_double(r.lower),
                        io::format_double(r.upper), io::format_double(*r.actual)});
            if (st.large[i]) subset.push_back(r);
          }
          io::write_table(path("baseline.csv"), bt);
          record("baseline.csv");
          const auto all = evaluate_coverage(base);
          const auto sub = evaluate_coverage(subset);
          ji["baseline"] = {{"coverage_all", all.coverage},
                            {"coverage_large", sub.coverage},
                            {"n_large", sub.n},
                            {"calibration_error_large", std::abs(sub.coverage - ic.level)}};
        }
        io::write_json(path("intervals.json"), ji);
        record("intervals.json");
        summary["intervals"] = ji;
      });
    }

    run("summary", [&] {
      io::write_json(path("summary.json"), summary);
      record("summary.json");
      std::ostringstream t;
      t << "experiment " << config.name << " (n = " << original.size() << ")\n";
      t << "marginal " << config.marginal.method << ": alpha_hat " << fixed(fit.alpha_hat, 3) << ", c_hat "
        << fixed(fit.c_hat, 3) << "\n";
      t << "chi(" << config.diagnostics.chi_lag << ") original " << fixed(summary["chi"]["original"].get<double>(), 3)
        << ", fitted " << fixed(summary["chi"]["fitted"].get<double>(), 3) << "\n";
      t << "nu_" << state.n_max() << " = " << fixed(state.nu(state.n_max()), 4) << ", MA order " << model.order()
        << "\n";
      t << "mean TPDF difference (original - fitted) over lags 1.." << L << ": " << fixed(diff_mean, 4)
        << " (se " << fixed(diff_se, 4) << ")\n\n";
      t << "lag  sigma_original  sigma_fitted\n";
      for (Eigen::Index h = 1; h <= L; ++h)
        t << h << "  " << fixed(tpdf.sigma(h), 4) << "  " << fixed(tpdf_fit.sigma(h), 4) << "\n";
      t << "\naverage run length above threshold (se)\nquantile  original  fitted\n";
      const auto& jr = summary["run_lengths"];
      for (std::size_t i = 0; i < jr["original"].size(); ++i)
        t << jr["original"][i]["quantile"].get<double>() << "  " << fixed(jr["original"][i]["mean_run"], 2) << " ("
          << fixed(jr["original"][i]["std_err"], 2) << ")  " << fixed(jr["fitted"][i]["mean_run"], 2) << " ("
          << fixed(jr["fitted"][i]["std_err"], 2) << ")\n";
      const auto& js = summary["sum_quantiles"];
      t << "\nquantiles of " << js["window"].get<Eigen::Index>() << "-term sums (se)\nquantile  original  fitted\n";
      for (std::size_t i = 0; i < js["original"].size(); ++i)
        t << js["original"][i]["quantile"].get<double>() << "  " << fixed(js["original"][i]["value"], 2) << " ("
          << fixed(js["original"][i]["std_err"], 2) << ")  " << fixed(js["fitted"][i]["value"], 2) << " ("
          << fixed(js["fitted"][i]["std_err"], 2) << ")\n";
      if (summary.contains("intervals")) {
        const auto& ji = summary["intervals"];
        t << "\njoint region [" << fixed(ji["joint_region_deg"][0], 2) << ", " << fixed(ji["joint_region_deg"][1], 2)
          << "] deg captures " << fixed(ji["joint_capture"], 4) << " of " << ji["n_radial_large"].get<std::size_t>()
          << " radially large test points\n";
        t << "conditional interval coverage " << fixed(ji["coverage"], 4) << " on " << ji["n_large"].get<std::size_t>()
          << " large predictions\n";
        if (ji.contains("baseline"))
          t << "gaussian baseline coverage " << fixed(ji["baseline"]["coverage_large"], 4)
            << " on the same predictions, " << fixed(ji["baseline"]["coverage_all"], 4) << " overall\n";
      }
      io::write_text(path("summary.txt"), t.str());
      record("summary.txt");
    });
    result.summary = summary;
    write_manifest("ok", "", "");
  } catch (const std::exception& e) {
    try {
      write_manifest("failed", stage, e.what());
    } catch (...) {
    }
    throw;
  }
  return result;
}

}  // namespace tlts
