#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tlts/diagnostics.hpp"
#include "tlts/errors.hpp"
#include "tlts/innovations.hpp"
#include "tlts/io.hpp"
#include "tlts/pipeline.hpp"
#include "tlts/prediction_uncertainty.hpp"
#include "tlts/simulators.hpp"
#include "tlts/tail_estimation.hpp"

namespace fs = std::filesystem;
using namespace tlts;
using io::Json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string config;
};

Globals g;

fs::path out_path(const std::string& p) {
  fs::path path(p);
  if (!g.out_dir.empty() && path.is_relative()) return fs::path(g.out_dir) / path;
  return path;
}

std::uint64_t seed_or(std::uint64_t local) { return g.seed ? *g.seed : local; }

Json params_from(const std::string& arg) {
  if (!arg.empty() && (arg.front() == '{' || arg.front() == '[')) {
    try {
      return Json::parse(arg);
    } catch (const nlohmann::json::parse_error& e) {
      throw ArgumentError(std::string("--params: invalid JSON: ") + e.what());
    }
  }
  return io::read_json(arg);
}

ScaleTag scale_from(const std::string& name) { return scale_tag_from_string(name); }

Eigen::Index default_train(Eigen::Index n, Eigen::Index requested) {
  if (requested > 0) return requested;
  return std::min<Eigen::Index>(70000, static_cast<Eigen::Index>(0.7 * static_cast<double>(n)));
}

Tpdf tpdf_for(const std::string& tpdf_path, const std::string& model_path, Eigen::Index max_lag) {
  if (!tpdf_path.empty()) return io::read_tpdf_csv(tpdf_path);
  if (!model_path.empty()) return ma_tpdf(io::ma_model_from_json(io::read_json(model_path)), max_lag);
  throw ArgumentError("need --tpdf or --model");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformed-linear time series: tail dependence, MA fitting, forecasting and intervals"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for every random stage");
  app.add_option("--out-dir", g.out_dir, "Directory for outputs (relative --out paths resolve here)");
  app.add_option("--config", g.config, "Pipeline configuration (JSON)");

  // simulate
  std::string sim_model, sim_params, sim_out;
  Eigen::Index sim_n = 0;
  std::uint64_t sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "Simulate an MA, GARCH(1,1) or logistic Markov series");
  sim->add_option("--model", sim_model, "ma | garch | logistic")->required()->check(CLI::IsMember({"ma", "garch", "logistic"}));
  sim->add_option("--params", sim_params, "Model parameters: JSON file or inline JSON")->required();
  sim->add_option("--n", sim_n, "Length")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Seed");
  sim->add_option("--out", sim_out, "Output CSV")->required();

  // fit-marginal
  std::string fm_in, fm_col = "value", fm_out;
  double fm_q = 0.99;
  auto* fm = app.add_subcommand("fit-marginal", "Hill tail index and scale");
  fm->add_option("--in", fm_in, "Input CSV")->required();
  fm->add_option("--column", fm_col, "Value column")->capture_default_str();
  fm->add_option("--quantile", fm_q, "Threshold quantile")->capture_default_str();
  fm->add_option("--out", fm_out, "Output JSON")->required();

  // transform
  std::string tr_in, tr_col = "value", tr_fit, tr_method = "fit", tr_out, tr_ref;
  bool tr_inverse = false;
  auto* tr = app.add_subcommand("transform", "Move data to (or back from) the tail-index-2 unit scale");
  tr->add_option("--in", tr_in, "Input CSV")->required();
  tr->add_option("--column", tr_col, "Value column")->capture_default_str();
  tr->add_option("--fit", tr_fit, "Marginal fit JSON from fit-marginal");
  tr->add_option("--method", tr_method, "fit | empirical")->check(CLI::IsMember({"fit", "empirical"}));
  tr->add_option("--reference", tr_ref, "Original-scale CSV for the inverse empirical map");
  tr->add_flag("--inverse", tr_inverse, "Back-transform to the original scale");
  tr->add_option("--out", tr_out, "Output CSV")->required();

  // preprocess
  std::string pp_in, pp_out, pp_scale = "frechet2_unit";
  auto* pp = app.add_subcommand("preprocess", "Subtract the mean and clamp negatives to zero");
  pp->add_option("--in", pp_in, "Input CSV")->required();
  pp->add_option("--scale", pp_scale, "Scale tag of the input");
  pp->add_option("--out", pp_out, "Output CSV")->required();

  // tpdf
  std::string tp_in, tp_out, tp_scale = "preprocessed";
  Eigen::Index tp_lag = 500;
  double tp_q = 0.99;
  auto* tp = app.add_subcommand("tpdf", "Estimate the tail pairwise dependence function");
  tp->add_option("--in", tp_in, "Preprocessed series CSV")->required();
  tp->add_option("--max-lag", tp_lag, "Largest lag")->capture_default_str();
  tp->add_option("--radial-quantile", tp_q, "Radial threshold quantile per lag")->capture_default_str();
  tp->add_option("--scale", tp_scale, "Scale tag of the input");
  tp->add_option("--out", tp_out, "Output CSV")->required();

  // fit-ma
  std::string ma_tpdf, ma_out;
  Eigen::Index ma_nmax = 500, ma_qmax = 25, ma_rows = 10;
  double ma_eps = 1e-3, ma_tol = 1e-6;
  auto* fma = app.add_subcommand("fit-ma", "Fit a transformed-linear MA model with the innovations algorithm");
  fma->add_option("--tpdf", ma_tpdf, "TPDF CSV")->required();
  fma->add_option("--n-max", ma_nmax, "Innovation rows")->capture_default_str();
  fma->add_option("--trunc-eps", ma_eps, "Drop trailing coefficients below this")->capture_default_str();
  fma->add_option("--q-max", ma_qmax, "Largest MA order")->capture_default_str();
  fma->add_option("--conv-tol", ma_tol, "Row-to-row coefficient tolerance")->capture_default_str();
  fma->add_option("--conv-rows", ma_rows, "Consecutive rows within tolerance")->capture_default_str();
  fma->add_option("--out", ma_out, "Output model JSON")->required();

  // predict
  std::string pr_in, pr_model, pr_tpdf, pr_out;
  Eigen::Index pr_window = 40;
  double pr_floor = kDefaultZeroFloor;
  auto* pr = app.add_subcommand("predict", "One-step predictions from the preceding window");
  pr->add_option("--in", pr_in, "Series on the tail-index-2 unit scale")->required();
  pr->add_option("--model", pr_model, "MA model JSON (alternative to --tpdf)")->capture_default_str();
  pr->add_option("--tpdf", pr_tpdf, "TPDF CSV")->capture_default_str();
  pr->add_option("--window", pr_window, "Predictor window length")->capture_default_str();
  pr->add_option("--zero-floor", pr_floor, "Zeros are lifted to this before the latent map")->capture_default_str();
  pr->add_option("--out", pr_out, "Output CSV")->required();

  // intervals
  std::string iv_in, iv_model, iv_tpdf, iv_out;
  Eigen::Index iv_window = 30, iv_qstar = 5, iv_ndec = 100, iv_train = 0;
  double iv_level = 0.95, iv_large = 0.95;
  std::optional<double> iv_bw;
  std::uint64_t iv_seed = 0;
  auto* iv = app.add_subcommand("intervals", "Joint region and conditional prediction intervals");
  iv->add_option("--in", iv_in, "Series on the tail-index-2 unit scale")->required();
  iv->add_option("--model", iv_model, "MA model JSON (alternative to --tpdf)")->capture_default_str();
  iv->add_option("--tpdf", iv_tpdf, "TPDF CSV")->capture_default_str();
  iv->add_option("--window", iv_window, "Predictor window length")->capture_default_str();
  iv->add_option("--level", iv_level, "Interval level")->capture_default_str();
  iv->add_option("--q-star", iv_qstar, "Columns per CP factor")->capture_default_str();
  iv->add_option("--n-decomp", iv_ndec, "Number of CP decompositions")->capture_default_str();
  iv->add_option("--train-size", iv_train, "Training prefix length (0: min(70000, 70% of the series))");
  iv->add_option("--large-quantile", iv_large, "Test quantile of x_hat above which intervals are reported")->capture_default_str();
  iv->add_option("--bandwidth", iv_bw, "Angular KDE bandwidth (default: Silverman)")->capture_default_str();
  iv->add_option("--seed", iv_seed, "Seed")->capture_default_str();
  iv->add_option("--out", iv_out, "Output CSV (summary goes to the .json sibling)")->required();

  // diagnose
  std::string dg_in, dg_col = "value", dg_out;
  std::vector<double> dg_runq{0.95, 0.98, 0.99, 0.995, 0.999}, dg_sumq{0.95, 0.98, 0.99, 0.995, 0.999};
  Eigen::Index dg_window = 12, dg_lag = 1;
  double dg_chiq = 0.95;
  int dg_boot = kSumBootstrapResamples;
  std::uint64_t dg_seed = 0;
  auto* dg = app.add_subcommand("diagnose", "Run lengths, window-sum quantiles and chi");
  dg->add_option("--in", dg_in, "Input CSV")->required();
  dg->add_option("--column", dg_col, "Value column")->capture_default_str();
  dg->add_option("--run-quantiles", dg_runq, "Run-length thresholds")->capture_default_str();
  dg->add_option("--window", dg_window, "Rolling-sum window")->capture_default_str();
  dg->add_option("--sum-quantiles", dg_sumq, "Rolling-sum quantiles")->capture_default_str();
  dg->add_option("--bootstrap", dg_boot, "Block bootstrap resamples")->capture_default_str();
  dg->add_option("--chi-lag", dg_lag, "Lag for chi")->capture_default_str();
  dg->add_option("--chi-quantile", dg_chiq, "Threshold quantile for chi")->capture_default_str();
  dg->add_option("--seed", dg_seed, "Bootstrap seed")->capture_default_str();
  dg->add_option("--out", dg_out, "Output CSV")->required();

  // baseline-gaussian
  std::string bg_in, bg_col = "value", bg_out;
  Eigen::Index bg_window = 30, bg_train = 0;
  double bg_level = 0.95;
  auto* bg = app.add_subcommand("baseline-gaussian", "Normal-score linear prediction intervals");
  bg->add_option("--in", bg_in, "Input CSV")->required();
  bg->add_option("--column", bg_col, "Value column")->capture_default_str();
  bg->add_option("--window", bg_window, "Predictor window length")->capture_default_str();
  bg->add_option("--train-size", bg_train, "Training prefix length (0: min(70000, 70% of the series))");
  bg->add_option("--level", bg_level, "Interval level")->capture_default_str();
  bg->add_option("--out", bg_out, "Output CSV")->required();

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "Run a configured experiment end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (seed_opt->count()) g.seed = seed_value;

  try {
    if (*sim) {
      const Series s = simulate_model(sim_model, params_from(sim_params), sim_n, seed_or(sim_seed));
      io::write_series_csv(out_path(sim_out), s);
    } else if (*fm) {
      const Series s = io::read_series_csv(fm_in, ScaleTag::original, fm_col);
      io::write_json(out_path(fm_out), io::to_json(fit_marginal(s, fm_q)));
    } else if (*tr) {
      const ScaleTag in_scale = tr_inverse ? ScaleTag::frechet2_unit : ScaleTag::original;
      const Series s = io::read_series_csv(tr_in, in_scale, tr_col);
      Series out;
      if (tr_method == "empirical") {
        if (tr_inverse) {
          if (tr_ref.empty()) throw ArgumentError("--inverse with --method empirical needs --reference");
          out = empirical_back_transform(s, io::read_series_csv(tr_ref, ScaleTag::original));
        } else {
          out = empirical_frechet_transform(s);
        }
      } else {
        if (tr_fit.empty()) throw ArgumentError("transform needs --fit (or --method empirical)");
        const MarginalFit f = io::marginal_fit_from_json(io::read_json(tr_fit));
        out = tr_inverse ? back_transform(s, f) : marginal_transform(s, f);
      }
      io::write_series_csv(out_path(tr_out), out);
    } else if (*pp) {
      io::write_series_csv(out_path(pp_out), preprocess(io::read_series_csv(pp_in, scale_from(pp_scale))));
    } else if (*tp) {
      const Series s = io::read_series_csv(tp_in, scale_from(tp_scale));
      io::write_tpdf_csv(out_path(tp_out), estimate_tpdf(s, tp_lag, tp_q));
    } else if (*fma) {
      const Tpdf t = io::read_tpdf_csv(ma_tpdf);
      const auto st = innovations_algorithm(t, ma_nmax);
      const MaModel m = fit_ma(st, ma_eps, ma_qmax, ConvergenceRule{ma_tol, ma_rows});
      io::write_json(out_path(ma_out), io::to_json(m, st.nu));
    } else if (*pr) {
      const Series s = io::read_series_csv(pr_in, ScaleTag::frechet2_unit);
      const Tpdf t = tpdf_for(pr_tpdf, pr_model, pr_window);
      const auto w = direct_predictor_weights(t, pr_window);
      if (s.size() < pr_window) throw ArgumentError("series shorter than the prediction window");
      io::Table out{{"index", "x_hat", "actual"}, {}};
      for (Eigen::Index i = pr_window; i <= s.size(); ++i) {
        const double xh = one_step_predict(s.values().segment(i - pr_window, pr_window), w, pr_floor);
        out.add_row({std::to_string(i), io::format_double(xh), i < s.size() ? io::format_double(s[i]) : ""});
      }
      io::write_table(out_path(pr_out), out);
    } else if (*iv) {
      const Series s = io::read_series_csv(iv_in, ScaleTag::frechet2_unit);
      const Tpdf t = tpdf_for(iv_tpdf, iv_model, iv_window);
      IntervalStudyOptions opt;
      opt.window = iv_window;
      opt.level = iv_level;
      opt.q_star = iv_qstar;
      opt.n_decomp = iv_ndec;
      opt.seed = seed_or(iv_seed);
      opt.large_quantile = iv_large;
      opt.bandwidth = iv_bw;
      const IntervalStudy st = run_interval_study(s, default_train(s.size(), iv_train), t, opt);
      io::Table rows{{"index", "x_hat", "lower", "upper", "actual", "large"}, {}};
      for (std::size_t i = 0; i < st.rows.size(); ++i) {
        const auto& r = st.rows[i];
        rows.add_row({std::to_string(r.index), io::format_double(r.x_hat), io::format_double(r.lower),
                      io::format_double(r.upper), io::format_double(*r.actual), st.large[i] ? "1" : "0"});
      }
      const fs::path out = out_path(iv_out);
      io::write_table(out, rows);
      Json side;
      side["coverage"] = st.coverage;
      side["n_large"] = st.n_large;
      side["joint_region_deg"] = {st.region.angle_low * 180.0 / std::numbers::pi,
                                  st.region.angle_high * 180.0 / std::numbers::pi};
      side["joint_capture"] = st.joint_capture;
      side["n_radial_large"] = st.n_radial_large;
      side["bandwidth"] = st.density.bandwidth;
      Json atoms = Json::array();
      for (const auto& p : st.measure.points) atoms.push_back({{"angle", p.angle()}, {"mass", p.mass}});
      side["angular_measure"] = atoms;
      fs::path side_path = out;
      side_path.replace_extension(".json");
      io::write_json(side_path, side);
    } else if (*dg) {
      const Series s = io::read_series_csv(dg_in, ScaleTag::original, dg_col);
      io::Table out{{"statistic", "window", "quantile", "value", "std_err", "n"}, {}};
      for (double q : dg_runq) {
        const auto r = run_lengths(s, q);
        out.add_row({"run_length", "1", io::format_double(q), io::format_double(r.mean_run),
                     io::format_double(r.std_err), std::to_string(r.n_runs)});
      }
      for (const auto& r : sum_quantiles(s, dg_window, dg_sumq, seed_or(dg_seed), dg_boot))
        out.add_row({"sum_quantile", std::to_string(r.window), io::format_double(r.quantile),
                     io::format_double(r.value), io::format_double(r.std_err), std::to_string(s.size())});
      out.add_row({"chi", std::to_string(dg_lag), io::format_double(dg_chiq),
                   io::format_double(chi_estimator(s, dg_lag, dg_chiq)), "", std::to_string(s.size())});
      io::write_table(out_path(dg_out), out);
    } else if (*bg) {
      const Series s = io::read_series_csv(bg_in, ScaleTag::original, bg_col);
      const Eigen::Index ntr = default_train(s.size(), bg_train);
      if (ntr >= s.size()) throw ArgumentError("--train-size must be below the series length");
      const IntervalSet rows = gaussian_baseline(s.slice(0, ntr), s.slice(ntr, s.size() - ntr), bg_window, bg_level);
      io::Table out{{"index", "x_hat", "lower", "upper", "actual"}, {}};
      for (const auto& r : rows)
        out.add_row({std::to_string(r.index), io::format_double(r.x_hat), io::format_double(r.lower),
                     io::format_double(r.upper), io::format_double(*r.actual)});
      io::write_table(out_path(bg_out), out);
      const auto cov = evaluate_coverage(rows);
      std::cout << "coverage " << io::format_double(cov.coverage) << " n " << cov.n << "\n";
    } else if (*pl) {
      if (g.config.empty()) throw ArgumentError("pipeline needs --config");
      ExperimentConfig cfg = load_config(g.config);
      if (g.seed) cfg.seed = *g.seed;
      const fs::path dir = g.out_dir.empty() ? fs::path("runs") / cfg.name : fs::path(g.out_dir);
      const auto res = run_pipeline(cfg, dir);
      std::cout << io::read_json(dir / "manifest.json").dump(2) << "\n";
      (void)res;
    }
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
