#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mscorr/mscorr.hpp"

namespace mscorr::cli {

namespace fs = std::filesystem;

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory '" + dir + "'");
}

template <typename Body>
void write_to(const fs::path& path, Body&& body) {
  auto out = text::open_output(path.string());
  body(out);
}

inline ReturnPanel load_return_panel(const std::string& path) {
  auto in = text::open_input(path);
  return read_return_panel(in);
}

inline std::vector<double> parse_q_grid(const std::string& list) {
  PipelineConfig cfg;
  apply_setting(cfg, "q_grid", list);
  return cfg.q_grid;
}

inline std::vector<int> make_tau_range(int tau_min, int tau_max) {
  PipelineConfig cfg;
  cfg.tau_min = tau_min;
  cfg.tau_max = tau_max;
  return cfg.tau_range();
}

/// Builds a synthetic market recipe from command-line parameters.
struct SynthOptions {
  std::string kind = "gaussian";
  std::size_t n_stocks = 20;
  std::size_t n_days = 4096;
  std::uint64_t seed = 0;
  double nu = 3.0;
  double rho = -1.0;  // one_factor: target pairwise correlation, overrides betas
  double beta_min = 0.2;
  double beta_max = 1.5;
  double factor_nu = 0.0;  // 0: Gaussian
  double noise_nu = 0.0;   // 0: Gaussian
  int depth = 10;
  double spread = 0.5;

  [[nodiscard]] synth::MarketRecipe recipe() const {
    synth::MarketRecipe r{n_stocks, n_days, seed, synth::GaussianIid{}};
    if (kind == "gaussian") return r;
    if (kind == "student_t") {
      r.kind = synth::StudentT{nu};
      return r;
    }
    if (kind == "cascade") {
      r.kind = synth::Cascade{depth, spread};
      return r;
    }
    if (kind == "one_factor") {
      synth::OneFactor f;
      if (rho >= 0.0) {
        if (!(rho < 1.0)) throw ConfigError("synth: --rho must lie in [0, 1)");
        f.betas = {std::sqrt(rho / (1.0 - rho))};
      } else {
        for (std::size_t i = 0; i < n_stocks; ++i) {
          const double w = n_stocks > 1 ? static_cast<double>(i) / static_cast<double>(n_stocks - 1) : 0.0;
          f.betas.push_back(beta_min + w * (beta_max - beta_min));
        }
      }
      f.factor_nu = factor_nu > 0.0 ? factor_nu : synth::kGaussian;
      if (noise_nu > 0.0) f.noise_nu = {noise_nu};
      r.kind = f;
      return r;
    }
    if (kind == "coupled" || kind == "uncoupled") {
      synth::StylizedFactRecipe s;
      s.n_stocks = n_stocks;
      s.n_days = n_days;
      s.seed = seed;
      s.beta_min = beta_min;
      s.beta_max = beta_max;
      s.coupled = kind == "coupled";
      return s.market();
    }
    throw ConfigError("synth: unknown kind '" + kind + "'");
  }
};

/// Runs the command line; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Multiscaling proxies, average cross-correlation and their association"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kSoftwareVersion));
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: all cores); never changes outputs");

  // clean
  auto* clean = app.add_subcommand("clean", "Forward-fill cleaning of raw price records");
  std::vector<std::string> clean_prices;
  double clean_k = kDefaultLengthThreshold;
  std::string clean_out = ".";
  clean->add_option("--prices", clean_prices, "ticker,date,close files (merged)")->required();
  clean->add_option("--k", clean_k, "Length threshold in (0, 1]");
  clean->add_option("--out", clean_out, "Output directory (panel.csv, fill_mask.csv)");

  // returns
  auto* returns = app.add_subcommand("returns", "Demeaned daily log-returns of a cleaned panel");
  std::string returns_panel, returns_out = "returns.csv";
  returns->add_option("--panel", returns_panel, "panel.csv from 'clean'")->required();
  returns->add_option("--out", returns_out, "Output file");

  // scaling
  auto* scaling = app.add_subcommand("scaling", "zeta(q) and the proxies A_hat, B_hat per stock");
  std::string scaling_in, scaling_out = "proxies.csv", scaling_q = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  int tau_min = 1, tau_max = 19;
  scaling->add_option("--returns", scaling_in, "Wide return panel")->required();
  scaling->add_option("--q-grid", scaling_q, "Comma-separated moment orders");
  scaling->add_option("--tau-min", tau_min, "Smallest horizon (days)");
  scaling->add_option("--tau-max", tau_max, "Largest horizon (days)");
  scaling->add_option("--out", scaling_out, "Output file");

  // xcorr
  auto* xcorr = app.add_subcommand("xcorr", "Correlation, p-value matrices and rho_bar");
  std::string xcorr_in, xcorr_out = ".", xcorr_mode = "filtered";
  double xcorr_alpha = kDefaultAlpha;
  xcorr->add_option("--returns", xcorr_in, "Wide return panel")->required();
  xcorr->add_option("--alpha", xcorr_alpha, "Significance level");
  xcorr->add_option("--significance-mode", xcorr_mode, "filtered | all");
  xcorr->add_option("--out", xcorr_out, "Output directory");

  // associate
  auto* associate = app.add_subcommand("associate", "Kendall, Pearson and partial correlation report");
  std::string assoc_proxies, assoc_rho, assoc_caps, assoc_out = ".";
  associate->add_option("--proxies", assoc_proxies, "proxies.csv from 'scaling'")->required();
  associate->add_option("--rho-bar", assoc_rho, "rho_bar.csv from 'xcorr'")->required();
  associate->add_option("--caps", assoc_caps, "ticker,date,capitalization file");
  associate->add_option("--out", assoc_out, "Output directory");

  // surrogate
  auto* surrogate = app.add_subcommand("surrogate", "Synchronous shuffle or marginal Gaussianization");
  std::string sur_in, sur_kind = "shuffle", sur_out = "surrogate.csv";
  std::uint64_t sur_seed = 0;
  surrogate->add_option("--returns", sur_in, "Wide return panel")->required();
  surrogate->add_option("--kind", sur_kind, "shuffle | gaussianize");
  surrogate->add_option("--seed", sur_seed, "Seed");
  surrogate->add_option("--out", sur_out, "Output file; metadata goes to <out>.meta");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic market with known ground truth");
  SynthOptions so;
  std::string synth_out = ".";
  synth_cmd->add_option("--kind", so.kind, "gaussian | student_t | one_factor | cascade | coupled | uncoupled");
  synth_cmd->add_option("--n-stocks", so.n_stocks, "Number of stocks");
  synth_cmd->add_option("--n-days", so.n_days, "Number of daily returns");
  synth_cmd->add_option("--seed", so.seed, "Seed");
  synth_cmd->add_option("--nu", so.nu, "student_t tail index");
  synth_cmd->add_option("--rho", so.rho, "one_factor: common pairwise correlation");
  synth_cmd->add_option("--beta-min", so.beta_min, "Smallest factor loading");
  synth_cmd->add_option("--beta-max", so.beta_max, "Largest factor loading");
  synth_cmd->add_option("--factor-nu", so.factor_nu, "one_factor: factor tail index (0: Gaussian)");
  synth_cmd->add_option("--noise-nu", so.noise_nu, "one_factor: noise tail index (0: Gaussian)");
  synth_cmd->add_option("--depth", so.depth, "cascade depth");
  synth_cmd->add_option("--spread", so.spread, "cascade multiplier spread");
  synth_cmd->add_option("--out", synth_out, "Output directory (prices.csv, caps.csv, returns.csv)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Full pipeline with output bundle and manifest");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "key = value config file");
  const std::vector<std::pair<std::string, std::string>> overrides{
      {"prices", "--prices"}, {"returns", "--returns"}, {"caps", "--caps"},
      {"k", "--k"}, {"tau_min", "--tau-min"}, {"tau_max", "--tau-max"},
      {"q_grid", "--q-grid"}, {"alpha", "--alpha"}, {"significance_mode", "--significance-mode"},
      {"seed", "--seed"}, {"output_dir", "--out"}, {"mode", "--mode"}};
  std::map<std::string, std::string> override_values;
  std::map<std::string, CLI::Option*> override_opts;
  for (const auto& [key, flag] : overrides)
    override_opts[key] = run_cmd->add_option(flag, override_values[key], "Overrides config key '" + key + "'");

  // compare
  auto* compare = app.add_subcommand("compare", "Difference table of two association.kv reports");
  std::string cmp_a, cmp_b, cmp_out;
  double cmp_alpha = kDefaultAlpha;
  compare->add_option("--a", cmp_a, "First report")->required();
  compare->add_option("--b", cmp_b, "Second report")->required();
  compare->add_option("--alpha", cmp_alpha, "Significance level");
  compare->add_option("--out", cmp_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfigError);
  }

  try {
    if (*clean) {
      const auto panel = preprocess(load_prices(clean_prices), clean_k);
      ensure_dir(clean_out);
      write_to(fs::path(clean_out) / "panel.csv", [&](std::ostream& o) { write_price_panel(o, panel); });
      write_to(fs::path(clean_out) / "fill_mask.csv", [&](std::ostream& o) { write_fill_mask(o, panel); });
      out << panel.tickers.size() << " stocks x " << panel.dates.size() << " dates\n";
    } else if (*returns) {
      auto in = text::open_input(returns_panel);
      const auto r = compute_returns(read_price_panel(in));
      write_to(returns_out, [&](std::ostream& o) { write_return_panel(o, r); });
    } else if (*scaling) {
      const auto table = estimate_panel_scaling(load_return_panel(scaling_in), parse_q_grid(scaling_q),
                                                make_tau_range(tau_min, tau_max), threads);
      write_to(scaling_out, [&](std::ostream& o) { write_scaling_table(o, table); });
    } else if (*xcorr) {
      const auto summary = correlation_matrix(load_return_panel(xcorr_in), xcorr_alpha,
                                              parse_significance_mode(xcorr_mode), threads);
      ensure_dir(xcorr_out);
      const fs::path dir(xcorr_out);
      write_to(dir / "correlation.csv", [&](std::ostream& o) { write_square_matrix(o, summary.tickers, summary.rho); });
      write_to(dir / "pvalues.csv", [&](std::ostream& o) { write_square_matrix(o, summary.tickers, summary.pvalue); });
      write_to(dir / "rho_bar.csv", [&](std::ostream& o) { write_rho_bar(o, summary.tickers, summary.rho_bar); });
    } else if (*associate) {
      auto pin = text::open_input(assoc_proxies);
      const auto proxies = read_scaling_table(pin);
      auto rin = text::open_input(assoc_rho);
      const auto rho = read_rho_bar(rin);
      CapitalizationTable caps;
      if (!assoc_caps.empty()) {
        auto cin = text::open_input(assoc_caps);
        caps = median_capitalization(load_capitalization_records(cin, assoc_caps));
      }
      const auto rep = build_report(proxies, rho.tickers, rho.rho_bar, caps);
      ensure_dir(assoc_out);
      write_to(fs::path(assoc_out) / "association.txt", [&](std::ostream& o) { write_report_text(o, rep); });
      write_to(fs::path(assoc_out) / "association.kv", [&](std::ostream& o) { write_report_kv(o, rep); });
      write_report_text(out, rep);
    } else if (*surrogate) {
      const auto panel = load_return_panel(sur_in);
      SurrogateSpec spec;
      ReturnPanel result;
      if (sur_kind == "shuffle") {
        auto s = synchronous_shuffle(panel, sur_seed);
        result = std::move(s.panel);
        spec = std::move(s.spec);
      } else if (sur_kind == "gaussianize") {
        result = marginal_gaussianize(panel, sur_seed, threads);
        spec = SurrogateSpec{SurrogateKind::kMarginalGaussianize, sur_seed, std::nullopt};
      } else {
        throw ConfigError("surrogate: --kind must be shuffle or gaussianize");
      }
      write_to(sur_out, [&](std::ostream& o) { write_return_panel(o, result); });
      write_to(sur_out + ".meta", [&](std::ostream& o) { write_surrogate_metadata(o, spec); });
    } else if (*synth_cmd) {
      const auto recipe = so.recipe();
      const auto panel = synth::generate(recipe, threads);
      ensure_dir(synth_out);
      const fs::path dir(synth_out);
      write_to(dir / "prices.csv", [&](std::ostream& o) { synth::write_price_records(o, synth::to_price_panel(panel)); });
      write_to(dir / "caps.csv", [&](std::ostream& o) {
        synth::write_capitalization_records(o, synth::synthetic_capitalization(recipe));
      });
      write_to(dir / "returns.csv", [&](std::ostream& o) { write_return_panel(o, panel); });
    } else if (*run_cmd) {
      PipelineConfig cfg;
      if (!config_path.empty()) {
        auto in = text::open_input(config_path);
        read_config(in, cfg);
      }
      for (const auto& [key, flag] : overrides)
        if (override_opts[key]->count() > 0) apply_setting(cfg, key, override_values[key]);
      cfg.threads = threads;
      const auto result = run(cfg);
      write_report_text(out, result.analysis.report);
    } else if (*compare) {
      auto ain = text::open_input(cmp_a);
      auto bin = text::open_input(cmp_b);
      const auto diffs = compare_reports(read_report_kv(ain), read_report_kv(bin), cmp_alpha);
      if (cmp_out.empty()) {
        write_differences(out, diffs);
      } else {
        write_to(cmp_out, [&](std::ostream& o) { write_differences(o, diffs); });
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kDataError);
  }
  return 0;
}

}  // namespace mscorr::cli
