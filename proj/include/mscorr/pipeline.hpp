#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mscorr/analysis.hpp"
#include "mscorr/association.hpp"
#include "mscorr/crosscorr.hpp"
#include "mscorr/delimited.hpp"
#include "mscorr/error.hpp"
#include "mscorr/panel.hpp"
#include "mscorr/random.hpp"
#include "mscorr/scaling.hpp"
#include "mscorr/surrogates.hpp"

namespace mscorr {

inline constexpr std::string_view kSoftwareVersion = "mscorr 1.0.0";

enum class RunMode { kRaw, kShuffled, kGaussianized };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::kRaw: return "raw";
    case RunMode::kShuffled: return "shuffled";
    case RunMode::kGaussianized: return "gaussianized";
  }
  return "raw";
}

inline RunMode parse_run_mode(std::string_view s) {
  if (s == "raw") return RunMode::kRaw;
  if (s == "shuffled") return RunMode::kShuffled;
  if (s == "gaussianized") return RunMode::kGaussianized;
  throw ConfigError("mode must be raw, shuffled or gaussianized, got '" + std::string(s) + "'");
}

struct PipelineConfig {
  std::vector<std::string> prices;  // long-format price files, merged
  std::string returns;              // or: a wide return panel
  std::string caps;                 // optional long-format capitalization file
  double k = kDefaultLengthThreshold;
  int tau_min = 1;
  int tau_max = 19;
  std::vector<double> q_grid = default_q_grid();
  double alpha = kDefaultAlpha;
  SignificanceMode significance_mode = SignificanceMode::kFiltered;
  std::uint64_t seed = 0;
  std::string output_dir = "mscorr-out";
  RunMode mode = RunMode::kRaw;
  unsigned threads = 0;  // 0: all hardware threads; does not affect outputs

  [[nodiscard]] std::vector<int> tau_range() const {
    std::vector<int> t;
    for (int v = tau_min; v <= tau_max; ++v) t.push_back(v);
    return t;
  }

  [[nodiscard]] AnalysisSettings settings() const {
    return {q_grid, tau_range(), alpha, significance_mode, threads};
  }

  void validate() const {
    if (prices.empty() == returns.empty())
      throw ConfigError("exactly one of 'prices' or 'returns' must be given");
    if (!(k > 0.0 && k <= 1.0)) throw ConfigError("k must lie in (0, 1]");
    if (tau_min < 1 || tau_max < tau_min + 2)
      throw ConfigError("tau range must start at >= 1 and hold at least 3 horizons");
    if (q_grid.size() < 2) throw ConfigError("q grid needs at least 2 values");
    for (std::size_t i = 0; i < q_grid.size(); ++i)
      if (!(q_grid[i] > 0.0) || (i > 0 && !(q_grid[i] > q_grid[i - 1])))
        throw ConfigError("q grid must be positive and strictly increasing");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  }
};

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + text::format_double(v[i]);
  return s;
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto f : text::split(s))
    if (!f.empty()) out.emplace_back(f);
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto v = text::trim(value);
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    throw ConfigError("bad value for '" + std::string(key) + "': '" + std::string(value) + "'");
  return out;
}

}  // namespace detail

/// Applies one key = value setting. Unknown keys are a configuration error.
inline void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "prices") {
    cfg.prices = detail::split_list(value);
  } else if (key == "returns") {
    cfg.returns = std::string(text::trim(value));
  } else if (key == "caps") {
    cfg.caps = std::string(text::trim(value));
  } else if (key == "k") {
    cfg.k = detail::parse_number<double>(key, value);
  } else if (key == "tau_min") {
    cfg.tau_min = detail::parse_number<int>(key, value);
  } else if (key == "tau_max") {
    cfg.tau_max = detail::parse_number<int>(key, value);
  } else if (key == "q_grid") {
    cfg.q_grid.clear();
    for (const auto& f : detail::split_list(value)) cfg.q_grid.push_back(detail::parse_number<double>(key, f));
  } else if (key == "alpha") {
    cfg.alpha = detail::parse_number<double>(key, value);
  } else if (key == "significance_mode") {
    cfg.significance_mode = parse_significance_mode(text::trim(value));
  } else if (key == "seed") {
    cfg.seed = detail::parse_number<std::uint64_t>(key, value);
  } else if (key == "output_dir") {
    cfg.output_dir = std::string(text::trim(value));
  } else if (key == "mode") {
    cfg.mode = parse_run_mode(text::trim(value));
  } else if (key == "threads") {
    cfg.threads = detail::parse_number<unsigned>(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

/// Plain "key = value" lines; '#' starts a comment line.
inline void read_config(std::istream& in, PipelineConfig& cfg) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_skippable(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(cfg, text::trim(std::string_view(line).substr(0, eq)),
                  std::string_view(line).substr(eq + 1));
  }
}

/// Config in the syntax read_config accepts (threads omitted: no effect on outputs).
inline void write_config(std::ostream& out, const PipelineConfig& cfg) {
  if (!cfg.prices.empty()) {
    out << "prices = ";
    for (std::size_t i = 0; i < cfg.prices.size(); ++i) out << (i ? "," : "") << cfg.prices[i];
    out << '\n';
  }
  if (!cfg.returns.empty()) out << "returns = " << cfg.returns << '\n';
  if (!cfg.caps.empty()) out << "caps = " << cfg.caps << '\n';
  out << "k = " << text::format_double(cfg.k) << '\n';
  out << "tau_min = " << cfg.tau_min << '\n';
  out << "tau_max = " << cfg.tau_max << '\n';
  out << "q_grid = " << detail::join_doubles(cfg.q_grid) << '\n';
  out << "alpha = " << text::format_double(cfg.alpha) << '\n';
  out << "significance_mode = " << to_string(cfg.significance_mode) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "output_dir = " << cfg.output_dir << '\n';
  out << "mode = " << to_string(cfg.mode) << '\n';
}

namespace detail {

/// Runs one pipeline stage; library errors are rethrown with the stage name
/// prepended, keeping their category (and so the exit code).
template <typename Fn>
auto stage(std::string_view name, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = "[" + std::string(name) + "] ";
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const EstimationError& e) {
    throw EstimationError(prefix + e.what());
  }
}

inline void write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& body) {
  auto out = text::open_output(path.string());
  body(out);
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

inline std::string file_digest(const std::string& path) {
  Fnv1a h;
  h.update(text::read_file(path));
  return h.hex();
}

}  // namespace detail

/// Scatter data: rho_bar, a proxy and ln(capitalization) (empty when absent).
inline void write_scatter(std::ostream& out, const ScalingTable& scaling,
                          const CorrelationSummary& corr, const CapitalizationTable& caps,
                          bool use_b_hat) {
  std::map<std::string, double> rho_of;
  for (std::size_t i = 0; i < corr.tickers.size(); ++i) rho_of[corr.tickers[i]] = corr.rho_bar[i];
  out << "ticker,rho_bar," << (use_b_hat ? "B_hat" : "A_hat") << ",ln_cap\n";
  for (std::size_t i = 0; i < scaling.tickers.size(); ++i) {
    const auto it = rho_of.find(scaling.tickers[i]);
    if (it == rho_of.end()) continue;
    const auto& r = scaling.results[i];
    out << scaling.tickers[i] << ',' << text::format_double(it->second) << ','
        << text::format_double(use_b_hat ? r.B_hat : r.A_hat) << ',';
    if (const auto cap = caps.find(scaling.tickers[i])) out << text::format_double(std::log(*cap));
    out << '\n';
  }
}

struct RunOutputs {
  ReturnPanel panel;  // the panel actually analysed (surrogate in surrogate modes)
  AnalysisResult analysis;
  std::optional<SurrogateSpec> surrogate;
  std::vector<std::string> files;  // written, relative to output_dir
};

/// Loads inputs, builds the requested panel and writes the output bundle.
/// Every file depends only on inputs, config and seed.
inline RunOutputs run(const PipelineConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.output_dir + "'");

  RunOutputs out;
  auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
    detail::write_file(dir / name, body);
    out.files.push_back(name);
  };

  ReturnPanel panel;
  if (!cfg.prices.empty()) {
    const auto series = detail::stage("load", [&] { return load_prices(cfg.prices); });
    const auto prices = detail::stage("clean", [&] { return preprocess(series, cfg.k); });
    emit("panel.csv", [&](std::ostream& o) { write_price_panel(o, prices); });
    emit("fill_mask.csv", [&](std::ostream& o) { write_fill_mask(o, prices); });
    panel = detail::stage("returns", [&] { return compute_returns(prices); });
  } else {
    panel = detail::stage("load", [&] {
      auto in = text::open_input(cfg.returns);
      return read_return_panel(in);
    });
  }

  if (cfg.mode == RunMode::kShuffled) {
    auto s = detail::stage("surrogate", [&] { return synchronous_shuffle(panel, cfg.seed); });
    panel = std::move(s.panel);
    out.surrogate = std::move(s.spec);
  } else if (cfg.mode == RunMode::kGaussianized) {
    panel = detail::stage("surrogate", [&] { return marginal_gaussianize(panel, cfg.seed, cfg.threads); });
    out.surrogate = SurrogateSpec{SurrogateKind::kMarginalGaussianize, cfg.seed, std::nullopt};
  }
  emit("returns.csv", [&](std::ostream& o) { write_return_panel(o, panel); });
  if (out.surrogate)
    emit("surrogate.meta", [&](std::ostream& o) { write_surrogate_metadata(o, *out.surrogate); });

  CapitalizationTable caps;
  if (!cfg.caps.empty()) {
    caps = detail::stage("caps", [&] {
      auto in = text::open_input(cfg.caps);
      return median_capitalization(load_capitalization_records(in, cfg.caps));
    });
  }

  const auto settings = cfg.settings();
  auto& res = out.analysis;
  res.scaling = detail::stage("scaling", [&] {
    return estimate_panel_scaling(panel, settings.q_grid, settings.tau_range, settings.threads);
  });
  res.correlation = detail::stage("xcorr", [&] {
    return correlation_matrix(panel, settings.alpha, settings.significance_mode, settings.threads);
  });
  res.report = detail::stage("associate", [&] { return build_report(res.scaling, res.correlation, caps); });

  emit("proxies.csv", [&](std::ostream& o) { write_scaling_table(o, res.scaling); });
  emit("rho_bar.csv", [&](std::ostream& o) {
    write_rho_bar(o, res.correlation.tickers, res.correlation.rho_bar);
  });
  emit("correlation.csv", [&](std::ostream& o) {
    write_square_matrix(o, res.correlation.tickers, res.correlation.rho);
  });
  emit("pvalues.csv", [&](std::ostream& o) {
    write_square_matrix(o, res.correlation.tickers, res.correlation.pvalue);
  });
  emit("association.txt", [&](std::ostream& o) { write_report_text(o, res.report); });
  emit("association.kv", [&](std::ostream& o) { write_report_kv(o, res.report); });
  emit("scatter_B.csv", [&](std::ostream& o) { write_scatter(o, res.scaling, res.correlation, caps, true); });
  emit("scatter_A.csv", [&](std::ostream& o) { write_scatter(o, res.scaling, res.correlation, caps, false); });

  // The manifest is itself a valid config: `run --config manifest.txt` redoes the run.
  const auto files = out.files;
  emit("manifest.txt", [&](std::ostream& o) {
    o << "# software: " << kSoftwareVersion << '\n';
    for (const auto& p : cfg.prices) o << "# input " << p << " fnv1a64=" << detail::file_digest(p) << '\n';
    if (!cfg.returns.empty())
      o << "# input " << cfg.returns << " fnv1a64=" << detail::file_digest(cfg.returns) << '\n';
    if (!cfg.caps.empty())
      o << "# input " << cfg.caps << " fnv1a64=" << detail::file_digest(cfg.caps) << '\n';
    for (const auto& f : files) o << "# output " << f << '\n';
    write_config(o, cfg);
  });
  return out;
}

// ---- report comparison -----------------------------------------------------

/// Statistics read back from an association.kv file, in file order.
struct ReportValues {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Statistic>> statistics;
};

inline ReportValues read_report_kv(std::istream& in) {
  ReportValues rv;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_skippable(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key(text::trim(std::string_view(line).substr(0, eq)));
    const auto value = text::trim(std::string_view(line).substr(eq + 1));
    const bool is_value = key.ends_with(".value");
    const bool is_pvalue = key.ends_with(".pvalue");
    if (!is_value && !is_pvalue) {
      rv.meta[key] = std::string(value);
      continue;
    }
    const auto name = key.substr(0, key.rfind('.'));
    const auto v = text::parse_double(value);
    if (!v) throw ParseError(line_no, "not a number: '" + std::string(value) + "'");
    auto [it, inserted] = index.try_emplace(name, rv.statistics.size());
    if (inserted) rv.statistics.emplace_back(name, Statistic{});
    auto& stat = rv.statistics[it->second].second;
    if (is_value) stat.value = *v;
    else stat.pvalue = *v;
  }
  return rv;
}

inline ReportValues to_values(const AssociationReport& rep) {
  std::stringstream ss;
  write_report_kv(ss, rep);
  return read_report_kv(ss);
}

struct ReportDifference {
  std::string statistic;
  double value_a = 0.0;
  double value_b = 0.0;
  double abs_difference = 0.0;
  std::optional<bool> both_significant;  // empty when a statistic has no p-value
};

/// Per statistic: both values, |a - b| and whether both p-values are below alpha.
/// The two reports must carry the same set of statistics.
inline std::vector<ReportDifference> compare_reports(const ReportValues& a, const ReportValues& b,
                                                     double alpha = kDefaultAlpha) {
  std::set<std::string> names_a, names_b;
  for (const auto& [n, s] : a.statistics) names_a.insert(n);
  for (const auto& [n, s] : b.statistics) names_b.insert(n);
  if (names_a.empty() || names_a != names_b)
    throw ConfigError("compare: reports do not carry the same statistics");
  std::map<std::string, Statistic> b_of(b.statistics.begin(), b.statistics.end());

  std::vector<ReportDifference> out;
  for (const auto& [name, sa] : a.statistics) {
    const auto& sb = b_of.at(name);
    ReportDifference d{name, sa.value, sb.value, std::abs(sa.value - sb.value), std::nullopt};
    if (sa.pvalue.has_value() != sb.pvalue.has_value())
      throw ConfigError("compare: statistic '" + name + "' has a p-value in only one report");
    if (sa.pvalue) d.both_significant = *sa.pvalue < alpha && *sb.pvalue < alpha;
    out.push_back(std::move(d));
  }
  return out;
}

inline void write_differences(std::ostream& out, const std::vector<ReportDifference>& diffs) {
  out << "statistic,value_a,value_b,abs_difference,both_significant\n";
  for (const auto& d : diffs) {
    out << d.statistic << ',' << text::format_double(d.value_a) << ','
        << text::format_double(d.value_b) << ',' << text::format_double(d.abs_difference) << ','
        << (d.both_significant ? (*d.both_significant ? "yes" : "no") : "na") << '\n';
  }
}

}  // namespace mscorr
