#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mscorr/crosscorr.hpp"
#include "mscorr/delimited.hpp"
#include "mscorr/error.hpp"
#include "mscorr/panel.hpp"
#include "mscorr/scaling.hpp"

namespace mscorr {

struct KendallResult {
  double tau = 0.0;
  double pvalue = 1.0;
};

/// Pair counts behind a tau-b coefficient.
struct KendallCounts {
  std::int64_t n_pairs = 0;    // n (n - 1) / 2
  std::int64_t x_ties = 0;     // pairs tied in x
  std::int64_t y_ties = 0;     // pairs tied in y
  std::int64_t joint_ties = 0; // pairs tied in both
  std::int64_t score = 0;      // concordant - discordant
};

/// tau-b from pair counts; shared by the fast path and any brute-force check.
inline double kendall_tau_b(const KendallCounts& c) {
  const std::int64_t dx = c.n_pairs - c.x_ties;
  const std::int64_t dy = c.n_pairs - c.y_ties;
  if (dx == 0 || dy == 0) throw UndefinedRankError("kendall: all values tied in one argument");
  return static_cast<double>(c.score) / std::sqrt(static_cast<double>(dx) * static_cast<double>(dy));
}

namespace detail {

/// Sorts v ascending and returns the number of strict inversions.
inline std::int64_t merge_sort_inversions(std::vector<double>& v) {
  std::vector<double> buf(v.size());
  std::int64_t swaps = 0;
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, v.size());
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    std::swap(v, buf);
  }
  return swaps;
}

inline std::int64_t pairs_of(std::int64_t m) { return m * (m - 1) / 2; }

}  // namespace detail

/// Tie-aware pair counts in O(n log n): sort by (x, y), count x and joint
/// ties, then count the inversions left in y.
inline KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y,
                                    std::vector<std::int64_t>* x_groups = nullptr,
                                    std::vector<std::int64_t>* y_groups = nullptr) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  KendallCounts c;
  c.n_pairs = detail::pairs_of(static_cast<std::int64_t>(n));
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const auto run = static_cast<std::int64_t>(j - i);
    c.x_ties += detail::pairs_of(run);
    if (x_groups != nullptr && run > 1) x_groups->push_back(run);
    for (std::size_t a = i; a < j;) {
      std::size_t b = a + 1;
      while (b < j && y[order[b]] == y[order[a]]) ++b;
      c.joint_ties += detail::pairs_of(static_cast<std::int64_t>(b - a));
      a = b;
    }
    i = j;
  }

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t discordant = detail::merge_sort_inversions(ys);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && ys[j] == ys[i]) ++j;
    const auto run = static_cast<std::int64_t>(j - i);
    c.y_ties += detail::pairs_of(run);
    if (y_groups != nullptr && run > 1) y_groups->push_back(run);
    i = j;
  }
  c.score = c.n_pairs - c.x_ties - c.y_ties + c.joint_ties - 2 * discordant;
  return c;
}

/// Kendall tau-b with a two-sided p-value from the normal approximation of
/// the score, using the tie-corrected variance.
inline KendallResult kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw EstimationError("kendall: vectors differ in length");
  if (x.size() < 2) throw EstimationError("kendall: need at least 2 observations");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isnan(x[i]) || std::isnan(y[i])) throw EstimationError("kendall: NaN input");

  std::vector<std::int64_t> xg, yg;
  const auto c = kendall_counts(x, y, &xg, &yg);
  KendallResult r;
  r.tau = kendall_tau_b(c);

  const auto n = static_cast<double>(x.size());
  double vt = 0.0, vu = 0.0, t1 = 0.0, u1 = 0.0, t2 = 0.0, u2 = 0.0;
  for (auto g : xg) {
    const auto t = static_cast<double>(g);
    vt += t * (t - 1.0) * (2.0 * t + 5.0);
    t1 += t * (t - 1.0);
    t2 += t * (t - 1.0) * (t - 2.0);
  }
  for (auto g : yg) {
    const auto u = static_cast<double>(g);
    vu += u * (u - 1.0) * (2.0 * u + 5.0);
    u1 += u * (u - 1.0);
    u2 += u * (u - 1.0) * (u - 2.0);
  }
  double var = (n * (n - 1.0) * (2.0 * n + 5.0) - vt - vu) / 18.0 +
               t1 * u1 / (2.0 * n * (n - 1.0));
  if (n > 2.0) var += t2 * u2 / (9.0 * n * (n - 1.0) * (n - 2.0));
  if (var > 0.0) {
    const double z = static_cast<double>(c.score) / std::sqrt(var);
    r.pvalue = std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0);
  }
  return r;
}

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
  double r2 = 0.0;
};

/// Least-squares line y ~ intercept + slope x with r2 = 1 - RSS/TSS.
/// A constant response is fitted exactly and reports r2 = 1.
inline OlsFit simple_ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw EstimationError("ols: vectors differ in length");
  if (x.size() < 3) throw EstimationError("ols: need at least 3 observations");
  if (detail::is_constant(x)) throw SingularFitError("ols: constant predictor");
  const double mx = column_mean(x);
  const double my = column_mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  OlsFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    fit.residuals[i] = (y[i] - my) - fit.slope * (x[i] - mx);
  // Squared correlation; algebraically equal to 1 - RSS/TSS for an OLS line.
  fit.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

struct PartialCorrelation {
  double rho_par = 0.0;
  double pvalue = 1.0;
};

/// Correlation of a and b after regressing each on the control; p-value from
/// the t-test with n - 3 degrees of freedom.
inline PartialCorrelation partial_correlation(std::span<const double> a, std::span<const double> b,
                                              std::span<const double> control) {
  if (a.size() != b.size() || a.size() != control.size())
    throw EstimationError("partial correlation: vectors differ in length");
  if (a.size() < 4) throw EstimationError("partial correlation: need at least 4 observations");
  const auto ra = simple_ols(control, a);
  const auto rb = simple_ols(control, b);
  PartialCorrelation out;
  out.rho_par = pearson(ra.residuals, rb.residuals);
  out.pvalue = correlation_pvalue(out.rho_par, static_cast<double>(a.size() - 3));
  return out;
}

// ---- report ----------------------------------------------------------------

struct Statistic {
  double value = 0.0;
  std::optional<double> pvalue;
};

struct AssociationReport {
  std::size_t n_stocks = 0;  // stocks entering the Kendall block
  std::size_t n_used = 0;    // stocks with capitalization
  Statistic kendall_B_rho_bar;
  Statistic kendall_A_rho_bar;
  bool capitalization_available = false;
  Statistic pearson_B_lncap;
  Statistic pearson_rho_bar_lncap;
  Statistic partial_rho_bar_B;
  double r2_rho_bar = 0.0;
  double r2_B_hat = 0.0;

  /// Named statistics in a fixed order; capitalization entries only when available.
  [[nodiscard]] std::vector<std::pair<std::string, Statistic>> statistics() const {
    std::vector<std::pair<std::string, Statistic>> out{
        {"kendall_tau.B_hat.rho_bar", kendall_B_rho_bar},
        {"kendall_tau.A_hat.rho_bar", kendall_A_rho_bar},
    };
    if (capitalization_available) {
      out.emplace_back("pearson.B_hat.ln_cap", pearson_B_lncap);
      out.emplace_back("pearson.rho_bar.ln_cap", pearson_rho_bar_lncap);
      out.emplace_back("partial_corr.rho_bar.B_hat", partial_rho_bar_B);
      out.emplace_back("r2.rho_bar.ln_cap", Statistic{r2_rho_bar, std::nullopt});
      out.emplace_back("r2.B_hat.ln_cap", Statistic{r2_B_hat, std::nullopt});
    }
    return out;
  }
};

/// Minimum number of stocks with capitalization for the capitalization block.
inline constexpr std::size_t kMinCapitalizedStocks = 4;

/// Kendall block on every stock present in both inputs (scaling order);
/// Pearson, partial-correlation and R^2 block on the subset with a
/// capitalization.
inline AssociationReport build_report(const ScalingTable& scaling,
                                      const std::vector<std::string>& rho_tickers,
                                      std::span<const double> rho_bar,
                                      const CapitalizationTable& caps) {
  std::map<std::string, double> rho_of;
  for (std::size_t i = 0; i < rho_tickers.size(); ++i) rho_of[rho_tickers[i]] = rho_bar[i];

  std::vector<double> a, b, r;
  std::vector<double> b_cap, r_cap, lncap;
  for (std::size_t i = 0; i < scaling.tickers.size(); ++i) {
    const auto it = rho_of.find(scaling.tickers[i]);
    if (it == rho_of.end()) continue;
    const auto& s = scaling.results[i];
    a.push_back(s.A_hat);
    b.push_back(s.B_hat);
    r.push_back(it->second);
    if (const auto cap = caps.find(scaling.tickers[i])) {
      b_cap.push_back(s.B_hat);
      r_cap.push_back(it->second);
      lncap.push_back(std::log(*cap));
    }
  }
  if (r.empty()) throw ConfigError("associate: no ticker is shared by the proxy and correlation inputs");

  AssociationReport rep;
  rep.n_stocks = r.size();
  rep.n_used = lncap.size();
  const auto kb = kendall_tau(b, r);
  const auto ka = kendall_tau(a, r);
  rep.kendall_B_rho_bar = {kb.tau, kb.pvalue};
  rep.kendall_A_rho_bar = {ka.tau, ka.pvalue};

  if (rep.n_used >= kMinCapitalizedStocks) {
    rep.capitalization_available = true;
    const double pb = pearson(b_cap, lncap);
    const double pr = pearson(r_cap, lncap);
    rep.pearson_B_lncap = {pb, pearson_pvalue(pb, rep.n_used)};
    rep.pearson_rho_bar_lncap = {pr, pearson_pvalue(pr, rep.n_used)};
    const auto par = partial_correlation(r_cap, b_cap, lncap);
    rep.partial_rho_bar_B = {par.rho_par, par.pvalue};
    rep.r2_rho_bar = simple_ols(lncap, r_cap).r2;
    rep.r2_B_hat = simple_ols(lncap, b_cap).r2;
  }
  return rep;
}

inline AssociationReport build_report(const ScalingTable& scaling, const CorrelationSummary& corr,
                                      const CapitalizationTable& caps) {
  return build_report(scaling, corr.tickers, corr.rho_bar, caps);
}

/// Machine-readable form: one "key = value" line per entry, full precision.
inline void write_report_kv(std::ostream& out, const AssociationReport& rep) {
  out << "n_stocks = " << rep.n_stocks << '\n';
  out << "n_used = " << rep.n_used << '\n';
  out << "capitalization_block = " << (rep.capitalization_available ? "available" : "unavailable")
      << '\n';
  for (const auto& [name, stat] : rep.statistics()) {
    out << name << ".value = " << text::format_double(stat.value) << '\n';
    if (stat.pvalue) out << name << ".pvalue = " << text::format_double(*stat.pvalue) << '\n';
  }
}

namespace detail {

inline void write_block_line(std::ostream& out, const char* label, const Statistic& s) {
  out << "  " << label << " = " << text::format_fixed3(s.value) << "  ("
      << text::format_double(s.value) << ")";
  if (s.pvalue)
    out << "   p-value = " << text::format_fixed3(*s.pvalue) << "  ("
        << text::format_double(*s.pvalue) << ")";
  out << '\n';
}

}  // namespace detail

/// Human-readable form: one block per table analogue, three-decimal display
/// with full-precision values in parentheses.
inline void write_report_text(std::ostream& out, const AssociationReport& rep) {
  out << "stocks: " << rep.n_stocks << "  with capitalization: " << rep.n_used << "\n\n";
  out << "[Kendall tau: B_hat vs rho_bar]\n";
  detail::write_block_line(out, "tau", rep.kendall_B_rho_bar);
  out << "\n[Kendall tau: A_hat vs rho_bar]\n";
  detail::write_block_line(out, "tau", rep.kendall_A_rho_bar);
  if (!rep.capitalization_available) {
    out << "\n[Capitalization]\n  unavailable (fewer than " << kMinCapitalizedStocks
        << " stocks with capitalization)\n";
    return;
  }
  out << "\n[Pearson: B_hat vs ln(capitalization)]\n";
  detail::write_block_line(out, "rho", rep.pearson_B_lncap);
  out << "\n[Pearson: rho_bar vs ln(capitalization)]\n";
  detail::write_block_line(out, "rho", rep.pearson_rho_bar_lncap);
  out << "\n[Partial correlation: rho_bar vs B_hat, control ln(capitalization)]\n";
  detail::write_block_line(out, "rho_par", rep.partial_rho_bar_B);
  detail::write_block_line(out, "R2_rho_bar", Statistic{rep.r2_rho_bar, std::nullopt});
  detail::write_block_line(out, "R2_B_hat", Statistic{rep.r2_B_hat, std::nullopt});
}

}  // namespace mscorr
