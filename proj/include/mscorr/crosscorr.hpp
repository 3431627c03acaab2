#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "mscorr/delimited.hpp"
#include "mscorr/error.hpp"
#include "mscorr/matrix.hpp"
#include "mscorr/panel.hpp"
#include "mscorr/parallel.hpp"

namespace mscorr {

inline constexpr double kDefaultAlpha = 0.05;

/// How insignificant coefficients enter the average correlation.
enum class SignificanceMode {
  kAll,       // every coefficient is averaged
  kFiltered,  // coefficients with p >= alpha count as zero
};

inline std::string_view to_string(SignificanceMode m) {
  return m == SignificanceMode::kAll ? "all" : "filtered";
}

inline SignificanceMode parse_significance_mode(std::string_view s) {
  if (s == "all") return SignificanceMode::kAll;
  if (s == "filtered") return SignificanceMode::kFiltered;
  throw ConfigError("significance mode must be 'all' or 'filtered', got '" + std::string(s) + "'");
}

struct CorrelationSummary {
  std::vector<std::string> tickers;
  ColumnMatrix<double> rho;
  ColumnMatrix<double> pvalue;
  std::vector<double> rho_bar;
  SignificanceMode significance_mode = SignificanceMode::kFiltered;
  double alpha = kDefaultAlpha;
};

namespace detail {

inline bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

/// Dot product with four interleaved accumulators; the summation order is
/// fixed, so the result is reproducible.
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

/// Sample product-moment correlation.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw EstimationError("pearson: series differ in length");
  if (x.size() < 3) throw EstimationError("pearson: need at least 3 observations");
  if (detail::is_constant(x) || detail::is_constant(y))
    throw UndefinedCorrelationError("pearson: correlation of a constant series is undefined");
  const double mx = column_mean(x);
  const double my = column_mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Two-sided p-value of a correlation coefficient against zero, from
/// t = rho sqrt(dof / (1 - rho^2)) ~ Student-t(dof).
inline double correlation_pvalue(double rho, double dof) {
  if (!(dof >= 1.0)) throw EstimationError("correlation p-value needs at least 1 degree of freedom");
  if (!(std::abs(rho) <= 1.0)) throw EstimationError("correlation coefficient outside [-1, 1]");
  if (std::abs(rho) == 1.0) return 0.0;
  if (rho == 0.0) return 1.0;
  const double t = std::abs(rho) * std::sqrt(dof / ((1.0 - rho) * (1.0 + rho)));
  const boost::math::students_t dist(dof);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

/// p-value of a Pearson coefficient estimated from n observations (n - 2 dof).
inline double pearson_pvalue(double rho, std::size_t n) {
  if (n < 3) throw EstimationError("pearson p-value needs n >= 3");
  return correlation_pvalue(rho, static_cast<double>(n - 2));
}

/// Full correlation and p-value matrices plus each stock's average
/// correlation with the others. Columns are centred and normalised once; each
/// pair is one inner product, computed once and mirrored.
inline CorrelationSummary correlation_matrix(const ReturnPanel& panel, double alpha = kDefaultAlpha,
                                             SignificanceMode mode = SignificanceMode::kFiltered,
                                             unsigned threads = 0) {
  const std::size_t n = panel.n_stocks();
  const std::size_t t_len = panel.n_days();
  if (n < 2) throw DataError("correlation matrix needs at least 2 stocks");
  if (t_len < 3) throw DataError("correlation matrix needs at least 3 observations");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");

  ColumnMatrix<double> z(t_len, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = panel.returns.col(i);
    if (detail::is_constant(x))
      throw UndefinedCorrelationError("xcorr: ticker '" + panel.tickers[i] +
                                      "' has a constant return series");
    const double m = column_mean(x);
    auto zi = z.col(i);
    double ss = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) {
      zi[t] = x[t] - m;
      ss += zi[t] * zi[t];
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : zi) v *= inv;
  }

  CorrelationSummary out;
  out.tickers = panel.tickers;
  out.alpha = alpha;
  out.significance_mode = mode;
  out.rho = ColumnMatrix<double>(n, n, 0.0);
  out.pvalue = ColumnMatrix<double>(n, n, 0.0);

  parallel_for(
      n,
      [&](std::size_t i) {
        out.rho(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
          const double r = std::clamp(detail::dot(z.col(i), z.col(j)), -1.0, 1.0);
          const double p = pearson_pvalue(r, t_len);
          out.rho(i, j) = r;
          out.rho(j, i) = r;
          out.pvalue(i, j) = p;
          out.pvalue(j, i) = p;
        }
      },
      threads);

  out.rho_bar.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (mode == SignificanceMode::kFiltered && !(out.pvalue(i, j) < alpha)) continue;
      sum += out.rho(i, j);
    }
    out.rho_bar[i] = sum / static_cast<double>(n - 1);
  }
  return out;
}

inline void write_square_matrix(std::ostream& out, const std::vector<std::string>& tickers,
                                const ColumnMatrix<double>& m) {
  text::write_wide_table(out, "ticker", tickers, tickers, m, text::format_double);
}

inline void write_rho_bar(std::ostream& out, const std::vector<std::string>& tickers,
                          std::span<const double> rho_bar) {
  out << "ticker,rho_bar\n";
  for (std::size_t i = 0; i < tickers.size(); ++i)
    out << tickers[i] << ',' << text::format_double(rho_bar[i]) << '\n';
}

struct RhoBarTable {
  std::vector<std::string> tickers;
  std::vector<double> rho_bar;
};

inline RhoBarTable read_rho_bar(std::istream& in) {
  const auto t = text::read_wide_table(in);
  if (t.columns.size() != 1 || t.columns[0] != "rho_bar")
    throw DataError("average-correlation file must have columns ticker,rho_bar");
  RhoBarTable out;
  out.tickers = t.row_labels;
  const auto col = t.values.col(0);
  out.rho_bar.assign(col.begin(), col.end());
  return out;
}

}  // namespace mscorr
