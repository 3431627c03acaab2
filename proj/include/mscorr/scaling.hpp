#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mscorr/delimited.hpp"
#include "mscorr/error.hpp"
#include "mscorr/panel.hpp"
#include "mscorr/parallel.hpp"

// Structure-function scaling: E|r_tau|^q = K(q) tau^zeta(q), with zeta(q)
// estimated per q by a log-log regression over tau, and the multiscaling
// proxies A, B from the intercept-free fit zeta(q) = A q + B q^2.

namespace mscorr {

/// Smallest number of aggregated observations required at every horizon.
inline constexpr std::size_t kMinAggregatedObservations = 30;

/// q = 0.1, 0.2, ..., 1.0
inline std::vector<double> default_q_grid() {
  std::vector<double> q;
  for (int i = 1; i <= 10; ++i) q.push_back(i / 10.0);
  return q;
}

/// tau = 1, ..., 19 days
inline std::vector<int> default_tau_range() {
  std::vector<int> tau;
  for (int t = 1; t <= 19; ++t) tau.push_back(t);
  return tau;
}

struct MomentPoint {
  double tau = 0.0;
  double moment = 0.0;
};

/// Sample moments E|r_tau|^q of one order q over increasing horizons.
struct MomentCurve {
  double q = 0.0;
  std::vector<MomentPoint> points;
};

struct ZetaEstimate {
  std::vector<double> zeta;
  std::vector<double> lnK;
  std::vector<double> r2;
};

struct ProxyFit {
  double A_hat = 0.0;
  double B_hat = 0.0;
  double fit_rss = 0.0;
};

struct ScalingResult {
  std::vector<double> q_grid;
  std::vector<double> zeta;
  std::vector<double> lnK;
  double A_hat = 0.0;
  double B_hat = 0.0;
  double fit_rss = 0.0;
  std::vector<double> per_q_r2;
};

/// Per-ticker scaling results in panel column order.
struct ScalingTable {
  std::vector<std::string> tickers;
  std::vector<ScalingResult> results;
};

/// Overlapping tau-day sums r_tau(t) = r(t) + ... + r(t + tau - 1).
inline std::vector<double> aggregate_returns(std::span<const double> returns, int tau) {
  if (tau < 1) throw EstimationError("horizon tau must be >= 1");
  if (static_cast<std::size_t>(tau) >= returns.size())
    throw EstimationError("horizon tau=" + std::to_string(tau) + " is not shorter than the series (" +
                          std::to_string(returns.size()) + ")");
  const std::size_t n = returns.size() - static_cast<std::size_t>(tau) + 1;
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (int k = 0; k < tau; ++k) s += returns[t + static_cast<std::size_t>(k)];
    out[t] = s;
  }
  return out;
}

/// One MomentCurve per q, each over the given horizons.
inline std::vector<MomentCurve> structure_function(std::span<const double> returns,
                                                   std::span<const double> q_grid,
                                                   std::span<const int> tau_range) {
  if (q_grid.empty() || tau_range.empty()) throw ConfigError("empty q grid or tau range");
  for (double q : q_grid)
    if (!(q > 0.0)) throw ConfigError("moment orders must be positive");
  for (std::size_t i = 0; i < tau_range.size(); ++i) {
    if (tau_range[i] < 1) throw ConfigError("horizons must be >= 1");
    if (i > 0 && tau_range[i] <= tau_range[i - 1])
      throw ConfigError("horizons must be strictly increasing");
  }
  const int tau_max = tau_range.back();
  if (returns.size() < static_cast<std::size_t>(tau_max) - 1 + kMinAggregatedObservations)
    throw EstimationError("series of length " + std::to_string(returns.size()) +
                          " leaves fewer than " + std::to_string(kMinAggregatedObservations) +
                          " observations at tau=" + std::to_string(tau_max));

  std::vector<MomentCurve> curves(q_grid.size());
  for (std::size_t j = 0; j < q_grid.size(); ++j) curves[j].q = q_grid[j];

  // A grid q_j = (j + 1) q_0 is evaluated as successive powers of |x|^q_0.
  bool multiples = true;
  for (std::size_t j = 1; j < q_grid.size(); ++j)
    multiples = multiples && std::abs(q_grid[j] - static_cast<double>(j + 1) * q_grid[0]) <=
                                 1e-12 * q_grid[j];

  std::vector<double> sums(q_grid.size());
  for (int tau : tau_range) {
    const auto agg = aggregate_returns(returns, tau);
    std::fill(sums.begin(), sums.end(), 0.0);
    for (double x : agg) {
      const double a = std::abs(x);
      if (a == 0.0) continue;
      const double la = std::log(a);
      if (multiples) {
        const double base = std::exp(q_grid[0] * la);
        double power = base;
        sums[0] += power;
        for (std::size_t j = 1; j < q_grid.size(); ++j) {
          power *= base;
          sums[j] += power;
        }
      } else {
        for (std::size_t j = 0; j < q_grid.size(); ++j) sums[j] += std::exp(q_grid[j] * la);
      }
    }
    for (std::size_t j = 0; j < q_grid.size(); ++j) {
      const double m = sums[j] / static_cast<double>(agg.size());
      if (!(m > 0.0))
        throw EstimationError("zero moment at q=" + text::format_double(q_grid[j]) +
                              ", tau=" + std::to_string(tau));
      curves[j].points.push_back({static_cast<double>(tau), m});
    }
  }
  return curves;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

namespace detail {

inline LineFit ols_line(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw SingularFitError("regression on a constant predictor");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += e * e;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace detail

/// Unweighted OLS of ln(moment) on ln(tau) for every curve.
inline ZetaEstimate estimate_zeta(std::span<const MomentCurve> curves) {
  ZetaEstimate out;
  std::vector<double> x, y;
  for (const auto& c : curves) {
    if (c.points.size() < 3)
      throw EstimationError("moment curve at q=" + text::format_double(c.q) +
                            " has fewer than 3 points");
    x.clear();
    y.clear();
    for (const auto& p : c.points) {
      if (!(p.moment > 0.0) || !(p.tau > 0.0))
        throw EstimationError("non-positive moment or horizon at q=" + text::format_double(c.q));
      x.push_back(std::log(p.tau));
      y.push_back(std::log(p.moment));
    }
    LineFit fit;
    try {
      fit = detail::ols_line(x, y);
    } catch (const SingularFitError&) {
      throw SingularFitError("all horizons equal in moment curve at q=" + text::format_double(c.q));
    }
    out.zeta.push_back(fit.slope);
    out.lnK.push_back(fit.intercept);
    out.r2.push_back(fit.r2);
  }
  return out;
}

/// Least squares for zeta = A q + B q^2 (no constant), via the 2x2 normal equations.
inline ProxyFit fit_proxies(std::span<const double> q_grid, std::span<const double> zeta) {
  if (q_grid.size() != zeta.size()) throw EstimationError("q grid and zeta differ in length");
  std::vector<double> distinct(q_grid.begin(), q_grid.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw EstimationError("need at least 2 distinct moment orders");

  double s2 = 0.0, s3 = 0.0, s4 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const double q = q_grid[i];
    const double q2 = q * q;
    s2 += q2;
    s3 += q2 * q;
    s4 += q2 * q2;
    b1 += q * zeta[i];
    b2 += q2 * zeta[i];
  }
  const double det = s2 * s4 - s3 * s3;
  if (!(std::abs(det) > 0.0)) throw SingularFitError("singular proxy normal equations");

  ProxyFit fit;
  fit.A_hat = (b1 * s4 - b2 * s3) / det;
  fit.B_hat = (s2 * b2 - s3 * b1) / det;
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const double q = q_grid[i];
    const double e = zeta[i] - (fit.A_hat * q + fit.B_hat * q * q);
    fit.fit_rss += e * e;
  }
  return fit;
}

/// Full per-series estimation: moments, zeta(q), proxies.
inline ScalingResult estimate_scaling(std::span<const double> returns,
                                      std::span<const double> q_grid,
                                      std::span<const int> tau_range) {
  const auto curves = structure_function(returns, q_grid, tau_range);
  auto zeta = estimate_zeta(curves);
  const auto proxies = fit_proxies(q_grid, zeta.zeta);
  ScalingResult r;
  r.q_grid.assign(q_grid.begin(), q_grid.end());
  r.zeta = std::move(zeta.zeta);
  r.lnK = std::move(zeta.lnK);
  r.per_q_r2 = std::move(zeta.r2);
  r.A_hat = proxies.A_hat;
  r.B_hat = proxies.B_hat;
  r.fit_rss = proxies.fit_rss;
  return r;
}

/// Scaling results for every column of a panel, computed in parallel.
/// Estimation errors are rethrown naming the ticker.
inline ScalingTable estimate_panel_scaling(const ReturnPanel& panel,
                                           std::span<const double> q_grid,
                                           std::span<const int> tau_range,
                                           unsigned threads = 0) {
  ScalingTable table;
  table.tickers = panel.tickers;
  table.results.resize(panel.n_stocks());
  parallel_for(
      panel.n_stocks(),
      [&](std::size_t i) {
        try {
          table.results[i] = estimate_scaling(panel.returns.col(i), q_grid, tau_range);
        } catch (const EstimationError& e) {
          throw EstimationError("scaling: ticker '" + panel.tickers[i] + "': " + e.what());
        }
      },
      threads);
  return table;
}

/// One row per ticker: A_hat, B_hat, fit_rss, then zeta at every q.
inline void write_scaling_table(std::ostream& out, const ScalingTable& table) {
  out << "ticker,A_hat,B_hat,fit_rss";
  if (!table.results.empty())
    for (double q : table.results.front().q_grid) out << ",zeta_q" << text::format_double(q);
  out << '\n';
  for (std::size_t i = 0; i < table.tickers.size(); ++i) {
    const auto& r = table.results[i];
    out << table.tickers[i] << ',' << text::format_double(r.A_hat) << ','
        << text::format_double(r.B_hat) << ',' << text::format_double(r.fit_rss);
    for (double z : r.zeta) out << ',' << text::format_double(z);
    out << '\n';
  }
}

/// Reads the table written by write_scaling_table. Intercepts and r2 are not
/// stored there and come back empty.
inline ScalingTable read_scaling_table(std::istream& in) {
  const auto t = text::read_wide_table(in);
  if (t.columns.size() < 3 || t.columns[0] != "A_hat" || t.columns[1] != "B_hat" ||
      t.columns[2] != "fit_rss")
    throw DataError("proxy table must start with columns A_hat,B_hat,fit_rss");
  std::vector<double> q_grid;
  for (std::size_t c = 3; c < t.columns.size(); ++c) {
    const std::string_view name = t.columns[c];
    const auto q = name.starts_with("zeta_q") ? text::parse_double(name.substr(6)) : std::nullopt;
    if (!q) throw DataError("bad zeta column '" + t.columns[c] + "'");
    q_grid.push_back(*q);
  }
  ScalingTable table;
  table.tickers = t.row_labels;
  for (std::size_t r = 0; r < t.values.rows(); ++r) {
    ScalingResult s;
    s.q_grid = q_grid;
    s.A_hat = t.values(r, 0);
    s.B_hat = t.values(r, 1);
    s.fit_rss = t.values(r, 2);
    for (std::size_t c = 3; c < t.columns.size(); ++c) s.zeta.push_back(t.values(r, c));
    table.results.push_back(std::move(s));
  }
  return table;
}

}  // namespace mscorr
