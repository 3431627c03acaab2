#pragma once

// Independent reference computations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

struct PairCounts {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t x_ties = 0;
  std::int64_t y_ties = 0;
  std::int64_t n_pairs = 0;
};

/// Exhaustive O(n^2) enumeration of all pairs.
inline PairCounts enumerate_pairs(std::span<const double> x, std::span<const double> y) {
  PairCounts c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++c.n_pairs;
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++c.x_ties;
      if (dy == 0.0) ++c.y_ties;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0)) ++c.concordant;
      else ++c.discordant;
    }
  }
  return c;
}

inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  const auto c = enumerate_pairs(x, y);
  return static_cast<double>(c.concordant - c.discordant) /
         std::sqrt(static_cast<double>(c.n_pairs - c.x_ties) *
                   static_cast<double>(c.n_pairs - c.y_ties));
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Textbook covariance / standard-deviation form.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double cxy = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return cxy / std::sqrt(vx * vy);
}

/// rho_ab.c = (rho_ab - rho_ac rho_bc) / sqrt((1 - rho_ac^2)(1 - rho_bc^2)).
inline double partial_correlation_identity(std::span<const double> a, std::span<const double> b,
                                           std::span<const double> c) {
  const double ab = pearson(a, b), ac = pearson(a, c), bc = pearson(b, c);
  return (ab - ac * bc) / std::sqrt((1.0 - ac * ac) * (1.0 - bc * bc));
}

inline double student_t_density(double x, double dof) {
  const double log_norm = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                          0.5 * std::log(dof * std::numbers::pi);
  return std::exp(log_norm - (dof + 1.0) / 2.0 * std::log1p(x * x / dof));
}

/// Two-sided tail probability 1 - 2 * integral_0^|t| f, composite Simpson.
inline double student_t_two_sided_pvalue(double t, double dof, int intervals = 200000) {
  const double b = std::abs(t);
  const double h = b / intervals;
  double s = student_t_density(0.0, dof) + student_t_density(b, dof);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * student_t_density(i * h, dof);
  return 1.0 - 2.0 * s * h / 3.0;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Lag-1 sample autocorrelation.
inline double acf1(std::span<const double> x) {
  const double m = mean(x);
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    den += (x[t] - m) * (x[t] - m);
    if (t + 1 < x.size()) num += (x[t] - m) * (x[t + 1] - m);
  }
  return num / den;
}

}  // namespace oracle
