#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>

#include "mscorr/analysis.hpp"
#include "mscorr/error.hpp"
#include "mscorr/panel.hpp"
#include "mscorr/parallel.hpp"
#include "mscorr/random.hpp"

// Synthetic markets with known ground truth.
//
// Stream splitting: stream 0 of the recipe seed drives the common factor;
// stream i + 1 drives stock i. Inside a stock stream, sub-stream 0 draws the
// innovations, 1 the cascade multipliers, 2 the synthetic capitalization and
// 3 the tail-mixing draws.

namespace mscorr::synth {

/// Tail index meaning "Gaussian".
inline constexpr double kGaussian = std::numeric_limits<double>::infinity();

struct GaussianIid {};

/// Independent unit-variance Student-t(nu) columns.
struct StudentT {
  double nu = 3.0;
};

/// r_i = (beta_i f + e_i) / sqrt(beta_i^2 + 1), f and e of unit variance, so the
/// population correlation of i and j is beta_i beta_j / sqrt((beta_i^2+1)(beta_j^2+1)).
/// With marginal_nu set, f and e must be Gaussian and every value of stock i
/// is divided by an independent sqrt(chi2(nu_i) / nu_i) draw and rescaled to
/// unit variance, so the marginal is exactly Student-t(nu_i) (nu_i = kGaussian
/// leaves the column Gaussian). Correlations then shrink by
/// tail_attenuation(nu_i) * tail_attenuation(nu_j).
struct OneFactor {
  std::vector<double> betas;       // one per stock, or a single shared value
  double factor_nu = kGaussian;
  std::vector<double> noise_nu;    // empty: Gaussian; one shared or one per stock
  std::vector<double> marginal_nu; // empty: no marginal mapping
};

/// r(t) = sigma(t) e(t) with sigma^2 a dyadic lognormal cascade of the given
/// depth: every level multiplies each half-interval by exp(spread g - spread^2/2),
/// g standard normal. Independent cascades tile the series.
struct Cascade {
  int depth = 10;
  double spread = 0.5;
};

using RecipeKind = std::variant<GaussianIid, StudentT, OneFactor, Cascade>;

struct MarketRecipe {
  std::size_t n_stocks = 20;
  std::size_t n_days = 4096;
  std::uint64_t seed = 0;
  RecipeKind kind = GaussianIid{};
};

namespace detail {

inline void check_nu(double nu, const char* what) {
  if (!(nu > 2.0)) throw ConfigError(std::string(what) + ": tail index must exceed 2");
}

inline void check_per_stock(const std::vector<double>& v, std::size_t n, const char* what,
                            bool allow_empty) {
  if (v.empty() && allow_empty) return;
  if (v.size() != 1 && v.size() != n)
    throw ConfigError(std::string(what) + ": need one shared value or one per stock");
}

inline double per_stock(const std::vector<double>& v, std::size_t i) {
  return v.size() == 1 ? v.front() : v[i];
}

/// Unit-variance draw with tail index nu (kGaussian for a normal draw).
inline double standardized_draw(Rng& rng, double nu) {
  if (std::isinf(nu)) return boost::random::normal_distribution<double>{}(rng);
  const double t = boost::random::student_t_distribution<double>{nu}(rng);
  return t * std::sqrt((nu - 2.0) / nu);
}

inline std::vector<double> cascade_volatility(Rng& rng, std::size_t n_days, int depth, double spread) {
  const std::size_t block = std::size_t{1} << depth;
  std::vector<double> sigma;
  sigma.reserve(n_days + block);
  boost::random::normal_distribution<double> gauss;
  std::vector<double> w, next;
  while (sigma.size() < n_days) {
    w.assign(1, 1.0);
    for (int level = 0; level < depth; ++level) {
      next.resize(w.size() * 2);
      for (std::size_t k = 0; k < w.size(); ++k) {
        next[2 * k] = w[k] * std::exp(spread * gauss(rng) - 0.5 * spread * spread);
        next[2 * k + 1] = w[k] * std::exp(spread * gauss(rng) - 0.5 * spread * spread);
      }
      std::swap(w, next);
    }
    for (double v : w) sigma.push_back(std::sqrt(v));
  }
  sigma.resize(n_days);
  return sigma;
}

inline std::string ticker_name(std::size_t i, std::size_t n) {
  const std::size_t width = std::to_string(n).size();
  std::string digits = std::to_string(i + 1);
  return "S" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace detail

/// Factor by which the scale mixture of OneFactor::marginal_nu shrinks a
/// stock's correlations: E[V^-1/2] sqrt((nu-2)/nu) for V = chi2(nu)/nu, i.e.
/// sqrt((nu-2)/2) Gamma((nu-1)/2) / Gamma(nu/2). Equals 1 for kGaussian.
inline double tail_attenuation(double nu) {
  if (std::isinf(nu)) return 1.0;
  return std::sqrt((nu - 2.0) / 2.0) * boost::math::tgamma_ratio((nu - 1.0) / 2.0, nu / 2.0);
}

/// Population Pearson correlation of stocks i != j under a one-factor recipe.
inline double population_correlation(const OneFactor& f, std::size_t i, std::size_t j) {
  const double bi = detail::per_stock(f.betas, i);
  const double bj = detail::per_stock(f.betas, j);
  double rho = bi * bj / std::sqrt((bi * bi + 1.0) * (bj * bj + 1.0));
  if (!f.marginal_nu.empty()) {
    rho *= tail_attenuation(detail::per_stock(f.marginal_nu, i)) *
           tail_attenuation(detail::per_stock(f.marginal_nu, j));
  }
  return rho;
}

/// First date of every synthetic price series; returns start one day later.
inline constexpr Date kSyntheticStart{2000, 1, 1};

inline void validate(const MarketRecipe& r) {
  if (r.n_stocks < 2) throw ConfigError("recipe: n_stocks must be >= 2");
  if (r.n_days < 64) throw ConfigError("recipe: n_days must be >= 64");
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, StudentT>) {
          detail::check_nu(k.nu, "student_t");
        } else if constexpr (std::is_same_v<K, OneFactor>) {
          detail::check_per_stock(k.betas, r.n_stocks, "one_factor betas", false);
          detail::check_per_stock(k.noise_nu, r.n_stocks, "one_factor noise_nu", true);
          detail::check_per_stock(k.marginal_nu, r.n_stocks, "one_factor marginal_nu", true);
          for (double b : k.betas)
            if (!std::isfinite(b)) throw ConfigError("one_factor: betas must be finite");
          if (!std::isinf(k.factor_nu)) detail::check_nu(k.factor_nu, "one_factor factor_nu");
          for (double nu : k.noise_nu)
            if (!std::isinf(nu)) detail::check_nu(nu, "one_factor noise_nu");
          for (double nu : k.marginal_nu)
            if (!std::isinf(nu)) detail::check_nu(nu, "one_factor marginal_nu");
          if (!k.marginal_nu.empty() && (!std::isinf(k.factor_nu) || !k.noise_nu.empty()))
            throw ConfigError("one_factor: marginal mapping requires a Gaussian factor and noise");
        } else if constexpr (std::is_same_v<K, Cascade>) {
          if (k.depth < 1 || k.depth > 30) throw ConfigError("cascade: depth must be >= 1");
          if ((std::size_t{1} << k.depth) > r.n_days)
            throw ConfigError("cascade: 2^depth must not exceed n_days");
          if (!(k.spread >= 0.0) || !std::isfinite(k.spread))
            throw ConfigError("cascade: spread must be non-negative");
        }
      },
      r.kind);
}

/// Demeaned synthetic return panel. Fixed recipe and seed give a bit-identical panel.
inline ReturnPanel generate(const MarketRecipe& recipe, unsigned threads = 0) {
  validate(recipe);
  const std::size_t n = recipe.n_stocks;
  const std::size_t t_len = recipe.n_days;

  ReturnPanel panel;
  panel.returns = ColumnMatrix<double>(t_len, n);
  for (std::size_t t = 0; t < t_len; ++t) panel.dates.push_back(kSyntheticStart.plus_days(static_cast<int>(t) + 1));
  for (std::size_t i = 0; i < n; ++i) panel.tickers.push_back(detail::ticker_name(i, n));

  std::vector<double> factor;
  if (const auto* f = std::get_if<OneFactor>(&recipe.kind)) {
    Rng rng = make_rng(recipe.seed, 0);
    factor.resize(t_len);
    for (double& v : factor) v = detail::standardized_draw(rng, f->factor_nu);
  }

  parallel_for(
      n,
      [&](std::size_t i) {
        const std::uint64_t stock_seed = derive_seed(recipe.seed, i + 1);
        Rng rng = make_rng(stock_seed, 0);
        auto col = panel.returns.col(i);
        std::visit(
            [&](const auto& k) {
              using K = std::decay_t<decltype(k)>;
              if constexpr (std::is_same_v<K, GaussianIid>) {
                for (double& v : col) v = detail::standardized_draw(rng, kGaussian);
              } else if constexpr (std::is_same_v<K, StudentT>) {
                for (double& v : col) v = detail::standardized_draw(rng, k.nu);
              } else if constexpr (std::is_same_v<K, OneFactor>) {
                const double beta = detail::per_stock(k.betas, i);
                const double noise_nu = k.noise_nu.empty() ? kGaussian : detail::per_stock(k.noise_nu, i);
                const double scale = 1.0 / std::sqrt(beta * beta + 1.0);
                for (std::size_t t = 0; t < t_len; ++t)
                  col[t] = (beta * factor[t] + detail::standardized_draw(rng, noise_nu)) * scale;
                if (!k.marginal_nu.empty()) {
                  const double nu = detail::per_stock(k.marginal_nu, i);
                  if (!std::isinf(nu)) {
                    Rng mix_rng = make_rng(stock_seed, 3);
                    boost::random::chi_squared_distribution<double> chi2(nu);
                    const double unit = std::sqrt((nu - 2.0) / nu);
                    for (double& v : col) v *= unit / std::sqrt(chi2(mix_rng) / nu);
                  }
                }
              } else if constexpr (std::is_same_v<K, Cascade>) {
                Rng cascade_rng = make_rng(stock_seed, 1);
                const auto sigma = detail::cascade_volatility(cascade_rng, t_len, k.depth, k.spread);
                for (std::size_t t = 0; t < t_len; ++t)
                  col[t] = sigma[t] * detail::standardized_draw(rng, kGaussian);
              }
            },
            recipe.kind);
      },
      threads);

  panel.column_means_removed = demean_columns(panel.returns);
  return panel;
}

/// Synthetic capitalizations for one-factor recipes:
/// ln cap_i = 20 + 2 beta_i + 0.5 g_i, g_i standard normal. Other recipes
/// have no capitalization and every ticker is absent.
inline CapitalizationTable synthetic_capitalization(const MarketRecipe& recipe) {
  validate(recipe);
  CapitalizationTable caps;
  const auto* f = std::get_if<OneFactor>(&recipe.kind);
  for (std::size_t i = 0; i < recipe.n_stocks; ++i) {
    const auto ticker = detail::ticker_name(i, recipe.n_stocks);
    if (f == nullptr) {
      caps.median_capitalization[ticker] = std::nullopt;
      continue;
    }
    Rng rng = make_rng(derive_seed(recipe.seed, i + 1), 2);
    const double g = boost::random::normal_distribution<double>{}(rng);
    caps.median_capitalization[ticker] = std::exp(20.0 + 2.0 * detail::per_stock(f->betas, i) + 0.5 * g);
  }
  return caps;
}

/// Price panel whose log-returns are the given returns, starting at 100 one
/// day before the first return date. No cell is filled.
inline PricePanel to_price_panel(const ReturnPanel& returns, double start_price = 100.0) {
  PricePanel p;
  p.tickers = returns.tickers;
  p.dates.push_back(returns.dates.front().plus_days(-1));
  p.dates.insert(p.dates.end(), returns.dates.begin(), returns.dates.end());
  p.prices = ColumnMatrix<double>(p.dates.size(), returns.n_stocks());
  p.fill_mask = ColumnMatrix<std::uint8_t>(p.dates.size(), returns.n_stocks(), 0);
  for (std::size_t i = 0; i < returns.n_stocks(); ++i) {
    double log_price = std::log(start_price);
    p.prices(0, i) = start_price;
    for (std::size_t t = 0; t < returns.n_days(); ++t) {
      log_price += returns.returns(t, i);
      p.prices(t + 1, i) = std::exp(log_price);
    }
  }
  return p;
}

/// Long-format (ticker, date, close) records, loadable by PriceRecordLoader.
inline void write_price_records(std::ostream& out, const PricePanel& p) {
  out << "ticker,date,close\n";
  for (std::size_t i = 0; i < p.tickers.size(); ++i)
    for (std::size_t t = 0; t < p.dates.size(); ++t)
      out << p.tickers[i] << ',' << p.dates[t].iso() << ',' << text::format_double(p.prices(t, i))
          << '\n';
}

/// Long-format capitalization records (one observation per ticker, dated at
/// the synthetic start); absent tickers are written with an empty value.
inline void write_capitalization_records(std::ostream& out, const CapitalizationTable& caps) {
  out << "ticker,date,capitalization\n";
  for (const auto& [ticker, cap] : caps.median_capitalization)
    out << ticker << ',' << kSyntheticStart.iso() << ',' << (cap ? text::format_double(*cap) : "")
        << '\n';
}

/// One-factor market in which loading and tail heaviness are either tied
/// together (coupled: the weakest loading gets the heaviest tail) or not
/// (uncoupled: every stock gets the heavy tail).
struct StylizedFactRecipe {
  std::size_t n_stocks = 100;
  std::size_t n_days = 4096;
  std::uint64_t seed = 0;
  double beta_min = 0.2;
  double beta_max = 1.5;
  double nu_heavy = 3.0;
  double nu_light = 30.0;
  bool coupled = true;

  /// Betas evenly spaced on [beta_min, beta_max]; tail indices interpolated
  /// linearly in 1/nu from nu_heavy (lowest beta) to nu_light (highest beta).
  [[nodiscard]] MarketRecipe market() const {
    if (n_stocks < 2) throw ConfigError("stylized-fact recipe needs at least 2 stocks");
    OneFactor f;
    for (std::size_t i = 0; i < n_stocks; ++i) {
      const double w = static_cast<double>(i) / static_cast<double>(n_stocks - 1);
      f.betas.push_back(beta_min + w * (beta_max - beta_min));
      f.marginal_nu.push_back(coupled ? 1.0 / ((1.0 - w) / nu_heavy + w / nu_light) : nu_heavy);
    }
    return MarketRecipe{n_stocks, n_days, seed, f};
  }
};

/// Generates the market and runs scaling, correlation and association on it.
inline AssociationReport stylized_fact_experiment(const StylizedFactRecipe& recipe,
                                                  const AnalysisSettings& settings) {
  const auto market = recipe.market();
  const auto panel = generate(market, settings.threads);
  return analyze(panel, synthetic_capitalization(market), settings).report;
}

}  // namespace mscorr::synth
