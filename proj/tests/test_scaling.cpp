#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mscorr/synth.hpp"
#include "oracles.hpp"

using namespace mscorr;

namespace {

std::vector<MomentCurve> power_law_curve(double q, double k, double zeta, int tau_max) {
  MomentCurve c{q, {}};
  for (int tau = 1; tau <= tau_max; ++tau)
    c.points.push_back({static_cast<double>(tau), k * std::pow(tau, zeta)});
  return {c};
}

std::vector<double> gaussian_series(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST(Aggregate, HandExamples) {
  const std::vector<double> r{1.0, -1.0, 2.0};
  EXPECT_EQ(aggregate_returns(r, 1), r);
  EXPECT_EQ(aggregate_returns(r, 2), (std::vector<double>{0.0, 1.0}));
  const std::vector<double> s{1, 2, 3, 4, 5};
  EXPECT_EQ(aggregate_returns(s, 3), (std::vector<double>{6, 9, 12}));
}

TEST(Aggregate, RejectsBadHorizons) {
  const std::vector<double> r{1.0, 2.0, 3.0};
  EXPECT_THROW(aggregate_returns(r, 0), EstimationError);
  EXPECT_THROW(aggregate_returns(r, 3), EstimationError);
}

TEST(StructureFunction, UnitReturnsGiveTauToTheQ) {
  const std::vector<double> ones(100, 1.0);
  const std::vector<double> q{0.5, 1.0, 1.5};
  const std::vector<int> tau{1, 2, 5, 10};
  const auto curves = structure_function(ones, q, tau);
  ASSERT_EQ(curves.size(), 3u);
  for (const auto& c : curves)
    for (const auto& p : c.points) EXPECT_NEAR(p.moment, std::pow(p.tau, c.q), 1e-12 * p.moment);
}

TEST(StructureFunction, ArithmeticGridAgreesWithGeneralPath) {
  const auto x = gaussian_series(5, 800);
  const auto grid = default_q_grid();
  // Perturbing one order disables the power recursion.
  auto perturbed = grid;
  perturbed.back() += 1e-9;
  const auto taus = default_tau_range();
  const auto fast = structure_function(x, grid, taus);
  const auto slow = structure_function(x, perturbed, taus);
  for (std::size_t j = 0; j + 1 < grid.size(); ++j)
    for (std::size_t i = 0; i < taus.size(); ++i)
      EXPECT_NEAR(fast[j].points[i].moment, slow[j].points[i].moment, 1e-12 * slow[j].points[i].moment);
}

TEST(StructureFunction, GaussianMomentRatioMatchesTheory) {
  // E|X|^q of N(0, tau) relative to N(0, 1) is tau^(q/2).
  const auto x = gaussian_series(17, 200000);
  const std::vector<double> q{1.0};
  const std::vector<int> tau{1, 4};
  const auto c = structure_function(x, q, tau)[0];
  EXPECT_NEAR(c.points[1].moment / c.points[0].moment, 2.0, 2.0 * 0.05);
  EXPECT_NEAR(c.points[0].moment, std::sqrt(2.0 / std::numbers::pi), 0.01);
}

TEST(StructureFunction, ZeroSeriesNamesOrderAndHorizon) {
  const std::vector<double> zeros(100, 0.0);
  const std::vector<double> q{0.5};
  const std::vector<int> tau{1, 2, 3};
  try {
    (void)structure_function(zeros, q, tau);
    FAIL();
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("q=0.5"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("tau=1"), std::string::npos);
  }
}

TEST(StructureFunction, ValidatesInputs) {
  const auto x = gaussian_series(1, 100);
  const std::vector<double> q{0.5};
  const std::vector<int> taus{1, 2, 3};
  EXPECT_THROW(structure_function(x, std::vector<double>{}, taus), ConfigError);
  EXPECT_THROW(structure_function(x, std::vector<double>{-1.0}, taus), ConfigError);
  EXPECT_THROW(structure_function(x, q, std::vector<int>{2, 1}), ConfigError);
  EXPECT_THROW(structure_function(x, q, std::vector<int>{0, 1}), ConfigError);
  // 100 observations leave 30 aggregated values up to tau = 71 only.
  EXPECT_NO_THROW(structure_function(x, q, std::vector<int>{1, 71}));
  EXPECT_THROW(structure_function(x, q, std::vector<int>{1, 72}), EstimationError);
}

TEST(EstimateZeta, ExactPowerLaw) {
  const auto curves = power_law_curve(1.0, 2.0, 0.7, 19);
  const auto z = estimate_zeta(curves);
  EXPECT_NEAR(z.zeta[0], 0.7, 1e-12);
  EXPECT_NEAR(z.lnK[0], std::log(2.0), 1e-12);
  EXPECT_NEAR(z.r2[0], 1.0, 1e-12);
}

TEST(EstimateZeta, GaussianSlopeIsHalfOrder) {
  const auto x = gaussian_series(23, 4096);
  const auto q = default_q_grid();
  const auto z = estimate_zeta(structure_function(x, q, default_tau_range()));
  for (std::size_t j = 0; j < q.size(); ++j) EXPECT_NEAR(z.zeta[j], q[j] / 2.0, 0.03) << "q=" << q[j];
}

TEST(EstimateZeta, RejectsShortOrDegenerateCurves) {
  EXPECT_THROW(estimate_zeta(power_law_curve(1.0, 1.0, 0.5, 1)), EstimationError);
  EXPECT_THROW(estimate_zeta(power_law_curve(1.0, 1.0, 0.5, 2)), EstimationError);
  std::vector<MomentCurve> same{{1.0, {{3.0, 1.0}, {3.0, 2.0}, {3.0, 3.0}}}};
  EXPECT_THROW(estimate_zeta(same), SingularFitError);
}

TEST(FitProxies, ExactQuadraticRecovery) {
  const auto q = default_q_grid();
  std::vector<double> zeta;
  for (double v : q) zeta.push_back(0.3 * v - 0.05 * v * v);
  const auto f = fit_proxies(q, zeta);
  EXPECT_NEAR(f.A_hat, 0.3, 1e-12);
  EXPECT_NEAR(f.B_hat, -0.05, 1e-12);
  EXPECT_NEAR(f.fit_rss, 0.0, 1e-20);
}

TEST(FitProxies, LinearZetaHasNoCurvature) {
  const auto q = default_q_grid();
  std::vector<double> zeta;
  for (double v : q) zeta.push_back(0.5 * v);
  const auto f = fit_proxies(q, zeta);
  EXPECT_NEAR(f.A_hat, 0.5, 1e-12);
  EXPECT_NEAR(f.B_hat, 0.0, 1e-12);
}

TEST(FitProxies, NeedsTwoDistinctOrders) {
  EXPECT_THROW(fit_proxies(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 0.2}),
               EstimationError);
  EXPECT_THROW(fit_proxies(std::vector<double>{0.5}, std::vector<double>{0.2, 0.3}), EstimationError);
}

TEST(EstimateScaling, InvariantUnderPositiveScaling) {
  auto x = gaussian_series(31, 2000);
  const auto q = default_q_grid();
  const auto taus = default_tau_range();
  const auto base = estimate_scaling(x, q, taus);
  for (auto& v : x) v *= 37.5;
  const auto scaled = estimate_scaling(x, q, taus);
  EXPECT_NEAR(base.A_hat, scaled.A_hat, 1e-10);
  EXPECT_NEAR(base.B_hat, scaled.B_hat, 1e-10);
  for (std::size_t j = 0; j < q.size(); ++j)
    EXPECT_NEAR(scaled.lnK[j] - base.lnK[j], q[j] * std::log(37.5), 1e-9);
}

TEST(EstimateScaling, GaussianPanelsCentreOnUniscaling) {
  std::vector<double> a, b;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto x = gaussian_series(1000 + seed, 4096);
    const auto r = estimate_scaling(x, default_q_grid(), default_tau_range());
    a.push_back(r.A_hat);
    b.push_back(r.B_hat);
  }
  EXPECT_LT(std::abs(oracle::median(b)), 0.02);
  EXPECT_LT(std::abs(oracle::median(a) - 0.5), 0.02);
}

TEST(PanelScaling, ErrorNamesTicker) {
  synth::MarketRecipe recipe;
  recipe.n_stocks = 3;
  recipe.n_days = 200;
  auto panel = synth::generate(recipe);
  for (auto& v : panel.returns.col(1)) v = 0.0;
  try {
    (void)estimate_panel_scaling(panel, default_q_grid(), default_tau_range(), 1);
    FAIL();
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find(panel.tickers[1]), std::string::npos);
  }
}

TEST(PanelScaling, TableRoundTripsAndIgnoresThreadCount) {
  synth::MarketRecipe recipe;
  recipe.n_stocks = 6;
  recipe.n_days = 512;
  recipe.seed = 4;
  const auto panel = synth::generate(recipe);
  const auto one = estimate_panel_scaling(panel, default_q_grid(), default_tau_range(), 1);
  const auto many = estimate_panel_scaling(panel, default_q_grid(), default_tau_range(), 4);
  std::stringstream a, b;
  write_scaling_table(a, one);
  write_scaling_table(b, many);
  EXPECT_EQ(a.str(), b.str());
  const auto back = read_scaling_table(a);
  ASSERT_EQ(back.tickers, one.tickers);
  for (std::size_t i = 0; i < one.results.size(); ++i) {
    EXPECT_EQ(back.results[i].B_hat, one.results[i].B_hat);
    EXPECT_EQ(back.results[i].zeta, one.results[i].zeta);
  }
}
