#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mscorr/panel.hpp"

using namespace mscorr;

namespace {

Date day(int d) { return Date(2021, 3, 1).plus_days(d - 1); }

RawPriceSeries series(std::string ticker, std::vector<std::pair<int, double>> obs) {
  RawPriceSeries s{std::move(ticker), {}};
  for (auto [d, p] : obs) s.observations.push_back({day(d), p});
  return s;
}

std::vector<RawPriceSeries> load(const std::string& text) {
  std::istringstream in(text);
  return load_prices(in);
}

}  // namespace

TEST(LoadPrices, SortsShuffledDates) {
  const auto s = load("X,2021-01-05,3\nX,2021-01-03,1\nX,2021-01-04,2\n");
  ASSERT_EQ(s.size(), 1u);
  ASSERT_EQ(s[0].observations.size(), 3u);
  EXPECT_EQ(s[0].observations[0].date, Date(2021, 1, 3));
  EXPECT_EQ(s[0].observations[1].date, Date(2021, 1, 4));
  EXPECT_EQ(s[0].observations[2].date, Date(2021, 1, 5));
  EXPECT_EQ(s[0].observations[2].close, 3.0);
}

TEST(LoadPrices, ZeroPriceIsDataError) {
  EXPECT_THROW(load("X,2021-01-05,0\n"), DataError);
  EXPECT_THROW(load("X,2021-01-05,-2\n"), DataError);
}

TEST(LoadPrices, MalformedRowNamesTheLine) {
  try {
    load("ticker,date,close\nX,2021-01-05,1\nX,2021-13-05,1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load("X,2021-01-05\n"), ParseError);
  EXPECT_THROW(load("X,2021-01-05,abc\n"), ParseError);
}

TEST(LoadPrices, DuplicateTickerDateIsDataError) {
  EXPECT_THROW(load("X,2021-01-05,1\nX,2021-01-05,2\n"), DataError);
}

TEST(LoadPrices, MergesDisjointSources) {
  PriceRecordLoader loader;
  std::istringstream a("A,2021-01-01,1\nB,2021-01-01,1\nB,2021-01-02,2\n");
  std::istringstream b("C,2021-01-01,1\nD,2021-01-01,1\nE,2021-01-03,5\n");
  loader.add(a, "a");
  loader.add(b, "b");
  EXPECT_EQ(loader.finish().size(), 2u + 3u);
}

TEST(LoadPrices, DuplicateAcrossSourcesIsDataError) {
  PriceRecordLoader loader;
  std::istringstream a("A,2021-01-01,1\n");
  std::istringstream b("A,2021-01-01,1\n");
  loader.add(a);
  loader.add(b);
  EXPECT_THROW((void)loader.finish(), DataError);
}

TEST(Preprocess, FillsGapWithLastPrice) {
  // The second series supplies d2 to the reference axis.
  const std::vector<RawPriceSeries> in{series("A", {{1, 100}, {3, 110}}),
                                       series("B", {{1, 5}, {2, 6}, {3, 7}})};
  const auto p = preprocess(in, 0.5);
  ASSERT_EQ(p.dates.size(), 3u);
  EXPECT_EQ(p.prices(0, 0), 100.0);
  EXPECT_EQ(p.prices(1, 0), 100.0);
  EXPECT_EQ(p.prices(2, 0), 110.0);
  EXPECT_EQ(p.fill_mask(0, 0), 0);
  EXPECT_EQ(p.fill_mask(1, 0), 1);
  EXPECT_EQ(p.fill_mask(2, 0), 0);
}

TEST(Preprocess, RemovesSeriesBelowLengthCut) {
  std::vector<std::pair<int, double>> long_obs, short_obs;
  for (int d = 1; d <= 100; ++d) long_obs.push_back({d, 10.0 + d});
  for (int d = 1; d <= 85; ++d) short_obs.push_back({d, 20.0 + d});
  const std::vector<RawPriceSeries> in{series("LONG", long_obs), series("SHORT", short_obs)};
  const auto p = preprocess(in, 0.90);
  ASSERT_EQ(p.tickers.size(), 1u);
  EXPECT_EQ(p.tickers[0], "LONG");
}

TEST(Preprocess, NoGapsIsNoOp) {
  const std::vector<RawPriceSeries> in{series("A", {{1, 1}, {2, 2}, {3, 3}}),
                                       series("B", {{1, 4}, {2, 5}, {3, 6}})};
  const auto p = preprocess(in);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t t = 0; t < 3; ++t) {
      EXPECT_EQ(p.prices(t, i), in[i].observations[t].close);
      EXPECT_EQ(p.fill_mask(t, i), 0);
    }
}

TEST(Preprocess, StartsAtLatestFirstDateAndDragsEarlierValue) {
  // A has no observation on B's first day; its value from day 1 is dragged.
  const std::vector<RawPriceSeries> in{series("A", {{1, 10}, {3, 30}, {4, 40}}),
                                       series("B", {{2, 1}, {3, 2}, {4, 3}})};
  const auto p = preprocess(in);
  ASSERT_EQ(p.dates.front(), day(2));
  EXPECT_EQ(p.prices(0, 0), 10.0);
  EXPECT_EQ(p.fill_mask(0, 0), 1);
}

TEST(Preprocess, ErrorPaths) {
  EXPECT_THROW(preprocess({}, 0.9), DataError);
  const std::vector<RawPriceSeries> one{series("A", {{1, 1}})};
  EXPECT_THROW(preprocess(one, 0.0), ConfigError);
  EXPECT_THROW(preprocess(one, 1.5), ConfigError);
  const std::vector<RawPriceSeries> empty{RawPriceSeries{"A", {}}};
  EXPECT_THROW(preprocess(empty, 0.9), DataError);
  const std::vector<RawPriceSeries> unsorted{series("A", {{2, 1}, {1, 1}})};
  EXPECT_THROW(preprocess(unsorted, 0.9), DataError);
}

TEST(Preprocess, FixtureMatchesHandTrace) {
  const auto p = preprocess(load(fixture::kCleaningRecords), 0.90);
  std::ostringstream panel, mask;
  write_price_panel(panel, p);
  write_fill_mask(mask, p);
  EXPECT_EQ(panel.str(), fixture::kCleaningPanel);
  EXPECT_EQ(mask.str(), fixture::kCleaningFillMask);
}

namespace {

std::vector<RawPriceSeries> random_market(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_series(1, 5), first(1, 10), span(20, 60);
  std::bernoulli_distribution keep(0.85);
  std::uniform_real_distribution<double> price(1.0, 200.0);
  std::vector<RawPriceSeries> out;
  const int n = n_series(rng);
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> obs;
    const int f = first(rng);
    const int last = f + span(rng);
    obs.push_back({f, price(rng)});
    for (int d = f + 1; d <= last; ++d)
      if (keep(rng)) obs.push_back({d, price(rng)});
    out.push_back(series("T" + std::to_string(i), obs));
  }
  return out;
}

}  // namespace

TEST(PreprocessProperty, FilledCellsRepeatTheirPredecessorAndCleaningIsIdempotent) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto market = random_market(rng);
    PricePanel p;
    try {
      p = preprocess(market, 0.9);
    } catch (const DataError&) {
      continue;
    }
    for (std::size_t i = 0; i < p.tickers.size(); ++i)
      for (std::size_t t = 0; t < p.dates.size(); ++t) {
        ASSERT_TRUE(p.prices(t, i) > 0.0);
        if (p.fill_mask(t, i) && t > 0) ASSERT_EQ(p.prices(t, i), p.prices(t - 1, i));
      }
    const auto again = preprocess(p.as_series(), 0.9);
    ASSERT_EQ(again.dates, p.dates);
    ASSERT_EQ(again.tickers, p.tickers);
    ASSERT_EQ(again.prices, p.prices);
  }
}

TEST(PreprocessProperty, RemovingATickerKeepsOtherColumnsWhenAxisUnchanged) {
  const std::vector<RawPriceSeries> all{series("A", {{1, 1}, {2, 2}, {4, 4}, {5, 5}}),
                                        series("B", {{1, 9}, {3, 8}, {4, 7}, {5, 6}}),
                                        series("C", {{1, 3}, {2, 3}, {3, 3}, {5, 4}})};
  const auto full = preprocess(all, 0.5);
  const std::vector<RawPriceSeries> without_b{all[0], all[2]};
  const auto partial = preprocess(without_b, 0.5);
  ASSERT_EQ(full.dates, partial.dates);
  for (std::size_t t = 0; t < full.dates.size(); ++t) {
    EXPECT_EQ(full.prices(t, 0), partial.prices(t, 0));
    EXPECT_EQ(full.prices(t, 2), partial.prices(t, 1));
  }
}

TEST(ComputeReturns, ConstantPriceGivesZeroReturns) {
  const std::vector<RawPriceSeries> in{series("A", {{1, 5}, {2, 5}, {3, 5}, {4, 5}})};
  const auto r = compute_returns(preprocess(in));
  for (double v : r.returns.col(0)) EXPECT_EQ(v, 0.0);
}

TEST(ComputeReturns, HandArithmetic) {
  const std::vector<RawPriceSeries> in{series("A", {{1, 100}, {2, 100}, {3, 110}})};
  const auto r = compute_returns(preprocess(in));
  ASSERT_EQ(r.n_days(), 2u);
  const double l = std::log(1.1);
  EXPECT_NEAR(r.returns(0, 0), -l / 2, 1e-15);
  EXPECT_NEAR(r.returns(1, 0), l / 2, 1e-15);
  EXPECT_NEAR(r.column_means_removed[0], l / 2, 1e-15);
  EXPECT_EQ(r.dates.front(), day(2));
}

TEST(ComputeReturns, DemeaningTwiceChangesNothing) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> price(4.0, 0.3);
  std::vector<std::pair<int, double>> obs;
  for (int d = 1; d <= 500; ++d) obs.push_back({d, price(rng)});
  auto r = compute_returns(preprocess(std::vector{series("A", obs)}));
  const auto once = r.returns;
  const auto second_means = demean_columns(r.returns);
  EXPECT_NEAR(second_means[0], 0.0, 1e-15);
  for (std::size_t t = 0; t < once.rows(); ++t) EXPECT_NEAR(r.returns(t, 0), once(t, 0), 1e-15);
  double sum = 0.0;
  for (double v : once.col(0)) sum += v;
  EXPECT_LE(std::abs(sum), 1e-9 * static_cast<double>(once.rows()));
}

TEST(ComputeReturns, NeedsThreeDates) {
  const std::vector<RawPriceSeries> in{series("A", {{1, 5}, {2, 6}})};
  EXPECT_THROW(compute_returns(preprocess(in)), DataError);
}

TEST(MedianCapitalization, Conventions) {
  const auto t = median_capitalization({{"odd", {100, 1, 5}}, {"even", {2, 4}}, {"none", {}}});
  EXPECT_EQ(t.find("odd"), 5.0);
  EXPECT_EQ(t.find("even"), 3.0);
  EXPECT_FALSE(t.find("none").has_value());
  EXPECT_FALSE(t.find("unknown").has_value());
  EXPECT_THROW(median_capitalization({{"neg", {1, -2}}}), DataError);
}

TEST(MedianCapitalization, LoadsRecordsWithMissingValues) {
  std::istringstream in("ticker,date,cap\nA,2020-01-01,10\nA,2020-01-02,NA\nA,2020-01-03,30\nB,2020-01-01,\n");
  const auto t = median_capitalization(load_capitalization_records(in));
  EXPECT_EQ(t.find("A"), 20.0);
  EXPECT_FALSE(t.find("B").has_value());
  std::istringstream bad("A,2020-01-01,-1\n");
  EXPECT_THROW(load_capitalization_records(bad), DataError);
}

TEST(PanelIo, ReturnPanelRoundTripsAtFullPrecision) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::vector<std::pair<int, double>> a, b;
  for (int d = 1; d <= 40; ++d) {
    a.push_back({d, std::exp(g(rng))});
    b.push_back({d, std::exp(g(rng))});
  }
  const auto r = compute_returns(preprocess(std::vector{series("A", a), series("B", b)}));
  std::stringstream ss;
  write_return_panel(ss, r);
  const auto back = read_return_panel(ss);
  EXPECT_EQ(back.tickers, r.tickers);
  EXPECT_EQ(back.dates, r.dates);
  EXPECT_EQ(back.returns, r.returns);
}
