#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mscorr/date.hpp"
#include "mscorr/delimited.hpp"
#include "mscorr/error.hpp"
#include "mscorr/matrix.hpp"

// Price ingestion and cleaning: raw (ticker, date, close) records are turned
// into a rectangular, forward-filled price panel and then into demeaned daily
// log-returns.

namespace mscorr {

inline constexpr double kDefaultLengthThreshold = 0.90;

struct PriceObservation {
  Date date;
  double close = 0.0;
  friend bool operator==(const PriceObservation&, const PriceObservation&) = default;
};

/// One ticker's observations, strictly increasing in date, all prices > 0.
struct RawPriceSeries {
  std::string ticker;
  std::vector<PriceObservation> observations;
  friend bool operator==(const RawPriceSeries&, const RawPriceSeries&) = default;
};

/// Rectangular date x ticker price matrix. fill_mask(t, i) is 1 when the
/// price was dragged forward from the previous date.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  ColumnMatrix<double> prices;
  ColumnMatrix<std::uint8_t> fill_mask;

  /// Every cell of the panel (filled or not) as a raw series per ticker.
  [[nodiscard]] std::vector<RawPriceSeries> as_series() const {
    std::vector<RawPriceSeries> out(tickers.size());
    for (std::size_t i = 0; i < tickers.size(); ++i) {
      out[i].ticker = tickers[i];
      out[i].observations.reserve(dates.size());
      for (std::size_t t = 0; t < dates.size(); ++t)
        out[i].observations.push_back({dates[t], prices(t, i)});
    }
    return out;
  }
};

/// Demeaned 1-day log-returns; dates[t] is the end date of the return.
struct ReturnPanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  ColumnMatrix<double> returns;
  std::vector<double> column_means_removed;

  [[nodiscard]] std::size_t n_days() const noexcept { return returns.rows(); }
  [[nodiscard]] std::size_t n_stocks() const noexcept { return returns.cols(); }
};

/// Median capitalization per ticker; std::nullopt marks tickers without data.
struct CapitalizationTable {
  std::map<std::string, std::optional<double>> median_capitalization;

  [[nodiscard]] std::optional<double> find(const std::string& ticker) const {
    const auto it = median_capitalization.find(ticker);
    if (it == median_capitalization.end()) return std::nullopt;
    return it->second;
  }
};

namespace detail {

inline std::string_view lowercase_copy(std::string_view s, std::string& buf) {
  buf.assign(s);
  std::transform(buf.begin(), buf.end(), buf.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return buf;
}

/// A first line is treated as a header when its date field is not a date.
inline bool looks_like_header(const std::vector<std::string_view>& fields) {
  return fields.size() >= 2 && !Date::parse(fields[1]).has_value();
}

inline void check_series(const RawPriceSeries& s) {
  for (std::size_t i = 0; i < s.observations.size(); ++i) {
    const auto& o = s.observations[i];
    if (!(o.close > 0.0) || !std::isfinite(o.close))
      throw DataError("ticker '" + s.ticker + "' on " + o.date.iso() + ": price must be positive");
    if (i > 0 && !(s.observations[i - 1].date < o.date))
      throw DataError("ticker '" + s.ticker + "': dates must be strictly increasing at " +
                      o.date.iso());
  }
}

}  // namespace detail

/// Accumulates (ticker, date, close) records from one or more sources and
/// produces one sorted series per ticker.
class PriceRecordLoader {
 public:
  /// Reads records from a delimited stream. An optional header line is skipped.
  void add(std::istream& in, std::string_view source = "<stream>") {
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::is_skippable(line)) continue;
      const auto fields = text::split(line);
      if (first && detail::looks_like_header(fields)) {
        first = false;
        continue;
      }
      first = false;
      if (fields.size() != 3)
        throw ParseError(line_no, std::string(source) + ": expected ticker,date,close");
      if (fields[0].empty()) throw ParseError(line_no, std::string(source) + ": empty ticker");
      const auto date = Date::parse(fields[1]);
      if (!date)
        throw ParseError(line_no, std::string(source) + ": bad date '" + std::string(fields[1]) + "'");
      const auto close = text::parse_double(fields[2]);
      if (!close || !std::isfinite(*close))
        throw ParseError(line_no, std::string(source) + ": bad close '" + std::string(fields[2]) + "'");
      if (*close <= 0.0)
        throw DataError(std::string(source) + " line " + std::to_string(line_no) +
                        ": non-positive price for '" + std::string(fields[0]) + "'");
      records_[std::string(fields[0])].push_back({*date, *close});
    }
  }

  void add_file(const std::string& path) {
    auto in = text::open_input(path);
    add(in, path);
  }

  /// One series per ticker, sorted by ticker then date. Duplicate
  /// (ticker, date) pairs, within or across sources, are a data error.
  [[nodiscard]] std::vector<RawPriceSeries> finish() const {
    std::vector<RawPriceSeries> out;
    out.reserve(records_.size());
    for (const auto& [ticker, obs] : records_) {
      RawPriceSeries s{ticker, obs};
      std::stable_sort(s.observations.begin(), s.observations.end(),
                       [](const auto& a, const auto& b) { return a.date < b.date; });
      for (std::size_t i = 1; i < s.observations.size(); ++i)
        if (s.observations[i].date == s.observations[i - 1].date)
          throw DataError("duplicate record for '" + ticker + "' on " +
                          s.observations[i].date.iso());
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  std::map<std::string, std::vector<PriceObservation>> records_;
};

inline std::vector<RawPriceSeries> load_prices(std::istream& in) {
  PriceRecordLoader loader;
  loader.add(in);
  return loader.finish();
}

inline std::vector<RawPriceSeries> load_prices(std::span<const std::string> paths) {
  PriceRecordLoader loader;
  for (const auto& p : paths) loader.add_file(p);
  return loader.finish();
}

/// Cleaning procedure:
///  1. drop series with fewer than k * (longest length) observations;
///  2. start at the latest first date among the survivors;
///  3. the date axis is the union of the survivors' dates from that start;
///  4. every gap is filled with the last available price of that series.
inline PricePanel preprocess(std::span<const RawPriceSeries> series,
                             double k = kDefaultLengthThreshold) {
  if (!(k > 0.0 && k <= 1.0)) throw ConfigError("length threshold k must lie in (0, 1]");
  if (series.empty()) throw DataError("no price series to preprocess");
  for (const auto& s : series) detail::check_series(s);

  std::size_t longest = 0;
  for (const auto& s : series) longest = std::max(longest, s.observations.size());
  // Relative slack keeps k * longest from excluding a series exactly at the cut.
  const double min_length = k * static_cast<double>(longest) * (1.0 - 1e-12);

  std::vector<const RawPriceSeries*> kept;
  for (const auto& s : series)
    if (!s.observations.empty() && static_cast<double>(s.observations.size()) >= min_length)
      kept.push_back(&s);
  if (kept.empty()) throw DataError("every series was removed by the length filter");

  Date start = kept.front()->observations.front().date;
  for (const auto* s : kept) start = std::max(start, s->observations.front().date);

  std::vector<Date> axis;
  for (const auto* s : kept)
    for (const auto& o : s->observations)
      if (o.date >= start) axis.push_back(o.date);
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());

  PricePanel panel;
  panel.dates = axis;
  panel.prices = ColumnMatrix<double>(axis.size(), kept.size());
  panel.fill_mask = ColumnMatrix<std::uint8_t>(axis.size(), kept.size(), 0);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& obs = kept[i]->observations;
    panel.tickers.push_back(kept[i]->ticker);
    // Last observation at or before `start` seeds the drag.
    auto it = std::upper_bound(obs.begin(), obs.end(), start,
                               [](const Date& d, const PriceObservation& o) { return d < o.date; });
    double last = std::prev(it)->close;
    it = std::lower_bound(obs.begin(), obs.end(), start,
                          [](const PriceObservation& o, const Date& d) { return o.date < d; });
    for (std::size_t t = 0; t < axis.size(); ++t) {
      if (it != obs.end() && it->date == axis[t]) {
        last = it->close;
        ++it;
      } else {
        panel.fill_mask(t, i) = 1;
      }
      panel.prices(t, i) = last;
    }
  }
  return panel;
}

inline double column_mean(std::span<const double> column) {
  double sum = 0.0;
  for (double v : column) sum += v;
  return sum / static_cast<double>(column.size());
}

/// Subtracts each column's mean in place; returns the removed means.
inline std::vector<double> demean_columns(ColumnMatrix<double>& m) {
  std::vector<double> means(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    auto col = m.col(c);
    means[c] = column_mean(col);
    for (double& v : col) v -= means[c];
  }
  return means;
}

inline ReturnPanel compute_returns(const PricePanel& panel) {
  if (panel.dates.size() < 3) throw DataError("need at least 3 dates to compute returns");
  ReturnPanel out;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.tickers = panel.tickers;
  const std::size_t rows = panel.dates.size() - 1;
  out.returns = ColumnMatrix<double>(rows, panel.tickers.size());
  for (std::size_t i = 0; i < panel.tickers.size(); ++i) {
    const auto p = panel.prices.col(i);
    auto r = out.returns.col(i);
    for (std::size_t t = 0; t < rows; ++t) r[t] = std::log(p[t + 1] / p[t]);
  }
  out.column_means_removed = demean_columns(out.returns);
  return out;
}

/// Median of the available observations per ticker (even counts: mean of the
/// two central values). Tickers with no observations are marked absent.
inline CapitalizationTable median_capitalization(
    const std::map<std::string, std::vector<double>>& records) {
  CapitalizationTable table;
  for (const auto& [ticker, values] : records) {
    for (double v : values)
      if (!(v > 0.0) || !std::isfinite(v))
        throw DataError("capitalization of '" + ticker + "' must be positive");
    if (values.empty()) {
      table.median_capitalization[ticker] = std::nullopt;
      continue;
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    table.median_capitalization[ticker] =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  return table;
}

/// Reads (ticker, date, capitalization) records. An empty or "NA" value marks
/// a missing observation; a ticker whose values are all missing becomes absent.
inline std::map<std::string, std::vector<double>> load_capitalization_records(
    std::istream& in, std::string_view source = "<stream>") {
  std::map<std::string, std::vector<double>> records;
  std::string line;
  std::string lower;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_skippable(line)) continue;
    const auto fields = text::split(line);
    if (first && detail::looks_like_header(fields)) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 3 || fields[0].empty() || !Date::parse(fields[1]))
      throw ParseError(line_no, std::string(source) + ": expected ticker,date,capitalization");
    auto& values = records[std::string(fields[0])];
    if (fields[2].empty() || detail::lowercase_copy(fields[2], lower) == "na") continue;
    const auto v = text::parse_double(fields[2]);
    if (!v) throw ParseError(line_no, std::string(source) + ": bad capitalization");
    if (*v <= 0.0)
      throw DataError(std::string(source) + " line " + std::to_string(line_no) +
                      ": capitalization must be positive");
    values.push_back(*v);
  }
  return records;
}

// ---- serialization ---------------------------------------------------------

inline void write_price_panel(std::ostream& out, const PricePanel& panel) {
  std::vector<std::string> labels;
  for (const auto& d : panel.dates) labels.push_back(d.iso());
  text::write_wide_table(out, "date", panel.tickers, labels, panel.prices, text::format_double);
}

inline void write_fill_mask(std::ostream& out, const PricePanel& panel) {
  std::vector<std::string> labels;
  for (const auto& d : panel.dates) labels.push_back(d.iso());
  text::write_wide_table(out, "date", panel.tickers, labels, panel.fill_mask,
                         [](std::uint8_t v) { return v ? "1" : "0"; });
}

inline void write_return_panel(std::ostream& out, const ReturnPanel& panel) {
  std::vector<std::string> labels;
  for (const auto& d : panel.dates) labels.push_back(d.iso());
  text::write_wide_table(out, "date", panel.tickers, labels, panel.returns, text::format_double);
}

namespace detail {

inline std::vector<Date> parse_date_labels(const std::vector<std::string>& labels) {
  std::vector<Date> dates;
  dates.reserve(labels.size());
  for (const auto& l : labels) {
    const auto d = Date::parse(l);
    if (!d) throw DataError("bad date label '" + l + "'");
    if (!dates.empty() && !(dates.back() < *d)) throw DataError("dates not strictly increasing at " + l);
    dates.push_back(*d);
  }
  return dates;
}

}  // namespace detail

/// Reads a wide price panel and, optionally, its fill mask.
inline PricePanel read_price_panel(std::istream& prices, std::istream* mask = nullptr) {
  auto table = text::read_wide_table(prices);
  PricePanel panel;
  panel.dates = detail::parse_date_labels(table.row_labels);
  panel.tickers = std::move(table.columns);
  panel.prices = std::move(table.values);
  for (double v : panel.prices.data())
    if (!(v > 0.0)) throw DataError("price panel contains a non-positive price");
  panel.fill_mask = ColumnMatrix<std::uint8_t>(panel.prices.rows(), panel.prices.cols(), 0);
  if (mask != nullptr) {
    const auto m = text::read_wide_table(*mask);
    if (m.values.rows() != panel.prices.rows() || m.columns != panel.tickers)
      throw DataError("fill mask does not match the price panel");
    for (std::size_t c = 0; c < m.values.cols(); ++c)
      for (std::size_t r = 0; r < m.values.rows(); ++r)
        panel.fill_mask(r, c) = m.values(r, c) != 0.0 ? 1 : 0;
  }
  return panel;
}

/// Reads a wide return panel. Stored values are taken as already demeaned;
/// column_means_removed is left at zero.
inline ReturnPanel read_return_panel(std::istream& in) {
  auto table = text::read_wide_table(in);
  ReturnPanel panel;
  panel.dates = detail::parse_date_labels(table.row_labels);
  panel.tickers = std::move(table.columns);
  panel.returns = std::move(table.values);
  panel.column_means_removed.assign(panel.tickers.size(), 0.0);
  return panel;
}

}  // namespace mscorr
