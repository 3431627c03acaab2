#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "mscorr/error.hpp"
#include "mscorr/panel.hpp"
#include "mscorr/parallel.hpp"
#include "mscorr/random.hpp"

// Surrogate panels. A synchronous shuffle permutes the time axis of every
// column with the same permutation: autocorrelation goes, equal-time
// cross-correlation stays. Marginal Gaussianization maps each column onto
// normal quantiles of its ranks: tails go, temporal order stays.

namespace mscorr {

enum class SurrogateKind { kSynchronousShuffle, kMarginalGaussianize };

inline std::string_view to_string(SurrogateKind k) {
  return k == SurrogateKind::kSynchronousShuffle ? "synchronous_shuffle" : "marginal_gaussianize";
}

struct SurrogateSpec {
  SurrogateKind kind = SurrogateKind::kSynchronousShuffle;
  std::uint64_t seed = 0;
  /// Output row t takes input row permutation[t] (0-based). Shuffle only.
  std::optional<std::vector<std::size_t>> permutation;

  [[nodiscard]] std::string permutation_digest() const {
    Fnv1a h;
    if (permutation)
      for (auto v : *permutation) h.update_u64(v);
    return h.hex();
  }
};

inline bool is_permutation_of_range(const std::vector<std::size_t>& perm) {
  std::vector<bool> seen(perm.size(), false);
  for (auto v : perm) {
    if (v >= perm.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

/// Seeded Fisher-Yates permutation of {0, ..., n-1}.
inline std::vector<std::size_t> draw_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_rng(seed, 0);
  for (std::size_t i = n; i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  return perm;
}

/// Reorders the rows of every column by `perm`. The date labels are kept in
/// place; only the values move.
inline ReturnPanel apply_permutation(const ReturnPanel& panel, const std::vector<std::size_t>& perm) {
  if (perm.size() != panel.n_days() || !is_permutation_of_range(perm))
    throw ConfigError("permutation is not a bijection on the time axis");
  ReturnPanel out = panel;
  for (std::size_t i = 0; i < panel.n_stocks(); ++i) {
    const auto src = panel.returns.col(i);
    auto dst = out.returns.col(i);
    for (std::size_t t = 0; t < perm.size(); ++t) dst[t] = src[perm[t]];
  }
  return out;
}

struct ShuffledPanel {
  ReturnPanel panel;
  SurrogateSpec spec;
};

inline ShuffledPanel synchronous_shuffle(const ReturnPanel& panel, std::uint64_t seed) {
  if (panel.n_days() < 2) throw DataError("shuffle needs at least 2 observations");
  SurrogateSpec spec{SurrogateKind::kSynchronousShuffle, seed, draw_permutation(panel.n_days(), seed)};
  auto shuffled = apply_permutation(panel, *spec.permutation);
  return {std::move(shuffled), std::move(spec)};
}

/// Replaces each value by the standard-normal quantile of (rank - 0.5) / T.
/// Tied values get consecutive ranks in an order drawn from the column's
/// seeded stream.
inline ReturnPanel marginal_gaussianize(const ReturnPanel& panel, std::uint64_t seed,
                                        unsigned threads = 0) {
  const std::size_t t_len = panel.n_days();
  if (t_len < 10) throw DataError("gaussianization needs at least 10 observations");
  ReturnPanel out = panel;
  out.column_means_removed.assign(panel.n_stocks(), 0.0);

  const boost::math::normal_distribution<double> standard;
  std::vector<double> quantile(t_len);
  for (std::size_t r = 0; r < t_len; ++r)
    quantile[r] = boost::math::quantile(standard, (static_cast<double>(r) + 0.5) /
                                                      static_cast<double>(t_len));

  parallel_for(
      panel.n_stocks(),
      [&](std::size_t i) {
        const auto x = panel.returns.col(i);
        if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); }))
          throw UndefinedRankError("gaussianize: ticker '" + panel.tickers[i] +
                                   "' has a constant return series");
        std::vector<std::size_t> order(t_len);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
        Rng rng = make_rng(seed, i);
        for (std::size_t lo = 0; lo < t_len;) {
          std::size_t hi = lo + 1;
          while (hi < t_len && x[order[hi]] == x[order[lo]]) ++hi;
          for (std::size_t k = hi - lo; k > 1; --k) {
            boost::random::uniform_int_distribution<std::size_t> pick(0, k - 1);
            std::swap(order[lo + k - 1], order[lo + pick(rng)]);
          }
          lo = hi;
        }
        auto y = out.returns.col(i);
        for (std::size_t r = 0; r < t_len; ++r) y[order[r]] = quantile[r];
      },
      threads);
  return out;
}

/// Sidecar metadata: kind, seed and a digest of the permutation.
inline void write_surrogate_metadata(std::ostream& out, const SurrogateSpec& spec) {
  out << "kind = " << to_string(spec.kind) << '\n';
  out << "seed = " << spec.seed << '\n';
  if (spec.permutation) {
    out << "permutation_length = " << spec.permutation->size() << '\n';
    out << "permutation_fnv1a64 = " << spec.permutation_digest() << '\n';
  }
}

}  // namespace mscorr
