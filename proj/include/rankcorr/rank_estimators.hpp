#pragma once

// Kendall's tau and Spearman's rho matrices, their sine-transformed
// correlation estimates, and the population maps between Sigma, T and R.
//
// Both statistics only see column ranks, so they are unchanged when every
// column is passed through a strictly increasing function. All counts are
// kept in exact integer arithmetic and converted to double with a single
// division, so the fast paths agree bit-for-bit with the textbook double
// loops.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "rankcorr/matrix.hpp"
#include "rankcorr/parallel.hpp"

namespace rankcorr {

enum class RankKind { Tau, Rho };

struct RankStatMatrix {
  RankKind kind = RankKind::Tau;
  SymMatrix values;
  std::size_t n = 0;
};

/// Per-column sort order and ranks (0-based). Rejects ties.
struct ColumnRanks {
  std::size_t n = 0;
  std::vector<std::vector<std::uint32_t>> order;  // order[j][p]: row at position p
  std::vector<std::vector<std::uint32_t>> rank;   // rank[j][i]: position of row i
};

inline ColumnRanks column_ranks(const DataMatrix& y) {
  require(y.n() >= 2, "rank statistics need at least 2 observations");
  const std::size_t n = y.n();
  const std::size_t d = y.d();
  ColumnRanks out{n, std::vector<std::vector<std::uint32_t>>(d), std::vector<std::vector<std::uint32_t>>(d)};
  for (std::size_t j = 0; j < d; ++j) {
    auto& order = out.order[j];
    order.resize(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return y(a, j) < y(b, j); });
    for (std::size_t p = 1; p < n; ++p)
      if (y(order[p], j) == y(order[p - 1], j))
        fail(ErrorKind::Ties, "tied observations in column " + std::to_string(j) +
                                  " (rows " + std::to_string(order[p - 1]) + " and " + std::to_string(order[p]) + ")");
    auto& rank = out.rank[j];
    rank.resize(n);
    for (std::size_t p = 0; p < n; ++p) rank[order[p]] = static_cast<std::uint32_t>(p);
  }
  return out;
}

namespace detail {

// Counts inversions of seq by merge sort; seq is sorted on return.
inline std::uint64_t count_inversions(std::vector<std::uint32_t>& seq, std::vector<std::uint32_t>& scratch) {
  const std::size_t n = seq.size();
  scratch.resize(n);
  std::uint64_t inversions = 0;
  std::uint32_t* src = seq.data();
  std::uint32_t* dst = scratch.data();
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (src[b] < src[a]) {
          inversions += mid - a;
          dst[out++] = src[b++];
        } else {
          dst[out++] = src[a++];
        }
      }
      while (a < mid) dst[out++] = src[a++];
      while (b < hi) dst[out++] = src[b++];
    }
    std::swap(src, dst);
  }
  if (src != seq.data()) std::copy(src, src + n, seq.data());
  return inversions;
}

inline std::vector<std::pair<std::size_t, std::size_t>> upper_pairs(std::size_t d) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(d * (d - 1) / 2);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j + 1; k < d; ++k) pairs.emplace_back(j, k);
  return pairs;
}

}  // namespace detail

/// Kendall's tau for every column pair, O(d^2 n log n).
inline RankStatMatrix kendall_tau_matrix(const ColumnRanks& ranks) {
  const std::size_t n = ranks.n;
  const std::size_t d = ranks.order.size();
  const auto pairs = detail::upper_pairs(d);
  std::vector<double> tau(pairs.size());
  const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1);
  parallel_chunks(pairs.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> seq(n), scratch(n);
    for (std::size_t p = begin; p < end; ++p) {
      const auto [j, k] = pairs[p];
      for (std::size_t i = 0; i < n; ++i) seq[i] = ranks.rank[k][ranks.order[j][i]];
      const auto discordant = static_cast<std::int64_t>(detail::count_inversions(seq, scratch));
      // 2 (concordant - discordant) / (n (n - 1))
      tau[p] = static_cast<double>(total - 4 * discordant) / static_cast<double>(total);
    }
  });
  SymMatrix values = SymMatrix::identity(d);
  for (std::size_t p = 0; p < pairs.size(); ++p) values.set(pairs[p].first, pairs[p].second, tau[p]);
  return {RankKind::Tau, std::move(values), n};
}

inline RankStatMatrix kendall_tau_matrix(const DataMatrix& y) { return kendall_tau_matrix(column_ranks(y)); }

/// Spearman's rho for every column pair. With no ties the rank variance is
/// n(n^2-1)/12 in every column, so rho = 12 sum (r_j - m)(r_k - m) / (n(n^2-1)).
inline RankStatMatrix spearman_rho_matrix(const ColumnRanks& ranks) {
  const std::size_t n = ranks.n;
  const std::size_t d = ranks.rank.size();
  const auto nn = static_cast<std::int64_t>(n);
  // Doubled centered ranks 2 r - (n + 1) with 1-based r are integers.
  std::vector<std::vector<std::int64_t>> centered(d, std::vector<std::int64_t>(n));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < n; ++i) centered[j][i] = 2 * static_cast<std::int64_t>(ranks.rank[j][i]) + 1 - nn;
  const double denom = static_cast<double>(nn * (nn * nn - 1) / 3);
  const auto pairs = detail::upper_pairs(d);
  std::vector<double> rho(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto& a = centered[pairs[p].first];
    const auto& b = centered[pairs[p].second];
    std::int64_t s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    rho[p] = static_cast<double>(s) / denom;
  });
  SymMatrix values = SymMatrix::identity(d);
  for (std::size_t p = 0; p < pairs.size(); ++p) values.set(pairs[p].first, pairs[p].second, rho[p]);
  return {RankKind::Rho, std::move(values), n};
}

inline RankStatMatrix spearman_rho_matrix(const DataMatrix& y) { return spearman_rho_matrix(column_ranks(y)); }

namespace detail {
template <typename Map>
CorrMatrix map_offdiagonal(const SymMatrix& m, Map&& f) {
  SymMatrix out = SymMatrix::identity(m.dim());
  for (std::size_t j = 0; j < m.dim(); ++j)
    for (std::size_t k = j + 1; k < m.dim(); ++k) out.set(j, k, f(m(j, k)));
  return CorrMatrix::from(std::move(out));
}
}  // namespace detail

/// sin(pi/2 * tau) elementwise.
inline CorrMatrix sigma_hat_tau(const RankStatMatrix& t) {
  require(t.kind == RankKind::Tau, "sigma_hat_tau: expects a Kendall tau matrix");
  return detail::map_offdiagonal(t.values, [](double tau) { return std::sin(std::numbers::pi / 2.0 * tau); });
}

/// 2 sin(pi/6 * rho) elementwise. Perfect rank agreement maps to exactly +-1.
inline CorrMatrix sigma_hat_rho(const RankStatMatrix& r) {
  require(r.kind == RankKind::Rho, "sigma_hat_rho: expects a Spearman rho matrix");
  return detail::map_offdiagonal(r.values, [](double rho) {
    if (std::abs(rho) == 1.0) return rho;
    return 2.0 * std::sin(std::numbers::pi / 6.0 * rho);
  });
}

/// Population Kendall's tau under the Gaussian copula: (2/pi) asin(Sigma).
inline SymMatrix tau_pop(const CorrMatrix& sigma) {
  return detail::map_offdiagonal(sigma.sym(), [](double s) { return 2.0 / std::numbers::pi * std::asin(s); }).sym();
}

/// Population Spearman's rho under the Gaussian copula: (6/pi) asin(Sigma/2).
inline SymMatrix rho_pop(const CorrMatrix& sigma) {
  return detail::map_offdiagonal(sigma.sym(), [](double s) {
           if (std::abs(s) == 1.0) return s;
           return 6.0 / std::numbers::pi * std::asin(s / 2.0);
         }).sym();
}

/// Latent sample second-moment matrix X^T X / n (no centering or rescaling).
inline SymMatrix oracle_sample_corr(const DataMatrix& x) {
  const std::size_t n = x.n();
  const std::size_t d = x.d();
  SymMatrix out(d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j; k < d; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += x(i, j) * x(i, k);
      out.set(j, k, s / static_cast<double>(n));
    }
  return out;
}

}  // namespace rankcorr
