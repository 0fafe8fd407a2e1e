#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rankcorr/error.hpp"
#include "rankcorr/parallel.hpp"

namespace rankcorr {

inline constexpr std::uint64_t kDefaultSubsetGuard = 10'000'000;

/// C(n, k), saturating at uint64 max.
inline std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // r * num / i stays integral at every step
    if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;
  }
  return r;
}

inline void check_subset_guard(std::size_t d, std::size_t s, std::uint64_t guard) {
  require(s >= 1 && s <= d, "subset size must satisfy 1 <= s <= d (s=" + std::to_string(s) +
                                ", d=" + std::to_string(d) + ")");
  const auto count = binomial(d, s);
  if (count > guard)
    fail(ErrorKind::ResourceGuard,
         "enumerating C(" + std::to_string(d) + "," + std::to_string(s) + ") subsets exceeds the guard of " +
             std::to_string(guard) + "; lower s or d");
}

/// The subset of {0..d-1} of size s with the given lexicographic rank.
inline std::vector<std::size_t> unrank_subset(std::uint64_t rank, std::size_t d, std::size_t s) {
  std::vector<std::size_t> out;
  out.reserve(s);
  std::size_t next = 0;
  for (std::size_t slot = 0; slot < s; ++slot) {
    for (std::size_t c = next;; ++c) {
      const std::uint64_t block = binomial(d - c - 1, s - slot - 1);
      if (rank < block) {
        out.push_back(c);
        next = c + 1;
        break;
      }
      rank -= block;
    }
  }
  return out;
}

/// Advances to the lexicographic successor; false once exhausted.
inline bool next_subset(std::vector<std::size_t>& idx, std::size_t d) {
  const std::size_t s = idx.size();
  for (std::size_t i = s; i-- > 0;) {
    if (idx[i] < d - s + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

/// Best subset found by an exhaustive search.
struct SubsetArgmax {
  double score = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> subset;
};

/// Maximizes score(subset) over all size-s subsets of {0..d-1}. Chunks are
/// searched concurrently and merged in rank order with a strict comparison,
/// so the lexicographically smallest maximizer wins regardless of threads.
template <typename Score>
SubsetArgmax argmax_over_subsets(std::size_t d, std::size_t s, Score&& score,
                                 std::uint64_t guard = kDefaultSubsetGuard) {
  check_subset_guard(d, s, guard);
  const std::uint64_t total = binomial(d, s);
  const std::size_t chunk_count = static_cast<std::size_t>(
      std::min<std::uint64_t>(total, std::max<std::size_t>(1, thread_count() * 4)));
  std::vector<SubsetArgmax> partial(chunk_count);
  parallel_for(chunk_count, [&](std::size_t c) {
    const std::uint64_t begin = total * c / chunk_count;
    const std::uint64_t end = total * (c + 1) / chunk_count;
    if (begin >= end) return;
    auto idx = unrank_subset(begin, d, s);
    SubsetArgmax best;
    for (std::uint64_t r = begin; r < end; ++r) {
      const double v = score(idx);
      if (v > best.score || best.subset.empty()) {
        best.score = v;
        best.subset = idx;
      }
      if (r + 1 < end) next_subset(idx, d);
    }
    partial[c] = std::move(best);
  });
  SubsetArgmax best;
  for (auto& p : partial) {
    if (p.subset.empty()) continue;
    if (best.subset.empty() || p.score > best.score) best = std::move(p);
  }
  return best;
}

}  // namespace rankcorr
