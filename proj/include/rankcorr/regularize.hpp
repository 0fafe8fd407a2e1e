#pragma once

// Regularized downstream estimators: tapering for bandable correlation
// matrices and exhaustive sparse PCA.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "rankcorr/eigen.hpp"
#include "rankcorr/linalg.hpp"
#include "rankcorr/matrix.hpp"
#include "rankcorr/subsets.hpp"

namespace rankcorr {

/// Taper bandwidth. Weights are 1 up to distance k/2, fall linearly to 0 at
/// distance k, and vanish beyond.
struct TaperSpec {
  std::size_t k = 2;

  void validate() const { require(k >= 1, "TaperSpec: bandwidth k must be at least 1"); }
};

inline double taper_weight(std::size_t k, std::size_t distance) {
  const double dist = static_cast<double>(distance);
  const double kk = static_cast<double>(k);
  if (2.0 * dist <= kk) return 1.0;
  if (dist < kk) return 2.0 - 2.0 * dist / kk;
  return 0.0;
}

inline SymMatrix taper_weights(const TaperSpec& spec, std::size_t d) {
  spec.validate();
  SymMatrix w(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) w.set(i, j, taper_weight(spec.k, j - i));
  return w;
}

/// Elementwise product of the estimate with the taper weights.
inline SymMatrix taper_estimate(const SymMatrix& sigma_hat, const TaperSpec& spec) {
  spec.validate();
  const std::size_t d = sigma_hat.dim();
  SymMatrix out(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) out.set(i, j, taper_weight(spec.k, j - i) * sigma_hat(i, j));
  return out;
}

inline SymMatrix taper_estimate(const CorrMatrix& sigma_hat, const TaperSpec& spec) {
  return taper_estimate(sigma_hat.sym(), spec);
}

/// min(n^{1/(2 alpha + 1)}, d) rounded to the nearest even integer, kept
/// within [2, d] (the largest even k <= d when rounding overshoots; 1 when d = 1).
inline std::size_t optimal_bandwidth(std::size_t n, std::size_t d, double alpha) {
  require(n >= 1 && d >= 1, "optimal_bandwidth: need n, d >= 1");
  require(alpha > 0.0, "optimal_bandwidth: need alpha > 0");
  if (d == 1) return 1;
  const double raw = std::min(std::pow(static_cast<double>(n), 1.0 / (2.0 * alpha + 1.0)), static_cast<double>(d));
  auto k = static_cast<std::size_t>(2.0 * std::round(raw / 2.0));
  k = std::max<std::size_t>(k, 2);
  if (k > d) k = d - d % 2;
  return k;
}

/// Exhaustive sparse principal component.
struct SparsePCAResult {
  std::vector<std::size_t> support;   // sorted
  std::vector<double> leading_vector;  // unit norm, zero off the support
  double leading_value = 0.0;          // signed eigenvalue with the largest magnitude on the support
};

/// Maximizes |v^T A v| over unit vectors with at most s nonzeros by scoring
/// every size-s support with the largest absolute eigenvalue of its principal
/// submatrix. Ties go to the lexicographically smallest support.
inline SparsePCAResult sparse_pca(const SymMatrix& sigma_hat, std::size_t s,
                                  std::uint64_t guard = kDefaultSubsetGuard) {
  const std::size_t d = sigma_hat.dim();
  check_subset_guard(d, s, guard);
  const auto best = argmax_over_subsets(
      d, s,
      [&](const std::vector<std::size_t>& idx) {
        if (idx.size() == 1) return std::abs(sigma_hat(idx[0], idx[0]));
        const auto values = eigenvalues(sigma_hat.principal(idx));
        return std::max(std::abs(values.front()), std::abs(values.back()));
      },
      guard);

  SparsePCAResult out;
  out.support = best.subset;
  out.leading_vector.assign(d, 0.0);
  const auto eig = eig_sym(sigma_hat.principal(out.support));
  // Largest |eigenvalue|; the top one wins a tie with the bottom one.
  const std::size_t pick = std::abs(eig.values.back()) > std::abs(eig.values.front()) ? eig.values.size() - 1 : 0;
  out.leading_value = eig.values[pick];
  for (std::size_t a = 0; a < out.support.size(); ++a) out.leading_vector[out.support[a]] = eig.vectors(a, pick);
  return out;
}

/// ||P_k(sigma_true) - P_k(sigma_hat)||_S for the top-k eigenspaces.
inline double pca_projections_compare(const SymMatrix& sigma_true, const SymMatrix& sigma_hat, std::size_t k) {
  require(sigma_true.dim() == sigma_hat.dim(), "pca_projections_compare: dimension mismatch");
  const SymMatrix p_true = leading_projector(sigma_true, k, 1e-8);
  return spectral_norm(p_true - leading_projector(sigma_hat, k));
}

}  // namespace rankcorr
