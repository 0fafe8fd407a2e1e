#pragma once

// Matrix norms and eigenvector distances used to measure estimation error.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rankcorr/eigen.hpp"
#include "rankcorr/matrix.hpp"
#include "rankcorr/subsets.hpp"

namespace rankcorr {

/// Largest absolute eigenvalue.
inline double spectral_norm(const SymMatrix& a) {
  if (a.is_zero()) return 0.0;
  const auto values = eigenvalues(a);
  return std::max(std::abs(values.front()), std::abs(values.back()));
}

/// Maximum row l2 norm, i.e. the l2 -> l-infinity operator norm.
inline double norm_2_inf(const SymMatrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    double s = 0.0;
    for (double v : a.row(j)) s += v * v;
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

inline double norm_frobenius(const SymMatrix& a) {
  double s = 0.0;
  for (double v : a.dense().data()) s += v * v;
  return std::sqrt(s);
}

inline double norm_max(const SymMatrix& a) {
  double best = 0.0;
  for (double v : a.dense().data()) best = std::max(best, std::abs(v));
  return best;
}

struct SparseNorm {
  double value = 0.0;
  std::vector<std::size_t> support;
};

/// max over |A| = s of ||A_{AxA}||_S, by exhaustive enumeration. By Cauchy
/// interlacing this also equals the max over |A| <= s.
inline SparseNorm sparse_spectral_norm(const SymMatrix& a, std::size_t s,
                                       std::uint64_t guard = kDefaultSubsetGuard) {
  check_subset_guard(a.dim(), s, guard);
  if (s == a.dim()) {
    std::vector<std::size_t> all(a.dim());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    return {spectral_norm(a), std::move(all)};
  }
  auto best = argmax_over_subsets(
      a.dim(), s,
      [&](const std::vector<std::size_t>& idx) {
        if (idx.size() == 1) return std::abs(a(idx[0], idx[0]));
        return spectral_norm(a.principal(idx));
      },
      guard);
  return {best.score, std::move(best.subset)};
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

/// |sin| of the angle between two unit vectors, in [0, 1]. Evaluated as
/// ||u - v|| * ||u + v|| / 2, which equals sqrt(1 - (u.v)^2) for unit
/// vectors and stays accurate for nearly parallel inputs.
inline double sin_angle(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "sin_angle: length mismatch");
  require(std::abs(norm2(u) - 1.0) <= 1e-10 && std::abs(norm2(v) - 1.0) <= 1e-10,
          "sin_angle: inputs must be unit vectors");
  double minus = 0.0, plus = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    minus += (u[i] - v[i]) * (u[i] - v[i]);
    plus += (u[i] + v[i]) * (u[i] + v[i]);
  }
  return std::clamp(0.5 * std::sqrt(minus) * std::sqrt(plus), 0.0, 1.0);
}

/// Orthogonal projector onto the span of the k leading eigenvectors.
inline SymMatrix leading_projector(const SymMatrix& a, std::size_t k, double min_gap = 1e-10) {
  require(k >= 1 && k < a.dim(), "leading_projector: need 1 <= k < d");
  const auto eig = eig_sym(a);
  const double gap = eig.values[k - 1] - eig.values[k];
  if (!(gap > min_gap))
    fail(ErrorKind::InvalidInput, "projection: eigengap lambda_k - lambda_{k+1} = " + std::to_string(gap) +
                                      " is too small to define a unique subspace (k=" + std::to_string(k) + ")");
  const std::size_t d = a.dim();
  SymMatrix p(d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r; c < d; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += eig.vectors(r, j) * eig.vectors(c, j);
      p.set(r, c, s);
    }
  return p;
}

/// ||P_k(A) - P_k(B)||_S for the top-k eigenspaces (algebraically largest).
inline double projection_distance(const SymMatrix& a, const SymMatrix& b, std::size_t k) {
  require(a.dim() == b.dim(), "projection_distance: dimension mismatch");
  return spectral_norm(leading_projector(a, k) - leading_projector(b, k));
}

}  // namespace rankcorr
