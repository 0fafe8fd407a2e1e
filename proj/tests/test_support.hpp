#pragma once

// Seeded generators for property tests. Deliberately independent of the
// library's Philox stream so test inputs do not share its failure modes.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "rankcorr/matrix.hpp"

namespace testing_support {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  double normal() {
    const double u1 = uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

inline rankcorr::SymMatrix random_sym(Gen& g, std::size_t d, double scale = 1.0) {
  rankcorr::SymMatrix m(d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j; k < d; ++k) m.set(j, k, scale * g.uniform(-1.0, 1.0));
  return m;
}

/// n x d matrix of distinct continuous values (ties have probability ~0 and
/// are rejected).
inline rankcorr::DataMatrix random_data(Gen& g, std::size_t n, std::size_t d) {
  rankcorr::Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = g.normal();
  return rankcorr::DataMatrix::from_matrix(std::move(m));
}

/// Random correlated data: a shared factor plus noise, so rank statistics
/// are spread away from zero.
inline rankcorr::DataMatrix random_correlated_data(Gen& g, std::size_t n, std::size_t d) {
  rankcorr::Matrix m(n, d);
  std::vector<double> loading(d);
  for (auto& l : loading) l = g.uniform(-1.5, 1.5);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = g.normal();
    for (std::size_t j = 0; j < d; ++j) m(i, j) = loading[j] * f + g.normal();
  }
  return rankcorr::DataMatrix::from_matrix(std::move(m));
}

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace testing_support
