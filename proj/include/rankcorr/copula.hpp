#pragma once

// Synthetic data from the Gaussian copula model: latent N(0, Sigma) rows
// pushed through strictly increasing per-column transforms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankcorr/eigen.hpp"
#include "rankcorr/matrix.hpp"
#include "rankcorr/parallel.hpp"
#include "rankcorr/random.hpp"

namespace rankcorr {

/// Riemann zeta for s > 1 (direct sum plus Euler-Maclaurin tail).
inline double riemann_zeta(double s) {
  require(s > 1.0, "riemann_zeta: requires s > 1");
  constexpr int kTerms = 64;
  double sum = 0.0;
  for (int k = 1; k < kTerms; ++k) sum += std::pow(static_cast<double>(k), -s);
  const double n = kTerms;
  const double ns = std::pow(n, -s);
  sum += n * ns / (s - 1.0) + 0.5 * ns;
  // Bernoulli corrections B2, B4, B6
  const double t1 = s * ns / n;
  const double t2 = t1 * (s + 1.0) * (s + 2.0) / (n * n);
  const double t3 = t2 * (s + 3.0) * (s + 4.0) / (n * n);
  sum += t1 / 12.0 - t2 / 720.0 + t3 / 30240.0;
  return sum;
}

/// Largest admissible amplitude of the bandable family c |j-k|^{-alpha-1}.
/// Keeps 2 c zeta(alpha+1) <= 0.9, so every realization is diagonally
/// dominant and strictly positive definite.
inline double bandable_c_max(double alpha) { return 0.45 / riemann_zeta(alpha + 1.0); }

/// Tail-sum constant: max_j sum_{|i-j|>k} |Sigma_ij| <= M0 k^{-alpha}.
inline double bandable_m0(double alpha, double c) { return 2.0 * c / alpha; }

/// Spectral bound ||Sigma||_S <= M1 (Gershgorin).
inline double bandable_m1(double alpha, double c) { return 1.0 + 2.0 * c * riemann_zeta(alpha + 1.0); }

enum class SigmaFamily { Ar1, Compound, Bandable, Spiked };

/// Parametric population correlation family at a fixed dimension.
struct SigmaModel {
  SigmaFamily family = SigmaFamily::Ar1;
  std::size_t dim = 1;
  double r = 0.0;       // ar1, compound
  double alpha = 1.0;   // bandable
  double c = 0.0;       // bandable amplitude
  double lambda = 0.0;  // spiked strength
  std::size_t s = 1;    // spiked support size

  static SigmaModel ar1(std::size_t d, double r) { return {SigmaFamily::Ar1, d, r}; }
  static SigmaModel compound(std::size_t d, double r) { return {SigmaFamily::Compound, d, r}; }
  static SigmaModel bandable(std::size_t d, double alpha, double c) {
    SigmaModel m{SigmaFamily::Bandable, d};
    m.alpha = alpha;
    m.c = c;
    return m;
  }
  static SigmaModel spiked(std::size_t d, double lambda, std::size_t s) {
    SigmaModel m{SigmaFamily::Spiked, d};
    m.lambda = lambda;
    m.s = s;
    return m;
  }

  SigmaModel with_dim(std::size_t d) const {
    SigmaModel m = *this;
    m.dim = d;
    return m;
  }

  void validate() const {
    require(dim >= 1, "SigmaModel: dimension must be positive");
    switch (family) {
      case SigmaFamily::Ar1:
        require(std::abs(r) < 1.0, "SigmaModel ar1: need |r| < 1");
        break;
      case SigmaFamily::Compound:
        require(r < 1.0 && (dim == 1 || r > -1.0 / static_cast<double>(dim - 1)),
                "SigmaModel compound: need -1/(d-1) < r < 1");
        break;
      case SigmaFamily::Bandable:
        require(alpha > 0.0, "SigmaModel bandable: need alpha > 0");
        require(c > 0.0 && c <= bandable_c_max(alpha),
                "SigmaModel bandable: need 0 < c <= c_max(alpha) = " + std::to_string(bandable_c_max(alpha)));
        break;
      case SigmaFamily::Spiked:
        require(lambda > 0.0, "SigmaModel spiked: need lambda > 0");
        require(s >= 1 && s <= dim, "SigmaModel spiked: need 1 <= s <= d");
        break;
    }
  }

  std::string describe() const {
    switch (family) {
      case SigmaFamily::Ar1: return "ar1(r=" + std::to_string(r) + ")";
      case SigmaFamily::Compound: return "compound(r=" + std::to_string(r) + ")";
      case SigmaFamily::Bandable:
        return "bandable(alpha=" + std::to_string(alpha) + ",c=" + std::to_string(c) + ")";
      case SigmaFamily::Spiked:
        return "spiked(lambda=" + std::to_string(lambda) + ",s=" + std::to_string(s) + ")";
    }
    return "?";
  }
};

/// Smallest eigenvalue must be >= floor; otherwise an error names it.
inline void require_psd(const SymMatrix& m, double floor = -1e-8) {
  const double smallest = eigenvalues(m).back();
  if (smallest < floor)
    fail(ErrorKind::InvalidInput,
         "matrix is not positive semi-definite: smallest eigenvalue " + std::to_string(smallest));
}

inline CorrMatrix realize_sigma(const SigmaModel& model) {
  model.validate();
  const std::size_t d = model.dim;
  SymMatrix m = SymMatrix::identity(d);
  switch (model.family) {
    case SigmaFamily::Ar1:
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k) m.set(j, k, std::pow(model.r, static_cast<double>(k - j)));
      break;
    case SigmaFamily::Compound:
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k) m.set(j, k, model.r);
      break;
    case SigmaFamily::Bandable:
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k)
          m.set(j, k, model.c * std::pow(static_cast<double>(k - j), -model.alpha - 1.0));
      break;
    case SigmaFamily::Spiked: {
      // I + lambda theta theta^T with theta = 1/sqrt(s) on the first s
      // coordinates, rescaled back to unit diagonal.
      const double spike = model.lambda / static_cast<double>(model.s);
      const double within = spike / (1.0 + spike);
      for (std::size_t j = 0; j < model.s; ++j)
        for (std::size_t k = j + 1; k < model.s; ++k) m.set(j, k, within);
      break;
    }
  }
  require_psd(m);
  return CorrMatrix::from(std::move(m));
}

/// Unit leading eigenvector of the spiked family (uniform on the first s
/// coordinates).
inline std::vector<double> spiked_direction(const SigmaModel& model) {
  require(model.family == SigmaFamily::Spiked, "spiked_direction: model is not spiked");
  std::vector<double> v(model.dim, 0.0);
  for (std::size_t j = 0; j < model.s; ++j) v[j] = 1.0 / std::sqrt(static_cast<double>(model.s));
  return v;
}

/// lambda_1 - lambda_2 of a population matrix.
inline double population_eigengap(const SymMatrix& sigma) {
  const auto values = eigenvalues(sigma);
  return values.size() < 2 ? 0.0 : values[0] - values[1];
}

enum class Transform { Identity, Cube, ExpShift, LogitIsh };

inline double apply_transform(Transform t, double x) {
  switch (t) {
    case Transform::Identity: return x;
    case Transform::Cube: return x * x * x;
    case Transform::ExpShift: return std::exp(x);
    case Transform::LogitIsh: return x / (1.0 + std::abs(x));
  }
  return x;
}

inline std::string_view transform_name(Transform t) {
  switch (t) {
    case Transform::Identity: return "identity";
    case Transform::Cube: return "cube";
    case Transform::ExpShift: return "expshift";
    case Transform::LogitIsh: return "logitish";
  }
  return "?";
}

inline Transform parse_transform(std::string_view name) {
  for (auto t : {Transform::Identity, Transform::Cube, Transform::ExpShift, Transform::LogitIsh})
    if (transform_name(t) == name) return t;
  fail(ErrorKind::InvalidInput, "unknown transform '" + std::string(name) + "'");
}

/// One strictly increasing transform per column.
struct TransformSet {
  std::vector<Transform> columns;

  static TransformSet uniform(std::size_t d, Transform t) { return {std::vector<Transform>(d, t)}; }

  /// Repeats `pattern` across d columns.
  static TransformSet cycle(std::size_t d, const std::vector<Transform>& pattern) {
    require(!pattern.empty(), "TransformSet: empty pattern");
    TransformSet out;
    for (std::size_t j = 0; j < d; ++j) out.columns.push_back(pattern[j % pattern.size()]);
    return out;
  }

  std::size_t size() const noexcept { return columns.size(); }
};

inline DataMatrix apply_transforms(const DataMatrix& x, const TransformSet& t) {
  require(t.size() == x.d(), "apply_transforms: transform count must equal the number of columns");
  DataMatrix y = x;
  for (std::size_t i = 0; i < x.n(); ++i)
    for (std::size_t j = 0; j < x.d(); ++j) y.at(i, j) = apply_transform(t.columns[j], x(i, j));
  return y;
}

/// First column containing a repeated value, if any.
inline std::optional<std::size_t> first_tied_column(const DataMatrix& x) {
  std::vector<double> col;
  for (std::size_t j = 0; j < x.d(); ++j) {
    col = x.column(j);
    std::sort(col.begin(), col.end());
    if (std::adjacent_find(col.begin(), col.end()) != col.end()) return j;
  }
  return std::nullopt;
}

/// Symmetric PSD square root; eigenvalues above `floor` are clamped to 0.
inline Matrix psd_sqrt(const SymMatrix& sigma, double floor = -1e-8) {
  const auto eig = eig_sym(sigma);
  if (eig.values.back() < floor)
    fail(ErrorKind::InvalidInput,
         "matrix is not positive semi-definite: smallest eigenvalue " + std::to_string(eig.values.back()));
  const std::size_t d = sigma.dim();
  std::vector<double> root(d);
  for (std::size_t j = 0; j < d; ++j) root[j] = std::sqrt(std::max(eig.values[j], 0.0));
  Matrix out(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r; c < d; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += eig.vectors(r, j) * root[j] * eig.vectors(c, j);
      out(r, c) = s;
      out(c, r) = s;
    }
  return out;
}

namespace detail {
inline DataMatrix gaussian_rows(const Matrix& root, std::size_t n, std::uint64_t seed) {
  const std::size_t d = root.rows();
  const NormalStream stream(seed);
  Matrix x(n, d);
  parallel_chunks(
      n,
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> z(d);
        for (std::size_t i = begin; i < end; ++i) {
          for (std::size_t j = 0; j < d; ++j) z[j] = stream[static_cast<std::uint64_t>(i) * d + j];
          auto row = x.row(i);
          for (std::size_t k = 0; k < d; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += z[j] * root(j, k);
            row[k] = s;
          }
        }
      },
      256);
  return DataMatrix::from_matrix(std::move(x));
}
}  // namespace detail

/// n iid rows from N(0, Sigma), generated as Z * Sigma^{1/2}. Output is a
/// pure function of (sigma, n, seed). A sample with tied values in some
/// column is redrawn once from a derived seed before giving up.
inline DataMatrix sample_latent(const CorrMatrix& sigma, std::size_t n, std::uint64_t seed) {
  require(n >= 1, "sample_latent: n must be positive");
  const Matrix root = psd_sqrt(sigma);
  DataMatrix x = detail::gaussian_rows(root, n, seed);
  if (n >= 2 && first_tied_column(x)) {
    x = detail::gaussian_rows(root, n, derive_seed(seed, 0x7469657321ull));
    if (auto col = first_tied_column(x))
      fail(ErrorKind::Ties, "sample_latent: tied values in column " + std::to_string(*col) + " after resampling");
  }
  return x;
}

}  // namespace rankcorr
