#pragma once

// Dense symmetric eigensolvers.
//
// Small problems (d <= 64) use cyclic Jacobi rotations, which are accurate
// to high relative precision and trivially deterministic. Larger problems are
// reduced to tridiagonal form by Householder reflections and then solved with
// the implicit QL algorithm (the EISPACK tred2/tql2 pair).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "rankcorr/matrix.hpp"

namespace rankcorr {

/// Eigenpairs sorted by descending eigenvalue. vectors(:, j) pairs with values[j].
struct EigenDecomp {
  std::vector<double> values;
  Matrix vectors;

  std::vector<double> vector(std::size_t j) const { return vectors.column(j); }
};

inline constexpr std::size_t kJacobiMaxDim = 64;

namespace detail {

// Sorts eigenpairs by descending value; equal values keep their original
// column order. Each vector is then oriented so that its largest-magnitude
// entry (lowest index on ties) is positive.
inline EigenDecomp finish_decomposition(std::vector<double> values, const Matrix& vecs) {
  const std::size_t d = values.size();
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  EigenDecomp out{std::vector<double>(d), Matrix(d, d)};
  for (std::size_t c = 0; c < d; ++c) {
    const std::size_t src = order[c];
    out.values[c] = values[src];
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < d; ++r)
      if (std::abs(vecs(r, src)) > best) {
        best = std::abs(vecs(r, src));
        arg = r;
      }
    const double sign = vecs(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < d; ++r) out.vectors(r, c) = sign * vecs(r, src);
  }
  return out;
}

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.rows(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k)
      if (j != k) s += a(j, k) * a(j, k);
  return std::sqrt(s);
}

}  // namespace detail

/// Cyclic Jacobi. Stops once off(A) <= 1e-12 * ||A||_F; gives up after
/// 100 * d sweeps.
inline EigenDecomp eig_sym_jacobi(const SymMatrix& input) {
  const std::size_t d = input.dim();
  Matrix a = input.dense();
  Matrix v(d, d);
  for (std::size_t j = 0; j < d; ++j) v(j, j) = 1.0;

  double fro = 0.0;
  for (double x : a.data()) fro += x * x;
  fro = std::sqrt(fro);
  const double target = 1e-12 * fro;

  const std::size_t max_sweeps = 100 * d;
  std::size_t sweep = 0;
  while (fro > 0.0 && detail::off_diagonal_norm(a) > target) {
    if (sweep++ >= max_sweeps)
      fail(ErrorKind::Numerical,
           "eig_sym: Jacobi iteration did not converge for a " + std::to_string(d) + "x" +
               std::to_string(d) + " matrix");
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < d; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  std::vector<double> values(d);
  for (std::size_t j = 0; j < d; ++j) values[j] = a(j, j);
  return detail::finish_decomposition(std::move(values), v);
}

/// Householder tridiagonalization followed by implicit QL with shifts.
inline EigenDecomp eig_sym_ql(const SymMatrix& input) {
  const std::size_t n = input.dim();
  Matrix v = input.dense();
  std::vector<double> d(n), e(n);

  // Householder reduction to tridiagonal form.
  for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);
  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k < i; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  // Accumulate the transformations.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;

  // Implicit QL on the tridiagonal matrix.
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  const std::size_t max_iter = 100 * n;
  std::size_t total_iter = 0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      do {
        if (++total_iter > max_iter)
          fail(ErrorKind::Numerical, "eig_sym: QL iteration did not converge for a " +
                                         std::to_string(n) + "x" + std::to_string(n) + " matrix");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          for (std::size_t k = 0; k < n; ++k) {
            h = v(k, ii + 1);
            v(k, ii + 1) = s * v(k, ii) + c * h;
            v(k, ii) = c * v(k, ii) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
  return detail::finish_decomposition(std::move(d), v);
}

/// Symmetric eigendecomposition, eigenvalues in descending order.
inline EigenDecomp eig_sym(const SymMatrix& a) {
  if (a.dim() == 1) return EigenDecomp{{a(0, 0)}, Matrix(1, 1, 1.0)};
  return a.dim() <= kJacobiMaxDim ? eig_sym_jacobi(a) : eig_sym_ql(a);
}

/// Eigenvalues only, descending.
inline std::vector<double> eigenvalues(const SymMatrix& a) { return eig_sym(a).values; }

}  // namespace rankcorr
