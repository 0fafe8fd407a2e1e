#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankcorr/error.hpp"

namespace rankcorr {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Symmetric d x d matrix. Writes go through set(), which updates both
/// triangles, so symmetry holds exactly at all times.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : m_(dim, dim, 0.0) {
    require(dim > 0, "SymMatrix: dimension must be positive");
  }

  static SymMatrix identity(std::size_t dim) {
    SymMatrix out(dim);
    for (std::size_t j = 0; j < dim; ++j) out.m_(j, j) = 1.0;
    return out;
  }

  static SymMatrix diagonal(std::span<const double> values) {
    SymMatrix out(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) out.set(j, j, values[j]);
    return out;
  }

  /// Copies a square matrix, rejecting asymmetry larger than `tol`. The
  /// upper triangle wins when the two halves differ within tolerance.
  static SymMatrix from_dense(const Matrix& m, double tol = 0.0) {
    require(m.rows() == m.cols(), "SymMatrix: input is not square");
    SymMatrix out(m.rows());
    for (std::size_t j = 0; j < m.rows(); ++j)
      for (std::size_t k = j; k < m.cols(); ++k) {
        if (std::abs(m(j, k) - m(k, j)) > tol)
          fail(ErrorKind::InvalidInput, "SymMatrix: input is not symmetric at (" +
                                            std::to_string(j) + "," + std::to_string(k) + ")");
        out.set(j, k, m(j, k));
      }
    return out;
  }

  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix dense(rows.size(), rows.size());
    std::size_t i = 0;
    for (const auto& r : rows) {
      require(r.size() == rows.size(), "SymMatrix: ragged initializer");
      std::size_t j = 0;
      for (double v : r) dense(i, j++) = v;
      ++i;
    }
    return from_dense(dense);
  }

  std::size_t dim() const noexcept { return m_.rows(); }

  double operator()(std::size_t j, std::size_t k) const { return m_(j, k); }

  void set(std::size_t j, std::size_t k, double value) {
    if (!std::isfinite(value)) fail(ErrorKind::InvalidInput, "SymMatrix: non-finite entry");
    m_(j, k) = value;
    m_(k, j) = value;
  }

  std::span<const double> row(std::size_t j) const { return m_.row(j); }
  const Matrix& dense() const noexcept { return m_; }

  bool is_zero() const {
    for (double v : m_.data())
      if (v != 0.0) return false;
    return true;
  }

  /// Principal submatrix on the given (sorted or unsorted) index list.
  SymMatrix principal(std::span<const std::size_t> idx) const {
    SymMatrix out(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a; b < idx.size(); ++b) out.set(a, b, m_(idx[a], idx[b]));
    return out;
  }

  SymMatrix operator-() const {
    SymMatrix out(*this);
    for (double& v : out.m_.data()) v = -v;
    return out;
  }

  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    require(a.dim() == b.dim(), "SymMatrix: dimension mismatch");
    SymMatrix out(a);
    auto dst = out.m_.data();
    auto src = b.m_.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
    return out;
  }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    require(a.dim() == b.dim(), "SymMatrix: dimension mismatch");
    SymMatrix out(a);
    auto dst = out.m_.data();
    auto src = b.m_.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    return out;
  }

  friend SymMatrix operator*(double s, const SymMatrix& a) {
    SymMatrix out(a);
    for (double& v : out.m_.data()) v *= s;
    return out;
  }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  Matrix m_;
};

/// Correlation matrix: symmetric, unit diagonal, off-diagonals in [-1, 1].
/// Positive semi-definiteness is not part of the type (rank estimates can
/// be indefinite); population models check it separately.
class CorrMatrix {
 public:
  CorrMatrix() = default;

  static CorrMatrix from(SymMatrix m) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (m(j, j) != 1.0)
        fail(ErrorKind::InvalidInput, "CorrMatrix: diagonal entry " + std::to_string(j) + " is not 1");
      for (std::size_t k = j + 1; k < m.dim(); ++k)
        if (std::abs(m(j, k)) > 1.0)
          fail(ErrorKind::InvalidInput, "CorrMatrix: entry (" + std::to_string(j) + "," +
                                            std::to_string(k) + ") outside [-1, 1]");
    }
    CorrMatrix out;
    out.base_ = std::move(m);
    return out;
  }

  static CorrMatrix identity(std::size_t dim) { return from(SymMatrix::identity(dim)); }

  std::size_t dim() const noexcept { return base_.dim(); }
  double operator()(std::size_t j, std::size_t k) const { return base_(j, k); }
  const SymMatrix& sym() const noexcept { return base_; }
  operator const SymMatrix&() const noexcept { return base_; }

  friend bool operator==(const CorrMatrix&, const CorrMatrix&) = default;

 private:
  SymMatrix base_;
};

/// n x d observation matrix, rows are observations.
class DataMatrix {
 public:
  DataMatrix() = default;
  DataMatrix(std::size_t n, std::size_t d) : m_(n, d, 0.0) {
    require(n >= 1 && d >= 1, "DataMatrix: needs at least one row and one column");
  }

  static DataMatrix from_matrix(Matrix m) {
    require(m.rows() >= 1 && m.cols() >= 1, "DataMatrix: needs at least one row and one column");
    for (double v : m.data())
      if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "DataMatrix: non-finite entry");
    DataMatrix out;
    out.m_ = std::move(m);
    return out;
  }

  static DataMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    require(rows.size() > 0, "DataMatrix: empty initializer");
    Matrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& r : rows) {
      require(r.size() == m.cols(), "DataMatrix: ragged initializer");
      std::size_t j = 0;
      for (double v : r) m(i, j++) = v;
      ++i;
    }
    return from_matrix(std::move(m));
  }

  std::size_t n() const noexcept { return m_.rows(); }
  std::size_t d() const noexcept { return m_.cols(); }

  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  double& at(std::size_t i, std::size_t j) { return m_(i, j); }

  std::vector<double> column(std::size_t j) const { return m_.column(j); }
  std::span<const double> row(std::size_t i) const { return m_.row(i); }
  const Matrix& dense() const noexcept { return m_; }

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

 private:
  Matrix m_;
};

}  // namespace rankcorr
