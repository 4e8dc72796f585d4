#include "pfplace/sparse.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "pfplace/error.hpp"

namespace pfplace {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {
  if (cols > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionError("too many columns for 32-bit column indices");
  }
}

SparseMatrix SparseMatrix::from_rows(std::size_t rows, std::size_t cols,
                                     std::vector<std::vector<SparseEntry>> entries) {
  if (entries.size() != rows) {
    throw DimensionError("expected " + std::to_string(rows) + " rows, got " +
                         std::to_string(entries.size()));
  }
  SparseMatrix m(rows, cols);
  std::size_t total = 0;
  for (const auto& r : entries) total += r.size();
  m.col_idx_.reserve(total);
  m.values_.reserve(total);
  for (std::size_t i = 0; i < rows; ++i) {
    auto& r = entries[i];
    std::sort(r.begin(), r.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
    for (std::size_t e = 0; e < r.size(); ++e) {
      if (r[e].col >= cols) {
        throw IndexError("row " + std::to_string(i) + ": column " + std::to_string(r[e].col) +
                             " >= " + std::to_string(cols));
      }
      if (e > 0 && r[e].col == r[e - 1].col) {
        throw DimensionError("row " + std::to_string(i) + ": duplicate column " +
                             std::to_string(r[e].col));
      }
      m.col_idx_.push_back(r[e].col);
      m.values_.push_back(r[e].value);
    }
    m.row_ptr_[i + 1] = m.values_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::from_csr(std::size_t rows, std::size_t cols,
                                    std::vector<std::size_t> row_ptr,
                                    std::vector<std::uint32_t> col_idx, std::vector<double> values) {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 || row_ptr.back() != values.size() ||
      col_idx.size() != values.size()) {
    throw DimensionError("inconsistent CSR arrays");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (row_ptr[i] > row_ptr[i + 1]) throw DimensionError("row pointers not monotone");
    for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
      if (col_idx[e] >= cols) throw IndexError("column index out of range");
      if (e > row_ptr[i] && col_idx[e] <= col_idx[e - 1]) {
        throw DimensionError("row " + std::to_string(i) + ": columns not strictly increasing");
      }
    }
  }
  SparseMatrix m(rows, cols);
  m.row_ptr_ = std::move(row_ptr);
  m.col_idx_ = std::move(col_idx);
  m.values_ = std::move(values);
  return m;
}

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t cols, std::span<const double> dense) {
  if (dense.size() != rows * cols) throw DimensionError("dense size mismatch");
  SparseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = dense[i * cols + j];
      if (v != 0.0) {
        m.col_idx_.push_back(static_cast<std::uint32_t>(j));
        m.values_.push_back(v);
      }
    }
    m.row_ptr_[i + 1] = m.values_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n, double diagonal) {
  SparseMatrix m(n, n);
  m.col_idx_.resize(n);
  m.values_.assign(n, diagonal);
  for (std::size_t i = 0; i < n; ++i) {
    m.col_idx_[i] = static_cast<std::uint32_t>(i);
    m.row_ptr_[i + 1] = i + 1;
  }
  return m;
}

SparseMatrix::RowView SparseMatrix::row(std::size_t i) const {
  const std::size_t b = row_ptr_[i], e = row_ptr_[i + 1];
  return {std::span<const std::uint32_t>(col_idx_.data() + b, e - b),
          std::span<const double>(values_.data() + b, e - b)};
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw IndexError("matrix index out of range");
  const auto r = row(i);
  auto it = std::lower_bound(r.cols.begin(), r.cols.end(), static_cast<std::uint32_t>(j));
  if (it == r.cols.end() || *it != j) return 0.0;
  return r.values[static_cast<std::size_t>(it - r.cols.begin())];
}

double SparseMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (double v : row(i).values) s += v;
  return s;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(rows_ * cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) d[i * cols_ + col_idx_[e]] = values_[e];
  }
  return d;
}

void SparseMatrix::left_multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != rows_ || y.size() != cols_) throw DimensionError("left_multiply: size mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  const std::uint32_t* cols = col_idx_.data();
  const double* vals = values_.data();
  for (std::size_t i = 0; i < rows_; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) y[cols[e]] += xi * vals[e];
  }
}

void SparseMatrix::left_multiply_batch(std::span<const double> x, std::span<double> y,
                                       std::size_t batch) const {
  if (x.size() != rows_ * batch || y.size() != cols_ * batch) {
    throw DimensionError("left_multiply_batch: size mismatch");
  }
  std::fill(y.begin(), y.end(), 0.0);
  const std::uint32_t* cols = col_idx_.data();
  const double* vals = values_.data();
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* __restrict xi = x.data() + i * batch;
    for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
      const double a = vals[e];
      double* __restrict yj = y.data() + static_cast<std::size_t>(cols[e]) * batch;
      for (std::size_t t = 0; t < batch; ++t) yj[t] += a * xi[t];
    }
  }
}

void SparseMatrix::multiply_batch(std::span<const double> x, std::span<double> y,
                                  std::size_t batch) const {
  if (x.size() != cols_ * batch || y.size() != rows_ * batch) {
    throw DimensionError("multiply_batch: size mismatch");
  }
  const std::uint32_t* cols = col_idx_.data();
  const double* vals = values_.data();
  for (std::size_t i = 0; i < rows_; ++i) {
    double* __restrict yi = y.data() + i * batch;
    std::fill(yi, yi + batch, 0.0);
    for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
      const double a = vals[e];
      const double* __restrict xj = x.data() + static_cast<std::size_t>(cols[e]) * batch;
      for (std::size_t t = 0; t < batch; ++t) yi[t] += a * xj[t];
    }
  }
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(cols_, rows_);
  std::vector<std::size_t> counts(cols_ + 1, 0);
  for (std::uint32_t c : col_idx_) ++counts[c + 1];
  for (std::size_t j = 0; j < cols_; ++j) counts[j + 1] += counts[j];
  t.row_ptr_ = counts;
  t.col_idx_.resize(values_.size());
  t.values_.resize(values_.size());
  // Rows are visited in order, so each transposed row comes out sorted.
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
      const std::size_t slot = counts[col_idx_[e]]++;
      t.col_idx_[slot] = static_cast<std::uint32_t>(i);
      t.values_[slot] = values_[e];
    }
  }
  return t;
}

}  // namespace pfplace
