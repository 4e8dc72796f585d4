#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pfplace {

struct SparseEntry {
  std::uint32_t col = 0;
  double value = 0.0;
};

// Compressed sparse row matrix with sorted, distinct column indices per row.
class SparseMatrix {
 public:
  struct RowView {
    std::span<const std::uint32_t> cols;
    std::span<const double> values;
    std::size_t size() const { return cols.size(); }
  };

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  // Rows may arrive unsorted; duplicates within a row raise DimensionError.
  static SparseMatrix from_rows(std::size_t rows, std::size_t cols,
                                std::vector<std::vector<SparseEntry>> entries);
  static SparseMatrix from_csr(std::size_t rows, std::size_t cols,
                               std::vector<std::size_t> row_ptr,
                               std::vector<std::uint32_t> col_idx, std::vector<double> values);
  static SparseMatrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> dense);
  static SparseMatrix identity(std::size_t n, double diagonal = 1.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  RowView row(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;
  double row_sum(std::size_t i) const;

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  std::vector<double> to_dense() const;

  // y = x A (row vector times matrix); y is overwritten.
  void left_multiply(std::span<const double> x, std::span<double> y) const;

  // Batched y = x A for `batch` row vectors stored interleaved by state:
  // x[i * batch + t] is entry i of vector t.
  void left_multiply_batch(std::span<const double> x, std::span<double> y, std::size_t batch) const;

  // Batched y = A x (gather form); same interleaved layout as above.
  void multiply_batch(std::span<const double> x, std::span<double> y, std::size_t batch) const;

  SparseMatrix transpose() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
};

}  // namespace pfplace
