#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nsksp {

using index_t = std::int32_t;
using Vector = std::vector<double>;

struct Triplet {
  index_t row;
  index_t col;
  double value;
};

/// Compressed sparse row matrix. Immutable once constructed; the
/// constructor validates every structural invariant.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Takes ownership of the three arrays. Throws `Error` if row_ptr is not a
  /// valid prefix sum, columns within a row are not strictly increasing or
  /// out of range, or any value is non-finite.
  CsrMatrix(index_t n_rows, index_t n_cols, std::vector<index_t> row_ptr,
            std::vector<index_t> col_idx, std::vector<double> values);

  /// Duplicates are summed; an entry that cancels to zero stays stored.
  static CsrMatrix from_triplets(std::span<const Triplet> triplets,
                                 index_t n_rows, index_t n_cols);

  static CsrMatrix identity(index_t n);

  index_t n_rows() const noexcept { return n_rows_; }
  index_t n_cols() const noexcept { return n_cols_; }
  index_t nnz() const noexcept { return static_cast<index_t>(values_.size()); }
  bool square() const noexcept { return n_rows_ == n_cols_; }

  std::span<const index_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const index_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const index_t> row_cols(index_t i) const noexcept {
    return {col_idx_.data() + row_ptr_[i],
            static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
  }
  std::span<const double> row_values(index_t i) const noexcept {
    return {values_.data() + row_ptr_[i],
            static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
  }

  /// Stored value at (i, j), 0 when (i, j) is outside the pattern.
  double at(index_t i, index_t j) const noexcept;

  /// Position of (i, j) in the value array, or -1.
  index_t find(index_t i, index_t j) const noexcept;

  /// Diagonal as a dense vector; missing diagonal entries read as 0.
  Vector diagonal() const;

  /// Average number of stored entries per row (nnz / n_rows).
  double avg_row_nnz() const noexcept;

  CsrMatrix transpose() const;

  /// Row-major dense copy, for oracles and small coarse solves.
  std::vector<double> to_dense() const;

  bool is_structurally_equal(const CsrMatrix& other) const noexcept;
  bool operator==(const CsrMatrix& other) const noexcept;

 private:
  index_t n_rows_ = 0;
  index_t n_cols_ = 0;
  std::vector<index_t> row_ptr_{0};
  std::vector<index_t> col_idx_;
  std::vector<double> values_;
};

/// C = A * B.
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

/// C = alpha * A + beta * B over the union pattern.
CsrMatrix add(double alpha, const CsrMatrix& a, double beta,
              const CsrMatrix& b);

/// Frobenius norm of A - B.
double frobenius_distance(const CsrMatrix& a, const CsrMatrix& b);

/// Max absolute row sum.
double norm_inf(const CsrMatrix& a);

}  // namespace nsksp
