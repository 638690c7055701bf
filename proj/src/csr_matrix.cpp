#include "nsksp/csr_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nsksp/error.hpp"

namespace nsksp {

CsrMatrix::CsrMatrix(index_t n_rows, index_t n_cols,
                     std::vector<index_t> row_ptr,
                     std::vector<index_t> col_idx, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (n_rows < 0 || n_cols < 0)
    throw Error(ErrorCode::InvalidArgument, "negative matrix dimension");
  if (row_ptr_.size() != static_cast<std::size_t>(n_rows) + 1)
    throw Error(ErrorCode::DimensionMismatch, "row_ptr length != n_rows + 1");
  if (col_idx_.size() != values_.size())
    throw Error(ErrorCode::DimensionMismatch,
                "col_idx and values differ in length");
  if (row_ptr_.front() != 0 ||
      row_ptr_.back() != static_cast<index_t>(values_.size()))
    throw Error(ErrorCode::InvalidArgument, "row_ptr must span [0, nnz]");
  for (index_t i = 0; i < n_rows_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i])
      throw Error(ErrorCode::InvalidArgument, "row_ptr is decreasing");
    for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const index_t j = col_idx_[k];
      if (j < 0 || j >= n_cols_)
        throw Error(ErrorCode::IndexOutOfRange,
                    "column " + std::to_string(j) + " in row " +
                        std::to_string(i));
      if (k > row_ptr_[i] && col_idx_[k - 1] >= j)
        throw Error(ErrorCode::InvalidArgument,
                    "columns not strictly increasing in row " +
                        std::to_string(i));
      if (!std::isfinite(values_[k]))
        throw Error(ErrorCode::NonFiniteValue,
                    "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                        ")");
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(std::span<const Triplet> triplets,
                                   index_t n_rows, index_t n_cols) {
  if (n_rows <= 0 || n_cols <= 0)
    throw Error(ErrorCode::InvalidArgument, "dimensions must be positive");
  std::vector<index_t> count(static_cast<std::size_t>(n_rows) + 1, 0);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
      throw Error(ErrorCode::IndexOutOfRange,
                  "triplet (" + std::to_string(t.row) + ", " +
                      std::to_string(t.col) + ")");
    if (!std::isfinite(t.value))
      throw Error(ErrorCode::NonFiniteValue,
                  "triplet (" + std::to_string(t.row) + ", " +
                      std::to_string(t.col) + ")");
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // Bucket by row, then sort each row by column and merge duplicates. The
  // sort key is (col, value) so the summation order, and hence the result,
  // does not depend on the input ordering.
  std::vector<std::pair<index_t, double>> bucket(triplets.size());
  {
    std::vector<index_t> next(count.begin(), count.end() - 1);
    for (const auto& t : triplets) bucket[next[t.row]++] = {t.col, t.value};
  }

  std::vector<index_t> row_ptr(static_cast<std::size_t>(n_rows) + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (index_t i = 0; i < n_rows; ++i) {
    auto first = bucket.begin() + count[i];
    auto last = bucket.begin() + count[i + 1];
    std::sort(first, last);
    for (auto it = first; it != last; ++it) {
      if (!col_idx.empty() && static_cast<index_t>(col_idx.size()) >
                                  row_ptr[i] && col_idx.back() == it->first) {
        values.back() += it->second;
      } else {
        col_idx.push_back(it->first);
        values.push_back(it->second);
      }
    }
    row_ptr[i + 1] = static_cast<index_t>(col_idx.size());
  }
  return CsrMatrix(n_rows, n_cols, std::move(row_ptr), std::move(col_idx),
                   std::move(values));
}

CsrMatrix CsrMatrix::identity(index_t n) {
  std::vector<index_t> row_ptr(static_cast<std::size_t>(n) + 1);
  std::vector<index_t> col_idx(n);
  std::iota(row_ptr.begin(), row_ptr.end(), 0);
  std::iota(col_idx.begin(), col_idx.end(), 0);
  return CsrMatrix(n, n, std::move(row_ptr), std::move(col_idx),
                   std::vector<double>(n, 1.0));
}

index_t CsrMatrix::find(index_t i, index_t j) const noexcept {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return -1;
  return row_ptr_[i] + static_cast<index_t>(it - cols.begin());
}

double CsrMatrix::at(index_t i, index_t j) const noexcept {
  const index_t k = find(i, j);
  return k < 0 ? 0.0 : values_[k];
}

Vector CsrMatrix::diagonal() const {
  Vector d(std::min(n_rows_, n_cols_), 0.0);
  for (index_t i = 0; i < static_cast<index_t>(d.size()); ++i) d[i] = at(i, i);
  return d;
}

double CsrMatrix::avg_row_nnz() const noexcept {
  return n_rows_ == 0 ? 0.0 : static_cast<double>(nnz()) / n_rows_;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<index_t> row_ptr(static_cast<std::size_t>(n_cols_) + 1, 0);
  for (index_t j : col_idx_) ++row_ptr[j + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<index_t> col_idx(col_idx_.size());
  std::vector<double> values(values_.size());
  std::vector<index_t> next(row_ptr.begin(), row_ptr.end() - 1);
  for (index_t i = 0; i < n_rows_; ++i) {
    for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const index_t dst = next[col_idx_[k]]++;
      col_idx[dst] = i;
      values[dst] = values_[k];
    }
  }
  return CsrMatrix(n_cols_, n_rows_, std::move(row_ptr), std::move(col_idx),
                   std::move(values));
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> dense(static_cast<std::size_t>(n_rows_) * n_cols_, 0.0);
  for (index_t i = 0; i < n_rows_; ++i)
    for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      dense[static_cast<std::size_t>(i) * n_cols_ + col_idx_[k]] = values_[k];
  return dense;
}

bool CsrMatrix::is_structurally_equal(const CsrMatrix& other) const noexcept {
  return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_ &&
         row_ptr_ == other.row_ptr_ && col_idx_ == other.col_idx_;
}

bool CsrMatrix::operator==(const CsrMatrix& other) const noexcept {
  return is_structurally_equal(other) && values_ == other.values_;
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.n_cols() != b.n_rows())
    throw Error(ErrorCode::DimensionMismatch, "multiply: inner dimensions");
  // Gustavson's row-by-row product with a dense accumulator.
  const index_t m = a.n_rows();
  const index_t n = b.n_cols();
  std::vector<index_t> row_ptr(static_cast<std::size_t>(m) + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<double> values;
  std::vector<index_t> marker(n, -1);
  std::vector<double> acc(n, 0.0);
  std::vector<index_t> cols;
  for (index_t i = 0; i < m; ++i) {
    cols.clear();
    const auto acols = a.row_cols(i);
    const auto avals = a.row_values(i);
    for (std::size_t p = 0; p < acols.size(); ++p) {
      const index_t k = acols[p];
      const auto bcols = b.row_cols(k);
      const auto bvals = b.row_values(k);
      for (std::size_t q = 0; q < bcols.size(); ++q) {
        const index_t j = bcols[q];
        if (marker[j] != i) {
          marker[j] = i;
          acc[j] = 0.0;
          cols.push_back(j);
        }
        acc[j] += avals[p] * bvals[q];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (index_t j : cols) {
      col_idx.push_back(j);
      values.push_back(acc[j]);
    }
    row_ptr[i + 1] = static_cast<index_t>(col_idx.size());
  }
  return CsrMatrix(m, n, std::move(row_ptr), std::move(col_idx),
                   std::move(values));
}

CsrMatrix add(double alpha, const CsrMatrix& a, double beta,
              const CsrMatrix& b) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols())
    throw Error(ErrorCode::DimensionMismatch, "add: shapes differ");
  std::vector<index_t> row_ptr(static_cast<std::size_t>(a.n_rows()) + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<double> values;
  for (index_t i = 0; i < a.n_rows(); ++i) {
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    const auto bc = b.row_cols(i);
    const auto bv = b.row_values(i);
    std::size_t p = 0, q = 0;
    while (p < ac.size() || q < bc.size()) {
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        col_idx.push_back(ac[p]);
        values.push_back(alpha * av[p++]);
      } else if (p == ac.size() || bc[q] < ac[p]) {
        col_idx.push_back(bc[q]);
        values.push_back(beta * bv[q++]);
      } else {
        col_idx.push_back(ac[p]);
        values.push_back(alpha * av[p++] + beta * bv[q++]);
      }
    }
    row_ptr[i + 1] = static_cast<index_t>(col_idx.size());
  }
  return CsrMatrix(a.n_rows(), a.n_cols(), std::move(row_ptr),
                   std::move(col_idx), std::move(values));
}

double frobenius_distance(const CsrMatrix& a, const CsrMatrix& b) {
  const CsrMatrix d = add(1.0, a, -1.0, b);
  double s = 0.0;
  for (double v : d.values()) s += v * v;
  return std::sqrt(s);
}

double norm_inf(const CsrMatrix& a) {
  double m = 0.0;
  for (index_t i = 0; i < a.n_rows(); ++i) {
    double s = 0.0;
    for (double v : a.row_values(i)) s += std::abs(v);
    m = std::max(m, s);
  }
  return m;
}

}  // namespace nsksp
