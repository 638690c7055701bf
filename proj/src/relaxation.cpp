#include "nsksp/relaxation.hpp"

#include "nsksp/error.hpp"

namespace nsksp {

Vector checked_diagonal(const CsrMatrix& a) {
  if (!a.square())
    throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
  Vector d = a.diagonal();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] == 0.0)
      throw RowError(ErrorCode::ZeroDiagonal, i, "zero diagonal entry");
  return d;
}

void jacobi_apply(std::span<const double> diag, std::span<const double> v,
                  std::span<double> w) {
  if (diag.size() != v.size() || v.size() != w.size())
    throw Error(ErrorCode::DimensionMismatch, "jacobi_apply");
  for (std::size_t i = 0; i < v.size(); ++i) w[i] = v[i] / diag[i];
}

void gs_sor_apply(const CsrMatrix& a, double omega, std::span<const double> v,
                  std::span<double> w) {
  if (!(omega > 0.0 && omega < 2.0))
    throw Error(ErrorCode::InvalidArgument, "SOR weight must lie in (0, 2)");
  if (static_cast<std::size_t>(a.n_rows()) != v.size() || v.size() != w.size())
    throw Error(ErrorCode::DimensionMismatch, "gs_sor_apply");
  for (index_t i = 0; i < a.n_rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    double s = v[i];
    double d = 0.0;
    for (std::size_t k = 0; k < cols.size() && cols[k] <= i; ++k) {
      if (cols[k] == i)
        d = vals[k];
      else
        s -= vals[k] * w[cols[k]];
    }
    if (d == 0.0) throw RowError(ErrorCode::ZeroDiagonal, i, "zero diagonal entry");
    w[i] = omega * s / d;
  }
}

void sor_sweep(const CsrMatrix& a, std::span<const double> diag, double omega,
               std::span<const double> b, std::span<double> x, bool forward) {
  const index_t n = a.n_rows();
  const auto relax = [&](index_t i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    double s = b[i];
    for (std::size_t k = 0; k < cols.size(); ++k)
      if (cols[k] != i) s -= vals[k] * x[cols[k]];
    x[i] = (1.0 - omega) * x[i] + omega * s / diag[i];
  };
  if (forward) {
    for (index_t i = 0; i < n; ++i) relax(i);
  } else {
    for (index_t i = n; i-- > 0;) relax(i);
  }
}

}  // namespace nsksp
