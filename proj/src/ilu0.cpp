#include "nsksp/ilu0.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nsksp/error.hpp"

namespace nsksp {

IluFactors ilu0_factor(const CsrMatrix& a, Ilu0Options opts) {
  if (!a.square())
    throw Error(ErrorCode::DimensionMismatch, "ILU(0) needs a square matrix");
  const index_t n = a.n_rows();
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  std::vector<double> lu(a.values().begin(), a.values().end());

  std::vector<index_t> diag(n);
  for (index_t i = 0; i < n; ++i) {
    diag[i] = a.find(i, i);
    if (diag[i] < 0)
      throw RowError(ErrorCode::ZeroDiagonal, i,
                     "diagonal entry missing from the pattern");
  }

  IluFactors f;
  std::vector<index_t> pos(n, -1);
  for (index_t i = 0; i < n; ++i) {
    for (index_t k = rp[i]; k < rp[i + 1]; ++k) pos[ci[k]] = k;

    for (index_t k = rp[i]; k < diag[i]; ++k) {
      const index_t j = ci[k];
      lu[k] /= lu[diag[j]];
      const double lij = lu[k];
      for (index_t q = diag[j] + 1; q < rp[j + 1]; ++q) {
        const index_t p = pos[ci[q]];
        if (p >= 0) lu[p] -= lij * lu[q];
      }
    }

    double row_max = 0.0;
    for (double v : a.row_values(i)) row_max = std::max(row_max, std::abs(v));
    const double floor = 1e-14 * row_max;
    double& pivot = lu[diag[i]];
    if (!(std::abs(pivot) >= floor) || pivot == 0.0) {
      if (!opts.pivot_shift)
        throw RowError(ErrorCode::ZeroPivot, i, "ILU(0) pivot vanished");
      pivot = (pivot < 0.0 ? -1.0 : 1.0) * (floor > 0.0 ? floor : 1e-14);
      ++f.shifted_pivots;
    }

    for (index_t k = rp[i]; k < rp[i + 1]; ++k) pos[ci[k]] = -1;
  }

  std::vector<index_t> lp(n + 1, 0), up(n + 1, 0);
  std::vector<index_t> lc, uc;
  std::vector<double> lv, uv;
  for (index_t i = 0; i < n; ++i) {
    for (index_t k = rp[i]; k < rp[i + 1]; ++k) {
      if (ci[k] < i) {
        lc.push_back(ci[k]);
        lv.push_back(lu[k]);
      } else {
        uc.push_back(ci[k]);
        uv.push_back(lu[k]);
      }
    }
    lp[i + 1] = static_cast<index_t>(lc.size());
    up[i + 1] = static_cast<index_t>(uc.size());
  }
  f.lower = CsrMatrix(n, n, std::move(lp), std::move(lc), std::move(lv));
  f.upper = CsrMatrix(n, n, std::move(up), std::move(uc), std::move(uv));
  return f;
}

void ilu_apply(const IluFactors& f, std::span<const double> v,
               std::span<double> w) {
  const index_t n = f.lower.n_rows();
  if (v.size() != static_cast<std::size_t>(n) || w.size() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "ilu_apply");
  for (index_t i = 0; i < n; ++i) {
    double s = v[i];
    const auto cols = f.lower.row_cols(i);
    const auto vals = f.lower.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) s -= vals[k] * w[cols[k]];
    w[i] = s;
  }
  for (index_t i = n; i-- > 0;) {
    const auto cols = f.upper.row_cols(i);
    const auto vals = f.upper.row_values(i);
    double s = w[i];
    for (std::size_t k = 1; k < cols.size(); ++k) s -= vals[k] * w[cols[k]];
    w[i] = s / vals[0];
  }
}

}  // namespace nsksp
