#include "nsksp/dense_lu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nsksp/error.hpp"

namespace nsksp {

DenseLu::DenseLu(const CsrMatrix& a) : n_(a.n_rows()), lu_(a.to_dense()) {
  if (!a.square())
    throw Error(ErrorCode::DimensionMismatch, "dense LU needs a square matrix");
  const std::size_t n = static_cast<std::size_t>(n_);
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), 0);
  double amax = 0.0;
  for (double v : lu_) amax = std::max(amax, std::abs(v));
  const double tiny = 1e-14 * amax;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_[i * n + k]) > std::abs(lu_[p * n + k])) p = i;
    if (!(std::abs(lu_[p * n + k]) > tiny))
      throw RowError(ErrorCode::SingularCoarse, k,
                     "coarse-level dense LU hit a zero pivot");
    if (p != k) {
      std::swap_ranges(lu_.begin() + k * n, lu_.begin() + (k + 1) * n,
                       lu_.begin() + p * n);
      std::swap(perm_[k], perm_[p]);
    }
    const double piv = lu_[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      double& lik = lu_[i * n + k];
      if (lik == 0.0) continue;
      lik /= piv;
      for (std::size_t j = k + 1; j < n; ++j) lu_[i * n + j] -= lik * lu_[k * n + j];
    }
  }
}

void DenseLu::solve(std::span<const double> b, std::span<double> x) const {
  const std::size_t n = static_cast<std::size_t>(n_);
  if (b.size() != n || x.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "dense LU solve");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) y[i] -= lu_[i * n + j] * y[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) y[i] -= lu_[i * n + j] * y[j];
    y[i] /= lu_[i * n + i];
  }
  std::copy(y.begin(), y.end(), x.begin());
}

}  // namespace nsksp
