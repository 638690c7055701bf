#pragma once

#include <span>
#include <vector>

#include "nsksp/csr_matrix.hpp"

namespace nsksp {

/// LU with partial pivoting of a small dense matrix. Used for the coarsest
/// multigrid level.
class DenseLu {
 public:
  DenseLu() = default;

  /// Throws Error(SingularCoarse) when a pivot falls below 1e-14 * max|a_ij|.
  explicit DenseLu(const CsrMatrix& a);

  index_t size() const noexcept { return n_; }

  /// Solves A x = b; b and x may alias.
  void solve(std::span<const double> b, std::span<double> x) const;

 private:
  index_t n_ = 0;
  std::vector<double> lu_;
  std::vector<index_t> perm_;
};

}  // namespace nsksp
