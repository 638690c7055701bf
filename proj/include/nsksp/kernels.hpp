#pragma once

#include <cstdint>
#include <span>

#include "nsksp/csr_matrix.hpp"

namespace nsksp {

/// Operation tally for one solve. Owned by the caller and passed into the
/// kernels; a null pointer means "do not count".
struct OpCounters {
  std::int64_t matvecs = 0;
  std::int64_t axpys = 0;
  std::int64_t dots = 0;
  std::int64_t scales = 0;
  std::int64_t precond_applies = 0;
  /// Arnoldi re-orthogonalization work, kept apart from the dots/axpys of
  /// the plain modified Gram-Schmidt sweep.
  std::int64_t reorth_dots = 0;
  std::int64_t reorth_axpys = 0;
  /// 2*nnz per matvec, 2n per dot/axpy, n per scale.
  std::int64_t modeled_flops = 0;

  void reset() noexcept { *this = OpCounters{}; }
};

/// Field-wise difference, used to split off the work of a partial iteration.
OpCounters operator-(const OpCounters& a, const OpCounters& b) noexcept;

/// y = A x.
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
          OpCounters* counters = nullptr);
Vector spmv(const CsrMatrix& a, std::span<const double> x,
            OpCounters* counters = nullptr);

/// r = b - A x; counted as one matvec plus one axpy.
void residual(const CsrMatrix& a, std::span<const double> x,
              std::span<const double> b, std::span<double> r,
              OpCounters* counters = nullptr);

double dot(std::span<const double> v, std::span<const double> w,
           OpCounters* counters = nullptr);

/// Counted as one inner product.
double norm2(std::span<const double> v, OpCounters* counters = nullptr);

/// y <- alpha x + y.
void axpy(double alpha, std::span<const double> x, std::span<double> y,
          OpCounters* counters = nullptr);

/// y <- x + beta y. Counted as one axpy.
void xpay(std::span<const double> x, double beta, std::span<double> y,
          OpCounters* counters = nullptr);

/// x <- alpha x.
void scale(double alpha, std::span<double> x, OpCounters* counters = nullptr);

double norm_inf(std::span<const double> v) noexcept;

}  // namespace nsksp
