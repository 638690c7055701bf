#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nsksp/csr_matrix.hpp"
#include "nsksp/kernels.hpp"

namespace nsksp {

/// y = Op(x), e.g. A M^{-1} x.
using LinearOperator =
    std::function<void(std::span<const double>, std::span<double>)>;

/// Incremental Givens QR of an (k+1)-by-k upper Hessenberg matrix against
/// beta e_1.
class HessenbergLsq {
 public:
  HessenbergLsq() = default;
  explicit HessenbergLsq(double beta) : g_{beta} {}

  /// Appends column k (0-based) with k+2 entries h_0..h_{k+1}, rotates it
  /// and returns the least-squares residual min ||beta e_1 - H z||.
  double add_column(std::span<const double> h);

  int columns() const noexcept { return static_cast<int>(r_.size()); }
  double residual_norm() const noexcept;

  /// Back substitution on the rotated triangle.
  Vector solve() const;

  /// Omega^T (0, .., 0, g_k): coordinates of the residual in the basis
  /// q_1..q_{k+1}.
  Vector residual_coefficients() const;

 private:
  std::vector<std::vector<double>> r_;  // rotated columns, length k+1
  std::vector<double> cs_, sn_;
  std::vector<double> g_;
};

/// Orthonormal Krylov basis with its (unrotated) Hessenberg projection and
/// the running Givens least-squares state.
struct ArnoldiState {
  ArnoldiState() = default;
  /// q_1 = r0 / ||r0||, beta = ||r0||. r0 must be non-zero.
  explicit ArnoldiState(std::span<const double> r0,
                        OpCounters* counters = nullptr);

  std::vector<Vector> q;
  /// hessenberg[j] holds h_{0..j+1, j}.
  std::vector<std::vector<double>> hessenberg;
  HessenbergLsq lsq;
  double beta = 0.0;
  /// Scratch vector for the operator output.
  Vector work;

  int steps() const noexcept { return static_cast<int>(hessenberg.size()); }
};

enum class ArnoldiOutcome { Expanded, HappyBreakdown };

/// Modified Gram-Schmidt expansion by one column. A second pass runs when
/// the candidate norm drops below half its pre-orthogonalization norm.
/// HappyBreakdown when h_{k+1,k} <= breakdown_tol * ||Op q_k||; in that case
/// no basis vector is appended.
ArnoldiOutcome arnoldi_step(const LinearOperator& op, ArnoldiState& state,
                            double breakdown_tol = 1e-14,
                            OpCounters* counters = nullptr);

/// Rotates the newest Hessenberg column into the least-squares state and
/// returns the current residual norm.
double givens_lsq_update(ArnoldiState& state);

}  // namespace nsksp
