#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsksp/csr_matrix.hpp"
#include "nsksp/dense_lu.hpp"

namespace nsksp {

enum class Coarsening { SmoothedAggregation, Classical };

struct AmgParams {
  /// Smoothed aggregation strength threshold.
  double theta = 0.08;
  /// Classical (Ruge-Stuben) strong threshold.
  double strong_threshold = 0.25;
  int max_levels = 20;
  index_t coarse_size_limit = 64;
  int pre_sweeps = 1;
  int post_sweeps = 1;
  /// Power iterations used to estimate rho(D^{-1} A) for prolongator
  /// smoothing.
  int power_iterations = 10;
};

struct AmgLevel {
  CsrMatrix a;
  Vector diag;
  /// Prolongator to the next level and its transpose; empty on the coarsest.
  CsrMatrix p;
  CsrMatrix r;
  /// Number of edges in the strength graph used to coarsen this level.
  index_t strength_nnz = 0;
};

/// Multigrid hierarchy with Galerkin coarse operators and a dense LU on the
/// coarsest level. Immutable once built.
class AmgHierarchy {
 public:
  Coarsening coarsening() const noexcept { return coarsening_; }
  const AmgParams& params() const noexcept { return params_; }
  const std::vector<AmgLevel>& levels() const noexcept { return levels_; }
  std::size_t num_levels() const noexcept { return levels_.size(); }

  /// Spectral radius estimates of D^{-1}A per smoothed-aggregation level,
  /// and the relative change of the estimate over the last power step.
  const std::vector<double>& spectral_estimates() const noexcept {
    return rho_;
  }
  const std::vector<double>& spectral_estimate_change() const noexcept {
    return rho_change_;
  }

  /// Levels that stopped coarsening before reaching coarse_size_limit.
  bool stalled() const noexcept { return stalled_; }

  /// One V(pre, post) cycle with zero initial guess: w ~= A^{-1} v.
  void vcycle(std::span<const double> v, std::span<double> w) const;

  /// Sum over levels of nnz(A_l) / nnz(A_0).
  double operator_complexity() const;

  /// Diagnostic table, header `level,n,nnz,avg_row_nnz`.
  void dump(std::ostream& out) const;

 private:
  friend AmgHierarchy sa_amg_setup(const CsrMatrix&, const AmgParams&);
  friend AmgHierarchy rs_amg_setup(const CsrMatrix&, const AmgParams&);

  void cycle(std::size_t level, std::span<const double> b,
             std::span<double> x) const;

  Coarsening coarsening_ = Coarsening::SmoothedAggregation;
  AmgParams params_;
  std::vector<AmgLevel> levels_;
  DenseLu coarse_;
  std::vector<double> rho_;
  std::vector<double> rho_change_;
  bool stalled_ = false;
};

/// Strength graph for aggregation: |a_ij| > theta sqrt(a_ii a_jj) on the
/// symmetrized magnitude matrix (|A| + |A^T|)/2, diagonal excluded. Values of
/// the returned pattern are 1.
CsrMatrix sa_strength(const CsrMatrix& a, double theta);

/// Greedy two-pass aggregation over a strength graph. Returns the aggregate
/// id of every node; ids are assigned in order of seed creation.
std::vector<index_t> greedy_aggregate(const CsrMatrix& strength,
                                      index_t& n_aggregates);

/// Strength graph for classical coarsening on (A + A^T)/2:
/// -a_ij >= threshold * max_{k != i}(-a_ik). Row i lists what i depends on.
CsrMatrix classical_strength(const CsrMatrix& a, double threshold);

/// First-pass Ruge-Stuben C/F splitting; true marks a C point. Ties are
/// broken by lowest index.
std::vector<bool> rs_cf_splitting(const CsrMatrix& strength);

/// Direct interpolation from strong C neighbours.
CsrMatrix direct_interpolation(const CsrMatrix& a, const CsrMatrix& strength,
                               const std::vector<bool>& is_coarse);

AmgHierarchy sa_amg_setup(const CsrMatrix& a, const AmgParams& params = {});
AmgHierarchy rs_amg_setup(const CsrMatrix& a, const AmgParams& params = {});

inline void amg_vcycle(const AmgHierarchy& h, std::span<const double> v,
                       std::span<double> w) {
  h.vcycle(v, w);
}

}  // namespace nsksp
