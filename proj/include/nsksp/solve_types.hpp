#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "nsksp/csr_matrix.hpp"
#include "nsksp/kernels.hpp"

namespace nsksp {

enum class SolverKind { Gmres, Bicgstab, Tfqmr, Qmrcgstab };

std::string_view to_string(SolverKind kind) noexcept;
std::optional<SolverKind> parse_solver_kind(std::string_view id) noexcept;

enum class SolveStatus { Converged, MaxIter, Breakdown, Stagnated, ZeroRhs };

std::string_view to_string(SolveStatus status) noexcept;

/// Converged or ZeroRhs (x = 0 solves b = 0 exactly).
inline bool succeeded(SolveStatus s) noexcept {
  return s == SolveStatus::Converged || s == SolveStatus::ZeroRhs;
}

struct SolveOptions {
  double rtol = 1e-10;
  int max_iter = 10000;
  /// GMRES only.
  int restart = 30;
  /// Empty means the zero vector.
  Vector x0;
  double breakdown_tol = 1e-14;
  /// Bi-Lanczos methods report Stagnated when the best relative residual
  /// improved by less than `stagnation_tol` (relative) over this many
  /// iterations. GMRES uses one restart cycle as its window.
  int stagnation_window = 1000;
  double stagnation_tol = 1e-8;

  /// Throws Error(InvalidArgument) on rtol <= 0, restart < 1, max_iter < 1
  /// or a wrongly sized x0.
  void validate(index_t n) const;
};

struct HistoryPoint {
  std::int64_t matvecs;
  double relres;
};

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIter;
  int iterations = 0;
  /// One row per iteration keyed by cumulative iteration matvecs; the first
  /// row is the initial residual at 0 matvecs.
  std::vector<HistoryPoint> history;
  /// ||b - A x|| / ||b|| evaluated explicitly at exit.
  double true_relres = 0.0;
  /// Kernel work inside the iteration loop.
  OpCounters counters;
  /// Matvecs spent on explicit residual evaluations (non-zero x0, converged
  /// confirmations, exit check). Not part of `counters`.
  std::int64_t check_matvecs = 0;
  /// Work of an iteration abandoned part-way by a breakdown. Kept out of
  /// `counters` so those describe completed iterations only.
  OpCounters aborted;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;

  double recurrence_relres() const noexcept {
    return history.empty() ? 0.0 : history.back().relres;
  }
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

}  // namespace nsksp
