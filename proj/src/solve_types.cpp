#include "nsksp/solve_types.hpp"

#include "nsksp/error.hpp"

namespace nsksp {

std::string_view to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::Gmres: return "gmres";
    case SolverKind::Bicgstab: return "bicgstab";
    case SolverKind::Tfqmr: return "tfqmr";
    case SolverKind::Qmrcgstab: return "qmrcgstab";
  }
  return "gmres";
}

std::optional<SolverKind> parse_solver_kind(std::string_view id) noexcept {
  for (auto k : {SolverKind::Gmres, SolverKind::Bicgstab, SolverKind::Tfqmr,
                 SolverKind::Qmrcgstab})
    if (to_string(k) == id) return k;
  return std::nullopt;
}

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::Breakdown: return "Breakdown";
    case SolveStatus::Stagnated: return "Stagnated";
    case SolveStatus::ZeroRhs: return "ZeroRhs";
  }
  return "MaxIter";
}

void SolveOptions::validate(index_t n) const {
  if (!(rtol > 0.0)) throw Error(ErrorCode::InvalidArgument, "rtol must be > 0");
  if (restart < 1) throw Error(ErrorCode::InvalidArgument, "restart must be >= 1");
  if (max_iter < 1)
    throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (!(breakdown_tol >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "breakdown_tol must be >= 0");
  if (stagnation_window < 1)
    throw Error(ErrorCode::InvalidArgument, "stagnation_window must be >= 1");
  if (!x0.empty() && x0.size() != static_cast<std::size_t>(n))
    throw Error(ErrorCode::DimensionMismatch, "x0 length != n");
}

}  // namespace nsksp
