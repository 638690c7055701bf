#include "nsksp/preconditioner.hpp"

#include <algorithm>
#include <chrono>

#include "nsksp/error.hpp"
#include "nsksp/relaxation.hpp"

namespace nsksp {

std::string_view to_string(PrecondKind kind) noexcept {
  switch (kind) {
    case PrecondKind::Identity: return "none";
    case PrecondKind::Jacobi: return "jacobi";
    case PrecondKind::GaussSeidel: return "gs";
    case PrecondKind::Sor: return "sor";
    case PrecondKind::Ilu0: return "ilu0";
    case PrecondKind::SaAmg: return "sa-amg";
    case PrecondKind::ClassicalAmg: return "c-amg";
  }
  return "none";
}

std::optional<PrecondKind> parse_precond_kind(std::string_view id) noexcept {
  for (auto k : {PrecondKind::Identity, PrecondKind::Jacobi,
                 PrecondKind::GaussSeidel, PrecondKind::Sor, PrecondKind::Ilu0,
                 PrecondKind::SaAmg, PrecondKind::ClassicalAmg})
    if (to_string(k) == id) return k;
  if (id == "identity") return PrecondKind::Identity;
  return std::nullopt;
}

void IdentityPreconditioner::apply(std::span<const double> v,
                                   std::span<double> w) const {
  if (v.size() != w.size())
    throw Error(ErrorCode::DimensionMismatch, "identity apply");
  std::copy(v.begin(), v.end(), w.begin());
}

JacobiPreconditioner::JacobiPreconditioner(const CsrMatrix& a)
    : diag_(checked_diagonal(a)) {}

void JacobiPreconditioner::apply(std::span<const double> v,
                                 std::span<double> w) const {
  jacobi_apply(diag_, v, w);
}

SorPreconditioner::SorPreconditioner(const CsrMatrix& a, double omega)
    : a_(a), omega_(omega) {
  if (!(omega > 0.0 && omega < 2.0))
    throw Error(ErrorCode::InvalidArgument, "SOR weight must lie in (0, 2)");
  checked_diagonal(a_);
}

void SorPreconditioner::apply(std::span<const double> v,
                              std::span<double> w) const {
  gs_sor_apply(a_, omega_, v, w);
}

Ilu0Preconditioner::Ilu0Preconditioner(const CsrMatrix& a, Ilu0Options opts)
    : factors_(ilu0_factor(a, opts)) {}

void Ilu0Preconditioner::apply(std::span<const double> v,
                               std::span<double> w) const {
  ilu_apply(factors_, v, w);
}

AmgPreconditioner::AmgPreconditioner(const CsrMatrix& a, Coarsening coarsening,
                                     const AmgParams& params)
    : hierarchy_(coarsening == Coarsening::Classical ? rs_amg_setup(a, params)
                                                     : sa_amg_setup(a, params)) {}

void AmgPreconditioner::apply(std::span<const double> v,
                              std::span<double> w) const {
  hierarchy_.vcycle(v, w);
}

std::unique_ptr<Preconditioner> make_preconditioner(const CsrMatrix& a,
                                                    const PrecondConfig& cfg) {
  if (!a.square())
    throw Error(ErrorCode::DimensionMismatch, "preconditioner needs square A");
  const auto start = std::chrono::steady_clock::now();
  std::unique_ptr<Preconditioner> m;
  switch (cfg.kind) {
    case PrecondKind::Identity:
      m = std::make_unique<IdentityPreconditioner>(a.n_rows());
      break;
    case PrecondKind::Jacobi:
      m = std::make_unique<JacobiPreconditioner>(a);
      break;
    case PrecondKind::GaussSeidel:
      m = std::make_unique<SorPreconditioner>(a, 1.0);
      break;
    case PrecondKind::Sor:
      m = std::make_unique<SorPreconditioner>(a, cfg.omega);
      break;
    case PrecondKind::Ilu0:
      m = std::make_unique<Ilu0Preconditioner>(
          a, Ilu0Options{.pivot_shift = cfg.ilu_pivot_shift});
      break;
    case PrecondKind::SaAmg:
      m = std::make_unique<AmgPreconditioner>(a, Coarsening::SmoothedAggregation,
                                              cfg.amg);
      break;
    case PrecondKind::ClassicalAmg:
      m = std::make_unique<AmgPreconditioner>(a, Coarsening::Classical, cfg.amg);
      break;
  }
  const std::chrono::duration<double> dt =
      std::chrono::steady_clock::now() - start;
  m->set_setup_seconds(dt.count());
  return m;
}

}  // namespace nsksp
