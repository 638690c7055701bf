#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "nsksp/amg.hpp"
#include "nsksp/csr_matrix.hpp"
#include "nsksp/ilu0.hpp"

namespace nsksp {

enum class PrecondKind {
  Identity,
  Jacobi,
  GaussSeidel,
  Sor,
  Ilu0,
  SaAmg,
  ClassicalAmg,
};

/// CLI identifiers: none, jacobi, gs, sor, ilu0, sa-amg, c-amg.
std::string_view to_string(PrecondKind kind) noexcept;
std::optional<PrecondKind> parse_precond_kind(std::string_view id) noexcept;

struct PrecondConfig {
  PrecondKind kind = PrecondKind::Identity;
  double omega = 1.0;
  bool ilu_pivot_shift = false;
  AmgParams amg;
};

/// Right preconditioner M: apply(v) ~= M^{-1} v. Built once for a fixed
/// matrix; apply is const and may run concurrently on distinct vectors.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;

  virtual PrecondKind kind() const noexcept = 0;
  virtual index_t size() const noexcept = 0;

  /// w = M^{-1} v. v and w must not alias.
  virtual void apply(std::span<const double> v, std::span<double> w) const = 0;

  double setup_seconds() const noexcept { return setup_seconds_; }
  void set_setup_seconds(double s) noexcept { setup_seconds_ = s; }

 private:
  double setup_seconds_ = 0.0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  explicit IdentityPreconditioner(index_t n) : n_(n) {}
  PrecondKind kind() const noexcept override { return PrecondKind::Identity; }
  index_t size() const noexcept override { return n_; }
  void apply(std::span<const double> v, std::span<double> w) const override;

 private:
  index_t n_;
};

class JacobiPreconditioner final : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const CsrMatrix& a);
  PrecondKind kind() const noexcept override { return PrecondKind::Jacobi; }
  index_t size() const noexcept override {
    return static_cast<index_t>(diag_.size());
  }
  void apply(std::span<const double> v, std::span<double> w) const override;

 private:
  Vector diag_;
};

/// One forward SOR sweep from a zero guess; omega = 1 reports GaussSeidel.
class SorPreconditioner final : public Preconditioner {
 public:
  SorPreconditioner(const CsrMatrix& a, double omega);
  PrecondKind kind() const noexcept override {
    return omega_ == 1.0 ? PrecondKind::GaussSeidel : PrecondKind::Sor;
  }
  index_t size() const noexcept override { return a_.n_rows(); }
  double omega() const noexcept { return omega_; }
  void apply(std::span<const double> v, std::span<double> w) const override;

 private:
  CsrMatrix a_;
  double omega_;
};

class Ilu0Preconditioner final : public Preconditioner {
 public:
  explicit Ilu0Preconditioner(const CsrMatrix& a, Ilu0Options opts = {});
  PrecondKind kind() const noexcept override { return PrecondKind::Ilu0; }
  index_t size() const noexcept override { return factors_.lower.n_rows(); }
  const IluFactors& factors() const noexcept { return factors_; }
  void apply(std::span<const double> v, std::span<double> w) const override;

 private:
  IluFactors factors_;
};

class AmgPreconditioner final : public Preconditioner {
 public:
  AmgPreconditioner(const CsrMatrix& a, Coarsening coarsening,
                    const AmgParams& params = {});
  PrecondKind kind() const noexcept override {
    return hierarchy_.coarsening() == Coarsening::Classical
               ? PrecondKind::ClassicalAmg
               : PrecondKind::SaAmg;
  }
  index_t size() const noexcept override {
    return hierarchy_.levels().front().a.n_rows();
  }
  const AmgHierarchy& hierarchy() const noexcept { return hierarchy_; }
  void apply(std::span<const double> v, std::span<double> w) const override;

 private:
  AmgHierarchy hierarchy_;
};

/// Builds the preconditioner and records its setup wall time.
std::unique_ptr<Preconditioner> make_preconditioner(const CsrMatrix& a,
                                                    const PrecondConfig& cfg);

}  // namespace nsksp
