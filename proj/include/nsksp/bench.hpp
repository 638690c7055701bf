#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsksp/preconditioner.hpp"
#include "nsksp/problems.hpp"
#include "nsksp/solve_types.hpp"

namespace nsksp {

// ---------------------------------------------------------------------------
// Cost model

/// Modeled floating-point operations of one iteration, where `ell` is the
/// average number of nonzeros per row and `k` the (inner) iteration index:
///   gmres      2n(ell + 2k + 2)
///   bicgstab   4n(ell + 5)
///   tfqmr      4n(ell + 7)
///   qmrcgstab  4n(ell + 7)
/// Rounded to the nearest integer when ell is fractional. Throws
/// Error(InvalidArgument) unless n, ell, k >= 1.
std::int64_t flop_model(SolverKind solver, std::int64_t n, double ell, int k);
std::int64_t flop_model(std::string_view solver, std::int64_t n, double ell,
                        int k);

/// Vectors stored besides the matrix: gmres k+5, tfqmr 8, bicgstab 10,
/// qmrcgstab 13.
int stored_vectors(SolverKind solver, int k);

struct OpsPerIteration {
  int matvecs;
  int axpys;
  int dots;
};

/// Per-iteration kernel counts of the cost table; k is the GMRES inner index.
OpsPerIteration modeled_ops(SolverKind solver, int k);

/// Sum of the per-iteration model over a run of `iterations` iterations
/// (GMRES inner index cycles through 1..restart).
struct ModeledTotals {
  std::int64_t axpys = 0;
  std::int64_t dots = 0;
  std::int64_t flops = 0;
};
ModeledTotals modeled_totals(SolverKind solver, std::int64_t n, double ell,
                             int iterations, int restart);

// ---------------------------------------------------------------------------
// Cases

enum class RhsKind {
  /// b = A x_exact with the generator's pattern (files: x_exact = ones).
  Manufactured,
  /// b = (1, .., 1); not necessarily in the range of A.
  Ones,
};

struct MatrixSource {
  std::optional<std::filesystem::path> matrix_path;
  std::optional<std::filesystem::path> rhs_path;
  std::optional<ProblemSpec> problem;
  RhsKind rhs = RhsKind::Manufactured;

  std::string label() const;
};

struct CaseConfig {
  std::string case_id;
  MatrixSource source;
  SolverKind solver = SolverKind::Gmres;
  PrecondConfig precond;
  SolveOptions options;
};

struct CaseRecord {
  CaseConfig config;
  std::string matrix;
  index_t n = 0;
  index_t nnz = 0;
  SolveReport report;
  /// Non-empty when loading, setup or the solve threw; report is then
  /// default-initialized.
  std::string error;
  std::int64_t predicted_flops = 0;
  /// Matvecs spent by the iteration when it converged, else -1.
  std::int64_t matvecs_to_converge = -1;
  double measured_axpys_per_iter = 0.0;
  double measured_dots_per_iter = 0.0;
  double modeled_axpys_per_iter = 0.0;
  double modeled_dots_per_iter = 0.0;
  /// ||x - x_exact||_inf / ||x_exact||_inf when an exact solution is known.
  std::optional<double> solution_error;
  /// False when the case ran concurrently with others.
  bool timing_comparable = true;

  bool ok() const noexcept { return error.empty(); }
  bool converged() const noexcept { return ok() && succeeded(report.status); }
  std::string status_label() const;
  /// Matvecs per iteration equal the modeled count exactly and axpy/dot
  /// averages lie within +-2 of the model.
  bool audit_passes() const noexcept;
};

/// Loads or generates the system, builds M (timed as setup), solves, and
/// audits counters against the cost model. Never throws for per-case
/// failures; they land in `error`.
CaseRecord run_case(const CaseConfig& config);

/// Throws Error(ConfigError) on duplicate case ids before running anything.
/// Records are returned sorted by case_id.
std::vector<CaseRecord> run_suite(const std::vector<CaseConfig>& configs,
                                  bool parallel = false);

/// Parses a suite description (JSON). Throws Error(ConfigError).
std::vector<CaseConfig> parse_suite_config(std::istream& in);
std::vector<CaseConfig> load_suite_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Scalability

struct SweepRow {
  int n_per_dim = 0;
  index_t n = 0;
  int iterations = 0;
  std::int64_t matvecs = 0;
  double seconds = 0.0;
  std::string status;
  bool ok = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Least-squares slope of log(seconds) against log(n) over successful rows.
  double slope = 0.0;
  /// iterations[i+1] / iterations[i] for adjacent successful rows.
  std::vector<double> iteration_ratios;
};

/// Requires at least three strictly increasing sizes (unknowns per axis).
SweepResult scalability_sweep(ProblemFamily family, std::vector<int> sizes,
                              SolverKind solver, const PrecondConfig& precond,
                              const SolveOptions& options = {});
/// Same, with every field but n_per_dim taken from `base`.
SweepResult scalability_sweep(const ProblemSpec& base, std::vector<int> sizes,
                              SolverKind solver, const PrecondConfig& precond,
                              const SolveOptions& options = {});

double loglog_slope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// CSV output. Floats use the shortest representation that round-trips.

std::string format_double(double v);

inline constexpr const char* kHistoryHeader = "matvecs,relres";
inline constexpr const char* kSummaryHeader =
    "case_id,matrix,n,nnz,solver,precond,status,iterations,matvecs,relres,"
    "true_relres,setup_s,solve_s,predicted_flops";
inline constexpr const char* kSweepHeader = "n,iterations,matvecs,seconds";

void emit_history_csv(const CaseRecord& record, std::ostream& out);
void emit_history_csv(const CaseRecord& record,
                      const std::filesystem::path& path);
void emit_summary_csv(const std::vector<CaseRecord>& records, std::ostream& out);
void emit_summary_csv(const std::vector<CaseRecord>& records,
                      const std::filesystem::path& path);
void emit_sweep_csv(const SweepResult& sweep, std::ostream& out);

}  // namespace nsksp
