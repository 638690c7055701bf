#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "nsksp/csr_matrix.hpp"

namespace nsksp {

enum class ProblemFamily { Fd2d, Fd3d, FemP1_2d, HelmholtzNonuniform2d };
enum class ConvectionScheme { Centered, Upwind };
enum class BoundaryCondition { Dirichlet, Neumann };
enum class SolutionPattern { Ones, SinSin };

/// CLI identifiers: fd2d, fd3d, fem2d, helmholtz2d.
std::string_view to_string(ProblemFamily f) noexcept;
std::optional<ProblemFamily> parse_problem_family(std::string_view id) noexcept;
std::string_view to_string(ConvectionScheme s) noexcept;
std::optional<ConvectionScheme> parse_scheme(std::string_view id) noexcept;

/// Discretization of -lap(u) + c . grad(u) + d u on the unit square/cube.
/// `n_per_dim` counts unknowns per axis: interior nodes for Dirichlet
/// problems, all nodes (boundary included) for the Neumann Helmholtz grid.
struct ProblemSpec {
  ProblemFamily family = ProblemFamily::Fd2d;
  int n_per_dim = 32;
  /// One entry per axis; missing trailing entries read as 0.
  std::vector<double> c = {1.0, 1.0, 1.0};
  double d = 0.0;
  /// Unset: upwind when the cell Peclet number |c| h / 2 exceeds 1.
  std::optional<ConvectionScheme> scheme;
  /// Geometric spacing ratio for the nonuniform grid (>= 1).
  double stretch = 1.0;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  SolutionPattern pattern = SolutionPattern::SinSin;

  /// Throws Error(InvalidSpec).
  void validate() const;

  /// Defaults for each family: Dirichlet with c = (1,1[,1]), d = 0, except
  /// the Helmholtz analog which is Neumann with c = 0 and d = 1e-6.
  static ProblemSpec defaults(ProblemFamily family, int n_per_dim);
};

struct ProblemMeta {
  double h_min = 0.0;
  double h_max = 0.0;
  index_t nnz = 0;
  bool symmetric = false;
  ConvectionScheme scheme = ConvectionScheme::Centered;
};

struct GeneratedProblem {
  CsrMatrix a;
  Vector b;
  /// When present, b = A x_exact computed by spmv.
  std::optional<Vector> x_exact;
  /// Grid coordinates of each unknown (2 or 3 per row, row-major).
  std::vector<double> coords;
  int dim = 2;
  ProblemMeta meta;
};

GeneratedProblem fd_conv_diff_2d(const ProblemSpec& spec);
GeneratedProblem fd_conv_diff_3d(const ProblemSpec& spec);
GeneratedProblem fem_p1_conv_diff_2d(const ProblemSpec& spec);
GeneratedProblem helmholtz_fd_2d_nonuniform(const ProblemSpec& spec);

/// Dispatches on spec.family.
GeneratedProblem generate(const ProblemSpec& spec);

/// Samples the pattern at the given node coordinates and returns
/// (b, x_exact) with b = A x_exact.
std::pair<Vector, Vector> manufactured_rhs(const CsrMatrix& a,
                                           std::span<const double> coords,
                                           int dim, SolutionPattern pattern);

/// Node positions of the stretched 1D grid on [0, 1] with `points` nodes
/// including both ends; spacing grows by `ratio` from each end inward.
std::vector<double> stretched_grid(int points, double ratio);

/// max |A - A^T| == 0.
bool is_symmetric(const CsrMatrix& a);

}  // namespace nsksp
