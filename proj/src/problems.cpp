#include "nsksp/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "nsksp/error.hpp"
#include "nsksp/kernels.hpp"

namespace nsksp {

std::string_view to_string(ProblemFamily f) noexcept {
  switch (f) {
    case ProblemFamily::Fd2d: return "fd2d";
    case ProblemFamily::Fd3d: return "fd3d";
    case ProblemFamily::FemP1_2d: return "fem2d";
    case ProblemFamily::HelmholtzNonuniform2d: return "helmholtz2d";
  }
  return "fd2d";
}

std::optional<ProblemFamily> parse_problem_family(std::string_view id) noexcept {
  for (auto f : {ProblemFamily::Fd2d, ProblemFamily::Fd3d,
                 ProblemFamily::FemP1_2d, ProblemFamily::HelmholtzNonuniform2d})
    if (to_string(f) == id) return f;
  return std::nullopt;
}

std::string_view to_string(ConvectionScheme s) noexcept {
  return s == ConvectionScheme::Upwind ? "upwind" : "centered";
}

std::optional<ConvectionScheme> parse_scheme(std::string_view id) noexcept {
  if (id == "upwind") return ConvectionScheme::Upwind;
  if (id == "centered") return ConvectionScheme::Centered;
  return std::nullopt;
}

void ProblemSpec::validate() const {
  if (n_per_dim < 2) throw Error(ErrorCode::InvalidSpec, "n_per_dim must be >= 2");
  if (!(stretch >= 1.0)) throw Error(ErrorCode::InvalidSpec, "stretch must be >= 1");
  if (!std::isfinite(d)) throw Error(ErrorCode::InvalidSpec, "d must be finite");
  if (c.size() > 3) throw Error(ErrorCode::InvalidSpec, "c has more than 3 entries");
  for (double v : c)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidSpec, "c must be finite");
  const bool neumann_family = family == ProblemFamily::HelmholtzNonuniform2d;
  if (neumann_family != (bc == BoundaryCondition::Neumann))
    throw Error(ErrorCode::InvalidSpec,
                neumann_family ? "the Helmholtz analog uses Neumann BCs"
                               : "this family supports Dirichlet BCs only");
  if (family == ProblemFamily::Fd3d && n_per_dim > 1290)
    throw Error(ErrorCode::InvalidSpec, "3D grid exceeds index range");
  if (family != ProblemFamily::Fd3d && n_per_dim > 46000)
    throw Error(ErrorCode::InvalidSpec, "2D grid exceeds index range");
}

ProblemSpec ProblemSpec::defaults(ProblemFamily family, int n_per_dim) {
  ProblemSpec s;
  s.family = family;
  s.n_per_dim = n_per_dim;
  if (family == ProblemFamily::HelmholtzNonuniform2d) {
    s.bc = BoundaryCondition::Neumann;
    s.c = {0.0, 0.0};
    s.d = 1e-6;
    s.stretch = 1.05;
  } else if (family == ProblemFamily::Fd3d) {
    s.c = {1.0, 1.0, 1.0};
  } else {
    s.c = {1.0, 1.0};
  }
  return s;
}

namespace {

double coeff(const ProblemSpec& s, int axis) {
  return axis < static_cast<int>(s.c.size()) ? s.c[axis] : 0.0;
}

ConvectionScheme pick_scheme(const ProblemSpec& s, double h) {
  if (s.scheme) return *s.scheme;
  double cmax = 0.0;
  for (double v : s.c) cmax = std::max(cmax, std::abs(v));
  return cmax * h / 2.0 > 1.0 ? ConvectionScheme::Upwind
                              : ConvectionScheme::Centered;
}

void finish(GeneratedProblem& p, const ProblemSpec& spec) {
  auto [b, x] = manufactured_rhs(p.a, p.coords, p.dim, spec.pattern);
  p.b = std::move(b);
  p.x_exact = std::move(x);
  p.meta.nnz = p.a.nnz();
  p.meta.symmetric = is_symmetric(p.a);
}

GeneratedProblem fd_conv_diff(const ProblemSpec& spec, int dim) {
  spec.validate();
  if (spec.bc != BoundaryCondition::Dirichlet)
    throw Error(ErrorCode::InvalidSpec, "finite differences use Dirichlet BCs");
  const int m = spec.n_per_dim;
  const double h = 1.0 / (m + 1);
  const double h2 = h * h;
  const ConvectionScheme scheme = pick_scheme(spec, h);
  index_t n = 1;
  std::array<index_t, 3> stride{1, 1, 1};
  for (int a = 0; a < dim; ++a) {
    stride[a] = n;
    n *= m;
  }

  GeneratedProblem p;
  p.dim = dim;
  p.meta = {h, h, 0, false, scheme};
  p.coords.resize(static_cast<std::size_t>(n) * dim);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n) * (2 * dim + 1));
  std::array<int, 3> idx{};
  for (index_t row = 0; row < n; ++row) {
    index_t rem = row;
    for (int a = 0; a < dim; ++a) {
      idx[a] = rem % m;
      rem /= m;
      p.coords[static_cast<std::size_t>(row) * dim + a] = (idx[a] + 1) * h;
    }
    double diag = spec.d;
    for (int a = 0; a < dim; ++a) {
      const double c = coeff(spec, a);
      double lo = -1.0 / h2, hi = -1.0 / h2;
      diag += 2.0 / h2;
      if (scheme == ConvectionScheme::Centered) {
        lo -= c / (2.0 * h);
        hi += c / (2.0 * h);
      } else if (c > 0.0) {
        diag += c / h;
        lo -= c / h;
      } else {
        diag -= c / h;
        hi += c / h;
      }
      if (idx[a] > 0) t.push_back({row, row - stride[a], lo});
      if (idx[a] < m - 1) t.push_back({row, row + stride[a], hi});
    }
    t.push_back({row, row, diag});
  }
  p.a = CsrMatrix::from_triplets(t, n, n);
  finish(p, spec);
  return p;
}

}  // namespace

GeneratedProblem fd_conv_diff_2d(const ProblemSpec& spec) {
  return fd_conv_diff(spec, 2);
}

GeneratedProblem fd_conv_diff_3d(const ProblemSpec& spec) {
  return fd_conv_diff(spec, 3);
}

GeneratedProblem fem_p1_conv_diff_2d(const ProblemSpec& spec) {
  spec.validate();
  const int m = spec.n_per_dim;
  const int nodes = m + 2;  // per side, boundary included
  const double h = 1.0 / (m + 1);
  const double cx = coeff(spec, 0), cy = coeff(spec, 1);
  const auto unknown = [&](int i, int j) -> index_t {
    if (i <= 0 || j <= 0 || i >= nodes - 1 || j >= nodes - 1) return -1;
    return static_cast<index_t>((i - 1) + m * (j - 1));
  };

  GeneratedProblem p;
  p.dim = 2;
  p.meta = {h, h, 0, false, ConvectionScheme::Centered};
  const index_t n = static_cast<index_t>(m) * m;
  p.coords.resize(static_cast<std::size_t>(n) * 2);
  for (int j = 1; j <= m; ++j)
    for (int i = 1; i <= m; ++i) {
      const index_t k = unknown(i, j);
      p.coords[2 * k] = i * h;
      p.coords[2 * k + 1] = j * h;
    }

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nodes) * nodes * 2 * 9);
  const auto element = [&](std::array<std::array<int, 2>, 3> v) {
    std::array<double, 3> x{}, y{};
    for (int k = 0; k < 3; ++k) {
      x[k] = v[k][0] * h;
      y[k] = v[k][1] * h;
    }
    const double two_area =
        (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
    const double area = std::abs(two_area) / 2.0;
    std::array<double, 3> gx{}, gy{};
    for (int k = 0; k < 3; ++k) {
      const int k1 = (k + 1) % 3, k2 = (k + 2) % 3;
      gx[k] = (y[k1] - y[k2]) / two_area;
      gy[k] = (x[k2] - x[k1]) / two_area;
    }
    for (int r = 0; r < 3; ++r) {
      const index_t row = unknown(v[r][0], v[r][1]);
      if (row < 0) continue;
      for (int s = 0; s < 3; ++s) {
        const index_t col = unknown(v[s][0], v[s][1]);
        if (col < 0) continue;
        const double stiff = area * (gx[r] * gx[s] + gy[r] * gy[s]);
        const double conv = area / 3.0 * (cx * gx[s] + cy * gy[s]);
        const double mass = spec.d * area / 12.0 * (r == s ? 2.0 : 1.0);
        t.push_back({row, col, stiff + conv + mass});
      }
    }
  };
  for (int j = 0; j < nodes - 1; ++j)
    for (int i = 0; i < nodes - 1; ++i) {
      element({{{i, j}, {i + 1, j}, {i + 1, j + 1}}});
      element({{{i, j}, {i + 1, j + 1}, {i, j + 1}}});
    }
  p.a = CsrMatrix::from_triplets(t, n, n);
  finish(p, spec);
  return p;
}

std::vector<double> stretched_grid(int points, double ratio) {
  if (points < 2) throw Error(ErrorCode::InvalidSpec, "grid needs two points");
  const int cells = points - 1;
  std::vector<double> spacing(cells);
  for (int k = 0; k < cells; ++k)
    spacing[k] = std::pow(ratio, std::min(k, cells - 1 - k));
  const double total = std::accumulate(spacing.begin(), spacing.end(), 0.0);
  std::vector<double> x(points, 0.0);
  for (int k = 0; k < cells; ++k) x[k + 1] = x[k] + spacing[k] / total;
  x.back() = 1.0;
  return x;
}

GeneratedProblem helmholtz_fd_2d_nonuniform(const ProblemSpec& spec) {
  spec.validate();
  if (spec.d < 0.0) throw Error(ErrorCode::InvalidSpec, "d must be >= 0");
  const int m = spec.n_per_dim;
  const std::vector<double> g = stretched_grid(m, spec.stretch);
  const index_t n = static_cast<index_t>(m) * m;

  GeneratedProblem p;
  p.dim = 2;
  p.meta.scheme = ConvectionScheme::Centered;
  p.meta.h_min = HUGE_VAL;
  for (int k = 0; k + 1 < m; ++k) {
    p.meta.h_min = std::min(p.meta.h_min, g[k + 1] - g[k]);
    p.meta.h_max = std::max(p.meta.h_max, g[k + 1] - g[k]);
  }
  p.coords.resize(static_cast<std::size_t>(n) * 2);

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n) * 5);
  const std::array<index_t, 2> stride{1, static_cast<index_t>(m)};
  for (index_t row = 0; row < n; ++row) {
    const std::array<int, 2> idx{static_cast<int>(row % m),
                                 static_cast<int>(row / m)};
    p.coords[2 * row] = g[idx[0]];
    p.coords[2 * row + 1] = g[idx[1]];
    std::array<std::pair<index_t, double>, 4> off{};
    int n_off = 0;
    for (int a = 0; a < 2; ++a) {
      const int i = idx[a];
      const double c = coeff(spec, a);
      if (i == 0 || i == m - 1) {
        // Mirrored ghost node: u_{-1} = u_{1}, zero normal derivative.
        const double h0 = i == 0 ? g[1] - g[0] : g[m - 1] - g[m - 2];
        off[n_off++] = {i == 0 ? row + stride[a] : row - stride[a],
                        -2.0 / (h0 * h0)};
        continue;
      }
      const double hl = g[i] - g[i - 1];
      const double hr = g[i + 1] - g[i];
      const double conv = c / (hl + hr);
      off[n_off++] = {row - stride[a], -2.0 / (hl * (hl + hr)) - conv};
      off[n_off++] = {row + stride[a], -2.0 / (hr * (hl + hr)) + conv};
    }
    // Snap the weights to a power-of-two grid 2^-30 below the row maximum so
    // every partial sum is exact: with d = 0 each row then sums to exactly 0.
    double wmax = 0.0;
    for (int k = 0; k < n_off; ++k) wmax = std::max(wmax, std::abs(off[k].second));
    const double quantum = std::ldexp(1.0, std::ilogb(wmax) - 30);
    double sum = 0.0;
    for (int k = 0; k < n_off; ++k) {
      const double w = std::nearbyint(off[k].second / quantum) * quantum;
      t.push_back({row, off[k].first, w});
      sum += w;
    }
    t.push_back({row, row, spec.d - sum});
  }
  p.a = CsrMatrix::from_triplets(t, n, n);
  finish(p, spec);
  return p;
}

GeneratedProblem generate(const ProblemSpec& spec) {
  switch (spec.family) {
    case ProblemFamily::Fd2d: return fd_conv_diff_2d(spec);
    case ProblemFamily::Fd3d: return fd_conv_diff_3d(spec);
    case ProblemFamily::FemP1_2d: return fem_p1_conv_diff_2d(spec);
    case ProblemFamily::HelmholtzNonuniform2d:
      return helmholtz_fd_2d_nonuniform(spec);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown family");
}

std::pair<Vector, Vector> manufactured_rhs(const CsrMatrix& a,
                                           std::span<const double> coords,
                                           int dim, SolutionPattern pattern) {
  if (!a.square()) throw Error(ErrorCode::DimensionMismatch, "A must be square");
  const auto n = static_cast<std::size_t>(a.n_rows());
  Vector x(n, 1.0);
  if (pattern == SolutionPattern::SinSin) {
    if (coords.size() != n * static_cast<std::size_t>(dim))
      throw Error(ErrorCode::DimensionMismatch, "coords length != n * dim");
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < dim; ++k)
        x[i] *= std::sin(std::numbers::pi * coords[i * dim + k]);
  }
  Vector b = spmv(a, x);
  return {std::move(b), std::move(x)};
}

bool is_symmetric(const CsrMatrix& a) {
  return a.square() && frobenius_distance(a, a.transpose()) == 0.0;
}

}  // namespace nsksp
