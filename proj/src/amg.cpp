#include "nsksp/amg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "nsksp/error.hpp"
#include "nsksp/kernels.hpp"
#include "nsksp/relaxation.hpp"

namespace nsksp {

namespace {

CsrMatrix abs_values(const CsrMatrix& a) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x = std::abs(x);
  return CsrMatrix(a.n_rows(), a.n_cols(),
                   {a.row_ptr().begin(), a.row_ptr().end()},
                   {a.col_idx().begin(), a.col_idx().end()}, std::move(v));
}

CsrMatrix pattern_matrix(index_t n, std::vector<index_t> row_ptr,
                         std::vector<index_t> cols) {
  std::vector<double> ones(cols.size(), 1.0);
  return CsrMatrix(n, n, std::move(row_ptr), std::move(cols), std::move(ones));
}

// rho(D^{-1} A) by power iteration from the all-ones vector.
std::pair<double, double> estimate_spectral_radius(const CsrMatrix& a,
                                                   std::span<const double> diag,
                                                   int iterations) {
  const index_t n = a.n_rows();
  Vector x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Vector y(n);
  double rho = 0.0, prev = 0.0;
  for (int it = 0; it < iterations; ++it) {
    spmv(a, x, y);
    for (index_t i = 0; i < n; ++i) y[i] /= diag[i];
    const double nrm = norm2(y);
    prev = rho;
    rho = nrm;
    if (nrm == 0.0) break;
    for (index_t i = 0; i < n; ++i) x[i] = y[i] / nrm;
  }
  const double change = rho == 0.0 ? 0.0 : std::abs(rho - prev) / rho;
  return {rho, change};
}

index_t count_offdiag(const CsrMatrix& s) { return s.nnz(); }

}  // namespace

CsrMatrix sa_strength(const CsrMatrix& a, double theta) {
  const CsrMatrix mag = abs_values(a);
  const CsrMatrix sym = add(0.5, mag, 0.5, mag.transpose());
  const Vector d = sym.diagonal();
  const index_t n = a.n_rows();
  std::vector<index_t> rp(n + 1, 0), cols;
  for (index_t i = 0; i < n; ++i) {
    const auto c = sym.row_cols(i);
    const auto v = sym.row_values(i);
    for (std::size_t k = 0; k < c.size(); ++k) {
      const index_t j = c[k];
      if (j == i) continue;
      if (v[k] > theta * std::sqrt(d[i] * d[j])) cols.push_back(j);
    }
    rp[i + 1] = static_cast<index_t>(cols.size());
  }
  return pattern_matrix(n, std::move(rp), std::move(cols));
}

std::vector<index_t> greedy_aggregate(const CsrMatrix& strength,
                                      index_t& n_aggregates) {
  const index_t n = strength.n_rows();
  std::vector<index_t> agg(n, -1);
  n_aggregates = 0;
  // Pass one: seed an aggregate at every node whose strong neighbourhood is
  // still untouched.
  for (index_t i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    const auto nbrs = strength.row_cols(i);
    if (std::any_of(nbrs.begin(), nbrs.end(),
                    [&](index_t j) { return agg[j] >= 0; }))
      continue;
    agg[i] = n_aggregates;
    for (index_t j : nbrs) agg[j] = n_aggregates;
    ++n_aggregates;
  }
  // Pass two: attach leftovers to the aggregate of their first strong
  // neighbour that was placed in pass one.
  std::vector<index_t> first_pass = agg;
  for (index_t i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    for (index_t j : strength.row_cols(i)) {
      if (first_pass[j] >= 0) {
        agg[i] = first_pass[j];
        break;
      }
    }
    // Unreachable for a symmetric strength graph; kept as a singleton so P
    // never has an empty row.
    if (agg[i] < 0) agg[i] = n_aggregates++;
  }
  return agg;
}

CsrMatrix classical_strength(const CsrMatrix& a, double threshold) {
  const CsrMatrix sym = add(0.5, a, 0.5, a.transpose());
  const index_t n = a.n_rows();
  std::vector<index_t> rp(n + 1, 0), cols;
  for (index_t i = 0; i < n; ++i) {
    const auto c = sym.row_cols(i);
    const auto v = sym.row_values(i);
    double max_neg = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (c[k] != i) max_neg = std::max(max_neg, -v[k]);
    if (max_neg > 0.0) {
      for (std::size_t k = 0; k < c.size(); ++k)
        if (c[k] != i && -v[k] >= threshold * max_neg) cols.push_back(c[k]);
    }
    rp[i + 1] = static_cast<index_t>(cols.size());
  }
  return pattern_matrix(n, std::move(rp), std::move(cols));
}

std::vector<bool> rs_cf_splitting(const CsrMatrix& strength) {
  const index_t n = strength.n_rows();
  const CsrMatrix influence = strength.transpose();  // row i: who depends on i
  enum : char { kUndecided, kCoarse, kFine };
  std::vector<char> state(n, kUndecided);
  std::vector<index_t> lambda(n);
  std::set<std::pair<index_t, index_t>> queue;  // (-lambda, index)
  for (index_t i = 0; i < n; ++i) {
    lambda[i] = static_cast<index_t>(influence.row_cols(i).size());
    if (lambda[i] == 0 && strength.row_cols(i).empty()) {
      state[i] = kFine;  // isolated: the smoother handles it
      continue;
    }
    queue.insert({-lambda[i], i});
  }
  const auto bump = [&](index_t k, index_t delta) {
    queue.erase({-lambda[k], k});
    lambda[k] += delta;
    queue.insert({-lambda[k], k});
  };
  while (!queue.empty()) {
    const auto [neg_lambda, i] = *queue.begin();
    if (neg_lambda == 0) break;
    queue.erase(queue.begin());
    state[i] = kCoarse;
    for (index_t j : influence.row_cols(i)) {
      if (state[j] != kUndecided) continue;
      state[j] = kFine;
      queue.erase({-lambda[j], j});
      for (index_t k : strength.row_cols(j))
        if (state[k] == kUndecided) bump(k, 1);
    }
    for (index_t k : strength.row_cols(i))
      if (state[k] == kUndecided) bump(k, -1);
  }
  // Leftovers influence nobody undecided: fine if they can interpolate from
  // an existing C point, coarse otherwise.
  for (const auto& [neg_lambda, i] : queue) {
    const auto deps = strength.row_cols(i);
    const bool has_c = std::any_of(deps.begin(), deps.end(), [&](index_t j) {
      return state[j] == kCoarse;
    });
    state[i] = has_c ? kFine : kCoarse;
  }
  std::vector<bool> is_coarse(n);
  for (index_t i = 0; i < n; ++i) is_coarse[i] = state[i] == kCoarse;
  return is_coarse;
}

CsrMatrix direct_interpolation(const CsrMatrix& a, const CsrMatrix& strength,
                               const std::vector<bool>& is_coarse) {
  const index_t n = a.n_rows();
  std::vector<index_t> coarse_id(n, -1);
  index_t nc = 0;
  for (index_t i = 0; i < n; ++i)
    if (is_coarse[i]) coarse_id[i] = nc++;

  std::vector<index_t> rp(n + 1, 0), cols;
  std::vector<double> vals;
  std::vector<char> strong_c(n, 0);
  for (index_t i = 0; i < n; ++i) {
    if (is_coarse[i]) {
      cols.push_back(coarse_id[i]);
      vals.push_back(1.0);
      rp[i + 1] = static_cast<index_t>(cols.size());
      continue;
    }
    for (index_t j : strength.row_cols(i))
      if (is_coarse[j]) strong_c[j] = 1;

    const auto c = a.row_cols(i);
    const auto v = a.row_values(i);
    double diag = 0.0, all_neg = 0.0, all_pos = 0.0, c_neg = 0.0, c_pos = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] == i) {
        diag = v[k];
        continue;
      }
      (v[k] < 0.0 ? all_neg : all_pos) += v[k];
      if (strong_c[c[k]]) (v[k] < 0.0 ? c_neg : c_pos) += v[k];
    }
    if (c_pos == 0.0) diag += all_pos;
    const double alpha = c_neg != 0.0 ? all_neg / c_neg : 0.0;
    const double beta = c_pos != 0.0 ? all_pos / c_pos : 0.0;
    if (diag == 0.0) throw RowError(ErrorCode::ZeroDiagonal, i, "interpolation");

    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] == i || !strong_c[c[k]]) continue;
      const double w = -(v[k] < 0.0 ? alpha : beta) * v[k] / diag;
      cols.push_back(coarse_id[c[k]]);
      vals.push_back(w);
    }
    // coarse ids are monotone in fine index, so columns are already sorted
    for (index_t j : strength.row_cols(i)) strong_c[j] = 0;
    rp[i + 1] = static_cast<index_t>(cols.size());
  }
  return CsrMatrix(n, nc, std::move(rp), std::move(cols), std::move(vals));
}

namespace {

CsrMatrix tentative_prolongator(const std::vector<index_t>& agg,
                                index_t n_aggregates) {
  const index_t n = static_cast<index_t>(agg.size());
  std::vector<index_t> rp(n + 1), cols(agg.begin(), agg.end());
  for (index_t i = 0; i <= n; ++i) rp[i] = i;
  return CsrMatrix(n, n_aggregates, std::move(rp), std::move(cols),
                   std::vector<double>(n, 1.0));
}

// P = (I - omega D^{-1} A) P_t with omega = (4/3) / rho.
CsrMatrix smooth_prolongator(const CsrMatrix& a, std::span<const double> diag,
                             const CsrMatrix& p_tent, double rho) {
  const double omega = rho > 0.0 ? (4.0 / 3.0) / rho : 0.0;
  const CsrMatrix ap = multiply(a, p_tent);
  std::vector<double> v(ap.values().begin(), ap.values().end());
  for (index_t i = 0; i < ap.n_rows(); ++i)
    for (index_t k = ap.row_ptr()[i]; k < ap.row_ptr()[i + 1]; ++k)
      v[k] *= omega / diag[i];
  const CsrMatrix scaled(ap.n_rows(), ap.n_cols(),
                         {ap.row_ptr().begin(), ap.row_ptr().end()},
                         {ap.col_idx().begin(), ap.col_idx().end()},
                         std::move(v));
  return add(1.0, p_tent, -1.0, scaled);
}

void check_square(const CsrMatrix& a) {
  if (!a.square() || a.n_rows() < 1)
    throw Error(ErrorCode::DimensionMismatch,
                "AMG needs a non-empty square matrix");
}

}  // namespace

AmgHierarchy sa_amg_setup(const CsrMatrix& a, const AmgParams& params) {
  check_square(a);
  AmgHierarchy h;
  h.coarsening_ = Coarsening::SmoothedAggregation;
  h.params_ = params;
  CsrMatrix current = a;
  while (true) {
    AmgLevel level;
    level.a = std::move(current);
    level.diag = checked_diagonal(level.a);
    const index_t n = level.a.n_rows();
    if (n <= params.coarse_size_limit ||
        static_cast<int>(h.levels_.size()) + 1 >= params.max_levels) {
      h.levels_.push_back(std::move(level));
      break;
    }
    const CsrMatrix s = sa_strength(level.a, params.theta);
    level.strength_nnz = count_offdiag(s);
    index_t n_agg = 0;
    const auto agg = greedy_aggregate(s, n_agg);
    if (n_agg >= n || n_agg == 0) {
      h.stalled_ = true;
      h.levels_.push_back(std::move(level));
      break;
    }
    const auto [rho, change] = estimate_spectral_radius(
        level.a, level.diag, params.power_iterations);
    h.rho_.push_back(rho);
    h.rho_change_.push_back(change);
    level.p = smooth_prolongator(level.a, level.diag,
                                 tentative_prolongator(agg, n_agg), rho);
    level.r = level.p.transpose();
    current = multiply(level.r, multiply(level.a, level.p));
    h.levels_.push_back(std::move(level));
  }
  h.coarse_ = DenseLu(h.levels_.back().a);
  return h;
}

AmgHierarchy rs_amg_setup(const CsrMatrix& a, const AmgParams& params) {
  check_square(a);
  AmgHierarchy h;
  h.coarsening_ = Coarsening::Classical;
  h.params_ = params;
  CsrMatrix current = a;
  while (true) {
    AmgLevel level;
    level.a = std::move(current);
    level.diag = checked_diagonal(level.a);
    const index_t n = level.a.n_rows();
    if (n <= params.coarse_size_limit ||
        static_cast<int>(h.levels_.size()) + 1 >= params.max_levels) {
      h.levels_.push_back(std::move(level));
      break;
    }
    const CsrMatrix s = classical_strength(level.a, params.strong_threshold);
    level.strength_nnz = count_offdiag(s);
    const auto is_coarse = rs_cf_splitting(s);
    const auto nc = static_cast<index_t>(
        std::count(is_coarse.begin(), is_coarse.end(), true));
    if (nc >= n || nc == 0) {
      h.stalled_ = true;
      h.levels_.push_back(std::move(level));
      break;
    }
    level.p = direct_interpolation(level.a, s, is_coarse);
    level.r = level.p.transpose();
    current = multiply(level.r, multiply(level.a, level.p));
    h.levels_.push_back(std::move(level));
  }
  h.coarse_ = DenseLu(h.levels_.back().a);
  return h;
}

void AmgHierarchy::vcycle(std::span<const double> v, std::span<double> w) const {
  if (v.size() != static_cast<std::size_t>(levels_.front().a.n_rows()) ||
      w.size() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "vcycle");
  cycle(0, v, w);
}

void AmgHierarchy::cycle(std::size_t l, std::span<const double> b,
                         std::span<double> x) const {
  const AmgLevel& lv = levels_[l];
  if (l + 1 == levels_.size()) {
    coarse_.solve(b, x);
    return;
  }
  std::fill(x.begin(), x.end(), 0.0);
  for (int s = 0; s < params_.pre_sweeps; ++s)
    sor_sweep(lv.a, lv.diag, 1.0, b, x, true);

  Vector r(b.size());
  residual(lv.a, x, b, r);
  Vector bc = spmv(lv.r, r);
  Vector xc(bc.size());
  cycle(l + 1, bc, xc);
  const Vector corr = spmv(lv.p, xc);
  axpy(1.0, corr, x);

  for (int s = 0; s < params_.post_sweeps; ++s)
    sor_sweep(lv.a, lv.diag, 1.0, b, x, false);
}

double AmgHierarchy::operator_complexity() const {
  double total = 0.0;
  for (const auto& lv : levels_) total += lv.a.nnz();
  return total / levels_.front().a.nnz();
}

void AmgHierarchy::dump(std::ostream& out) const {
  out << "level,n,nnz,avg_row_nnz\n";
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const auto& a = levels_[l].a;
    out << l << ',' << a.n_rows() << ',' << a.nnz() << ',' << a.avg_row_nnz()
        << '\n';
  }
}

}  // namespace nsksp
