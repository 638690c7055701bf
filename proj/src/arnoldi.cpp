#include "nsksp/arnoldi.hpp"

#include <cmath>

#include "nsksp/error.hpp"

namespace nsksp {

double HessenbergLsq::add_column(std::span<const double> h) {
  const std::size_t k = r_.size();
  if (h.size() != k + 2)
    throw Error(ErrorCode::DimensionMismatch, "Hessenberg column length");
  std::vector<double> col(h.begin(), h.end());
  for (std::size_t i = 0; i < k; ++i) {
    const double t = cs_[i] * col[i] + sn_[i] * col[i + 1];
    col[i + 1] = -sn_[i] * col[i] + cs_[i] * col[i + 1];
    col[i] = t;
  }
  const double rr = std::hypot(col[k], col[k + 1]);
  double c = 1.0, s = 0.0;
  if (rr != 0.0) {
    c = col[k] / rr;
    s = col[k + 1] / rr;
  }
  col[k] = rr;
  col.pop_back();
  cs_.push_back(c);
  sn_.push_back(s);
  g_.push_back(-s * g_[k]);
  g_[k] *= c;
  r_.push_back(std::move(col));
  return std::abs(g_.back());
}

double HessenbergLsq::residual_norm() const noexcept {
  return g_.empty() ? 0.0 : std::abs(g_.back());
}

Vector HessenbergLsq::solve() const {
  const std::size_t k = r_.size();
  Vector z(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    double s = g_[i];
    for (std::size_t j = i + 1; j < k; ++j) s -= r_[j][i] * z[j];
    z[i] = r_[i][i] != 0.0 ? s / r_[i][i] : 0.0;
  }
  return z;
}

Vector HessenbergLsq::residual_coefficients() const {
  const std::size_t k = r_.size();
  Vector e(k + 1, 0.0);
  e[k] = g_[k];
  for (std::size_t i = k; i-- > 0;) {
    const double a = e[i], b = e[i + 1];
    e[i] = cs_[i] * a - sn_[i] * b;
    e[i + 1] = sn_[i] * a + cs_[i] * b;
  }
  return e;
}

ArnoldiState::ArnoldiState(std::span<const double> r0, OpCounters* counters)
    : work(r0.size()) {
  beta = norm2(r0, counters);
  if (beta == 0.0)
    throw Error(ErrorCode::InvalidArgument, "Arnoldi start vector is zero");
  q.emplace_back(r0.begin(), r0.end());
  scale(1.0 / beta, q.back(), counters);
  lsq = HessenbergLsq(beta);
}

ArnoldiOutcome arnoldi_step(const LinearOperator& op, ArnoldiState& st,
                            double breakdown_tol, OpCounters* counters) {
  const std::size_t k = st.hessenberg.size();
  if (st.q.size() != k + 1)
    throw Error(ErrorCode::InvalidArgument,
                "Arnoldi state has no vector to expand");
  Vector& w = st.work;
  op(st.q[k], w);

  std::vector<double> h(k + 2, 0.0);
  double proj_sq = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    h[i] = dot(w, st.q[i], counters);
    axpy(-h[i], st.q[i], w, counters);
    proj_sq += h[i] * h[i];
  }
  double hnext = norm2(w, counters);
  // ||w||^2 before orthogonalization, by Pythagoras on the MGS sweep.
  const double pre_norm = std::sqrt(proj_sq + hnext * hnext);

  if (hnext < 0.5 * pre_norm) {
    for (std::size_t i = 0; i <= k; ++i) {
      const double c = dot(w, st.q[i]);
      axpy(-c, st.q[i], w);
      h[i] += c;
    }
    hnext = norm2(w);
    if (counters != nullptr) {
      counters->reorth_dots += static_cast<std::int64_t>(k) + 2;
      counters->reorth_axpys += static_cast<std::int64_t>(k) + 1;
      counters->modeled_flops +=
          static_cast<std::int64_t>(4 * (k + 1) + 2) *
          static_cast<std::int64_t>(w.size());
    }
  }
  h[k + 1] = hnext;
  st.hessenberg.push_back(std::move(h));

  if (hnext <= breakdown_tol * pre_norm) return ArnoldiOutcome::HappyBreakdown;
  st.q.emplace_back(w);
  scale(1.0 / hnext, st.q.back(), counters);
  return ArnoldiOutcome::Expanded;
}

double givens_lsq_update(ArnoldiState& st) {
  const int k = st.lsq.columns();
  if (k >= st.steps())
    throw Error(ErrorCode::InvalidArgument, "no new Hessenberg column");
  return st.lsq.add_column(st.hessenberg[k]);
}

}  // namespace nsksp
