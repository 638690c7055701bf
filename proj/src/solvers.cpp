#include "nsksp/solvers.hpp"

#include <chrono>
#include <cmath>

#include "nsksp/arnoldi.hpp"
#include "nsksp/error.hpp"

namespace nsksp {

double true_residual_check(const CsrMatrix& a, std::span<const double> b,
                           std::span<const double> x, OpCounters* counters) {
  Vector r(b.size());
  residual(a, x, b, r);
  if (counters != nullptr) ++counters->matvecs;
  const double bnorm = norm2(b);
  const double rnorm = norm2(r);
  if (bnorm == 0.0) return rnorm;  // r = -A x
  return rnorm / bnorm;
}

namespace {

using Clock = std::chrono::steady_clock;

// Bookkeeping shared by the four methods: history, explicit residual checks,
// stagnation window and timing.
class Session {
 public:
  Session(const CsrMatrix& a, std::span<const double> b,
          const Preconditioner& m, const SolveOptions& opts)
      : a_(a), b_(b), m_(m), opts_(opts), start_(Clock::now()) {
    if (!a.square())
      throw Error(ErrorCode::DimensionMismatch, "solver needs a square matrix");
    if (b.size() != static_cast<std::size_t>(a.n_rows()))
      throw Error(ErrorCode::DimensionMismatch, "len(b) != n");
    if (m.size() != a.n_rows())
      throw Error(ErrorCode::DimensionMismatch, "preconditioner size != n");
    opts.validate(a.n_rows());
    bnorm_ = norm2(b);
    result_.x = opts.x0.empty() ? Vector(b.size(), 0.0) : opts.x0;
    result_.report.setup_seconds = m.setup_seconds();
  }

  Vector& x() noexcept { return result_.x; }
  OpCounters& counters() noexcept { return result_.report.counters; }
  OpCounters* ctr() noexcept { return &result_.report.counters; }
  const SolveOptions& opts() const noexcept { return opts_; }
  double bnorm() const noexcept { return bnorm_; }
  bool zero_rhs() const noexcept { return bnorm_ == 0.0; }
  std::size_t n() const noexcept { return b_.size(); }

  void precond(std::span<const double> v, std::span<double> w) {
    m_.apply(v, w);
    ++counters().precond_applies;
  }

  /// r0 = b - A x0. Free when x0 = 0.
  Vector initial_residual() {
    Vector r(b_.begin(), b_.end());
    if (!opts_.x0.empty()) {
      residual(a_, result_.x, b_, r);
      ++result_.report.check_matvecs;
    }
    r0norm_ = norm2(r);
    return r;
  }
  double r0norm() const noexcept { return r0norm_; }

  void record(double relres) {
    result_.report.history.push_back({counters().matvecs, relres});
    best_ = std::min(best_, relres);
    best_trace_.push_back(best_);
  }

  /// Explicit residual of the current x into `r`; true when within rtol.
  bool confirm(std::span<double> r) {
    residual(a_, result_.x, b_, r);
    ++result_.report.check_matvecs;
    true_relres_ = norm2(r) / bnorm_;
    true_valid_ = true;
    return true_relres_ <= opts_.rtol;
  }
  bool confirm() {
    Vector r(n());
    return confirm(r);
  }
  void invalidate() noexcept { true_valid_ = false; }

  void begin_iteration() noexcept { mark_ = counters(); }
  /// Moves everything counted since begin_iteration() into report.aborted.
  void abort_iteration() noexcept {
    result_.report.aborted = counters() - mark_;
    counters() = mark_;
  }

  /// Best relative residual improved by less than stagnation_tol over the
  /// last `window` recorded iterations.
  bool stagnated(std::size_t window) const {
    if (best_trace_.size() <= window) return false;
    const double ref = best_trace_[best_trace_.size() - 1 - window];
    return ref - best_ < opts_.stagnation_tol * ref;
  }

  SolveResult finish(SolveStatus status, int iterations) {
    auto& rep = result_.report;
    rep.status = status;
    rep.iterations = iterations;
    if (!true_valid_) {
      Vector r(n());
      residual(a_, result_.x, b_, r);
      ++rep.check_matvecs;
      true_relres_ = norm2(r) / bnorm_;
    }
    rep.true_relres = true_relres_;
    const std::chrono::duration<double> dt = Clock::now() - start_;
    rep.solve_seconds = dt.count();
    return std::move(result_);
  }

  SolveResult finish_zero_rhs() {
    std::fill(result_.x.begin(), result_.x.end(), 0.0);
    result_.report.history.push_back({0, 0.0});
    true_relres_ = 0.0;
    true_valid_ = true;
    return finish(SolveStatus::ZeroRhs, 0);
  }

 private:
  const CsrMatrix& a_;
  std::span<const double> b_;
  const Preconditioner& m_;
  const SolveOptions& opts_;
  Clock::time_point start_;
  SolveResult result_;
  double bnorm_ = 0.0;
  double r0norm_ = 0.0;
  double best_ = HUGE_VAL;
  std::vector<double> best_trace_;
  double true_relres_ = 0.0;
  bool true_valid_ = false;
  OpCounters mark_;
};

bool finite(double v) noexcept { return std::isfinite(v); }

}  // namespace

SolveResult gmres_restarted(const CsrMatrix& a, std::span<const double> b,
                            const Preconditioner& m, const SolveOptions& opts) {
  Session s(a, b, m, opts);
  if (s.zero_rhs()) return s.finish_zero_rhs();
  const std::size_t n = s.n();
  Vector r = s.initial_residual();
  double relres = s.r0norm() / s.bnorm();
  s.record(relres);
  if (relres <= opts.rtol && s.confirm(r))
    return s.finish(SolveStatus::Converged, 0);

  Vector z(n), y(n);
  const LinearOperator op = [&](std::span<const double> in,
                                std::span<double> out) {
    s.precond(in, z);
    spmv(a, z, out, s.ctr());
  };

  int iters = 0;
  while (true) {
    if (iters >= opts.max_iter) return s.finish(SolveStatus::MaxIter, iters);
    ArnoldiState st(r, s.ctr());
    const double cycle_start = relres;
    bool done = false;
    for (int j = 0; j < opts.restart && iters < opts.max_iter; ++j) {
      const auto outcome = arnoldi_step(op, st, opts.breakdown_tol, s.ctr());
      const double rho = givens_lsq_update(st);
      ++iters;
      relres = rho / s.bnorm();
      s.record(relres);
      if (relres <= opts.rtol || outcome == ArnoldiOutcome::HappyBreakdown) {
        done = true;
        break;
      }
    }

    // x += M^{-1} Q_k z
    const Vector coeff = st.lsq.solve();
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < coeff.size(); ++i)
      axpy(coeff[i], st.q[i], y, s.ctr());
    s.precond(y, z);
    axpy(1.0, z, s.x(), s.ctr());
    s.invalidate();

    if (done) {
      if (s.confirm(r)) return s.finish(SolveStatus::Converged, iters);
      // The recurrence overstated convergence; restart from the explicit
      // residual.
      relres = norm2(r, s.ctr()) / s.bnorm();
      continue;
    }
    if (iters >= opts.max_iter) return s.finish(SolveStatus::MaxIter, iters);

    // r = Q_{k+1} Omega^T (0, .., 0, g_k), no matvec needed.
    const Vector e = st.lsq.residual_coefficients();
    std::fill(r.begin(), r.end(), 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) axpy(e[i], st.q[i], r, s.ctr());
    if (cycle_start - relres < opts.stagnation_tol * cycle_start)
      return s.finish(SolveStatus::Stagnated, iters);
  }
}

SolveResult bicgstab(const CsrMatrix& a, std::span<const double> b,
                     const Preconditioner& m, const SolveOptions& opts) {
  Session s(a, b, m, opts);
  if (s.zero_rhs()) return s.finish_zero_rhs();
  const std::size_t n = s.n();
  const double tol = opts.breakdown_tol;
  Vector r = s.initial_residual();
  Vector rhat = r;
  double rref = s.r0norm();
  double rnorm = rref;
  double relres = rnorm / s.bnorm();
  s.record(relres);
  if (relres <= opts.rtol && s.confirm(r))
    return s.finish(SolveStatus::Converged, 0);

  Vector p(n, 0.0), v(n, 0.0), phat(n), shat(n), t(n);
  Vector x_best = s.x();
  double best = relres;
  double rho_old = 1.0, alpha = 1.0, omega = 1.0;

  const auto give_up = [&](SolveStatus status, int iters) {
    if (best < relres) {
      s.x() = x_best;
      s.invalidate();
    }
    return s.finish(status, iters);
  };

  for (int it = 1; it <= opts.max_iter; ++it) {
    s.begin_iteration();
    const double rho = dot(rhat, r, s.ctr());
    if (!finite(rho) || std::abs(rho) <= tol * rref * rnorm)
      return (s.abort_iteration(), give_up(SolveStatus::Breakdown, it - 1));
    const double beta = (rho / rho_old) * (alpha / omega);

    axpy(-omega, v, p, s.ctr());
    xpay(r, beta, p, s.ctr());
    s.precond(p, phat);
    spmv(a, phat, v, s.ctr());

    const double sigma = dot(rhat, v, s.ctr());
    if (!finite(sigma) || std::abs(sigma) <= tol * rref * rnorm)
      return (s.abort_iteration(), give_up(SolveStatus::Breakdown, it - 1));
    alpha = rho / sigma;
    axpy(-alpha, v, r, s.ctr());  // r now holds s

    s.precond(r, shat);
    spmv(a, shat, t, s.ctr());
    const double tt = dot(t, t, s.ctr());
    const double ts = dot(t, r, s.ctr());
    omega = tt > 0.0 ? ts / tt : 0.0;

    axpy(alpha, phat, s.x(), s.ctr());
    axpy(omega, shat, s.x(), s.ctr());
    axpy(-omega, t, r, s.ctr());
    s.invalidate();
    const double rnorm_prev = rnorm;
    rnorm = norm2(r, s.ctr());
    relres = rnorm / s.bnorm();
    s.record(relres);
    if (!finite(relres)) return give_up(SolveStatus::Breakdown, it);

    if (relres < best) {
      best = relres;
      x_best = s.x();
    }
    if (relres <= opts.rtol) {
      Vector check(n);
      if (s.confirm(check)) return s.finish(SolveStatus::Converged, it);
      // The recurrence drifted from the true residual: restart from it.
      r = std::move(check);
      rhat = r;
      rref = rnorm = norm2(r);
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho_old = alpha = omega = 1.0;
      if (s.stagnated(static_cast<std::size_t>(opts.stagnation_window)))
        return give_up(SolveStatus::Stagnated, it);
      continue;
    }
    if (!finite(omega) || std::abs(omega) * std::sqrt(tt) <= tol * rnorm_prev)
      return give_up(SolveStatus::Breakdown, it);
    if (s.stagnated(static_cast<std::size_t>(opts.stagnation_window)))
      return give_up(SolveStatus::Stagnated, it);
    rho_old = rho;
  }
  return give_up(SolveStatus::MaxIter, opts.max_iter);
}

SolveResult tfqmr(const CsrMatrix& a, std::span<const double> b,
                  const Preconditioner& m, const SolveOptions& opts) {
  Session s(a, b, m, opts);
  if (s.zero_rhs()) return s.finish_zero_rhs();
  const std::size_t n = s.n();
  const double tol = opts.breakdown_tol;
  Vector r = s.initial_residual();
  Vector rtilde = r;
  const double r0norm = s.r0norm();
  double rref = r0norm;
  int cycle_start = 0;  // iteration of the last restart
  s.record(r0norm / s.bnorm());
  if (r0norm / s.bnorm() <= opts.rtol && s.confirm(r))
    return s.finish(SolveStatus::Converged, 0);

  Vector w = r, u1 = r, u2(n), v(n, 0.0), au1(n), au2(n, 0.0), uhat(n),
      d(n, 0.0);
  double tau = r0norm, theta = 0.0, eta = 0.0;
  double wnorm = r0norm;
  double rho = r0norm * r0norm;
  double beta = 0.0;

  // One quasi-minimization half-step along (u, A u).
  const auto half_step = [&](std::span<const double> au,
                             std::span<const double> u_hat, double alpha) {
    axpy(-alpha, au, w, s.ctr());
    xpay(u_hat, tau == 0.0 ? 0.0 : theta * theta * eta / alpha, d, s.ctr());
    wnorm = norm2(w, s.ctr());
    if (tau == 0.0) return;
    theta = wnorm / tau;
    const double c = 1.0 / std::sqrt(1.0 + theta * theta);
    tau *= theta * c;
    eta = c * c * alpha;
    axpy(eta, d, s.x(), s.ctr());
  };

  for (int it = 1; it <= opts.max_iter; ++it) {
    s.begin_iteration();
    s.precond(u1, uhat);
    spmv(a, uhat, au1, s.ctr());
    // v = A u1 + beta (A u2 + beta v); v, A u2 and beta start at zero.
    xpay(au2, beta, v, s.ctr());
    xpay(au1, beta, v, s.ctr());
    const double sigma = dot(rtilde, v, s.ctr());
    if (!finite(sigma) || std::abs(sigma) <= tol * rref * wnorm)
      return (s.abort_iteration(), s.finish(SolveStatus::Breakdown, it - 1));
    const double alpha = rho / sigma;
    u2 = u1;
    axpy(-alpha, v, u2, s.ctr());

    half_step(au1, uhat, alpha);
    s.precond(u2, uhat);
    spmv(a, uhat, au2, s.ctr());
    half_step(au2, uhat, alpha);
    s.invalidate();

    // History carries the quasi-residual norm, which never increases; the
    // bound tau*sqrt(m+1) on the true residual decides when to confirm.
    const double bound =
        tau * std::sqrt(2.0 * (it - cycle_start) + 1.0) / s.bnorm();
    s.record(tau / s.bnorm());
    if (!finite(bound)) return s.finish(SolveStatus::Breakdown, it);
    if (bound <= opts.rtol) {
      Vector check(n);
      if (s.confirm(check)) return s.finish(SolveStatus::Converged, it);
      // The recurrence drifted from the true residual: restart from it.
      cycle_start = it;
      rtilde = w = u1 = check;
      tau = wnorm = rref = norm2(check);
      rho = tau * tau;
      theta = eta = beta = 0.0;
      for (Vector* z : {&v, &au2, &d}) std::fill(z->begin(), z->end(), 0.0);
      if (s.stagnated(static_cast<std::size_t>(opts.stagnation_window)))
        return s.finish(SolveStatus::Stagnated, it);
      continue;
    }
    if (s.stagnated(static_cast<std::size_t>(opts.stagnation_window)))
      return s.finish(SolveStatus::Stagnated, it);

    const double rho_new = dot(rtilde, w, s.ctr());
    if (!finite(rho_new) || std::abs(rho_new) <= tol * rref * wnorm)
      return s.finish(SolveStatus::Breakdown, it);
    beta = rho_new / rho;
    rho = rho_new;
    u1 = w;
    axpy(beta, u2, u1, s.ctr());
  }
  return s.finish(SolveStatus::MaxIter, opts.max_iter);
}

SolveResult qmrcgstab(const CsrMatrix& a, std::span<const double> b,
                      const Preconditioner& m, const SolveOptions& opts) {
  Session s(a, b, m, opts);
  if (s.zero_rhs()) return s.finish_zero_rhs();
  const std::size_t n = s.n();
  const double tol = opts.breakdown_tol;
  Vector r = s.initial_residual();
  Vector rtilde = r;
  const double r0norm = s.r0norm();
  double rref = r0norm;
  int cycle_start = 0;  // iteration of the last restart
  s.record(r0norm / s.bnorm());
  if (r0norm / s.bnorm() <= opts.rtol && s.confirm(r))
    return s.finish(SolveStatus::Converged, 0);

  Vector p(n, 0.0), v(n, 0.0), phat(n), shat(n), t(n), d(n, 0.0);
  double rho_old = 1.0, alpha = 1.0, omega = 1.0;
  double tau = r0norm, theta = 0.0, eta = 0.0;
  double rnorm = r0norm;

  for (int it = 1; it <= opts.max_iter; ++it) {
    s.begin_iteration();
    const double rho = dot(rtilde, r, s.ctr());
    if (!finite(rho) || std::abs(rho) <= tol * rref * rnorm)
      return (s.abort_iteration(), s.finish(SolveStatus::Breakdown, it - 1));
    const double beta = (rho / rho_old) * (alpha / omega);
    axpy(-omega, v, p, s.ctr());
    xpay(r, beta, p, s.ctr());
    s.precond(p, phat);
    spmv(a, phat, v, s.ctr());

    const double sigma = dot(rtilde, v, s.ctr());
    if (!finite(sigma) || std::abs(sigma) <= tol * rref * rnorm)
      return (s.abort_iteration(), s.finish(SolveStatus::Breakdown, it - 1));
    alpha = rho / sigma;
    axpy(-alpha, v, r, s.ctr());  // r now holds s

    // Local quasi-minimization over the BiCG half-step.
    const double snorm = norm2(r, s.ctr());
    const double theta_h = snorm / tau;
    const double c_h = 1.0 / std::sqrt(1.0 + theta_h * theta_h);
    const double tau_h = tau * theta_h * c_h;
    const double eta_h = c_h * c_h * alpha;
    xpay(phat, theta * theta * eta / alpha, d, s.ctr());
    axpy(eta_h, d, s.x(), s.ctr());
    s.invalidate();

    s.precond(r, shat);
    spmv(a, shat, t, s.ctr());
    const double tt = dot(t, t, s.ctr());
    const double ts = dot(r, t, s.ctr());
    omega = tt > 0.0 ? ts / tt : 0.0;
    axpy(-omega, t, r, s.ctr());
    rnorm = norm2(r, s.ctr());

    // Second quasi-minimization over the stabilizing step.
    if (tau_h > 0.0 && omega != 0.0) {
      theta = rnorm / tau_h;
      const double c = 1.0 / std::sqrt(1.0 + theta * theta);
      tau = tau_h * theta * c;
      eta = c * c * omega;
      xpay(shat, theta_h * theta_h * eta_h / omega, d, s.ctr());
      axpy(eta, d, s.x(), s.ctr());
    } else {
      tau = tau_h;
      theta = 0.0;
      eta = 0.0;
    }

    // History carries the quasi-residual norm, which never increases; the
    // bound tau*sqrt(m+1) on the true residual decides when to confirm.
    const double bound =
        tau * std::sqrt(2.0 * (it - cycle_start) + 1.0) / s.bnorm();
    s.record(tau / s.bnorm());
    if (!finite(bound)) return s.finish(SolveStatus::Breakdown, it);
    if (bound <= opts.rtol) {
      Vector check(n);
      if (s.confirm(check)) return s.finish(SolveStatus::Converged, it);
      // The recurrence drifted from the true residual: restart from it.
      cycle_start = it;
      r = std::move(check);
      rtilde = r;
      tau = rnorm = rref = norm2(r);
      theta = eta = 0.0;
      rho_old = alpha = omega = 1.0;
      for (Vector* z : {&p, &v, &d}) std::fill(z->begin(), z->end(), 0.0);
      if (s.stagnated(static_cast<std::size_t>(opts.stagnation_window)))
        return s.finish(SolveStatus::Stagnated, it);
      continue;
    }
    if (!finite(omega) || std::abs(omega) * std::sqrt(tt) <= tol * snorm)
      return s.finish(SolveStatus::Breakdown, it);
    if (s.stagnated(static_cast<std::size_t>(opts.stagnation_window)))
      return s.finish(SolveStatus::Stagnated, it);
    rho_old = rho;
  }
  return s.finish(SolveStatus::MaxIter, opts.max_iter);
}

SolveResult solve(SolverKind kind, const CsrMatrix& a,
                  std::span<const double> b, const Preconditioner& m,
                  const SolveOptions& opts) {
  switch (kind) {
    case SolverKind::Gmres: return gmres_restarted(a, b, m, opts);
    case SolverKind::Bicgstab: return bicgstab(a, b, m, opts);
    case SolverKind::Tfqmr: return tfqmr(a, b, m, opts);
    case SolverKind::Qmrcgstab: return qmrcgstab(a, b, m, opts);
  }
  throw Error(ErrorCode::UnknownSolver, "unknown solver");
}

}  // namespace nsksp
