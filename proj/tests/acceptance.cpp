// Acceptance suite: one PASS/FAIL line per criterion on stdout, details on
// stderr. Exit status is non-zero when any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"
#include "nsksp/amg.hpp"
#include "nsksp/bench.hpp"
#include "nsksp/ilu0.hpp"
#include "nsksp/kernels.hpp"
#include "nsksp/preconditioner.hpp"
#include "nsksp/problems.hpp"
#include "nsksp/solvers.hpp"
#include "oracles.hpp"

using namespace nsksp;

namespace {

constexpr std::array<SolverKind, 4> kSolvers{SolverKind::Gmres, SolverKind::Bicgstab,
                                             SolverKind::Tfqmr, SolverKind::Qmrcgstab};

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every solve made by this binary, for the matvec and residual-fidelity audits.
struct SolveLog {
  std::string label;
  SolverKind solver;
  SolveReport report;
  double rtol;
};
std::vector<SolveLog> g_solves;

void log_solve(std::string label, SolverKind k, const SolveReport& r, double rtol) {
  g_solves.push_back({std::move(label), k, r, rtol});
}

SolveResult tracked(const std::string& label, SolverKind k, const CsrMatrix& a,
                    const Vector& b, const Preconditioner& m, const SolveOptions& o = {}) {
  SolveResult r = solve(k, a, b, m, o);
  log_solve(label, k, r.report, o.rtol);
  return r;
}

CaseRecord tracked_case(const CaseConfig& c) {
  CaseRecord r = run_case(c);
  if (r.ok()) log_solve(c.case_id, c.solver, r.report, c.options.rtol);
  return r;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

ProblemSpec poisson(int n) {
  auto s = ProblemSpec::defaults(ProblemFamily::Fd2d, n);
  s.c = {0, 0};
  // b = A * ones; the sine pattern is an exact eigenvector of this operator.
  s.pattern = SolutionPattern::Ones;
  return s;
}

int per_iteration(SolverKind k) { return k == SolverKind::Gmres ? 1 : 2; }

// --------------------------------------------------------------------------

Outcome matvec_contract() {
  // Dedicated sweep over every solver/preconditioner pair, then every solve
  // made anywhere else in this run.
  for (const auto& spec : {poisson(24), ProblemSpec::defaults(ProblemFamily::Fd2d, 24),
                           ProblemSpec::defaults(ProblemFamily::HelmholtzNonuniform2d, 20)}) {
    const auto p = generate(spec);
    for (auto pk : {PrecondKind::Identity, PrecondKind::Jacobi, PrecondKind::GaussSeidel,
                    PrecondKind::Sor, PrecondKind::Ilu0, PrecondKind::SaAmg,
                    PrecondKind::ClassicalAmg}) {
      PrecondConfig cfg;
      cfg.kind = pk;
      cfg.omega = pk == PrecondKind::Sor ? 1.4 : 1.0;
      const auto m = make_preconditioner(p.a, cfg);
      SolveOptions o;
      o.max_iter = 3000;
      for (auto k : kSolvers) tracked("c1", k, p.a, p.b, *m, o);
    }
  }
  std::size_t bad = 0;
  std::int64_t iters = 0;
  for (const auto& s : g_solves) {
    iters += s.report.iterations;
    if (s.report.counters.matvecs != std::int64_t{per_iteration(s.solver)} * s.report.iterations) {
      ++bad;
      std::cerr << "  matvec contract violated: " << s.label << " " << to_string(s.solver)
                << " matvecs=" << s.report.counters.matvecs
                << " iterations=" << s.report.iterations << "\n";
    }
  }
  return {bad == 0, std::to_string(g_solves.size()) + " solves, " + std::to_string(iters) +
                        " iterations, " + std::to_string(bad) + " violations"};
}

Outcome cost_table_audit() {
  bool ok = true;
  std::ostringstream d;
  for (auto k : kSolvers) {
    CaseConfig c;
    c.case_id = "c2-" + std::string(to_string(k));
    c.source.problem = poisson(64);
    c.solver = k;
    c.precond.kind = PrecondKind::Ilu0;
    const auto r = tracked_case(c);
    const bool conv = r.converged();
    const bool mv = r.report.counters.matvecs ==
                    std::int64_t{per_iteration(k)} * r.report.iterations;
    const double da = std::abs(r.measured_axpys_per_iter - r.modeled_axpys_per_iter);
    const double dd = std::abs(r.measured_dots_per_iter - r.modeled_dots_per_iter);
    const bool pass = conv && mv && da <= 2.0 && dd <= 2.0 && r.audit_passes();
    ok = ok && pass;
    d << to_string(k) << "(it=" << r.report.iterations << " axpy " << fmt(r.measured_axpys_per_iter)
      << "/" << fmt(r.modeled_axpys_per_iter) << " dot " << fmt(r.measured_dots_per_iter) << "/"
      << fmt(r.modeled_dots_per_iter) << ") ";
  }
  // Closed forms at integer arguments.
  for (std::int64_t n : {1, 7, 100, 4096, 1000000})
    for (int ell : {1, 5, 7, 27})
      for (int k : {1, 2, 15, 30}) {
        ok = ok && flop_model(SolverKind::Gmres, n, ell, k) == 2 * n * (ell + 2 * k + 2);
        ok = ok && flop_model(SolverKind::Bicgstab, n, ell, k) == 4 * n * (ell + 5);
        ok = ok && flop_model(SolverKind::Tfqmr, n, ell, k) == 4 * n * (ell + 7);
        ok = ok && flop_model(SolverKind::Qmrcgstab, n, ell, k) == 4 * n * (ell + 7);
      }
  d << "flop model closed forms checked";
  return {ok, d.str()};
}

Outcome oracle_equivalence() {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> dim(5, 50);
  std::uniform_real_distribution<double> val(-1, 1);
  struct Sys {
    std::string name;
    CsrMatrix a;
    Vector b;
  };
  std::vector<Sys> systems;
  for (int i = 0; i < 20; ++i) {
    const int n = dim(rng);
    Sys s{"random" + std::to_string(i), oracle::random_diag_dominant(n, 0.2, rng), Vector(n)};
    for (auto& x : s.b) x = val(rng);
    systems.push_back(std::move(s));
  }
  for (int n : {8, 20, 32}) {
    const auto p = generate(poisson(n));
    systems.push_back({"poisson" + std::to_string(n), p.a, p.b});
  }
  const auto cd = generate(ProblemSpec::defaults(ProblemFamily::Fd2d, 16));
  systems.push_back({"convdiff16", cd.a, cd.b});

  int converged = 0, total = 0, bad = 0;
  double worst = 0;
  for (const auto& s : systems) {
    const oracle::LuFactor lu(oracle::to_dense(s.a));
    const Vector ref = lu.solve(s.b);
    const double scale = oracle::norm_inf(ref);
    for (auto pk : {PrecondKind::Identity, PrecondKind::Jacobi, PrecondKind::GaussSeidel,
                    PrecondKind::Ilu0}) {
      PrecondConfig cfg;
      cfg.kind = pk;
      const auto m = make_preconditioner(s.a, cfg);
      for (auto k : kSolvers) {
        ++total;
        const auto r = tracked("c3-" + s.name, k, s.a, s.b, *m);
        if (r.report.status != SolveStatus::Converged) {
          std::cerr << "  c3 not converged (excluded): " << s.name << " " << to_string(k) << "+"
                    << to_string(pk) << " " << to_string(r.report.status) << "\n";
          continue;
        }
        ++converged;
        const double err = oracle::max_diff(r.x, ref) / scale;
        worst = std::max(worst, err);
        if (err > 1e-7) {
          ++bad;
          std::cerr << "  c3 mismatch: " << s.name << " " << to_string(k) << "+" << to_string(pk)
                    << " err=" << err << "\n";
        }
      }
    }
  }
  return {bad == 0 && converged > 0,
          std::to_string(converged) + "/" + std::to_string(total) +
              " pairs converged, worst relative error " + fmt(worst)};
}

Outcome residual_fidelity() {
  int checked = 0, bad = 0;
  double worst = 0;
  for (const auto& s : g_solves) {
    if (s.report.status != SolveStatus::Converged) continue;
    ++checked;
    const double gap = std::abs(s.report.recurrence_relres() - s.report.true_relres);
    worst = std::max(worst, gap / s.rtol);
    if (gap > 10 * s.rtol) {
      ++bad;
      std::cerr << "  residual gap: " << s.label << " " << to_string(s.solver) << " rec="
                << s.report.recurrence_relres() << " true=" << s.report.true_relres << "\n";
    }
  }
  return {bad == 0 && checked > 0, std::to_string(checked) + " converged exits, worst gap " +
                                       fmt(worst) + " x rtol"};
}

Outcome finite_termination() {
  bool ok = true;
  std::ostringstream d;
  d << "iterations for k=1..10:";
  for (int k = 1; k <= 10; ++k) {
    Vector diag;
    for (int i = 0; i < 200; ++i) diag.push_back(1.0 + 0.75 * (i % k));
    const auto a = oracle::diag(diag);
    IdentityPreconditioner m(200);
    SolveOptions o;
    o.restart = 1000;
    const auto r = tracked("c5", SolverKind::Gmres, a, Vector(200, 1.0), m, o);
    const bool pass = r.report.status == SolveStatus::Converged && r.report.iterations <= k;
    ok = ok && pass;
    d << " " << r.report.iterations;
  }
  return {ok, d.str()};
}

Outcome convection_ordering() {
  auto spec = ProblemSpec::defaults(ProblemFamily::Fd2d, 128);
  spec.c = {1, 1};
  spec.scheme = ConvectionScheme::Upwind;
  std::map<PrecondKind, CaseRecord> rec;
  for (auto pk : {PrecondKind::SaAmg, PrecondKind::Ilu0, PrecondKind::GaussSeidel}) {
    CaseConfig c;
    c.case_id = "c6-" + std::string(to_string(pk));
    c.source.problem = spec;
    c.solver = SolverKind::Gmres;
    c.precond.kind = pk;
    rec[pk] = tracked_case(c);
  }
  auto mv = [&](PrecondKind k) {
    return rec[k].converged() ? rec[k].report.counters.matvecs : INT64_MAX;
  };
  const auto sa = mv(PrecondKind::SaAmg), ilu = mv(PrecondKind::Ilu0),
             gs = mv(PrecondKind::GaussSeidel);
  const bool a = sa < ilu && ilu < gs;
  const bool b = sa <= 30;
  const bool c = rec[PrecondKind::GaussSeidel].report.counters.matvecs > 100;
  return {a && b && c, "matvecs sa-amg=" + std::to_string(sa) + " ilu0=" + std::to_string(ilu) +
                           " gs=" + std::to_string(gs) + " (a " + (a ? "ok" : "fail") + ", b " +
                           (b ? "ok" : "fail") + ", c " + (c ? "ok" : "fail") + ")"};
}

double smoothness(const SolveReport& r) {
  double m = 0;
  for (std::size_t i = 1; i < r.history.size(); ++i)
    if (r.history[i - 1].relres > 0) m = std::max(m, r.history[i].relres / r.history[i - 1].relres);
  return m;
}

Outcome helmholtz_behaviour() {
  const auto spec = ProblemSpec::defaults(ProblemFamily::HelmholtzNonuniform2d, 64);
  if (spec.d != 1e-6 || spec.stretch != 1.05) return {false, "unexpected generator defaults"};
  const auto p = generate(spec);
  PrecondConfig ilu;
  ilu.kind = PrecondKind::Ilu0;
  const auto m = make_preconditioner(p.a, ilu);
  const auto bi = tracked("c7", SolverKind::Bicgstab, p.a, p.b, *m);
  const auto qm = tracked("c7", SolverKind::Qmrcgstab, p.a, p.b, *m);
  int increases = 0;
  const auto& h = bi.report.history;
  for (std::size_t i = 1; i < h.size(); ++i) increases += h[i].relres > h[i - 1].relres;
  const double s_bi = smoothness(bi.report), s_qm = smoothness(qm.report);
  const bool part1 = increases >= 1 && s_qm <= s_bi;

  std::map<PrecondKind, CaseRecord> amg;
  for (auto pk : {PrecondKind::ClassicalAmg, PrecondKind::SaAmg}) {
    CaseConfig c;
    c.case_id = "c7-" + std::string(to_string(pk));
    c.source.problem = spec;
    c.solver = SolverKind::Gmres;
    c.precond.kind = pk;
    c.precond.amg.strong_threshold = 0.25;
    amg[pk] = tracked_case(c);
  }
  const auto& ca = amg[PrecondKind::ClassicalAmg];
  const auto& sa = amg[PrecondKind::SaAmg];
  const bool both = ca.converged() && sa.converged();
  const bool ordered = both && ca.report.counters.matvecs < sa.report.counters.matvecs;
  std::string cmp = "c-amg=" + std::to_string(ca.report.counters.matvecs) +
                    " sa-amg=" + std::to_string(sa.report.counters.matvecs) + " matvecs";
  if (!ordered && both) cmp += " [FLAG: ordering not reproduced, both AMG variants converge]";
  return {part1 && both,
          "bicgstab+ilu0 local increases=" + std::to_string(increases) + " smoothness " +
              fmt(s_bi) + ", qmrcgstab+ilu0 smoothness " + fmt(s_qm) + "; " + cmp};
}

Outcome scalability() {
  const auto base = poisson(32);
  PrecondConfig sa, gs;
  sa.kind = PrecondKind::SaAmg;
  gs.kind = PrecondKind::GaussSeidel;
  const auto rs = scalability_sweep(base, {32, 64, 128}, SolverKind::Gmres, sa);
  const auto rg = scalability_sweep(base, {32, 64, 128}, SolverKind::Gmres, gs);
  bool ok = rs.iteration_ratios.size() == 2 && rg.iteration_ratios.size() == 2;
  std::ostringstream d;
  d << "sa-amg iterations";
  for (const auto& r : rs.rows) d << " " << r.iterations;
  d << " ratios";
  for (double x : rs.iteration_ratios) {
    d << " " << fmt(x);
    ok = ok && x <= 1.5;
  }
  d << " (slope " << fmt(rs.slope) << "); gs iterations";
  for (const auto& r : rg.rows) d << " " << r.iterations;
  d << " ratios";
  for (double x : rg.iteration_ratios) {
    d << " " << fmt(x);
    ok = ok && x >= 1.5;
  }
  return {ok, d.str()};
}

Outcome preconditioner_units() {
  bool ok = true;
  std::ostringstream d;
  // ILU(0) versus dense LU on tridiagonal systems.
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> val(-1, 1);
  double ilu_err = 0;
  for (int n : {3, 10, 40, 100}) {
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i) {
      if (i > 0) t.push_back({i, i - 1, val(rng)});
      if (i + 1 < n) t.push_back({i, i + 1, val(rng)});
      t.push_back({i, i, 2.5 + val(rng)});
    }
    const auto a = CsrMatrix::from_triplets(t, n, n);
    oracle::Dense l, u;
    oracle::lu_nopivot(oracle::to_dense(a), l, u);
    const auto f = ilu0_factor(a);
    const auto fl = oracle::to_dense(f.lower), fu = oracle::to_dense(f.upper);
    for (index_t i = 0; i < n; ++i)
      for (index_t j = 0; j < n; ++j) {
        const double lref = i == j ? 0.0 : l(i, j);
        ilu_err = std::max({ilu_err, std::abs(fl(i, j) - lref),
                            std::abs(fu(i, j) - u(i, j)) / std::max(1.0, std::abs(u(i, j)))});
      }
  }
  ok = ok && ilu_err <= 1e-13;
  d << "ilu0 vs LU " << fmt(ilu_err);

  // Galerkin identity on small levels.
  double gal = 0;
  int levels_checked = 0;
  for (const auto& spec : {poisson(32), ProblemSpec::defaults(ProblemFamily::Fd2d, 32),
                           ProblemSpec::defaults(ProblemFamily::HelmholtzNonuniform2d, 30)}) {
    const auto a = generate(spec).a;
    AmgParams prm;
    prm.coarse_size_limit = 8;
    for (const auto& h : {sa_amg_setup(a, prm), rs_amg_setup(a, prm)}) {
      for (std::size_t l = 0; l + 1 < h.num_levels(); ++l) {
        const auto& fine = h.levels()[l];
        if (fine.a.n_rows() > 200) continue;
        const auto pd = oracle::to_dense(fine.p);
        const auto ref = oracle::matmul(oracle::transpose(pd),
                                        oracle::matmul(oracle::to_dense(fine.a), pd));
        const auto got = oracle::to_dense(h.levels()[l + 1].a);
        double err = 0, sc = 0;
        for (std::size_t k = 0; k < ref.a.size(); ++k) {
          err = std::max(err, std::abs(ref.a[k] - got.a[k]));
          sc = std::max(sc, std::abs(ref.a[k]));
        }
        gal = std::max(gal, err / sc);
        ++levels_checked;
      }
    }
  }
  ok = ok && levels_checked > 0 && gal <= 1e-12;
  d << ", Galerkin " << fmt(gal) << " over " << levels_checked << " levels";

  // Stationary V-cycle factor over cycles 10..20 on the 32x32 Laplacian.
  const auto a = generate(poisson(32)).a;
  for (auto kind : {Coarsening::SmoothedAggregation, Coarsening::Classical}) {
    const auto h = kind == Coarsening::Classical ? rs_amg_setup(a) : sa_amg_setup(a);
    Vector b(a.n_rows()), x(a.n_rows(), 0.0), r(a.n_rows()), e(a.n_rows());
    for (auto& v : b) v = val(rng);
    std::vector<double> norms;
    for (int k = 0; k <= 20; ++k) {
      residual(a, x, b, r);
      norms.push_back(norm2(r));
      h.vcycle(r, e);
      axpy(1.0, e, x);
    }
    const double factor = std::pow(norms[20] / norms[10], 0.1);
    ok = ok && factor <= 0.5;
    d << ", " << (kind == Coarsening::Classical ? "c-amg" : "sa-amg") << " V-cycle factor "
      << fmt(factor);
  }
  return {ok, d.str()};
}

Outcome protocol_defaults() {
  const SolveOptions lib;
  bool ok = lib.rtol == 1e-10 && lib.restart == 30 && lib.max_iter == 10000;
  std::string out;
  if (FILE* f = popen(NSKSP_CLI_PATH " defaults", "r")) {
    std::array<char, 256> buf{};
    while (fgets(buf.data(), buf.size(), f)) out += buf.data();
    ok = ok && pclose(f) == 0;
  } else {
    return {false, "could not launch the CLI"};
  }
  try {
    const auto j = nlohmann::json::parse(out);
    ok = ok && j.at("rtol").get<double>() == 1e-10 && j.at("restart").get<int>() == 30 &&
         j.at("max_iter").get<int>() == 10000;
  } catch (const std::exception& e) {
    return {false, std::string("bad CLI output: ") + e.what()};
  }
  return {ok, "library and CLI: rtol 1e-10, restart 30, max_iter 10000"};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  const std::vector<std::pair<int, std::pair<const char*, std::function<Outcome()>>>> plan{
      {2, {"Cost-table audit on 64x64 Poisson", cost_table_audit}},
      {3, {"Oracle equivalence vs dense LU", oracle_equivalence}},
      {5, {"GMRES finite termination on diagonal matrices", finite_termination}},
      {6, {"Convection-diffusion 128x128 preconditioner ordering", convection_ordering}},
      {7, {"Neumann Helmholtz 64x64 behaviour", helmholtz_behaviour}},
      {8, {"Scalability 32^2..128^2", scalability}},
      {9, {"Preconditioner unit properties", preconditioner_units}},
      {10, {"Protocol defaults", protocol_defaults}},
      // These audit every solve made above, so they run last.
      {1, {"Matvecs per iteration (1 gmres, 2 others)", matvec_contract}},
      {4, {"Recurrence vs true residual at convergence", residual_fidelity}},
  };
  std::map<int, std::pair<std::string, Outcome>> results;
  for (const auto& [id, item] : plan) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = item.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    o.detail += " [" + fmt(secs) + " s]";
    std::cerr << "criterion " << id << " done in " << fmt(secs) << " s\n";
    results[id] = {item.first, o};
  }
  int failed = 0;
  for (const auto& [id, r] : results) {
    std::cout << (r.second.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << r.first
              << " -- " << r.second.detail << "\n";
    failed += r.second.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}
