#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>
#include <unistd.h>

#include "nsksp/bench.hpp"
#include "nsksp/error.hpp"
#include "nsksp/matrix_market.hpp"
#include "oracles.hpp"

using namespace nsksp;
namespace fs = std::filesystem;

namespace {

ProblemSpec poisson(int n) {
  auto s = ProblemSpec::defaults(ProblemFamily::Fd2d, n);
  s.c = {0, 0};
  return s;
}

CaseConfig make_case(std::string id, ProblemSpec spec, SolverKind solver, PrecondKind pk) {
  CaseConfig c;
  c.case_id = std::move(id);
  c.source.problem = std::move(spec);
  c.solver = solver;
  c.precond.kind = pk;
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Drops the setup_s and solve_s columns of a summary row.
std::string without_timing(const std::string& row) {
  std::vector<std::string> f;
  std::istringstream in(row);
  for (std::string x; std::getline(in, x, ',');) f.push_back(x);
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (i != 11 && i != 12) out += f[i] + ",";
  return out;
}

fs::path temp_dir() {
  const auto d = fs::temp_directory_path() / ("nsksp_bench_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("flop model closed forms") {
  CHECK(flop_model(SolverKind::Gmres, 100, 5, 1) == 1800);
  CHECK(flop_model(SolverKind::Bicgstab, 100, 5, 1) == 4000);
  CHECK(flop_model(SolverKind::Tfqmr, 100, 5, 1) == 4800);
  CHECK(flop_model(SolverKind::Qmrcgstab, 100, 5, 1) == 4800);
  CHECK(flop_model("gmres", 1000, 4.875, 30) == 2 * 1000 * (4.875 + 62));
  CHECK(stored_vectors(SolverKind::Gmres, 30) == 35);
  CHECK(stored_vectors(SolverKind::Qmrcgstab, 1) == 13);
  CHECK(stored_vectors(SolverKind::Bicgstab, 1) == 10);
  CHECK(stored_vectors(SolverKind::Tfqmr, 1) == 8);
  try {
    flop_model("cgs", 10, 5, 1);
    FAIL("expected UnknownSolver");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownSolver);
  }
  CHECK_THROWS_AS(flop_model(SolverKind::Gmres, 0, 5, 1), Error);
  CHECK_THROWS_AS(flop_model(SolverKind::Gmres, 10, 0.5, 1), Error);
  CHECK_THROWS_AS(flop_model(SolverKind::Gmres, 10, 5, 0), Error);
}

TEST_CASE("modeled totals follow the restart cycle") {
  const auto t = modeled_totals(SolverKind::Gmres, 10, 5, 4, 3);
  // k runs 1,2,3,1.
  CHECK(t.axpys == 2 + 3 + 4 + 2);
  CHECK(t.dots == 2 + 3 + 4 + 2);
  CHECK(t.flops == 2 * 10 * ((5 + 4) + (5 + 6) + (5 + 8) + (5 + 4)));
}

TEST_CASE("run_case: Poisson 32x32 with gmres + ilu0") {
  const auto r = run_case(make_case("p", poisson(32), SolverKind::Gmres, PrecondKind::Ilu0));
  REQUIRE(r.ok());
  CHECK(r.report.status == SolveStatus::Converged);
  CHECK(r.report.true_relres <= 1e-9);
  CHECK(r.matvecs_to_converge == r.report.counters.matvecs);
  CHECK(r.predicted_flops > 0);
  CHECK(r.audit_passes());
  REQUIRE(r.solution_error.has_value());
  CHECK(*r.solution_error <= 1e-7);
  CHECK(r.report.setup_seconds >= 0.0);
}

TEST_CASE("run_case: singular Neumann system does not abort") {
  auto spec = ProblemSpec::defaults(ProblemFamily::HelmholtzNonuniform2d, 10);
  spec.d = 0.0;
  for (auto k : {SolverKind::Gmres, SolverKind::Bicgstab, SolverKind::Tfqmr,
                 SolverKind::Qmrcgstab}) {
    auto c = make_case("s", spec, k, PrecondKind::Jacobi);
    c.source.rhs = RhsKind::Ones;
    c.options.max_iter = 4000;
    const auto r = run_case(c);
    CAPTURE(to_string(k));
    CHECK(r.ok());
    CHECK((r.report.status == SolveStatus::Breakdown ||
           r.report.status == SolveStatus::Stagnated));
    CHECK(r.matvecs_to_converge == -1);
  }
}

TEST_CASE("run_case: preconditioner failures land in the record") {
  const auto dir = temp_dir();
  const std::vector<Triplet> t{{0, 0, 1}, {1, 0, 1}, {0, 1, 1}};
  write_matrix_market(CsrMatrix::from_triplets(t, 2, 2), dir / "nodiag.mtx");
  CaseConfig c;
  c.case_id = "e";
  c.source.matrix_path = dir / "nodiag.mtx";
  c.precond.kind = PrecondKind::Jacobi;
  const auto r = run_case(c);
  CHECK_FALSE(r.ok());
  CHECK(r.status_label() == "Error");
  CHECK(r.error.find("ZeroDiagonal") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("run_case: identity matrix from a file") {
  const auto dir = temp_dir();
  write_matrix_market(CsrMatrix::identity(7), dir / "id.mtx");
  for (auto k : {SolverKind::Gmres, SolverKind::Bicgstab, SolverKind::Tfqmr,
                 SolverKind::Qmrcgstab}) {
    CaseConfig c;
    c.case_id = "id";
    c.source.matrix_path = dir / "id.mtx";
    c.solver = k;
    const auto r = run_case(c);
    CHECK(r.converged());
    CHECK(r.report.iterations == 1);
    CHECK(r.matrix == "id.mtx");
  }
  CaseConfig missing;
  missing.case_id = "missing";
  missing.source.matrix_path = dir / "nope.mtx";
  CHECK_FALSE(run_case(missing).ok());
  fs::remove_all(dir);
}

TEST_CASE("run_suite: empty, grid and duplicates") {
  std::ostringstream empty;
  emit_summary_csv(run_suite({}), empty);
  CHECK(empty.str() == std::string(kSummaryHeader) + "\n");

  std::vector<CaseConfig> cfgs;
  for (auto k : {SolverKind::Qmrcgstab, SolverKind::Gmres, SolverKind::Bicgstab,
                 SolverKind::Tfqmr})
    for (auto p : {PrecondKind::Ilu0, PrecondKind::Jacobi, PrecondKind::SaAmg})
      cfgs.push_back(make_case(std::string(to_string(k)) + "-" + std::string(to_string(p)),
                               poisson(12), k, p));
  const auto recs = run_suite(cfgs);
  REQUIRE(recs.size() == 12);
  for (std::size_t i = 1; i < recs.size(); ++i)
    CHECK(recs[i - 1].config.case_id < recs[i].config.case_id);
  std::ostringstream csv;
  emit_summary_csv(recs, csv);
  CHECK(lines(csv.str()).size() == 13);
  for (const auto& r : recs) {
    CAPTURE(r.config.case_id);
    CHECK(r.converged());
    CHECK(r.audit_passes());
    CHECK(r.timing_comparable);
  }

  auto dup = cfgs;
  dup.push_back(cfgs.front());
  try {
    run_suite(dup);
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
}

TEST_CASE("suites are deterministic apart from timing, and parallel runs match") {
  std::vector<CaseConfig> cfgs;
  cfgs.push_back(make_case("a", poisson(10), SolverKind::Gmres, PrecondKind::GaussSeidel));
  cfgs.push_back(make_case("b", poisson(10), SolverKind::Tfqmr, PrecondKind::Ilu0));
  auto sing = ProblemSpec::defaults(ProblemFamily::HelmholtzNonuniform2d, 8);
  sing.d = 0.0;
  cfgs.push_back(make_case("c", sing, SolverKind::Bicgstab, PrecondKind::Identity));
  cfgs.back().source.rhs = RhsKind::Ones;
  std::ostringstream s1, s2, s3;
  emit_summary_csv(run_suite(cfgs), s1);
  emit_summary_csv(run_suite(cfgs), s2);
  const auto par = run_suite(cfgs, true);
  emit_summary_csv(par, s3);
  const auto l1 = lines(s1.str()), l2 = lines(s2.str()), l3 = lines(s3.str());
  REQUIRE(l1.size() == 4);
  for (std::size_t i = 0; i < l1.size(); ++i) {
    CHECK(without_timing(l1[i]) == without_timing(l2[i]));
    CHECK(without_timing(l1[i]) == without_timing(l3[i]));
  }
  // Per-case isolation: the singular case does not perturb its neighbours.
  const auto alone = run_case(cfgs[0]);
  CHECK(alone.report.history.size() == par[0].report.history.size());
  CHECK(alone.report.true_relres == par[0].report.true_relres);
}

TEST_CASE("history and summary CSV") {
  const auto r = run_case(make_case("h", poisson(16), SolverKind::Bicgstab, PrecondKind::Ilu0));
  std::ostringstream out;
  emit_history_csv(r, out);
  const auto l = lines(out.str());
  REQUIRE(l.size() >= 3);
  CHECK(l[0] == "matvecs,relres");
  long prev = -1;
  double last = 0;
  for (std::size_t i = 1; i < l.size(); ++i) {
    const auto comma = l[i].find(',');
    const long mv = std::stol(l[i].substr(0, comma));
    CHECK(mv > prev);
    prev = mv;
    last = std::stod(l[i].substr(comma + 1));
  }
  CHECK(last <= r.config.options.rtol);
  CHECK_THROWS_AS(emit_history_csv(r, fs::path("/nonexistent/dir/h.csv")), Error);
  CHECK_THROWS_AS(emit_summary_csv({r}, fs::path("/nonexistent/dir/s.csv")), Error);
}

TEST_CASE("shortest round-trip formatting") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng) * std::pow(10.0, i % 40 - 20);
    const std::string s = format_double(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(1e-10) == "1e-10");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(30) == "30");
}

TEST_CASE("log-log slope") {
  const std::vector<double> n{1024, 4096, 16384, 65536};
  std::vector<double> t;
  for (double x : n) t.push_back(3.7e-6 * x);
  CHECK(std::abs(loglog_slope(n, t) - 1.0) <= 1e-12);
  std::vector<double> q;
  for (double x : n) q.push_back(x * x);
  CHECK(loglog_slope(n, q) == doctest::Approx(2.0));
  CHECK_THROWS_AS(loglog_slope(std::vector<double>{1}, std::vector<double>{1}), Error);
}

TEST_CASE("scalability sweep shape and validation") {
  PrecondConfig pc;
  pc.kind = PrecondKind::Ilu0;
  const auto s = scalability_sweep(ProblemFamily::Fd2d, {8, 12, 16}, SolverKind::Gmres, pc);
  REQUIRE(s.rows.size() == 3);
  CHECK(s.rows[0].n == 64);
  CHECK(s.rows[2].n == 256);
  CHECK(s.iteration_ratios.size() == 2);
  std::ostringstream out;
  emit_sweep_csv(s, out);
  CHECK(lines(out.str()).front() == "n,iterations,matvecs,seconds");
  CHECK(lines(out.str()).size() == 4);
  CHECK_THROWS_AS(scalability_sweep(ProblemFamily::Fd2d, {8, 12}, SolverKind::Gmres, pc), Error);
  CHECK_THROWS_AS(scalability_sweep(ProblemFamily::Fd2d, {8, 16, 12}, SolverKind::Gmres, pc),
                  Error);
}

TEST_CASE("suite configuration parsing") {
  std::istringstream in(R"({
    "defaults": {"rtol": 1e-8, "restart": 20, "problem": {"family": "fd2d", "n": 8}},
    "cases": [
      {"id": "one", "solver": "bicgstab", "precond": "sor", "omega": 1.2},
      {"id": "two", "problem": {"family": "helmholtz2d", "n": 10, "d": 0}, "rhs": "ones",
       "precond": "c-amg", "strong_threshold": 0.8}
    ],
    "grids": [{"id": "g", "solvers": ["gmres", "tfqmr"], "preconds": ["none", "ilu0", "gs"]}]
  })");
  const auto cfgs = parse_suite_config(in);
  REQUIRE(cfgs.size() == 8);
  CHECK(cfgs[0].case_id == "one");
  CHECK(cfgs[0].solver == SolverKind::Bicgstab);
  CHECK(cfgs[0].precond.kind == PrecondKind::Sor);
  CHECK(cfgs[0].precond.omega == 1.2);
  CHECK(cfgs[0].options.rtol == 1e-8);
  CHECK(cfgs[0].options.restart == 20);
  CHECK(cfgs[0].source.problem->n_per_dim == 8);
  CHECK(cfgs[1].source.problem->family == ProblemFamily::HelmholtzNonuniform2d);
  CHECK(cfgs[1].source.problem->d == 0.0);
  CHECK(cfgs[1].source.rhs == RhsKind::Ones);
  CHECK(cfgs[1].precond.amg.strong_threshold == 0.8);
  CHECK(cfgs[2].case_id == "g-gmres-none");
  CHECK(cfgs[7].case_id == "g-tfqmr-gs");

  auto code = [](const std::string& text) {
    std::istringstream s(text);
    try {
      parse_suite_config(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code("{") == ErrorCode::ConfigError);
  CHECK(code(R"({"cases": [{"id": "x", "solver": "cgs", "problem": {}}]})") ==
        ErrorCode::ConfigError);
  CHECK(code(R"({"cases": [{"id": "x"}]})") == ErrorCode::ConfigError);
  CHECK(code(R"({"cases": [{"problem": {}}]})") == ErrorCode::ConfigError);
  CHECK(code(R"({"cases": [{"id": "x", "problem": {"family": "mesh"}}]})") ==
        ErrorCode::ConfigError);
  CHECK_THROWS_AS(load_suite_config("/nonexistent.json"), Error);
}
