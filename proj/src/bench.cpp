#include "nsksp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "json.hpp"
#include "nsksp/error.hpp"
#include "nsksp/kernels.hpp"
#include "nsksp/matrix_market.hpp"
#include "nsksp/solvers.hpp"

namespace nsksp {

// ---------------------------------------------------------------------------
// Cost model

std::int64_t flop_model(SolverKind solver, std::int64_t n, double ell, int k) {
  if (n < 1 || !(ell >= 1.0) || k < 1)
    throw Error(ErrorCode::InvalidArgument, "flop_model needs n, ell, k >= 1");
  const double nn = static_cast<double>(n);
  double flops = 0.0;
  switch (solver) {
    case SolverKind::Gmres: flops = 2.0 * nn * (ell + 2.0 * k + 2.0); break;
    case SolverKind::Bicgstab: flops = 4.0 * nn * (ell + 5.0); break;
    case SolverKind::Tfqmr:
    case SolverKind::Qmrcgstab: flops = 4.0 * nn * (ell + 7.0); break;
  }
  return std::llround(flops);
}

std::int64_t flop_model(std::string_view solver, std::int64_t n, double ell,
                        int k) {
  const auto kind = parse_solver_kind(solver);
  if (!kind)
    throw Error(ErrorCode::UnknownSolver, "unknown solver '" +
                                              std::string(solver) + "'");
  return flop_model(*kind, n, ell, k);
}

int stored_vectors(SolverKind solver, int k) {
  switch (solver) {
    case SolverKind::Gmres: return k + 5;
    case SolverKind::Bicgstab: return 10;
    case SolverKind::Tfqmr: return 8;
    case SolverKind::Qmrcgstab: return 13;
  }
  return 0;
}

OpsPerIteration modeled_ops(SolverKind solver, int k) {
  switch (solver) {
    case SolverKind::Gmres: return {1, k + 1, k + 1};
    case SolverKind::Bicgstab: return {2, 6, 4};
    case SolverKind::Tfqmr: return {2, 10, 4};
    case SolverKind::Qmrcgstab: return {2, 8, 6};
  }
  return {0, 0, 0};
}

ModeledTotals modeled_totals(SolverKind solver, std::int64_t n, double ell,
                             int iterations, int restart) {
  ModeledTotals t;
  for (int i = 0; i < iterations; ++i) {
    const int k = solver == SolverKind::Gmres ? i % restart + 1 : 1;
    const auto ops = modeled_ops(solver, k);
    t.axpys += ops.axpys;
    t.dots += ops.dots;
    t.flops += flop_model(solver, n, std::max(ell, 1.0), k);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Cases

std::string MatrixSource::label() const {
  if (matrix_path) return matrix_path->filename().string();
  if (problem) {
    std::string s(to_string(problem->family));
    s += "-" + std::to_string(problem->n_per_dim);
    if (rhs == RhsKind::Ones) s += "-onesrhs";
    return s;
  }
  return "unknown";
}

std::string CaseRecord::status_label() const {
  return ok() ? std::string(to_string(report.status)) : std::string("Error");
}

bool CaseRecord::audit_passes() const noexcept {
  if (!ok()) return false;
  const int it = report.iterations;
  if (it == 0) return true;
  const auto per = modeled_ops(config.solver, 1).matvecs;
  if (report.counters.matvecs != static_cast<std::int64_t>(per) * it) return false;
  return std::abs(measured_axpys_per_iter - modeled_axpys_per_iter) <= 2.0 &&
         std::abs(measured_dots_per_iter - modeled_dots_per_iter) <= 2.0;
}

namespace {

struct LoadedSystem {
  CsrMatrix a;
  Vector b;
  std::optional<Vector> x_exact;
};

LoadedSystem load_system(const MatrixSource& src) {
  LoadedSystem sys;
  if (src.matrix_path) {
    sys.a = read_matrix_market(*src.matrix_path);
    if (src.rhs_path) {
      sys.b = read_vector_market(*src.rhs_path);
      if (sys.b.size() != static_cast<std::size_t>(sys.a.n_rows()))
        throw Error(ErrorCode::DimensionMismatch, "rhs length != n");
    } else if (src.rhs == RhsKind::Ones) {
      sys.b.assign(sys.a.n_rows(), 1.0);
    } else {
      Vector ones(sys.a.n_cols(), 1.0);
      sys.b = spmv(sys.a, ones);
      sys.x_exact = std::move(ones);
    }
    return sys;
  }
  if (!src.problem) throw Error(ErrorCode::ConfigError, "case has no matrix");
  GeneratedProblem p = generate(*src.problem);
  sys.a = std::move(p.a);
  if (src.rhs == RhsKind::Ones) {
    sys.b.assign(sys.a.n_rows(), 1.0);
  } else {
    sys.b = std::move(p.b);
    sys.x_exact = std::move(p.x_exact);
  }
  return sys;
}

}  // namespace

CaseRecord run_case(const CaseConfig& config) {
  CaseRecord rec;
  rec.config = config;
  rec.matrix = config.source.label();
  try {
    const LoadedSystem sys = load_system(config.source);
    rec.n = sys.a.n_rows();
    rec.nnz = sys.a.nnz();
    const auto m = make_preconditioner(sys.a, config.precond);
    SolveResult res = solve(config.solver, sys.a, sys.b, *m, config.options);
    rec.report = std::move(res.report);

    const int it = rec.report.iterations;
    const auto model = modeled_totals(config.solver, rec.n, sys.a.avg_row_nnz(),
                                      it, config.options.restart);
    rec.predicted_flops = model.flops;
    if (it > 0) {
      rec.measured_axpys_per_iter =
          static_cast<double>(rec.report.counters.axpys) / it;
      rec.measured_dots_per_iter =
          static_cast<double>(rec.report.counters.dots) / it;
      rec.modeled_axpys_per_iter = static_cast<double>(model.axpys) / it;
      rec.modeled_dots_per_iter = static_cast<double>(model.dots) / it;
    }
    if (succeeded(rec.report.status))
      rec.matvecs_to_converge = rec.report.counters.matvecs;
    if (sys.x_exact) {
      const double xn = norm_inf(*sys.x_exact);
      double err = 0.0;
      for (std::size_t i = 0; i < res.x.size(); ++i)
        err = std::max(err, std::abs(res.x[i] - (*sys.x_exact)[i]));
      rec.solution_error = xn > 0.0 ? err / xn : err;
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.report = SolveReport{};
  }
  return rec;
}

std::vector<CaseRecord> run_suite(const std::vector<CaseConfig>& configs,
                                  bool parallel) {
  std::set<std::string> ids;
  for (const auto& c : configs)
    if (!ids.insert(c.case_id).second)
      throw Error(ErrorCode::ConfigError, "duplicate case_id '" + c.case_id + "'");

  std::vector<CaseRecord> records(configs.size());
  if (parallel && configs.size() > 1) {
    const unsigned workers = std::max(
        1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                               static_cast<unsigned>(configs.size())));
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++)
          records[i] = run_case(configs[i]);
      });
    pool.clear();
    for (auto& r : records) r.timing_comparable = workers == 1;
  } else {
    for (std::size_t i = 0; i < configs.size(); ++i)
      records[i] = run_case(configs[i]);
  }
  std::sort(records.begin(), records.end(),
            [](const CaseRecord& a, const CaseRecord& b) {
              return a.config.case_id < b.config.case_id;
            });
  return records;
}

// ---------------------------------------------------------------------------
// Suite configuration

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

ProblemSpec parse_problem(const json& j) {
  const std::string fam = j.value("family", std::string("fd2d"));
  const auto family = parse_problem_family(fam);
  if (!family) config_error("unknown problem family '" + fam + "'");
  ProblemSpec spec = ProblemSpec::defaults(*family, j.value("n", 32));
  if (j.contains("c")) spec.c = j.at("c").get<std::vector<double>>();
  spec.d = j.value("d", spec.d);
  spec.stretch = j.value("stretch", spec.stretch);
  if (j.contains("scheme")) {
    const auto s = parse_scheme(j.at("scheme").get<std::string>());
    if (!s) config_error("unknown scheme");
    spec.scheme = *s;
  }
  if (j.contains("pattern")) {
    const std::string p = j.at("pattern").get<std::string>();
    if (p == "ones")
      spec.pattern = SolutionPattern::Ones;
    else if (p == "sinsin")
      spec.pattern = SolutionPattern::SinSin;
    else
      config_error("unknown pattern '" + p + "'");
  }
  return spec;
}

void apply_settings(const json& j, CaseConfig& c) {
  if (j.contains("solver")) {
    const std::string s = j.at("solver").get<std::string>();
    const auto k = parse_solver_kind(s);
    if (!k) config_error("unknown solver '" + s + "'");
    c.solver = *k;
  }
  if (j.contains("precond")) {
    const std::string p = j.at("precond").get<std::string>();
    const auto k = parse_precond_kind(p);
    if (!k) config_error("unknown preconditioner '" + p + "'");
    c.precond.kind = *k;
  }
  c.precond.omega = j.value("omega", c.precond.omega);
  c.precond.amg.theta = j.value("theta", c.precond.amg.theta);
  c.precond.amg.strong_threshold =
      j.value("strong_threshold", c.precond.amg.strong_threshold);
  c.precond.ilu_pivot_shift = j.value("ilu_pivot_shift", c.precond.ilu_pivot_shift);
  c.options.rtol = j.value("rtol", c.options.rtol);
  c.options.max_iter = j.value("max_iter", c.options.max_iter);
  c.options.restart = j.value("restart", c.options.restart);
  if (j.contains("matrix")) c.source.matrix_path = j.at("matrix").get<std::string>();
  if (j.contains("rhs")) {
    const std::string r = j.at("rhs").get<std::string>();
    if (r == "ones")
      c.source.rhs = RhsKind::Ones;
    else if (r == "manufactured")
      c.source.rhs = RhsKind::Manufactured;
    else
      c.source.rhs_path = r;
  }
  if (j.contains("problem")) c.source.problem = parse_problem(j.at("problem"));
}

}  // namespace

std::vector<CaseConfig> parse_suite_config(std::istream& in) {
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  std::vector<CaseConfig> cases;
  try {
    CaseConfig base;
    if (root.contains("defaults")) apply_settings(root.at("defaults"), base);
    for (const auto& jc : root.value("cases", json::array())) {
      CaseConfig c = base;
      apply_settings(jc, c);
      if (!jc.contains("id")) config_error("case without an id");
      c.case_id = jc.at("id").get<std::string>();
      cases.push_back(std::move(c));
    }
    // A grid expands into one case per solver x preconditioner pair.
    for (const auto& jg : root.value("grids", json::array())) {
      CaseConfig g = base;
      apply_settings(jg, g);
      const std::string prefix = jg.value("id", g.source.label());
      for (const auto& s : jg.at("solvers"))
        for (const auto& p : jg.at("preconds")) {
          CaseConfig c = g;
          apply_settings(json{{"solver", s}, {"precond", p}}, c);
          c.case_id = prefix + "-" + s.get<std::string>() + "-" +
                      p.get<std::string>();
          cases.push_back(std::move(c));
        }
    }
  } catch (const json::exception& e) {
    config_error(std::string("bad suite entry: ") + e.what());
  }
  for (const auto& c : cases)
    if (!c.source.matrix_path && !c.source.problem)
      config_error("case '" + c.case_id + "' names neither matrix nor problem");
  return cases;
}

std::vector<CaseConfig> load_suite_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_suite_config(in);
}

// ---------------------------------------------------------------------------
// Scalability

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "slope needs >= 2 points");
  double mx = 0.0, my = 0.0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / k;
    my += std::log(y[i]) / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

SweepResult scalability_sweep(ProblemFamily family, std::vector<int> sizes,
                              SolverKind solver, const PrecondConfig& precond,
                              const SolveOptions& options) {
  const int first = sizes.empty() ? 2 : std::max(sizes.front(), 2);
  return scalability_sweep(ProblemSpec::defaults(family, first),
                           std::move(sizes), solver, precond, options);
}

SweepResult scalability_sweep(const ProblemSpec& base, std::vector<int> sizes,
                              SolverKind solver, const PrecondConfig& precond,
                              const SolveOptions& options) {
  if (sizes.size() < 3 || !std::is_sorted(sizes.begin(), sizes.end()) ||
      std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end())
    throw Error(ErrorCode::InvalidArgument,
                "sweep needs at least three increasing sizes");
  SweepResult out;
  std::vector<double> ns, secs;
  const SweepRow* prev = nullptr;
  for (int size : sizes) {
    CaseConfig c;
    c.case_id = std::to_string(size);
    c.source.problem = base;
    c.source.problem->n_per_dim = size;
    c.solver = solver;
    c.precond = precond;
    c.options = options;
    const CaseRecord rec = run_case(c);
    SweepRow row;
    row.n_per_dim = size;
    row.n = rec.n;
    row.iterations = rec.report.iterations;
    row.matvecs = rec.report.counters.matvecs;
    row.seconds = rec.report.setup_seconds + rec.report.solve_seconds;
    row.status = rec.status_label();
    row.ok = rec.converged();
    out.rows.push_back(row);
    if (row.ok) {
      ns.push_back(row.n);
      secs.push_back(std::max(row.seconds, 1e-9));
      if (prev != nullptr && prev->iterations > 0)
        out.iteration_ratios.push_back(static_cast<double>(row.iterations) /
                                       prev->iterations);
      prev = &out.rows.back();
    }
  }
  out.slope = ns.size() >= 2 ? loglog_slope(ns, secs) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit_history_csv(const CaseRecord& record, std::ostream& out) {
  out << kHistoryHeader << '\n';
  for (const auto& h : record.report.history)
    out << h.matvecs << ',' << format_double(h.relres) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "history write failed");
}

void emit_history_csv(const CaseRecord& record,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  emit_history_csv(record, out);
}

void emit_summary_csv(const std::vector<CaseRecord>& records,
                      std::ostream& out) {
  out << kSummaryHeader << '\n';
  for (const auto& r : records) {
    const auto& rep = r.report;
    out << r.config.case_id << ',' << r.matrix << ',' << r.n << ',' << r.nnz
        << ',' << to_string(r.config.solver) << ','
        << to_string(r.config.precond.kind) << ',' << r.status_label() << ','
        << rep.iterations << ',' << rep.counters.matvecs << ','
        << format_double(rep.recurrence_relres()) << ','
        << format_double(rep.true_relres) << ','
        << format_double(rep.setup_seconds) << ','
        << format_double(rep.solve_seconds) << ',' << r.predicted_flops << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "summary write failed");
}

void emit_summary_csv(const std::vector<CaseRecord>& records,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  emit_summary_csv(records, out);
}

void emit_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  out << kSweepHeader << '\n';
  for (const auto& r : sweep.rows)
    out << r.n << ',' << r.iterations << ',' << r.matvecs << ','
        << format_double(r.seconds) << '\n';
}

}  // namespace nsksp
