// nsksp command-line harness: gen, solve, suite, sweep, defaults.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nsksp/bench.hpp"
#include "nsksp/error.hpp"
#include "nsksp/matrix_market.hpp"

namespace fs = std::filesystem;
using namespace nsksp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNotConverged = 2;

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad number '" + tok + "'");
    }
  }
  return out;
}

template <class T, class F>
T parse_or_throw(const std::string& id, F parse, const char* what) {
  const auto v = parse(id);
  if (!v) throw Error(ErrorCode::ConfigError, std::string("unknown ") + what + " '" + id + "'");
  return *v;
}

struct GenArgs {
  std::string problem = "fd2d";
  int n = 32;
  std::string c;
  std::optional<double> d;
  std::string scheme;
  std::optional<double> stretch;
  std::string pattern = "sinsin";
  std::string out;
  std::string rhs;
};

int run_gen(const GenArgs& g) {
  const auto fam = parse_or_throw<ProblemFamily>(g.problem, parse_problem_family, "problem");
  ProblemSpec spec = ProblemSpec::defaults(fam, g.n);
  if (!g.c.empty()) spec.c = parse_list(g.c);
  if (g.d) spec.d = *g.d;
  if (g.stretch) spec.stretch = *g.stretch;
  if (!g.scheme.empty())
    spec.scheme = parse_or_throw<ConvectionScheme>(g.scheme, parse_scheme, "scheme");
  if (g.pattern == "ones")
    spec.pattern = SolutionPattern::Ones;
  else if (g.pattern != "sinsin")
    throw Error(ErrorCode::ConfigError, "unknown pattern '" + g.pattern + "'");
  const GeneratedProblem p = generate(spec);
  write_matrix_market(p.a, fs::path(g.out));
  if (!g.rhs.empty()) write_vector_market(p.b, fs::path(g.rhs));
  std::cout << "n=" << p.a.n_rows() << " nnz=" << p.a.nnz() << '\n';
  return kExitOk;
}

struct SolveArgs {
  std::string matrix;
  std::string rhs;
  std::string solver = "gmres";
  std::string precond = "none";
  std::optional<double> omega, theta, strong_threshold;
  SolveOptions options;
  std::string history;
  std::string summary;
};

CaseConfig to_case(const SolveArgs& s) {
  CaseConfig c;
  c.source.matrix_path = s.matrix;
  if (!s.rhs.empty()) c.source.rhs_path = s.rhs;
  c.solver = parse_or_throw<SolverKind>(s.solver, parse_solver_kind, "solver");
  c.precond.kind = parse_or_throw<PrecondKind>(s.precond, parse_precond_kind, "preconditioner");
  if (s.omega) c.precond.omega = *s.omega;
  if (s.theta) c.precond.amg.theta = *s.theta;
  if (s.strong_threshold) c.precond.amg.strong_threshold = *s.strong_threshold;
  c.options = s.options;
  c.case_id = fs::path(s.matrix).stem().string() + "-" + s.solver + "-" + s.precond;
  return c;
}

void print_record(const CaseRecord& r) {
  std::cerr << r.config.case_id << ": " << r.status_label();
  if (!r.ok())
    std::cerr << " (" << r.error << ")";
  else
    std::cerr << " iterations=" << r.report.iterations
              << " matvecs=" << r.report.counters.matvecs
              << " true_relres=" << format_double(r.report.true_relres);
  std::cerr << '\n';
}

int run_solve(const SolveArgs& s) {
  const CaseRecord rec = run_case(to_case(s));
  print_record(rec);
  if (!s.history.empty()) emit_history_csv(rec, fs::path(s.history));
  if (!s.summary.empty())
    emit_summary_csv(std::vector<CaseRecord>{rec}, fs::path(s.summary));
  else
    emit_summary_csv(std::vector<CaseRecord>{rec}, std::cout);
  if (!rec.ok() && rec.error.find("IoError") == 0) return kExitConfig;
  return rec.converged() ? kExitOk : kExitNotConverged;
}

int run_suite_cmd(const std::string& config, const std::string& out_dir,
                  bool parallel) {
  const auto configs = load_suite_config(config);
  const auto records = run_suite(configs, parallel);
  const fs::path dir(out_dir);
  fs::create_directories(dir / "history");
  emit_summary_csv(records, dir / "summary.csv");
  bool all = true;
  nlohmann::json meta;
  meta["parallel"] = parallel;
  meta["cases"] = nlohmann::json::array();
  for (const auto& r : records) {
    print_record(r);
    if (r.ok()) emit_history_csv(r, dir / "history" / (r.config.case_id + ".csv"));
    all = all && r.converged();
    meta["cases"].push_back({{"case_id", r.config.case_id},
                             {"timing_comparable", r.timing_comparable},
                             {"audit_passes", r.audit_passes()},
                             {"error", r.error}});
  }
  std::ofstream(dir / "suite_meta.json") << meta.dump(2) << '\n';
  return all ? kExitOk : kExitNotConverged;
}

int run_sweep(const std::string& problem, const std::string& sizes,
              const std::string& solver, const std::string& precond,
              const std::string& out) {
  std::vector<int> ns;
  for (double v : parse_list(sizes)) ns.push_back(static_cast<int>(v));
  PrecondConfig pc;
  pc.kind = parse_or_throw<PrecondKind>(precond, parse_precond_kind, "preconditioner");
  const SweepResult res = scalability_sweep(
      parse_or_throw<ProblemFamily>(problem, parse_problem_family, "problem"),
      ns, parse_or_throw<SolverKind>(solver, parse_solver_kind, "solver"), pc);
  std::ofstream f(out);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + out);
  emit_sweep_csv(res, f);
  std::cerr << "slope=" << format_double(res.slope);
  for (double r : res.iteration_ratios) std::cerr << " ratio=" << format_double(r);
  std::cerr << '\n';
  bool all = true;
  for (const auto& r : res.rows) all = all && r.ok;
  return all ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Krylov solver benchmark harness"};
  app.require_subcommand(1);

  GenArgs g;
  auto* gen = app.add_subcommand("gen", "Generate a test matrix and right-hand side");
  gen->add_option("--problem", g.problem, "fd2d|fd3d|fem2d|helmholtz2d")->capture_default_str();
  gen->add_option("--n", g.n, "Unknowns per axis")->capture_default_str();
  gen->add_option("--c", g.c, "Convection vector, comma separated");
  gen->add_option("--d", g.d, "Reaction coefficient");
  gen->add_option("--scheme", g.scheme, "centered|upwind");
  gen->add_option("--stretch", g.stretch, "Grid stretching ratio");
  gen->add_option("--pattern", g.pattern, "Manufactured solution: ones|sinsin")->capture_default_str();
  gen->add_option("--out", g.out, "Matrix Market output")->required();
  gen->add_option("--rhs", g.rhs, "Right-hand side output");

  SolveArgs s;
  auto* solve = app.add_subcommand("solve", "Solve one system");
  solve->add_option("--matrix", s.matrix, "Matrix Market file")->required();
  solve->add_option("--rhs", s.rhs, "Right-hand side file (default b = A*ones)");
  solve->add_option("--solver", s.solver, "gmres|bicgstab|tfqmr|qmrcgstab")->capture_default_str();
  solve->add_option("--precond", s.precond, "none|jacobi|gs|sor|ilu0|sa-amg|c-amg")->capture_default_str();
  solve->add_option("--omega", s.omega, "SOR relaxation factor");
  solve->add_option("--theta", s.theta, "Aggregation strength threshold");
  solve->add_option("--strong-threshold", s.strong_threshold, "Classical AMG strength threshold");
  solve->add_option("--rtol", s.options.rtol, "Relative residual tolerance")->capture_default_str();
  solve->add_option("--max-iter", s.options.max_iter, "Iteration limit")->capture_default_str();
  solve->add_option("--restart", s.options.restart, "GMRES restart length")->capture_default_str();
  solve->add_option("--history", s.history, "History CSV output");
  solve->add_option("--summary", s.summary, "Summary CSV output (default stdout)");

  std::string suite_config, suite_out;
  bool parallel = false;
  auto* suite = app.add_subcommand("suite", "Run a suite described by a JSON file");
  suite->add_option("--config", suite_config, "Suite JSON")->required();
  suite->add_option("--out-dir", suite_out, "Output directory")->required();
  suite->add_flag("--parallel", parallel, "Run cases concurrently");

  std::string sw_problem, sw_sizes, sw_solver = "gmres", sw_precond = "sa-amg", sw_out;
  auto* sweep = app.add_subcommand("sweep", "Scalability sweep over grid sizes");
  sweep->add_option("--problem", sw_problem, "Problem family")->required();
  sweep->add_option("--sizes", sw_sizes, "Comma separated unknowns per axis")->required();
  sweep->add_option("--solver", sw_solver)->capture_default_str();
  sweep->add_option("--precond", sw_precond)->capture_default_str();
  sweep->add_option("--out", sw_out, "Sweep CSV output")->required();

  auto* defaults = app.add_subcommand("defaults", "Print the solve defaults as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return run_gen(g);
    if (*solve) return run_solve(s);
    if (*suite) return run_suite_cmd(suite_config, suite_out, parallel);
    if (*sweep) return run_sweep(sw_problem, sw_sizes, sw_solver, sw_precond, sw_out);
    if (*defaults) {
      nlohmann::ordered_json j;
      j["solver"] = s.solver;
      j["precond"] = s.precond;
      j["rtol"] = s.options.rtol;
      j["restart"] = s.options.restart;
      j["max_iter"] = s.options.max_iter;
      std::cout << j.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
