#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "nsksp/bench.hpp"
#include "nsksp/error.hpp"
#include "nsksp/kernels.hpp"
#include "nsksp/matrix_market.hpp"
#include "nsksp/preconditioner.hpp"
#include "nsksp/problems.hpp"
#include "nsksp/solvers.hpp"

namespace py = pybind11;
using namespace nsksp;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const Vector& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Vector to_vector(const DoubleArray& a) {
  if (a.ndim() != 1) throw Error(ErrorCode::DimensionMismatch, "expected a 1-d array");
  return Vector(a.data(), a.data() + a.size());
}

template <class T, class F>
T parse_or_throw(const std::string& id, F parse, ErrorCode code, const char* what) {
  if (auto v = parse(id)) return *v;
  throw Error(code, std::string("unknown ") + what + " '" + id + "'");
}

py::dict counters_dict(const OpCounters& c) {
  py::dict d;
  d["matvecs"] = c.matvecs;
  d["axpys"] = c.axpys;
  d["dots"] = c.dots;
  d["scales"] = c.scales;
  d["precond_applies"] = c.precond_applies;
  d["reorth_dots"] = c.reorth_dots;
  d["reorth_axpys"] = c.reorth_axpys;
  d["modeled_flops"] = c.modeled_flops;
  return d;
}

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["status"] = std::string(to_string(r.status));
  d["iterations"] = r.iterations;
  py::list hist;
  for (const auto& h : r.history) hist.append(py::make_tuple(h.matvecs, h.relres));
  d["history"] = hist;
  d["relres"] = r.recurrence_relres();
  d["true_relres"] = r.true_relres;
  d["counters"] = counters_dict(r.counters);
  d["check_matvecs"] = r.check_matvecs;
  d["setup_seconds"] = r.setup_seconds;
  d["solve_seconds"] = r.solve_seconds;
  return d;
}

PrecondConfig precond_config(const std::string& precond, double omega, double theta,
                             double strong_threshold, bool ilu_pivot_shift) {
  PrecondConfig cfg;
  cfg.kind = parse_or_throw<PrecondKind>(precond, parse_precond_kind, ErrorCode::InvalidArgument,
                                         "preconditioner");
  cfg.omega = omega;
  cfg.amg.theta = theta;
  cfg.amg.strong_threshold = strong_threshold;
  cfg.ilu_pivot_shift = ilu_pivot_shift;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse Krylov solvers with algebraic preconditioners";

  static py::exception<Error> error_type(m, "NskspError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = to_string(e.code());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<CsrMatrix>(m, "CsrMatrix")
      .def(py::init([](index_t n_rows, index_t n_cols, std::vector<index_t> row_ptr,
                       std::vector<index_t> col_idx, const DoubleArray& values) {
             return CsrMatrix(n_rows, n_cols, std::move(row_ptr), std::move(col_idx),
                              to_vector(values));
           }),
           py::arg("n_rows"), py::arg("n_cols"), py::arg("row_ptr"), py::arg("col_idx"),
           py::arg("values"))
      .def_static(
          "from_triplets",
          [](const std::vector<index_t>& rows, const std::vector<index_t>& cols,
             const DoubleArray& vals, index_t n_rows, index_t n_cols) {
            const Vector v = to_vector(vals);
            if (rows.size() != cols.size() || rows.size() != v.size())
              throw Error(ErrorCode::DimensionMismatch, "triplet arrays differ in length");
            std::vector<Triplet> t;
            t.reserve(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) t.push_back({rows[k], cols[k], v[k]});
            return CsrMatrix::from_triplets(t, n_rows, n_cols);
          },
          py::arg("rows"), py::arg("cols"), py::arg("values"), py::arg("n_rows"),
          py::arg("n_cols"))
      .def_static("identity", &CsrMatrix::identity)
      .def_property_readonly("shape",
                             [](const CsrMatrix& a) { return py::make_tuple(a.n_rows(), a.n_cols()); })
      .def_property_readonly("nnz", &CsrMatrix::nnz)
      .def_property_readonly("row_ptr", [](const CsrMatrix& a) {
        return std::vector<index_t>(a.row_ptr().begin(), a.row_ptr().end());
      })
      .def_property_readonly("col_idx", [](const CsrMatrix& a) {
        return std::vector<index_t>(a.col_idx().begin(), a.col_idx().end());
      })
      .def_property_readonly("values", [](const CsrMatrix& a) {
        return to_numpy(Vector(a.values().begin(), a.values().end()));
      })
      .def("at", &CsrMatrix::at)
      .def("diagonal", [](const CsrMatrix& a) { return to_numpy(a.diagonal()); })
      .def("transpose", &CsrMatrix::transpose)
      .def("avg_row_nnz", &CsrMatrix::avg_row_nnz)
      .def("to_dense",
           [](const CsrMatrix& a) {
             py::array_t<double> out({static_cast<py::ssize_t>(a.n_rows()),
                                      static_cast<py::ssize_t>(a.n_cols())});
             const auto d = a.to_dense();
             std::copy(d.begin(), d.end(), out.mutable_data());
             return out;
           })
      .def("__matmul__",
           [](const CsrMatrix& a, const DoubleArray& x) {
             const Vector xv = to_vector(x);
             Vector y(a.n_rows());
             spmv(a, xv, y);
             return to_numpy(y);
           })
      .def("__eq__", &CsrMatrix::operator==);

  m.def("read_matrix_market", [](const std::filesystem::path& p) { return read_matrix_market(p); },
        py::arg("path"));
  m.def("write_matrix_market",
        [](const CsrMatrix& a, const std::filesystem::path& p) { write_matrix_market(a, p); },
        py::arg("matrix"), py::arg("path"));
  m.def("read_vector_market",
        [](const std::filesystem::path& p) { return to_numpy(read_vector_market(p)); },
        py::arg("path"));
  m.def("write_vector_market",
        [](const DoubleArray& v, const std::filesystem::path& p) {
          write_vector_market(to_vector(v), p);
        },
        py::arg("vector"), py::arg("path"));

  m.def(
      "generate",
      [](const std::string& family, int n, std::optional<std::vector<double>> c,
         std::optional<double> d, std::optional<std::string> scheme,
         std::optional<double> stretch, const std::string& pattern) {
        auto spec = ProblemSpec::defaults(
            parse_or_throw<ProblemFamily>(family, parse_problem_family, ErrorCode::InvalidSpec,
                                          "problem family"),
            n);
        if (c) spec.c = *c;
        if (d) spec.d = *d;
        if (scheme)
          spec.scheme = parse_or_throw<ConvectionScheme>(*scheme, parse_scheme,
                                                         ErrorCode::InvalidSpec, "scheme");
        if (stretch) spec.stretch = *stretch;
        if (pattern == "ones") spec.pattern = SolutionPattern::Ones;
        else if (pattern == "sinsin") spec.pattern = SolutionPattern::SinSin;
        else throw Error(ErrorCode::InvalidSpec, "unknown pattern '" + pattern + "'");
        auto p = generate(spec);
        py::dict out;
        out["a"] = std::move(p.a);
        out["b"] = to_numpy(p.b);
        out["x_exact"] = p.x_exact ? py::object(to_numpy(*p.x_exact)) : py::none();
        out["dim"] = p.dim;
        out["h_min"] = p.meta.h_min;
        out["h_max"] = p.meta.h_max;
        out["symmetric"] = p.meta.symmetric;
        out["scheme"] = std::string(to_string(p.meta.scheme));
        return out;
      },
      py::arg("family"), py::arg("n"), py::arg("c") = py::none(), py::arg("d") = py::none(),
      py::arg("scheme") = py::none(), py::arg("stretch") = py::none(),
      py::arg("pattern") = "sinsin");

  m.def(
      "solve",
      [](const CsrMatrix& a, const DoubleArray& b, const std::string& solver,
         const std::string& precond, double rtol, int max_iter, int restart, double omega,
         double theta, double strong_threshold, bool ilu_pivot_shift,
         std::optional<DoubleArray> x0) {
        const auto kind = parse_or_throw<SolverKind>(solver, parse_solver_kind,
                                                     ErrorCode::UnknownSolver, "solver");
        const auto cfg = precond_config(precond, omega, theta, strong_threshold, ilu_pivot_shift);
        const Vector bv = to_vector(b);
        SolveOptions o;
        o.rtol = rtol;
        o.max_iter = max_iter;
        o.restart = restart;
        if (x0) o.x0 = to_vector(*x0);
        SolveResult r;
        {
          py::gil_scoped_release release;
          const auto m = make_preconditioner(a, cfg);
          r = solve(kind, a, bv, *m, o);
        }
        return py::make_tuple(to_numpy(r.x), report_dict(r.report));
      },
      py::arg("a"), py::arg("b"), py::arg("solver") = "gmres", py::arg("precond") = "none",
      py::arg("rtol") = 1e-10, py::arg("max_iter") = 10000, py::arg("restart") = 30,
      py::arg("omega") = 1.0, py::arg("theta") = 0.08, py::arg("strong_threshold") = 0.25,
      py::arg("ilu_pivot_shift") = false, py::arg("x0") = py::none());

  m.def(
      "apply_preconditioner",
      [](const CsrMatrix& a, const DoubleArray& v, const std::string& precond, double omega) {
        const auto m = make_preconditioner(a, precond_config(precond, omega, 0.08, 0.25, false));
        const Vector vv = to_vector(v);
        Vector w(vv.size());
        m->apply(vv, w);
        return to_numpy(w);
      },
      py::arg("a"), py::arg("v"), py::arg("precond"), py::arg("omega") = 1.0);

  m.def("flop_model",
        py::overload_cast<std::string_view, std::int64_t, double, int>(&flop_model),
        py::arg("solver"), py::arg("n"), py::arg("ell"), py::arg("k"));

  m.def("run_suite",
        [](const std::string& json_text, bool parallel) {
          std::istringstream in(json_text);
          const auto cases = parse_suite_config(in);
          std::vector<CaseRecord> records;
          {
            py::gil_scoped_release release;
            records = run_suite(cases, parallel);
          }
          std::ostringstream out;
          emit_summary_csv(records, out);
          return out.str();
        },
        py::arg("config_json"), py::arg("parallel") = false);
}
