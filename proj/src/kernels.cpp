#include "nsksp/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "nsksp/error.hpp"

namespace nsksp {

namespace {

void check_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(ErrorCode::DimensionMismatch, what);
}

void count_vector_op(OpCounters* c, std::int64_t& field, std::size_t n,
                     std::int64_t flops_per_entry) {
  if (c == nullptr) return;
  ++field;
  c->modeled_flops += flops_per_entry * static_cast<std::int64_t>(n);
}

}  // namespace

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
          OpCounters* counters) {
  check_same(static_cast<std::size_t>(a.n_cols()), x.size(),
             "spmv: A.n_cols != len(x)");
  check_same(static_cast<std::size_t>(a.n_rows()), y.size(),
             "spmv: A.n_rows != len(y)");
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto va = a.values();
  for (index_t i = 0; i < a.n_rows(); ++i) {
    double sum = 0.0;
    for (index_t k = rp[i]; k < rp[i + 1]; ++k) sum += va[k] * x[ci[k]];
    y[i] = sum;
  }
  if (counters != nullptr) {
    ++counters->matvecs;
    counters->modeled_flops += 2 * static_cast<std::int64_t>(a.nnz());
  }
}

Vector spmv(const CsrMatrix& a, std::span<const double> x,
            OpCounters* counters) {
  Vector y(a.n_rows());
  spmv(a, x, y, counters);
  return y;
}

void residual(const CsrMatrix& a, std::span<const double> x,
              std::span<const double> b, std::span<double> r,
              OpCounters* counters) {
  check_same(b.size(), r.size(), "residual: len(b) != len(r)");
  spmv(a, x, r, counters);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  if (counters != nullptr) count_vector_op(counters, counters->axpys, r.size(), 2);
}

double dot(std::span<const double> v, std::span<const double> w,
           OpCounters* counters) {
  check_same(v.size(), w.size(), "dot: lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * w[i];
  if (counters != nullptr) count_vector_op(counters, counters->dots, v.size(), 2);
  return s;
}

double norm2(std::span<const double> v, OpCounters* counters) {
  return std::sqrt(dot(v, v, counters));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y,
          OpCounters* counters) {
  check_same(x.size(), y.size(), "axpy: lengths differ");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
  if (counters != nullptr) count_vector_op(counters, counters->axpys, x.size(), 2);
}

void xpay(std::span<const double> x, double beta, std::span<double> y,
          OpCounters* counters) {
  check_same(x.size(), y.size(), "xpay: lengths differ");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
  if (counters != nullptr) count_vector_op(counters, counters->axpys, x.size(), 2);
}

void scale(double alpha, std::span<double> x, OpCounters* counters) {
  for (double& v : x) v *= alpha;
  if (counters != nullptr) count_vector_op(counters, counters->scales, x.size(), 1);
}

double norm_inf(std::span<const double> v) noexcept {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

OpCounters operator-(const OpCounters& a, const OpCounters& b) noexcept {
  OpCounters d;
  d.matvecs = a.matvecs - b.matvecs;
  d.axpys = a.axpys - b.axpys;
  d.dots = a.dots - b.dots;
  d.scales = a.scales - b.scales;
  d.precond_applies = a.precond_applies - b.precond_applies;
  d.reorth_dots = a.reorth_dots - b.reorth_dots;
  d.reorth_axpys = a.reorth_axpys - b.reorth_axpys;
  d.modeled_flops = a.modeled_flops - b.modeled_flops;
  return d;
}

}  // namespace nsksp
