#include "nsksp/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nsksp/error.hpp"

namespace nsksp {

namespace {

struct Banner {
  bool coordinate = true;
  bool symmetric = false;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

Banner parse_banner(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::ParseError, "empty file");
  std::istringstream ss(line);
  std::string tag, object, format, field, symmetry;
  ss >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket")
    throw Error(ErrorCode::ParseError, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix")
    throw Error(ErrorCode::UnsupportedFormat, "object '" + object + "'");
  Banner b;
  if (format == "array") {
    b.coordinate = false;
  } else if (format != "coordinate") {
    throw Error(ErrorCode::ParseError, "format '" + format + "'");
  }
  if (field == "complex" || field == "pattern")
    throw Error(ErrorCode::UnsupportedFormat, "field '" + field + "'");
  if (field != "real" && field != "integer" && field != "double")
    throw Error(ErrorCode::ParseError, "field '" + field + "'");
  if (symmetry == "symmetric") {
    b.symmetric = true;
  } else if (symmetry == "skew-symmetric" || symmetry == "hermitian") {
    throw Error(ErrorCode::UnsupportedFormat, "symmetry '" + symmetry + "'");
  } else if (symmetry != "general") {
    throw Error(ErrorCode::ParseError, "symmetry '" + symmetry + "'");
  }
  return b;
}

// Next non-comment, non-blank line.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    return true;
  }
  return false;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void put_real(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

CsrMatrix read_matrix_market(std::istream& in) {
  const Banner banner = parse_banner(in);
  if (!banner.coordinate)
    throw Error(ErrorCode::UnsupportedFormat,
                "array format is not supported for matrices");
  std::string line;
  if (!next_data_line(in, line))
    throw Error(ErrorCode::ParseError, "missing size line");
  long long rows = 0, cols = 0, entries = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> entries) || rows <= 0 || cols <= 0 ||
        entries < 0)
      throw Error(ErrorCode::ParseError, "bad size line '" + line + "'");
  }
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(entries) *
                   (banner.symmetric ? 2 : 1));
  for (long long e = 0; e < entries; ++e) {
    if (!next_data_line(in, line))
      throw Error(ErrorCode::ParseError,
                  "expected " + std::to_string(entries) + " entries, got " +
                      std::to_string(e));
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v))
      throw Error(ErrorCode::ParseError, "bad entry '" + line + "'");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw Error(ErrorCode::ParseError,
                  "entry index out of range '" + line + "'");
    const auto r = static_cast<index_t>(i - 1);
    const auto c = static_cast<index_t>(j - 1);
    triplets.push_back({r, c, v});
    if (banner.symmetric && r != c) triplets.push_back({c, r, v});
  }
  return CsrMatrix::from_triplets(triplets, static_cast<index_t>(rows),
                                  static_cast<index_t>(cols));
}

CsrMatrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix_market(in);
}

void write_matrix_market(const CsrMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n_rows() << ' ' << a.n_cols() << ' ' << a.nnz() << '\n';
  for (index_t i = 0; i < a.n_rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << i + 1 << ' ' << cols[k] + 1 << ' ';
      put_real(out, vals[k]);
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed");
}

void write_matrix_market(const CsrMatrix& a,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  write_matrix_market(a, out);
}

Vector read_vector_market(std::istream& in) {
  const Banner banner = parse_banner(in);
  std::string line;
  if (!next_data_line(in, line))
    throw Error(ErrorCode::ParseError, "missing size line");
  std::istringstream size_line(line);
  if (!banner.coordinate) {
    long long rows = 0, cols = 0;
    if (!(size_line >> rows >> cols) || rows <= 0 || cols != 1)
      throw Error(ErrorCode::ParseError, "vector must be n-by-1");
    Vector v(static_cast<std::size_t>(rows));
    for (auto& x : v) {
      if (!next_data_line(in, line))
        throw Error(ErrorCode::ParseError, "truncated vector");
      std::istringstream ss(line);
      if (!(ss >> x)) throw Error(ErrorCode::ParseError, "bad value '" + line + "'");
    }
    return v;
  }
  const CsrMatrix m = [&] {
    std::stringstream rebuilt;
    rebuilt << "%%MatrixMarket matrix coordinate real general\n" << line << '\n'
            << in.rdbuf();
    return read_matrix_market(rebuilt);
  }();
  if (m.n_cols() != 1) throw Error(ErrorCode::ParseError, "vector must be n-by-1");
  Vector v(m.n_rows(), 0.0);
  for (index_t i = 0; i < m.n_rows(); ++i) v[i] = m.at(i, 0);
  return v;
}

Vector read_vector_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_vector_market(in);
}

void write_vector_market(std::span<const double> v, std::ostream& out) {
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  for (double x : v) {
    put_real(out, x);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed");
}

void write_vector_market(std::span<const double> v,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  write_vector_market(v, out);
}

}  // namespace nsksp
