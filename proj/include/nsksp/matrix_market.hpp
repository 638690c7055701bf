#pragma once

#include <filesystem>
#include <iosfwd>

#include "nsksp/csr_matrix.hpp"

namespace nsksp {

/// Reads a coordinate-format Matrix Market file (real or integer field,
/// general or symmetric). Symmetric files are expanded to general storage.
CsrMatrix read_matrix_market(const std::filesystem::path& path);
CsrMatrix read_matrix_market(std::istream& in);

/// Writes `coordinate real general` with 17 significant digits, so that a
/// subsequent read reproduces every value bit for bit.
void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path);
void write_matrix_market(const CsrMatrix& a, std::ostream& out);

/// Dense vectors are exchanged as `array real general` n-by-1 files. The
/// reader also accepts an n-by-1 coordinate file.
Vector read_vector_market(const std::filesystem::path& path);
Vector read_vector_market(std::istream& in);
void write_vector_market(std::span<const double> v,
                         const std::filesystem::path& path);
void write_vector_market(std::span<const double> v, std::ostream& out);

}  // namespace nsksp
