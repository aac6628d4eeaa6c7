#pragma once

#include <filesystem>
#include <iosfwd>

#include "mdprec/csr_matrix.hpp"

namespace mdprec::mm {

enum class FloatFormat {
    shortest, ///< shortest decimal that round-trips exactly
    hex,      ///< C99 hexadecimal floating point
};

/// Coordinate real general, 1-based, entries in row-major order.
void write_matrix(std::ostream& out, const CsrMatrix& m, FloatFormat fmt = FloatFormat::shortest);
void write_matrix(const std::filesystem::path& path, const CsrMatrix& m,
                  FloatFormat fmt = FloatFormat::shortest);
/// Accepts coordinate real|integer general. Duplicate entries are summed,
/// explicit zeros kept. Throws IoError on malformed input.
CsrMatrix read_matrix(std::istream& in);
CsrMatrix read_matrix(const std::filesystem::path& path);

/// Dense column vector in array real general format.
void write_vector(std::ostream& out, std::span<const double> v,
                  FloatFormat fmt = FloatFormat::shortest);
void write_vector(const std::filesystem::path& path, std::span<const double> v,
                  FloatFormat fmt = FloatFormat::shortest);
Vector read_vector(std::istream& in);
Vector read_vector(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v, FloatFormat fmt = FloatFormat::shortest);

} // namespace mdprec::mm
