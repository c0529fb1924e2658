#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "stablepc/dense.hpp"

namespace stablepc {

/// Reads a real Matrix Market matrix, array or coordinate, general,
/// symmetric or skew-symmetric (integer and pattern fields are accepted too).
/// Throws ParseError with the offending line, EmptyFile, or IoError.
DenseMatrix read_matrix_market(std::istream& in);
DenseMatrix read_matrix_market(const std::filesystem::path& path);

/// Reads an n×1 (or 1×n) matrix as a vector.
Vector read_matrix_market_vector(std::istream& in);
Vector read_matrix_market_vector(const std::filesystem::path& path);

/// Writes "array real general" with shortest round-trip decimals.
void write_matrix_market(std::ostream& out, const DenseMatrix& a);
void write_matrix_market(const std::filesystem::path& path, const DenseMatrix& a);
void write_matrix_market(std::ostream& out, std::span<const double> v);
void write_matrix_market(const std::filesystem::path& path, std::span<const double> v);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);
/// Parses a whole token as a double; returns false on any trailing junk.
bool parse_double(std::string_view token, double& out);

}  // namespace stablepc
