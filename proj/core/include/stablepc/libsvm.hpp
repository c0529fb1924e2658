#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>

#include "stablepc/dense.hpp"

namespace stablepc {

struct LibsvmData {
  DenseMatrix points;  // rows × features, absent entries 0
  Vector labels;       // NaN where a line had no label
};

/// Parses LIBSVM/svmlight text: an optional label, then `index:value` pairs
/// with 1-based, strictly increasing indices. Blank lines and `#` comments
/// are skipped. The feature count is the largest index seen, or
/// `num_features` when given (larger indices are then an error).
/// Throws ParseError with the line number, or EmptyFile when no rows exist.
LibsvmData read_libsvm(std::istream& in, std::optional<std::size_t> num_features = std::nullopt);
LibsvmData read_libsvm(const std::filesystem::path& path,
                       std::optional<std::size_t> num_features = std::nullopt);

/// Writes nonzero entries with shortest round-trip decimals. Labels default
/// to 0 when none are given.
void write_libsvm(std::ostream& out, const DenseMatrix& points, std::span<const double> labels = {});
void write_libsvm(const std::filesystem::path& path, const DenseMatrix& points,
                  std::span<const double> labels = {});

/// Each column to mean 0 and (population) variance 1; constant columns
/// become 0.
void standardize(DenseMatrix& points);

/// `m` distinct rows chosen uniformly, kept in their original order.
/// Returns the input unchanged when m ≥ rows.
DenseMatrix subsample_rows(const DenseMatrix& points, std::size_t m, std::uint64_t seed);

/// Read, optionally subsample to `max_rows`, standardize. Labels dropped.
DenseMatrix ingest_libsvm(const std::filesystem::path& path, std::optional<std::size_t> max_rows,
                          std::uint64_t seed);

/// n standardized Gaussian points in d dimensions.
DenseMatrix synthetic_points(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace stablepc
