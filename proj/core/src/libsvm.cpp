#include "stablepc/libsvm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "stablepc/errors.hpp"
#include "stablepc/matrix_market.hpp"
#include "stablepc/rng.hpp"

namespace stablepc {

namespace {

struct Row {
  double label;
  std::vector<std::pair<std::size_t, double>> entries;
};

Row parse_line(std::string_view line, std::size_t lineno) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  Row row{std::numeric_limits<double>::quiet_NaN(), {}};
  std::size_t i = 0;
  bool first = true;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == start) break;
    const std::string_view tok = line.substr(start, i - start);
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) {
      if (!first) throw ParseError("expected index:value, got '" + std::string(tok) + "'", lineno);
      if (!parse_double(tok, row.label)) {
        throw ParseError("bad label '" + std::string(tok) + "'", lineno);
      }
      first = false;
      continue;
    }
    first = false;
    const std::string_view idx_tok = tok.substr(0, colon);
    std::size_t idx = 0;
    const auto res = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
    if (res.ec != std::errc() || res.ptr != idx_tok.data() + idx_tok.size() || idx == 0) {
      throw ParseError("bad feature index '" + std::string(idx_tok) + "'", lineno);
    }
    if (!row.entries.empty() && idx <= row.entries.back().first) {
      throw ParseError("feature indices must increase", lineno);
    }
    double value = 0.0;
    if (!parse_double(tok.substr(colon + 1), value)) {
      throw ParseError("bad feature value '" + std::string(tok.substr(colon + 1)) + "'", lineno);
    }
    row.entries.emplace_back(idx, value);
  }
  return row;
}

bool blank(std::string_view line) {
  for (const char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

LibsvmData read_libsvm(std::istream& in, std::optional<std::size_t> num_features) {
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t max_index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    Row row = parse_line(line, lineno);
    if (!row.entries.empty()) {
      const std::size_t last = row.entries.back().first;
      if (num_features && last > *num_features) {
        throw ParseError("feature index exceeds declared count", lineno);
      }
      max_index = std::max(max_index, last);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyFile("LIBSVM input has no rows");
  const std::size_t features = num_features.value_or(max_index);
  LibsvmData data{DenseMatrix(rows.size(), features), Vector(rows.size())};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    data.labels[r] = rows[r].label;
    for (const auto& [idx, value] : rows[r].entries) data.points(r, idx - 1) = value;
  }
  return data;
}

LibsvmData read_libsvm(const std::filesystem::path& path, std::optional<std::size_t> num_features) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_libsvm(in, num_features);
}

void write_libsvm(std::ostream& out, const DenseMatrix& points, std::span<const double> labels) {
  if (!labels.empty() && labels.size() != points.rows()) {
    throw DimensionMismatch("write_libsvm: label count");
  }
  for (std::size_t r = 0; r < points.rows(); ++r) {
    out << format_double(labels.empty() ? 0.0 : labels[r]);
    for (std::size_t c = 0; c < points.cols(); ++c) {
      const double v = points(r, c);
      if (v != 0.0) out << ' ' << (c + 1) << ':' << format_double(v);
    }
    out << '\n';
  }
  if (!out) throw IoError("LIBSVM write failed");
}

void write_libsvm(const std::filesystem::path& path, const DenseMatrix& points,
                  std::span<const double> labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_libsvm(out, points, labels);
}

void standardize(DenseMatrix& points) {
  const std::size_t m = points.rows();
  if (m == 0) return;
  for (std::size_t c = 0; c < points.cols(); ++c) {
    auto col = points.column(c);
    double mean = 0.0;
    for (const double v : col) mean += v;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (const double v : col) var += (v - mean) * (v - mean);
    var /= static_cast<double>(m);
    const double sd = std::sqrt(var);
    for (double& v : col) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  }
}

DenseMatrix subsample_rows(const DenseMatrix& points, std::size_t m, std::uint64_t seed) {
  const std::size_t rows = points.rows();
  if (m >= rows) return points;
  std::vector<std::size_t> idx(rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (rows - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  DenseMatrix out(m, points.cols());
  for (std::size_t c = 0; c < points.cols(); ++c) {
    for (std::size_t r = 0; r < m; ++r) out(r, c) = points(idx[r], c);
  }
  return out;
}

DenseMatrix ingest_libsvm(const std::filesystem::path& path, std::optional<std::size_t> max_rows,
                          std::uint64_t seed) {
  DenseMatrix points = read_libsvm(path).points;
  if (max_rows) points = subsample_rows(points, *max_rows, seed);
  standardize(points);
  return points;
}

DenseMatrix synthetic_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  DenseMatrix points = gaussian_matrix(n, d, seed);
  standardize(points);
  return points;
}

}  // namespace stablepc
