#include "stablepc/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stablepc/errors.hpp"

namespace stablepc {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::size_t parse_index(std::string_view tok, std::size_t line) {
  std::size_t value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError("bad integer '" + std::string(tok) + "'", line);
  }
  return value;
}

double parse_value(std::string_view tok, std::size_t line) {
  double v = 0.0;
  if (!parse_double(tok, v)) throw ParseError("bad number '" + std::string(tok) + "'", line);
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

DenseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw EmptyFile("empty Matrix Market input");
  ++lineno;
  const auto head = tokens(line);
  if (head.size() < 5 || lower(std::string(head[0])) != "%%matrixmarket" ||
      lower(std::string(head[1])) != "matrix") {
    throw ParseError("missing %%MatrixMarket matrix banner", lineno);
  }
  const std::string format = lower(std::string(head[2]));
  const std::string field = lower(std::string(head[3]));
  const std::string symmetry = lower(std::string(head[4]));
  if (format != "array" && format != "coordinate") {
    throw ParseError("unknown format '" + format + "'", lineno);
  }
  if (field != "real" && field != "integer" && field != "double" && field != "pattern") {
    throw ParseError("unsupported field '" + field + "'", lineno);
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric") {
    throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);
  }
  if (format == "array" && field == "pattern") {
    throw ParseError("pattern field requires coordinate format", lineno);
  }
  const double mirror_sign = symmetry == "skew-symmetric" ? -1.0 : 1.0;
  const bool mirrored = symmetry != "general";

  auto next_data_line = [&]() -> std::optional<std::vector<std::string_view>> {
    while (std::getline(in, line)) {
      ++lineno;
      auto t = tokens(line);
      if (t.empty() || t.front().front() == '%') continue;
      return t;
    }
    return std::nullopt;
  };

  auto size_line = next_data_line();
  if (!size_line) throw ParseError("missing size line", lineno);
  const auto& sz = *size_line;
  const std::size_t rows = parse_index(sz.at(0), lineno);
  const std::size_t cols = sz.size() > 1 ? parse_index(sz[1], lineno) : 0;
  if (sz.size() != (format == "array" ? 2u : 3u)) throw ParseError("bad size line", lineno);
  if (mirrored && rows != cols) throw ParseError("symmetric matrix must be square", lineno);
  DenseMatrix a(rows, cols);

  if (format == "array") {
    // Column-major; symmetric storage lists the lower triangle only.
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t first = !mirrored ? 0 : (symmetry == "skew-symmetric" ? j + 1 : j);
      for (std::size_t i = first; i < rows; ++i) {
        auto t = next_data_line();
        if (!t) throw ParseError("too few entries", lineno);
        if (t->size() != 1) throw ParseError("expected one value per line", lineno);
        const double v = parse_value(t->front(), lineno);
        a(i, j) = v;
        if (mirrored && i != j) a(j, i) = mirror_sign * v;
      }
    }
  } else {
    const std::size_t nnz = parse_index(sz[2], lineno);
    const std::size_t width = field == "pattern" ? 2 : 3;
    for (std::size_t k = 0; k < nnz; ++k) {
      auto t = next_data_line();
      if (!t) throw ParseError("too few entries", lineno);
      if (t->size() != width) throw ParseError("wrong number of fields", lineno);
      const std::size_t i = parse_index((*t)[0], lineno);
      const std::size_t j = parse_index((*t)[1], lineno);
      if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError("index out of range", lineno);
      const double v = field == "pattern" ? 1.0 : parse_value((*t)[2], lineno);
      a(i - 1, j - 1) += v;
      if (mirrored && i != j) a(j - 1, i - 1) += mirror_sign * v;
    }
  }
  if (next_data_line()) throw ParseError("trailing data", lineno);
  return a;
}

DenseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_matrix_market(in);
}

Vector read_matrix_market_vector(std::istream& in) {
  const DenseMatrix a = read_matrix_market(in);
  if (a.cols() != 1 && a.rows() != 1) {
    throw DimensionMismatch("Matrix Market vector must have a single row or column");
  }
  return Vector(a.data().begin(), a.data().end());
}

Vector read_matrix_market_vector(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_matrix_market_vector(in);
}

void write_matrix_market(std::ostream& out, const DenseMatrix& a) {
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << ' ' << a.cols() << '\n';
  for (const double v : a.data()) out << format_double(v) << '\n';
  if (!out) throw IoError("Matrix Market write failed");
}

void write_matrix_market(const std::filesystem::path& path, const DenseMatrix& a) {
  std::ofstream out = open_out(path);
  write_matrix_market(out, a);
}

void write_matrix_market(std::ostream& out, std::span<const double> v) {
  write_matrix_market(out, DenseMatrix(v.size(), 1, Vector(v.begin(), v.end())));
}

void write_matrix_market(const std::filesystem::path& path, std::span<const double> v) {
  std::ofstream out = open_out(path);
  write_matrix_market(out, v);
}

}  // namespace stablepc
