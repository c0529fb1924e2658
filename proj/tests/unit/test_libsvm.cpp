#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stablepc/errors.hpp"
#include "stablepc/libsvm.hpp"
#include "stablepc/rng.hpp"

using namespace stablepc;

namespace {

void check_standardized(const DenseMatrix& x) {
  for (std::size_t j = 0; j < x.cols(); ++j) {
    long double mean = 0, sq = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= x.rows();
    for (std::size_t i = 0; i < x.rows(); ++i) sq += (x(i, j) - mean) * (x(i, j) - mean);
    CHECK(std::fabs(static_cast<double>(mean)) <= 1e-14);
    CHECK(static_cast<double>(sq / x.rows()) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

}  // namespace

TEST_SUITE("libsvm") {

TEST_CASE("single line with a gap") {
  std::istringstream in("1 1:2.0 3:-1.0\n");
  const LibsvmData d = read_libsvm(in, 3);
  REQUIRE(d.points.rows() == 1);
  REQUIRE(d.points.cols() == 3);
  CHECK(d.points(0, 0) == 2.0);
  CHECK(d.points(0, 1) == 0.0);
  CHECK(d.points(0, 2) == -1.0);
  CHECK(d.labels[0] == 1.0);
}

TEST_CASE("comments, blank lines and missing labels") {
  std::istringstream in(
      "# header\n"
      "\n"
      "-1 2:0.5 # trailing\n"
      "1:3 4:1e-2\n");
  const LibsvmData d = read_libsvm(in);
  REQUIRE(d.points.rows() == 2);
  CHECK(d.points.cols() == 4);
  CHECK(d.labels[0] == -1.0);
  CHECK(std::isnan(d.labels[1]));
  CHECK(d.points(0, 1) == 0.5);
  CHECK(d.points(1, 0) == 3.0);
  CHECK(d.points(1, 3) == 0.01);
}

TEST_CASE("grammar violations report their line") {
  auto line_of = [](const char* text, std::optional<std::size_t> nf = std::nullopt) -> std::size_t {
    std::istringstream in(text);
    try {
      read_libsvm(in, nf);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("1 1:1\n1 3:1 2:1\n") == 2);
  CHECK(line_of("1 0:1\n") == 1);
  CHECK(line_of("1 1:x\n") == 1);
  CHECK(line_of("1 2:1 2:3\n") == 1);
  CHECK(line_of("1 1:1\n\n1 5:1\n", 4) == 3);
  std::istringstream empty("# nothing\n\n");
  CHECK_THROWS_AS(read_libsvm(empty), EmptyFile);
}

TEST_CASE("write then read is exact") {
  DenseMatrix x = gaussian_matrix(8, 5, 2);
  x(3, 1) = 0.0;
  x(0, 4) = 0.0;
  const Vector labels{1, -1, 1, 1, -1, 2, 0, 3};
  std::stringstream ss;
  write_libsvm(ss, x, labels);
  const LibsvmData d = read_libsvm(ss, 5);
  CHECK(d.points == x);
  CHECK(d.labels == labels);
}

TEST_CASE("standardize") {
  DenseMatrix x = gaussian_matrix(50, 3, 7);
  for (std::size_t i = 0; i < 50; ++i) {
    x(i, 0) = 3.0 + 10.0 * x(i, 0);
    x(i, 2) = 4.0;
  }
  standardize(x);
  for (std::size_t i = 0; i < 50; ++i) CHECK(x(i, 2) == 0.0);
  DenseMatrix first_two(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    first_two(i, 0) = x(i, 0);
    first_two(i, 1) = x(i, 1);
  }
  check_standardized(first_two);
}

TEST_CASE("subsample_rows keeps distinct rows in order") {
  DenseMatrix x(20, 1);
  for (std::size_t i = 0; i < 20; ++i) x(i, 0) = static_cast<double>(i);
  const DenseMatrix s = subsample_rows(x, 7, 3);
  REQUIRE(s.rows() == 7);
  for (std::size_t i = 1; i < 7; ++i) CHECK(s(i, 0) > s(i - 1, 0));
  CHECK(subsample_rows(x, 7, 3) == s);
  CHECK(subsample_rows(x, 50, 3) == x);
}

TEST_CASE("synthetic_points are standardized") {
  const DenseMatrix p = synthetic_points(200, 4, 5);
  CHECK(p.rows() == 200);
  CHECK(p.cols() == 4);
  check_standardized(p);
}

TEST_CASE("ingest_libsvm from a file") {
  const auto path = std::filesystem::temp_directory_path() / "stablepc_ingest_test.svm";
  {
    std::ofstream out(path);
    out << "1 1:1 2:10\n0 1:2 2:20\n1 1:3 2:30\n0 1:4 2:40\n";
  }
  const DenseMatrix all = ingest_libsvm(path, std::nullopt, 1);
  CHECK(all.rows() == 4);
  check_standardized(all);
  CHECK(ingest_libsvm(path, 2, 1).rows() == 2);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(ingest_libsvm(path, std::nullopt, 1), IoError);
}

}  // TEST_SUITE
