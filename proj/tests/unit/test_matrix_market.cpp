#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "stablepc/errors.hpp"
#include "stablepc/matrix_market.hpp"
#include "stablepc/rng.hpp"

using namespace stablepc;

TEST_SUITE("matrix_market") {

TEST_CASE("array round trip is exact") {
  const DenseMatrix a = gaussian_matrix(6, 4, 3);
  std::stringstream ss;
  write_matrix_market(ss, a);
  CHECK(read_matrix_market(ss) == a);
}

TEST_CASE("vector round trip is exact") {
  Vector v = gaussian_vector(9, 4);
  v[2] = 1e-300;
  v[5] = -0.0;
  std::stringstream ss;
  write_matrix_market(ss, v);
  const Vector w = read_matrix_market_vector(ss);
  REQUIRE(w.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(w[i] == v[i]);
  CHECK(std::signbit(w[5]));
}

TEST_CASE("coordinate general") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "3 2 3\n"
      "1 1 1.5\n"
      "3 2 -2\n"
      "2 1 4e1\n");
  const DenseMatrix a = read_matrix_market(in);
  CHECK(a.rows() == 3);
  CHECK(a.cols() == 2);
  CHECK(a(0, 0) == 1.5);
  CHECK(a(2, 1) == -2.0);
  CHECK(a(1, 0) == 40.0);
  CHECK(a(0, 1) == 0.0);
}

TEST_CASE("coordinate symmetric and skew-symmetric mirror the lower triangle") {
  std::istringstream sym(
      "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 3\n2 1 5\n");
  const DenseMatrix s = read_matrix_market(sym);
  CHECK(s(0, 1) == 5.0);
  CHECK(s(1, 0) == 5.0);
  std::istringstream skew(
      "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 5\n");
  const DenseMatrix k = read_matrix_market(skew);
  CHECK(k(1, 0) == 5.0);
  CHECK(k(0, 1) == -5.0);
}

TEST_CASE("pattern and integer fields") {
  std::istringstream pat("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 2\n");
  CHECK(read_matrix_market(pat)(0, 1) == 1.0);
  std::istringstream ints("%%MatrixMarket matrix array integer general\n2 1\n7\n-3\n");
  const Vector v = read_matrix_market_vector(ints);
  CHECK(v == Vector{7, -3});
}

TEST_CASE("malformed input") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_matrix_market(empty), EmptyFile);
  std::istringstream banner("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
  CHECK_THROWS_AS(read_matrix_market(banner), ParseError);
  std::istringstream junk("%%MatrixMarket matrix array real general\n2 1\n1.0\nabc\n");
  CHECK_THROWS_AS(read_matrix_market(junk), ParseError);
  std::istringstream range("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
  CHECK_THROWS_AS(read_matrix_market(range), ParseError);
  CHECK_THROWS_AS(read_matrix_market(std::filesystem::path("/nonexistent/a.mtx")), IoError);
}

TEST_CASE("parse error reports the line") {
  std::istringstream junk("%%MatrixMarket matrix array real general\n2 1\n1.0\nabc\n");
  try {
    read_matrix_market(junk);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.gaussian() * std::pow(10.0, 40 * rng.uniform() - 20);
    double back = 0;
    REQUIRE(parse_double(format_double(x), back));
    REQUIRE(back == x);
  }
  double v = 0;
  CHECK_FALSE(parse_double("1.5x", v));
  CHECK_FALSE(parse_double("", v));
  CHECK(parse_double("inf", v));
  CHECK(v == std::numeric_limits<double>::infinity());
}

}  // TEST_SUITE
