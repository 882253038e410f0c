#include "doctest.h"
#include "tscale/errors.hpp"
#include "tscale/text.hpp"

using namespace tscale;

TEST_SUITE("text") {

TEST_CASE("digit grouping") {
  CHECK(text::grouped(0) == "0");
  CHECK(text::grouped(999) == "999");
  CHECK(text::grouped(7'077'888) == "7,077,888");
  CHECK(text::grouped(1'000'000'000) == "1,000,000,000");
  CHECK(text::grouped_signed(-10'622) == "-10,622");
  CHECK(text::grouped_signed(6'659) == "6,659");
}

TEST_CASE("one-decimal rounding goes half away from zero") {
  CHECK(text::round1(0.25) == doctest::Approx(0.3));
  CHECK(text::round1(-0.25) == doctest::Approx(-0.3));
  CHECK(text::round1(72.2333) == doctest::Approx(72.2));
}

TEST_CASE("number parsing") {
  CHECK(text::parse_int("7_077_888", "n") == 7'077'888);
  CHECK(text::parse_int(" 42 ", "n") == 42);
  CHECK_THROWS_AS(text::parse_int("4x", "n"), ValidationError);
  CHECK_THROWS_AS(text::parse_int("", "n"), ValidationError);
  CHECK(text::parse_double("2.5e-4", "x") == doctest::Approx(2.5e-4));
  CHECK_THROWS_AS(text::parse_double("nan?", "x"), ValidationError);
}

TEST_CASE("shortest form round trips") {
  for (double v : {0.1, 1.0 / 3.0, 78.6, 1e-6, 21.716, 123456789.125}) {
    CHECK(text::parse_double(text::shortest(v), "v") == v);
  }
  CHECK(text::shortest(78.6) == "78.6");
}

TEST_CASE("delimited tables") {
  const auto t = text::parse_delimited("# c\na,b\n1,2\n\n3,4\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1].line == 5);
  CHECK(t.column("b") == 1);
  CHECK(t.column("c") == -1);
  CHECK_THROWS_AS(text::parse_delimited("a,b\n1\n"), ValidationError);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(text::read_file("/nonexistent/file"), IoError);
}

}
