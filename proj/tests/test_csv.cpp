#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "cfx/csv.hpp"

using namespace cfx;

TEST_CASE("read_csv: header plus numeric rows") {
  std::istringstream in("a,b\n1,2\n3.5,-4e2\n");
  CsvTable t = read_csv(in);
  REQUIRE(t.header.size() == 2);
  CHECK(t.header[0] == "a");
  CHECK(t.header[1] == "b");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][1] == Catch::Approx(-400.0));
  Vec col = t.column(0);
  CHECK(col[0] == Catch::Approx(1.0));
  CHECK(col[1] == Catch::Approx(3.5));
}

TEST_CASE("read_csv: single column") {
  std::istringstream in("x\n1\n2\n3\n");
  CsvTable t = read_csv(in);
  CHECK(t.column(0).size() == 3);
}

TEST_CASE("read_csv: non-numeric cell is a parse error") {
  std::istringstream in("a\n1\nfoo\n");
  CHECK_THROWS_AS(read_csv(in), ParseError);
}

TEST_CASE("read_csv: ragged row is a parse error") {
  std::istringstream in("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_csv(in), ParseError);
}

TEST_CASE("read_csv: empty input is a parse error") {
  std::istringstream in("");
  CHECK_THROWS_AS(read_csv(in), ParseError);
}

TEST_CASE("read_csv: header only yields zero rows") {
  std::istringstream in("a,b\n");
  CsvTable t = read_csv(in);
  CHECK(t.rows.empty());
}
