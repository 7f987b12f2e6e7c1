#include <doctest.h>

#include <sstream>
#include <string>

#include "ulfkit/errors.hpp"
#include "ulfkit/io.hpp"

using namespace ulfkit;

namespace {

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_series_csv(in);
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("read_series_csv: single channel") {
  std::istringstream in("t,v\n0,1\n1,2\n2,3\n");
  const auto s = read_series_csv(in);
  REQUIRE(s.size() == 1);
  CHECK(s[0].data() == std::vector<double>{1, 2, 3});
  CHECK(s[0].dt() == 1.0);
  CHECK(s[0].label() == "v");
}

TEST_CASE("read_series_csv: two channels share dt") {
  std::istringstream in("# comment\ntime,a,b\n10,1,4\n10.5,2,5\n11,3,6\n");
  const auto s = read_series_csv(in);
  REQUIRE(s.size() == 2);
  CHECK(s[0].dt() == 0.5);
  CHECK(s[1].dt() == 0.5);
  CHECK(s[0].t0() == 10.0);
  CHECK(s[1].data() == std::vector<double>{4, 5, 6});
}

TEST_CASE("read_series_csv: ISO-8601 time column") {
  std::istringstream in("time,v\n2020-01-01T00:00:00Z,1\n2020-01-01T01:00:00Z,2\n2020-01-01T02:00:00Z,3\n");
  const auto s = read_series_csv(in);
  CHECK(s[0].dt() == 3600.0);
  CHECK(s[0].t0() == 1577836800.0);
}

TEST_CASE("read_series_csv: errors name the row") {
  CHECK(error_of("t,v\n0,1\n1,2\n2.5,3\n").find("non-uniform step at row 3") != std::string::npos);
  CHECK(error_of("t,v\n0,1\n1,nan\n2,3\n").find("row 2") != std::string::npos);
  CHECK(error_of("t,v\n0,1\n1,\n").find("row 2") != std::string::npos);
  CHECK(error_of("t,v\n0,1\n1,2,3\n").find("row 2") != std::string::npos);
  CHECK_FALSE(error_of("t,v\n0,1\n").empty());
  CHECK_FALSE(error_of("t\n0\n1\n").empty());
}

TEST_CASE("read_series_csv: tiny relative jitter is accepted") {
  std::istringstream in("t,v\n0,1\n1,2\n2.0000000000001,3\n");
  CHECK_NOTHROW(read_series_csv(in));
}

TEST_CASE("parse_time: numbers, dates, offsets") {
  CHECK(parse_time("12.5") == 12.5);
  CHECK(parse_time("1970-01-01") == 0.0);
  CHECK(parse_time("1970-01-02T00:00:01Z") == 86401.0);
  CHECK(parse_time("2020-01-01T03:00:00+03:00") == 1577836800.0);
  CHECK(parse_time("2020-02-29 12:00") == 1582977600.0);
  CHECK_THROWS_AS(parse_time("2021-02-29"), FormatError);
  CHECK_THROWS_AS(parse_time("yesterday"), FormatError);
  CHECK_THROWS_AS(parse_time("2020-01-01T25:00"), FormatError);
}

TEST_CASE("read_events_csv: header optional, comments skipped") {
  std::istringstream a("timestamp\n0.5\n7200\n");
  CHECK(read_events_csv(a) == std::vector<double>{0.5, 7200.0});
  std::istringstream b("# log\n1\n2\n");
  CHECK(read_events_csv(b) == std::vector<double>{1.0, 2.0});
  std::istringstream c("timestamp\n1\nbad\n");
  CHECK_THROWS_AS(read_events_csv(c), FormatError);
}

TEST_CASE("load_series: bundled fixture and missing file") {
  const auto s = load_series(std::string(ULFKIT_FIXTURES) + "/process_complex.csv");
  CHECK(s.size() == 3);
  CHECK(s[0].size() == 4096);
  CHECK_THROWS_AS(load_series("/nonexistent/file.csv"), InvalidArgument);
}
