#include <catch2/catch_amalgamated.hpp>

#include "drx/civil_time.hpp"

using namespace drx;

TEST_CASE("timestamp parsing accepts both separators") {
  const Minutes a = parse_timestamp("2008-01-01T00:15");
  const Minutes b = parse_timestamp("2008-01-01 00:15");
  REQUIRE(a == b);
  REQUIRE(format_timestamp(a) == "2008-01-01T00:15");
}

TEST_CASE("timestamp parsing accepts :00 seconds and trailing Z") {
  REQUIRE(parse_timestamp("2008-06-08T14:30:00") ==
          parse_timestamp("2008-06-08T14:30"));
  REQUIRE(parse_timestamp("2008-06-08T14:30Z") ==
          parse_timestamp("2008-06-08T14:30"));
  REQUIRE_THROWS_AS(parse_timestamp("2008-06-08T14:30:30"), DomainError);
}

TEST_CASE("timestamp parsing rejects malformed input") {
  REQUIRE_THROWS_AS(parse_timestamp("2008/01/01 00:15"), DomainError);
  REQUIRE_THROWS_AS(parse_timestamp("2008-13-01T00:00"), DomainError);
  REQUIRE_THROWS_AS(parse_timestamp("2008-02-30T00:00"), DomainError);
  REQUIRE_THROWS_AS(parse_timestamp("2008-01-01T24:00"), DomainError);
  REQUIRE_THROWS_AS(parse_timestamp("garbage"), DomainError);
}

TEST_CASE("civil round trip across leap years") {
  for (const char* s : {"1999-12-31T23:45", "2000-02-29T12:00", "2008-02-29T00:00",
                        "2008-09-30T23:45", "1970-01-01T00:00"}) {
    const Minutes t = parse_timestamp(s);
    REQUIRE(format_timestamp(t) == std::string(s));
  }
}

TEST_CASE("weekday matches the 2008 calendar") {
  // Jan 1, 2008 was a Tuesday; Jan 5 a Saturday; Jan 6 a Sunday.
  REQUIRE(weekday(parse_timestamp("2008-01-01T00:00")) == 1);
  REQUIRE(weekday(parse_timestamp("2008-01-05T10:00")) == 5);
  REQUIRE(weekday(parse_timestamp("2008-01-06T10:00")) == 6);
  REQUIRE(is_weekend(parse_timestamp("2008-01-05T10:00")));
  REQUIRE_FALSE(is_weekend(parse_timestamp("2008-01-07T10:00")));
}

TEST_CASE("time-of-day parsing") {
  REQUIRE(parse_time_of_day("14:00") == 14 * 60);
  REQUIRE(parse_time_of_day("24:00") == 1440);
  REQUIRE_THROWS_AS(parse_time_of_day("25:00"), DomainError);
  REQUIRE_THROWS_AS(parse_time_of_day("9:00"), DomainError);
}

TEST_CASE("minute_of_day handles pre-epoch times") {
  const Minutes t = parse_timestamp("1969-12-31T23:45");
  REQUIRE(minute_of_day(t) == 23 * 60 + 45);
}
