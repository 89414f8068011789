#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "drx/csv.hpp"
#include "drx/rng.hpp"
#include "drx/series.hpp"

using namespace drx;

namespace {

AlignedSeries week_series(const char* monday, int interval = 15) {
  // One full week, all samples valid.
  std::vector<RawRecord> recs;
  const Minutes start = parse_timestamp(monday);
  for (int i = 0; i < 7 * 1440 / interval; ++i)
    recs.push_back({start + static_cast<Minutes>(i) * interval, 50.0, 2000.0});
  return align(recs, interval);
}

}  // namespace

TEST_CASE("parse_csv maps fields through the schema") {
  std::istringstream in("timestamp,price,load\n2008-01-01T00:00,45.2,2100\n");
  const ParseResult r = parse_csv(in);
  REQUIRE(r.records.size() == 1);
  REQUIRE(r.records[0].price == 45.2);
  REQUIRE(r.records[0].load == 2100.0);
  REQUIRE(r.records[0].timestamp == parse_timestamp("2008-01-01T00:00"));
}

TEST_CASE("parse_csv respects custom column order and names") {
  std::istringstream in("mw,ts,lmp\n2100,2008-01-01 00:00,45.2\n");
  CsvSchema schema;
  schema.timestamp_col = "ts";
  schema.price_col = "lmp";
  schema.load_col = "mw";
  const ParseResult r = parse_csv(in, schema);
  REQUIRE(r.records.size() == 1);
  REQUIRE(r.records[0].price == 45.2);
}

TEST_CASE("missing column is a schema error") {
  std::istringstream in("timestamp,cost,load\n2008-01-01T00:00,45.2,2100\n");
  REQUIRE_THROWS_AS(parse_csv(in), SchemaError);
}

TEST_CASE("negative load is a row error in strict mode") {
  std::istringstream in("timestamp,price,load\n2008-01-01T00:00,45.2,-5\n");
  REQUIRE_THROWS_AS(parse_csv(in), RowError);
}

TEST_CASE("negative price is allowed") {
  std::istringstream in("timestamp,price,load\n2008-01-01T00:00,-12.5,2100\n");
  REQUIRE(parse_csv(in).records[0].price == -12.5);
}

TEST_CASE("lenient mode reports malformed rows with line numbers") {
  std::istringstream in(
      "timestamp,price,load\n"
      "2008-01-01T00:00,45.2,2100\n"
      "2008-01-01T00:15,oops,2100\n"
      "2008-01-01T00:30,46.0,2050\n"
      "2008-01-01T00:45,44.0,2010\n");
  const ParseResult r = parse_csv(in, {}, /*lenient=*/true);
  REQUIRE(r.records.size() == 3);
  REQUIRE(r.diagnostics.size() == 1);
  REQUIRE(r.diagnostics[0].line == 3);
}

TEST_CASE("row errors carry the offending line number in strict mode") {
  std::istringstream in("timestamp,price,load\n2008-01-01T00:00,45.2,2100\nbad row\n");
  try {
    parse_csv(in);
    FAIL("expected RowError");
  } catch (const RowError& e) {
    REQUIRE(e.line() == 3);
  }
}

TEST_CASE("align builds a contiguous grid") {
  std::vector<RawRecord> recs{{parse_timestamp("2008-01-01T00:00"), 45.0, 2000},
                              {parse_timestamp("2008-01-01T00:15"), 46.0, 2010},
                              {parse_timestamp("2008-01-01T00:30"), 47.0, 2020}};
  const AlignedSeries s = align(recs, 15);
  REQUIRE(s.size() == 3);
  REQUIRE(s.valid_count() == 3);
  REQUIRE(s.prices[2] == 47.0);
}

TEST_CASE("align masks interior gaps") {
  std::vector<RawRecord> recs{{parse_timestamp("2008-01-01T00:00"), 45.0, 2000},
                              {parse_timestamp("2008-01-01T00:45"), 46.0, 2010}};
  const AlignedSeries s = align(recs, 15);
  REQUIRE(s.size() == 4);
  REQUIRE(s.mask[0]);
  REQUIRE_FALSE(s.mask[1]);
  REQUIRE_FALSE(s.mask[2]);
  REQUIRE(s.mask[3]);
}

TEST_CASE("duplicate timestamps are rejected") {
  std::vector<RawRecord> recs{{parse_timestamp("2008-01-01T00:15"), 45.0, 2000},
                              {parse_timestamp("2008-01-01T00:15"), 46.0, 2010}};
  REQUIRE_THROWS_AS(align(recs, 15), AlignmentError);
}

TEST_CASE("off-grid timestamps are rejected") {
  std::vector<RawRecord> recs{{parse_timestamp("2008-01-01T00:07"), 45.0, 2000}};
  REQUIRE_THROWS_AS(align(recs, 15), DomainError);
}

TEST_CASE("align of re-emitted records is idempotent") {
  Rng rng(7);
  std::vector<RawRecord> recs;
  const Minutes start = parse_timestamp("2008-03-03T00:00");
  for (int i = 0; i < 300; ++i) {
    if (rng.uniform() < 0.2) continue;  // leave gaps
    recs.push_back({start + static_cast<Minutes>(i) * 15,
                    rng.gaussian(60, 10), std::fabs(rng.gaussian(2000, 300))});
  }
  const AlignedSeries once = align(recs, 15);
  const AlignedSeries twice = align(once.to_records(), 15);
  REQUIRE(once.start == twice.start);
  REQUIRE(once.prices == twice.prices);
  REQUIRE(once.loads == twice.loads);
  REQUIRE(once.mask == twice.mask);
}

TEST_CASE("filter_workdays masks weekends only") {
  const AlignedSeries s = week_series("2008-01-07T00:00");  // Monday
  const AlignedSeries f = filter_workdays(s);
  REQUIRE(f.size() == s.size());
  REQUIRE(f.valid_count() == s.valid_count() * 5 / 7);
  // Saturday Jan 12 starts 5 days in.
  const std::size_t sat = 5 * 96;
  REQUIRE_FALSE(f.mask[sat]);
  REQUIRE(f.mask[sat - 1]);
}

TEST_CASE("filter_workdays keeps a mid-week day untouched") {
  // 2008-01-02 was a Wednesday.
  std::vector<RawRecord> recs;
  const Minutes start = parse_timestamp("2008-01-02T00:00");
  for (int i = 0; i < 96; ++i)
    recs.push_back({start + static_cast<Minutes>(i) * 15, 50.0, 2000.0});
  const AlignedSeries s = align(recs, 15);
  const AlignedSeries f = filter_workdays(s);
  REQUIRE(f.mask == s.mask);
}

TEST_CASE("configured holidays are masked") {
  std::vector<RawRecord> recs;
  const Minutes start = parse_timestamp("2008-07-03T00:00");
  for (int i = 0; i < 3 * 96; ++i)
    recs.push_back({start + static_cast<Minutes>(i) * 15, 50.0, 2000.0});
  WorkdayCalendar cal;
  cal.holidays.push_back(parse_date("2008-07-04"));
  const AlignedSeries f = filter_workdays(align(recs, 15), cal);
  REQUIRE_FALSE(f.mask[96]);        // Jul 4 00:00
  REQUIRE_FALSE(f.mask[191]);       // Jul 4 23:45
  REQUIRE(f.mask[0]);               // Jul 3 kept
  // Jul 5 was a Saturday: weekend masking still applies.
  REQUIRE_FALSE(f.mask[192]);
}

TEST_CASE("filter_workdays is idempotent") {
  const AlignedSeries s = week_series("2008-01-07T00:00");
  const AlignedSeries once = filter_workdays(s);
  const AlignedSeries twice = filter_workdays(once);
  REQUIRE(once.mask == twice.mask);
}

TEST_CASE("time-of-day window keeps the paper's 14:00-14:30 anchor samples") {
  const AlignedSeries s = week_series("2008-01-07T00:00");
  const AlignedSeries w = window_by_time_of_day(s, 14 * 60, 14 * 60 + 30);
  REQUIRE(w.valid_count() == 7 * 2);  // 14:00 and 14:15 per day
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w.mask[i]) {
      const int tod = minute_of_day(w.time_at(i));
      REQUIRE((tod == 14 * 60 || tod == 14 * 60 + 15));
    }
}

TEST_CASE("full-day window is the identity") {
  const AlignedSeries s = week_series("2008-01-07T00:00");
  const AlignedSeries w = window_by_time_of_day(s, 0, 1440);
  REQUIRE(w.mask == s.mask);
}

TEST_CASE("degenerate window is an error") {
  const AlignedSeries s = week_series("2008-01-07T00:00");
  REQUIRE_THROWS_AS(window_by_time_of_day(s, 600, 600), DomainError);
}

TEST_CASE("business-hours window keeps 24 samples per day on a 15-minute grid") {
  std::vector<RawRecord> recs;
  const Minutes start = parse_timestamp("2008-01-08T00:00");
  for (int i = 0; i < 3 * 96; ++i)
    recs.push_back({start + static_cast<Minutes>(i) * 15, 50.0, 2000.0});
  const AlignedSeries w =
      window_by_time_of_day(align(recs, 15), 9 * 60, 15 * 60);
  REQUIRE(w.valid_count() == 3 * 24);
}

TEST_CASE("masking never reorders or shifts samples") {
  const AlignedSeries s = week_series("2008-01-07T00:00");
  const AlignedSeries f =
      window_by_time_of_day(filter_workdays(s), 9 * 60, 17 * 60);
  REQUIRE(f.size() == s.size());
  REQUIRE(f.start == s.start);
  for (std::size_t i = 0; i < s.size(); ++i) {
    REQUIRE(f.time_at(i) == s.time_at(i));
    REQUIRE(f.prices[i] == s.prices[i]);
  }
}

TEST_CASE("csv round trip through write_csv") {
  const AlignedSeries s = filter_workdays(week_series("2008-01-07T00:00"));
  std::ostringstream out;
  write_csv(out, s);
  std::istringstream in(out.str());
  const AlignedSeries back = align(parse_csv(in).records, 15);
  // Leading/trailing weekend slots are trimmed by re-alignment; compare
  // over the common grid.
  REQUIRE(back.valid_count() == s.valid_count());
  const std::size_t offset =
      static_cast<std::size_t>((back.start - s.start) / s.interval_mins);
  for (std::size_t i = 0; i < back.size(); ++i) {
    REQUIRE(back.mask[i] == s.mask[i + offset]);
    if (back.mask[i]) {
      REQUIRE(back.prices[i] == s.prices[i + offset]);
      REQUIRE(back.loads[i] == s.loads[i + offset]);
    }
  }
}
