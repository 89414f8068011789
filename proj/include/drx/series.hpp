#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "drx/civil_time.hpp"
#include "drx/error.hpp"

namespace drx {

// One raw observation: price/load pair at a minute-resolution timestamp.
struct RawRecord {
  Minutes timestamp = 0;
  double price = 0.0;  // $/MWh; may be negative, must be finite
  double load = 0.0;   // MW; nonnegative

  void validate(int interval_mins) const {
    if (!std::isfinite(price)) throw DomainError("price is not finite");
    if (!std::isfinite(load)) throw DomainError("load is not finite");
    if (load < 0.0) throw DomainError("negative load");
    if (interval_mins > 0 && minute_of_day(timestamp) % interval_mins != 0)
      throw DomainError("timestamp " + format_timestamp(timestamp) +
                        " is off the " + std::to_string(interval_mins) +
                        "-minute grid");
  }
};

// Uniformly sampled price/load series. Sample i sits at exactly
// start + i*interval; calendar gaps stay in the grid as masked slots so
// lag arithmetic remains valid across them. Immutable by convention:
// every transformation returns a new series.
struct AlignedSeries {
  Minutes start = 0;
  int interval_mins = 15;
  std::vector<double> prices;
  std::vector<double> loads;
  std::vector<bool> mask;  // true = valid sample

  std::size_t size() const { return prices.size(); }
  Minutes time_at(std::size_t i) const {
    return start + static_cast<Minutes>(i) * interval_mins;
  }
  bool valid(std::size_t i) const { return i < mask.size() && mask[i]; }

  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  }

  std::vector<RawRecord> to_records() const {
    std::vector<RawRecord> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i)
      if (mask[i]) out.push_back({time_at(i), prices[i], loads[i]});
    return out;
  }
};

// Snaps records onto the uniform grid spanning [min ts, max ts].
// Duplicate timestamps are an error: merging them silently would corrupt
// spike detection downstream. Missing grid points become masked slots.
inline AlignedSeries align(std::vector<RawRecord> records, int interval_mins) {
  if (records.empty()) throw AlignmentError("no records to align");
  if (interval_mins <= 0) throw AlignmentError("interval must be positive");
  for (const auto& r : records) r.validate(interval_mins);

  std::sort(records.begin(), records.end(),
            [](const RawRecord& a, const RawRecord& b) {
              return a.timestamp < b.timestamp;
            });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].timestamp == records[i - 1].timestamp)
      throw AlignmentError("duplicate timestamp " +
                           format_timestamp(records[i].timestamp));

  AlignedSeries s;
  s.start = records.front().timestamp;
  s.interval_mins = interval_mins;
  const std::size_t n = static_cast<std::size_t>(
      (records.back().timestamp - s.start) / interval_mins + 1);
  s.prices.assign(n, 0.0);
  s.loads.assign(n, 0.0);
  s.mask.assign(n, false);
  for (const auto& r : records) {
    const std::size_t i =
        static_cast<std::size_t>((r.timestamp - s.start) / interval_mins);
    s.prices[i] = r.price;
    s.loads[i] = r.load;
    s.mask[i] = true;
  }
  return s;
}

struct WorkdayCalendar {
  bool drop_weekends = true;
  std::vector<Minutes> holidays;  // midnight stamps of full days to mask

  bool is_offday(Minutes t) const {
    if (drop_weekends && is_weekend(t)) return true;
    const Minutes midnight = t - minute_of_day(t);
    return std::find(holidays.begin(), holidays.end(), midnight) !=
           holidays.end();
  }
};

// Masks weekend (and configured holiday) samples, keeping grid positions.
inline AlignedSeries filter_workdays(const AlignedSeries& series,
                                     const WorkdayCalendar& cal = {}) {
  if (series.size() == 0) throw DegenerateInputError("empty series");
  AlignedSeries out = series;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.mask[i] && cal.is_offday(out.time_at(i))) out.mask[i] = false;
  return out;
}

// Masks samples outside the clock window [start_tod, end_tod), in minutes
// of day. end_tod may be 1440 ("24:00"), making the window a full day.
inline AlignedSeries window_by_time_of_day(const AlignedSeries& series,
                                           int start_tod, int end_tod) {
  if (start_tod >= end_tod)
    throw DomainError("degenerate time-of-day window");
  if (start_tod < 0 || end_tod > 1440)
    throw DomainError("time-of-day window outside a single day");
  AlignedSeries out = series;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int tod = minute_of_day(out.time_at(i));
    if (tod < start_tod || tod >= end_tod) out.mask[i] = false;
  }
  return out;
}

// Valid samples of one field, in grid order. Handy for the stats layer.
enum class Field { price, load };

inline const std::vector<double>& field_of(const AlignedSeries& s, Field f) {
  return f == Field::price ? s.prices : s.loads;
}

}  // namespace drx
