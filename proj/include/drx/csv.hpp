#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "drx/series.hpp"

namespace drx {

// Column mapping for price/load CSV files. Header row is required.
struct CsvSchema {
  std::string timestamp_col = "timestamp";
  std::string price_col = "price";
  std::string load_col = "load";
  char delimiter = ',';
};

struct RowDiagnostic {
  std::size_t line = 0;  // 1-based, header = line 1
  std::string message;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::vector<RowDiagnostic> diagnostics;  // populated in lenient mode
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  char delim,
                                                  std::vector<std::string_view>& out) {
  out.clear();
  std::size_t begin = 0;
  while (true) {
    const std::size_t pos = line.find(delim, begin);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(begin));
      break;
    }
    out.push_back(line.substr(begin, pos - begin));
    begin = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view s, std::size_t line,
                           const char* what) {
  s = trim(s);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw RowError(line, std::string("unparseable ") + what + " '" +
                             std::string(s) + "'");
  return value;
}

}  // namespace detail

// Reads price/load records from a CSV stream. In strict mode (default) the
// first malformed row throws RowError. In lenient mode malformed rows are
// skipped and reported in the result's diagnostics. A missing column is a
// SchemaError in either mode.
inline ParseResult parse_csv(std::istream& in, const CsvSchema& schema = {},
                             bool lenient = false) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty input: no header row");

  std::vector<std::string_view> fields;
  detail::split_fields(line, schema.delimiter, fields);
  int ts_idx = -1, price_idx = -1, load_idx = -1;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto name = detail::trim(fields[i]);
    if (name == schema.timestamp_col) ts_idx = static_cast<int>(i);
    if (name == schema.price_col) price_idx = static_cast<int>(i);
    if (name == schema.load_col) load_idx = static_cast<int>(i);
  }
  if (ts_idx < 0) throw SchemaError("missing column '" + schema.timestamp_col + "'");
  if (price_idx < 0) throw SchemaError("missing column '" + schema.price_col + "'");
  if (load_idx < 0) throw SchemaError("missing column '" + schema.load_col + "'");
  const std::size_t needed = static_cast<std::size_t>(
      std::max(ts_idx, std::max(price_idx, load_idx)) + 1);

  ParseResult result;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      detail::split_fields(line, schema.delimiter, fields);
      if (fields.size() < needed)
        throw RowError(lineno, "expected at least " + std::to_string(needed) +
                                   " fields, got " + std::to_string(fields.size()));
      RawRecord rec;
      rec.timestamp = [&] {
        try {
          return parse_timestamp(detail::trim(fields[ts_idx]));
        } catch (const DomainError& e) {
          throw RowError(lineno, e.what());
        }
      }();
      rec.price = detail::parse_number(fields[price_idx], lineno, "price");
      rec.load = detail::parse_number(fields[load_idx], lineno, "load");
      if (!std::isfinite(rec.price)) throw RowError(lineno, "non-finite price");
      if (!std::isfinite(rec.load)) throw RowError(lineno, "non-finite load");
      if (rec.load < 0.0) throw RowError(lineno, "negative load");
      result.records.push_back(rec);
    } catch (const RowError& e) {
      if (!lenient) throw;
      result.diagnostics.push_back({e.line(), e.what()});
    }
  }
  return result;
}

// Writes a series back out in the same schema parse_csv reads. Masked
// samples are omitted, so write -> parse -> align round-trips.
inline void write_csv(std::ostream& out, const AlignedSeries& s,
                      const CsvSchema& schema = {}) {
  out << schema.timestamp_col << schema.delimiter << schema.price_col
      << schema.delimiter << schema.load_col << '\n';
  char buf[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.mask[i]) continue;
    out << format_timestamp(s.time_at(i)) << schema.delimiter;
    std::snprintf(buf, sizeof buf, "%.10g", s.prices[i]);
    out << buf << schema.delimiter;
    std::snprintf(buf, sizeof buf, "%.10g", s.loads[i]);
    out << buf << '\n';
  }
}

}  // namespace drx
