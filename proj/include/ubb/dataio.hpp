#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ubb/model.hpp"

namespace ubb {

/// Malformed or unusable input data. Messages carry line numbers or the
/// offending key/timestamp.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An hour with no records between the first and last record.
class GapError : public DataError {
 public:
  GapError(const std::string& what, std::chrono::sys_seconds missing_hour)
      : DataError(what), missing_hour_(missing_hour) {}
  std::chrono::sys_seconds missing_hour() const { return missing_hour_; }

 private:
  std::chrono::sys_seconds missing_hour_;
};

/// Series too short for the requested operation.
class TooShortError : public DataError {
 public:
  using DataError::DataError;
};

/// One measurement; timestamps are local wall-clock time (no DST handling).
struct RawRecord {
  std::chrono::sys_seconds timestamp;
  double value = 0.0;
};

struct SplitSpec {
  std::size_t train_weeks = 2;
  /// Calendar day on which every training week starts (at 00:00).
  std::chrono::weekday alignment = std::chrono::Monday;
};

/// Accepts YYYY-MM-DDTHH:MM[:SS] (a space may replace the 'T', a trailing
/// 'Z' is ignored). Throws DataError.
std::chrono::sys_seconds parse_timestamp(std::string_view text);
std::string format_timestamp(std::chrono::sys_seconds t);

/// Day index of the week clock for a calendar day: Monday = 1 ... Sunday = 7.
int day_index(std::chrono::weekday wd);

/// Reads a `timestamp,value` CSV. Records keep file order.
std::vector<RawRecord> load_csv(std::istream& in);
std::vector<RawRecord> load_csv(const std::filesystem::path& path);

/// Sums records into hour buckets [h, h + 1). Week 0 is the Monday-based
/// week holding the first record. Throws GapError on any empty hour
/// between the first and last record and DataError on empty input.
TrafficSeries aggregate_hourly(std::span<const RawRecord> records);

/// Drops leading samples until the first `alignment` day 00:00.
/// Throws TooShortError when no such boundary exists.
TrafficSeries align_to_week_start(const TrafficSeries& series, std::chrono::weekday alignment);

/// First 168 * train_weeks samples train, the rest test. The series must
/// start at the alignment boundary and hold at least one extra week.
std::pair<TrafficSeries, TrafficSeries> split(const TrafficSeries& series, const SplitSpec& spec);

/// Model JSON: {"mw": {"peak_rate": .., "peak_time": .., "variance": ..}, ...}.
std::string model_to_json(const WeeklyModel& model);
/// Rejects missing or unknown keys, non-numbers and invalid parameters.
WeeklyModel model_from_json(std::string_view text);
void save_model(const WeeklyModel& model, const std::filesystem::path& path);
WeeklyModel load_model(const std::filesystem::path& path);

/// Series CSV: `week,day_k,hour,value`.
void write_series_csv(const TrafficSeries& series, std::ostream& out);
TrafficSeries read_series_csv(std::istream& in);

/// Loads either a raw `timestamp,value` file (aggregated hourly) or a
/// series CSV, chosen by the header line.
TrafficSeries load_series(const std::filesystem::path& path);

/// Objective trace CSV: `iteration,J`.
void write_trace_csv(std::span<const double> trace, std::ostream& out);

}  // namespace ubb
