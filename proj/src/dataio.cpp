#include "ubb/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "ubb/text.hpp"

namespace ubb {

namespace {

using std::chrono::days;
using std::chrono::hours;
using std::chrono::sys_days;
using std::chrono::sys_seconds;

constexpr std::string_view kRawHeader = "timestamp,value";
constexpr std::string_view kSeriesHeader = "week,day_k,hour,value";
constexpr std::string_view kTraceHeader = "iteration,J";

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_exact(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

double parse_value(std::string_view field, std::size_t line) {
  double v = 0.0;
  if (!parse_exact(field, v)) {
    throw DataError(at_line(line) + "cannot parse value '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) throw DataError(at_line(line) + "value must be finite");
  if (v < 0.0) throw DataError(at_line(line) + "negative value " + std::string(field));
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int fixed_int(std::string_view s, std::size_t pos, std::size_t len, bool& ok) {
  int v = 0;
  if (pos + len > s.size() || !parse_exact(s.substr(pos, len), v)) ok = false;
  return v;
}

}  // namespace

sys_seconds parse_timestamp(std::string_view text) {
  std::string_view s = trim(text);
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);
  const auto fail = [&]() -> DataError {
    return DataError("unparseable timestamp '" + std::string(text) + "'");
  };
  // YYYY-MM-DDTHH:MM[:SS]
  if (s.size() != 16 && s.size() != 19) throw fail();
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') throw fail();
  if (s.size() == 19 && s[16] != ':') throw fail();
  bool ok = true;
  const int year = fixed_int(s, 0, 4, ok);
  const int month = fixed_int(s, 5, 2, ok);
  const int day = fixed_int(s, 8, 2, ok);
  const int hour = fixed_int(s, 11, 2, ok);
  const int minute = fixed_int(s, 14, 2, ok);
  const int second = s.size() == 19 ? fixed_int(s, 17, 2, ok) : 0;
  if (!ok) throw fail();
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59 || hour < 0 || minute < 0 || second < 0) {
    throw fail();
  }
  return sys_days(ymd) + hours(hour) + std::chrono::minutes(minute) + std::chrono::seconds(second);
}

std::string format_timestamp(sys_seconds t) {
  const sys_days day = std::chrono::floor<days>(t);
  const std::chrono::year_month_day ymd(day);
  const auto secs = (t - day).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

int day_index(std::chrono::weekday wd) { return static_cast<int>(wd.iso_encoding()); }

std::vector<RawRecord> load_csv(std::istream& in) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (!header_seen) {
      std::string_view h = row;
      if (h.substr(0, 3) == "\xEF\xBB\xBF") h.remove_prefix(3);
      if (h != kRawHeader) {
        throw DataError(at_line(line_no) + "expected header '" + std::string(kRawHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (row.empty()) continue;
    const auto fields = split_fields(row);
    if (fields.size() != 2) {
      throw DataError(at_line(line_no) + "expected 2 fields, got " + std::to_string(fields.size()));
    }
    sys_seconds ts;
    try {
      ts = parse_timestamp(fields[0]);
    } catch (const DataError& e) {
      throw DataError(at_line(line_no) + e.what());
    }
    records.push_back(RawRecord{ts, parse_value(fields[1], line_no)});
  }
  if (!header_seen) throw DataError("empty file: missing header '" + std::string(kRawHeader) + "'");
  return records;
}

std::vector<RawRecord> load_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  return load_csv(in);
}

TrafficSeries aggregate_hourly(std::span<const RawRecord> records) {
  if (records.empty()) throw DataError("no records to aggregate");
  for (const RawRecord& r : records) {
    if (!std::isfinite(r.value) || r.value < 0.0) {
      throw DataError("record at " + format_timestamp(r.timestamp) + " has an invalid value");
    }
  }

  // Sorting by (time, value) makes the summation order independent of input order.
  std::vector<RawRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), [](const RawRecord& a, const RawRecord& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.value < b.value;
  });

  const auto first_hour = std::chrono::floor<hours>(sorted.front().timestamp);
  std::vector<double> values;
  auto current = first_hour;
  double bucket = 0.0;
  for (const RawRecord& r : sorted) {
    const auto h = std::chrono::floor<hours>(r.timestamp);
    if (h != current) {
      values.push_back(bucket);
      if (h != current + hours(1)) {
        const sys_seconds missing = current + hours(1);
        throw GapError("gap in data: no records for hour starting " + format_timestamp(missing),
                       missing);
      }
      current = h;
      bucket = 0.0;
    }
    bucket += r.value;
  }
  values.push_back(bucket);

  const sys_days first_day = std::chrono::floor<days>(first_hour);
  const WeekClock clock{day_index(std::chrono::weekday(first_day)),
                        static_cast<double>((first_hour - first_day).count())};
  return TrafficSeries(WeekTime{0, clock}, std::move(values));
}

TrafficSeries align_to_week_start(const TrafficSeries& series, std::chrono::weekday alignment) {
  const std::int64_t boundary = static_cast<std::int64_t>(day_index(alignment) - 1) * kHoursPerDay;
  const std::int64_t start = series.start_index();
  const std::int64_t in_week = ((start - boundary) % kHoursPerWeek + kHoursPerWeek) % kHoursPerWeek;
  const std::size_t skip = in_week == 0 ? 0 : static_cast<std::size_t>(kHoursPerWeek - in_week);
  if (skip >= series.size()) {
    throw TooShortError("series never reaches a week start; cannot align");
  }
  return series.slice(skip, series.size() - skip);
}

std::pair<TrafficSeries, TrafficSeries> split(const TrafficSeries& series, const SplitSpec& spec) {
  if (spec.train_weeks < 1) throw InvalidArgument("train_weeks must be >= 1");
  const WeekClock start = series.empty() ? WeekClock{} : series.start().clock;
  if (!series.empty() && (start.day != day_index(spec.alignment) || start.hour != 0.0)) {
    throw InvalidArgument("series starts at day " + std::to_string(start.day) + " hour " +
                          std::to_string(static_cast<int>(start.hour)) +
                          ", not at the week alignment boundary");
  }
  const std::size_t train_hours = spec.train_weeks * kHoursPerWeek;
  if (series.size() < train_hours + kHoursPerWeek) {
    throw TooShortError("series of " + std::to_string(series.size()) + " hours is too short for " +
                        std::to_string(spec.train_weeks) +
                        " training week(s) plus at least one test week");
  }
  return {series.slice(0, train_hours), series.slice(train_hours, series.size() - train_hours)};
}

std::string model_to_json(const WeeklyModel& model) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (ComponentId id : kAllComponents) {
    const ComponentParams& p = model[id];
    j[std::string(name_of(id))] = {
        {"peak_rate", p.peak_rate}, {"peak_time", p.peak_time}, {"variance", p.variance}};
  }
  return j.dump(2) + "\n";
}

WeeklyModel model_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("model JSON: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!parse_component(key)) throw DataError("model JSON: unknown component key '" + key + "'");
  }
  WeeklyModel model;
  for (ComponentId id : kAllComponents) {
    const std::string key(name_of(id));
    if (!j.contains(key)) throw DataError("model JSON: missing component '" + key + "'");
    const auto& obj = j.at(key);
    if (!obj.is_object()) throw DataError("model JSON: '" + key + "' must be an object");
    for (const auto& [field, value] : obj.items()) {
      if (field != "peak_rate" && field != "peak_time" && field != "variance") {
        throw DataError("model JSON: unknown field '" + key + "." + field + "'");
      }
    }
    const auto number = [&](const char* field) {
      if (!obj.contains(field)) {
        throw DataError("model JSON: missing field '" + key + "." + field + "'");
      }
      const auto& v = obj.at(field);
      if (!v.is_number()) {
        throw DataError("model JSON: '" + key + "." + field + "' must be a number");
      }
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        throw DataError("model JSON: '" + key + "." + field + "' must be finite");
      }
      return d;
    };
    model[id] = ComponentParams{number("peak_rate"), number("peak_time"), number("variance")};
    if (!is_valid(model[id])) {
      try {
        validate(model[id], key);
      } catch (const InvalidArgument& e) {
        throw DataError(std::string("model JSON: ") + e.what());
      }
    }
  }
  return model;
}

void save_model(const WeeklyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw DataError("failed writing " + path.string());
}

WeeklyModel load_model(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return model_from_json(text);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_series_csv(const TrafficSeries& series, std::ostream& out) {
  out << kSeriesHeader << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    const WeekTime t = series.time_at(i);
    out << t.week << ',' << t.clock.day << ',' << static_cast<int>(t.clock.hour) << ','
        << format_number(series[i]) << '\n';
  }
}

TrafficSeries read_series_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::optional<WeekTime> start;
  std::int64_t expected = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (!header_seen) {
      if (row != kSeriesHeader) {
        throw DataError(at_line(line_no) + "expected header '" + std::string(kSeriesHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (row.empty()) continue;
    const auto fields = split_fields(row);
    if (fields.size() != 4) {
      throw DataError(at_line(line_no) + "expected 4 fields, got " + std::to_string(fields.size()));
    }
    std::int64_t week = 0;
    int day = 0;
    int hour = 0;
    if (!parse_exact(fields[0], week) || !parse_exact(fields[1], day) || !parse_exact(fields[2], hour) ||
        day < 1 || day > 7 || hour < 0 || hour > 23) {
      throw DataError(at_line(line_no) + "invalid week/day_k/hour");
    }
    const WeekTime t{week, WeekClock{day, static_cast<double>(hour)}};
    const std::int64_t index = to_hour_index(t);
    if (!start) {
      start = t;
    } else if (index != expected) {
      const WeekTime want = from_hour_index(expected);
      throw DataError(at_line(line_no) + "series is not contiguous: expected week " +
                      std::to_string(want.week) + " day " + std::to_string(want.clock.day) +
                      " hour " + std::to_string(static_cast<int>(want.clock.hour)));
    }
    expected = index + 1;
    values.push_back(parse_value(fields[3], line_no));
  }
  if (!header_seen) throw DataError("empty file: missing header '" + std::string(kSeriesHeader) + "'");
  if (!start) throw DataError("series file has no samples");
  return TrafficSeries(*start, std::move(values));
}

TrafficSeries load_series(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::string_view first(text);
  first = first.substr(0, first.find('\n'));
  first = trim(first);
  if (first.substr(0, 3) == "\xEF\xBB\xBF") first.remove_prefix(3);
  std::istringstream in(text);
  try {
    if (first == kSeriesHeader) return read_series_csv(in);
    const auto records = load_csv(in);
    return aggregate_hourly(records);
  } catch (const GapError& e) {
    throw GapError(path.string() + ": " + e.what(), e.missing_hour());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_trace_csv(std::span<const double> trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) out << i << ',' << format_number(trace[i]) << '\n';
}

}  // namespace ubb
