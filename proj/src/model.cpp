#include "ubb/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ubb {

namespace {

constexpr std::array<std::string_view, kComponentCount> kComponentNames = {
    "mw", "aw", "ew", "msa", "asa", "esa", "msu", "asu", "esu"};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool is_integral_hour(double h) { return std::isfinite(h) && std::floor(h) == h; }

}  // namespace

std::string_view name_of(ComponentId id) { return kComponentNames[index_of(id)]; }

std::string_view name_of(DayCategory c) {
  switch (c) {
    case DayCategory::weekday: return "weekday";
    case DayCategory::saturday: return "saturday";
    case DayCategory::sunday: return "sunday";
  }
  return "?";
}

std::string_view name_of(Period p) {
  switch (p) {
    case Period::morning: return "morning";
    case Period::afternoon: return "afternoon";
    case Period::evening: return "evening";
  }
  return "?";
}

std::optional<ComponentId> parse_component(std::string_view name) {
  for (ComponentId id : kAllComponents) {
    if (name_of(id) == name) return id;
  }
  return std::nullopt;
}

bool is_valid(const ComponentParams& p) {
  return std::isfinite(p.peak_rate) && std::isfinite(p.peak_time) && std::isfinite(p.variance) &&
         p.peak_rate >= 0.0 && p.variance > 0.0 && p.peak_time >= 0.0 && p.peak_time < 24.0;
}

void validate(const ComponentParams& p, std::string_view what) {
  if (is_valid(p)) return;
  std::ostringstream msg;
  msg.precision(17);
  msg << what << ": invalid parameters (peak_rate=" << p.peak_rate << ", peak_time=" << p.peak_time
      << ", variance=" << p.variance
      << "); need peak_rate >= 0, 0 <= peak_time < 24, variance > 0";
  throw InvalidArgument(msg.str());
}

WeeklyModel::WeeklyModel(const std::array<ComponentParams, kComponentCount>& components)
    : components_(components) {}

WeeklyModel WeeklyModel::zero() { return WeeklyModel{}; }

bool is_valid(const WeeklyModel& m) {
  for (const auto& c : m.components()) {
    if (!is_valid(c)) return false;
  }
  return true;
}

void validate(const WeeklyModel& m) {
  for (ComponentId id : kAllComponents) validate(m[id], name_of(id));
}

bool is_valid(const WeekClock& c) {
  return c.day >= 1 && c.day <= kDaysPerWeek && std::isfinite(c.hour) && c.hour >= 0.0 &&
         c.hour < kHoursPerDay;
}

void validate(const WeekClock& c) {
  if (is_valid(c)) return;
  std::ostringstream msg;
  msg << "invalid week clock (day=" << c.day << ", hour=" << c.hour
      << "); need day in [1, 7] and hour in [0, 24)";
  throw InvalidArgument(msg.str());
}

std::int64_t to_hour_index(const WeekTime& wt) {
  validate(wt.clock);
  if (!is_integral_hour(wt.clock.hour)) {
    throw InvalidArgument("start hour must be an exact hour, got " + std::to_string(wt.clock.hour));
  }
  return wt.week * kHoursPerWeek + static_cast<std::int64_t>(wt.clock.day - 1) * kHoursPerDay +
         static_cast<std::int64_t>(wt.clock.hour);
}

WeekTime from_hour_index(std::int64_t hour_index) {
  const std::int64_t week = floor_div(hour_index, kHoursPerWeek);
  const std::int64_t in_week = hour_index - week * kHoursPerWeek;
  return WeekTime{week, WeekClock{static_cast<int>(in_week / kHoursPerDay) + 1,
                                  static_cast<double>(in_week % kHoursPerDay)}};
}

TrafficSeries::TrafficSeries(WeekTime start, std::vector<double> values)
    : start_index_(to_hour_index(start)), values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw InvalidArgument("traffic sample " + std::to_string(i) +
                            " must be finite and non-negative");
    }
  }
}

WeekTime TrafficSeries::time_at(std::size_t i) const {
  return from_hour_index(start_index_ + static_cast<std::int64_t>(i));
}

TrafficSeries TrafficSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > values_.size()) throw std::out_of_range("TrafficSeries::slice out of range");
  std::vector<double> part(values_.begin() + static_cast<std::ptrdiff_t>(first),
                           values_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return TrafficSeries(time_at(first), std::move(part));
}

double component_value(const ComponentParams& params, double offset) {
  return params.peak_rate * std::exp(-(offset * offset) / (2.0 * params.variance));
}

double weekly_value(const WeeklyModel& model, const WeekClock& clock) {
  const double t = clock.hour;
  const int k = clock.day;
  double total = 0.0;
  for (ComponentId id : kAllComponents) {
    const ComponentParams& p = model[id];
    int first_day = 0;
    int last_day = 0;
    switch (category_of(id)) {
      case DayCategory::weekday: first_day = 1; last_day = 5; break;
      case DayCategory::saturday: first_day = last_day = 6; break;
      case DayCategory::sunday: first_day = last_day = 7; break;
    }
    for (int d = first_day; d <= last_day; ++d) {
      const double base = t + 24.0 * (d - k) - p.peak_time;
      for (int nw = -1; nw <= 1; ++nw) {
        total += component_value(p, base + static_cast<double>(kHoursPerWeek * nw));
      }
    }
  }
  return total;
}

TrafficSeries predict_series(const WeeklyModel& model, const WeekTime& start, std::size_t n_hours) {
  if (n_hours == 0) throw InvalidArgument("prediction horizon must be at least one hour");
  const std::int64_t first = to_hour_index(start);
  std::vector<double> out(n_hours);
  for (std::size_t i = 0; i < n_hours; ++i) {
    out[i] = weekly_value(model, from_hour_index(first + static_cast<std::int64_t>(i)).clock);
  }
  return TrafficSeries(start, std::move(out));
}

std::pair<double, double> sigma_interval(const ComponentParams& params) {
  const double sigma = std::sqrt(params.variance);
  return {params.peak_time - sigma, params.peak_time + sigma};
}

std::vector<double> synthetic_noise(std::size_t n, double noise_std, std::uint64_t seed) {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw InvalidArgument("noise standard deviation must be finite and >= 0");
  }
  std::vector<double> noise(n, 0.0);
  if (noise_std == 0.0) return noise;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_std);
  for (double& v : noise) v = dist(rng);
  return noise;
}

TrafficSeries generate_synthetic(const WeeklyModel& model, std::size_t n_weeks, double noise_std,
                                 std::uint64_t seed) {
  if (n_weeks == 0) throw InvalidArgument("synthetic series needs at least one week");
  const std::size_t n = n_weeks * kHoursPerWeek;
  const std::vector<double> noise = synthetic_noise(n, noise_std, seed);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double clean = weekly_value(model, from_hour_index(static_cast<std::int64_t>(i)).clock);
    values[i] = std::max(0.0, clean + noise[i]);
  }
  return TrafficSeries(WeekTime{}, std::move(values));
}

}  // namespace ubb
