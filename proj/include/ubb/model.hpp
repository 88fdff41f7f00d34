#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ubb {

inline constexpr int kHoursPerDay = 24;
inline constexpr int kDaysPerWeek = 7;
inline constexpr int kHoursPerWeek = kHoursPerDay * kDaysPerWeek;
inline constexpr int kComponentCount = 9;

/// Thrown when a value violates a domain invariant (negative rate, bad clock, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DayCategory { weekday, saturday, sunday };
enum class Period { morning, afternoon, evening };

/// The nine traffic components, one per (day category, daily period) pair.
/// Declaration order is the canonical order used for iteration, summation,
/// serialization and gradient layout.
enum class ComponentId : std::uint8_t { mw, aw, ew, msa, asa, esa, msu, asu, esu };

inline constexpr std::array<ComponentId, kComponentCount> kAllComponents = {
    ComponentId::mw,  ComponentId::aw,  ComponentId::ew,
    ComponentId::msa, ComponentId::asa, ComponentId::esa,
    ComponentId::msu, ComponentId::asu, ComponentId::esu};

constexpr std::size_t index_of(ComponentId id) { return static_cast<std::size_t>(id); }

constexpr DayCategory category_of(ComponentId id) {
  return static_cast<DayCategory>(index_of(id) / 3);
}

constexpr Period period_of(ComponentId id) {
  return static_cast<Period>(index_of(id) % 3);
}

constexpr ComponentId make_component(DayCategory c, Period p) {
  return static_cast<ComponentId>(static_cast<int>(c) * 3 + static_cast<int>(p));
}

std::string_view name_of(ComponentId id);
std::string_view name_of(DayCategory c);
std::string_view name_of(Period p);
std::optional<ComponentId> parse_component(std::string_view name);

/// One Gaussian traffic bump.
struct ComponentParams {
  double peak_rate = 0.0;  // messages/hour, >= 0
  double peak_time = 0.0;  // hour of day, [0, 24)
  double variance = 1.0;   // hours^2, > 0

  bool operator==(const ComponentParams&) const = default;
};

bool is_valid(const ComponentParams& p);
void validate(const ComponentParams& p, std::string_view what = "component");

/// Full nine-component parameter set.
class WeeklyModel {
 public:
  WeeklyModel() = default;
  explicit WeeklyModel(const std::array<ComponentParams, kComponentCount>& components);

  const ComponentParams& operator[](ComponentId id) const { return components_[index_of(id)]; }
  ComponentParams& operator[](ComponentId id) { return components_[index_of(id)]; }

  const std::array<ComponentParams, kComponentCount>& components() const { return components_; }

  /// Model with every peak rate zero (and unit variance).
  static WeeklyModel zero();

  bool operator==(const WeeklyModel&) const = default;

 private:
  std::array<ComponentParams, kComponentCount> components_{};
};

bool is_valid(const WeeklyModel& m);
void validate(const WeeklyModel& m);

/// Position inside a week: day 1..7 (1 = Monday, 6 = Saturday, 7 = Sunday)
/// and hour of day in [0, 24).
struct WeekClock {
  int day = 1;
  double hour = 0.0;

  bool operator==(const WeekClock&) const = default;
};

bool is_valid(const WeekClock& c);
void validate(const WeekClock& c);

/// Absolute position: week number plus clock. Weeks roll over from Sunday
/// to Monday.
struct WeekTime {
  std::int64_t week = 0;
  WeekClock clock;

  bool operator==(const WeekTime&) const = default;
};

/// Hours elapsed since Monday 00:00 of week 0 (requires an integral hour).
std::int64_t to_hour_index(const WeekTime& wt);
WeekTime from_hour_index(std::int64_t hour_index);

/// Gap-free hourly measurements starting at an exact hour.
class TrafficSeries {
 public:
  TrafficSeries() = default;
  TrafficSeries(WeekTime start, std::vector<double> values);

  WeekTime start() const { return from_hour_index(start_index_); }
  std::int64_t start_index() const { return start_index_; }
  /// Hour index one past the last sample.
  std::int64_t end_index() const { return start_index_ + static_cast<std::int64_t>(values_.size()); }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  WeekTime time_at(std::size_t i) const;
  WeekClock clock_at(std::size_t i) const { return time_at(i).clock; }

  /// Samples [first, first + count).
  TrafficSeries slice(std::size_t first, std::size_t count) const;

  bool operator==(const TrafficSeries&) const = default;

 private:
  std::int64_t start_index_ = 0;
  std::vector<double> values_;
};

/// R_p * exp(-offset^2 / (2 sigma^2)); `offset` is already shifted by the caller.
double component_value(const ComponentParams& params, double offset);

/// Truncated weekly superposition: every component contributes its copies
/// from the neighbouring weeks (-1, 0, +1); weekday components are repeated
/// over the five weekdays. 63 Gaussian terms in a fixed order.
double weekly_value(const WeeklyModel& model, const WeekClock& clock);

/// Evaluates `weekly_value` for n_hours consecutive hours from `start`.
/// Throws InvalidArgument for a non-integral start hour or n_hours == 0.
TrafficSeries predict_series(const WeeklyModel& model, const WeekTime& start, std::size_t n_hours);

/// t_p -/+ sigma. Endpoints may leave [0, 24).
std::pair<double, double> sigma_interval(const ComponentParams& params);

/// Unclamped i.i.d. N(0, noise_std^2) draws used by generate_synthetic.
std::vector<double> synthetic_noise(std::size_t n, double noise_std, std::uint64_t seed);

/// n_weeks of hourly samples from Monday 00:00 of week 0, noise added and
/// clamped at zero. Deterministic for a fixed seed.
TrafficSeries generate_synthetic(const WeeklyModel& model, std::size_t n_weeks, double noise_std,
                                 std::uint64_t seed);

}  // namespace ubb
