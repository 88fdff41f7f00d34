#include "ubb/baselines.hpp"

#include <string>
#include <vector>

namespace ubb {

std::string_view name_of(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::seasonal_naive: return "seasonal_naive";
    case BaselineKind::weekly_profile_mean: return "weekly_profile_mean";
  }
  return "?";
}

std::optional<BaselineKind> parse_baseline(std::string_view name) {
  for (BaselineKind kind : kAllBaselines) {
    if (name_of(kind) == name) return kind;
  }
  return std::nullopt;
}

TrafficSeries baseline_predict(BaselineKind kind, const TrafficSeries& train, std::size_t n_hours) {
  constexpr auto week = static_cast<std::size_t>(kHoursPerWeek);
  if (train.size() < week) {
    throw InvalidArgument(std::string(name_of(kind)) + " needs at least one full training week, got " +
                          std::to_string(train.size()) + " hours");
  }
  if (n_hours == 0) throw InvalidArgument("forecast horizon must be at least one hour");

  // profile[j] is the forecast for hours congruent to train.end_index() + j (mod 168).
  std::vector<double> profile(week, 0.0);
  const std::size_t n = train.size();
  switch (kind) {
    case BaselineKind::seasonal_naive:
      for (std::size_t j = 0; j < week; ++j) profile[j] = train[n - week + j];
      break;
    case BaselineKind::weekly_profile_mean: {
      if (n % week != 0) {
        throw InvalidArgument("weekly_profile_mean needs whole training weeks, got " +
                              std::to_string(n) + " hours");
      }
      const std::size_t weeks = n / week;
      for (std::size_t j = 0; j < week; ++j) {
        double sum = 0.0;
        for (std::size_t w = 0; w < weeks; ++w) sum += train[w * week + j];
        profile[j] = sum / static_cast<double>(weeks);
      }
      break;
    }
  }

  std::vector<double> out(n_hours);
  for (std::size_t i = 0; i < n_hours; ++i) out[i] = profile[i % week];
  return TrafficSeries(from_hour_index(train.end_index()), std::move(out));
}

}  // namespace ubb
