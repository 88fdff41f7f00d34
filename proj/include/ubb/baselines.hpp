#pragma once

#include <optional>
#include <string_view>

#include "ubb/forecaster.hpp"
#include "ubb/model.hpp"

namespace ubb {

/// Reference predictors for relative comparison.
enum class BaselineKind {
  seasonal_naive,       // repeat the final training week
  weekly_profile_mean,  // per-hour-of-week mean over all training weeks
};

inline constexpr std::array<BaselineKind, 2> kAllBaselines = {BaselineKind::seasonal_naive,
                                                              BaselineKind::weekly_profile_mean};

std::string_view name_of(BaselineKind kind);
std::optional<BaselineKind> parse_baseline(std::string_view name);

/// Forecast `n_hours` starting the hour after `train` ends. Both predictors
/// are 168-hour periodic. Throws InvalidArgument when `train` is shorter than
/// a week, or (profile mean only) not a whole number of weeks.
TrafficSeries baseline_predict(BaselineKind kind, const TrafficSeries& train, std::size_t n_hours);

class BaselineForecaster final : public Forecaster {
 public:
  explicit BaselineForecaster(BaselineKind kind) : kind_(kind) {}

  std::string name() const override { return std::string(name_of(kind_)); }
  void train(const TrafficSeries& history) override { history_ = history; }
  TrafficSeries predict(std::size_t n_hours) const override {
    return baseline_predict(kind_, history_, n_hours);
  }

 private:
  BaselineKind kind_;
  TrafficSeries history_;
};

}  // namespace ubb
