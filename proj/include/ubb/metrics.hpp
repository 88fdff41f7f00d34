#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "ubb/forecaster.hpp"
#include "ubb/model.hpp"

namespace ubb {

/// Raised when a metric is undefined for its inputs (mismatched lengths,
/// empty input, or R2 on a constant actual series).
class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double mean(std::span<const double> values);

double mse(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);
/// 1 - SS_res / SS_tot. Throws MetricError when the actual series is constant.
double r2(std::span<const double> actual, std::span<const double> predicted);

struct EvalReport {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> r2;  // empty when the actual series is constant
  std::size_t n_samples = 0;
  double elapsed_train_seconds = 0.0;
  double elapsed_predict_seconds = 0.0;
};

/// All four metrics for one prediction; timing fields are left at zero.
EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted);

/// Trains on `train`, forecasts `test.size()` hours and scores them, timing
/// both phases with a monotonic clock. `test` must start the hour after `train`.
EvalReport time_evaluation(Forecaster& forecaster, const TrafficSeries& train,
                           const TrafficSeries& test);

/// JSON object; r2 is null when undefined. Timing fields are dropped when
/// `with_timing` is false.
std::string to_json(const EvalReport& report, bool with_timing = true);
std::string csv_header(bool with_timing = true);
/// One CSV row matching csv_header, prefixed with `label`.
std::string to_csv_row(const std::string& label, const EvalReport& report, bool with_timing = true);

}  // namespace ubb
