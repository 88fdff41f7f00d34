#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "ubb/forecaster.hpp"
#include "ubb/model.hpp"

namespace ubb {

/// Per-component parameter slot in a gradient vector.
enum class Parameter : std::uint8_t { peak_rate, peak_time, variance };

inline constexpr std::size_t kParameterCount = 3 * kComponentCount;

/// Gradient layout: component order of ComponentId, then (peak_rate, peak_time, variance).
using ParameterVector = std::array<double, kParameterCount>;

constexpr std::size_t parameter_index(ComponentId id, Parameter p) {
  return 3 * index_of(id) + static_cast<std::size_t>(p);
}

struct FitConfig {
  std::size_t max_iterations = 5000;
  /// Stop when |J_prev - J| / max(J_prev, 1e-12) drops below this (normalized units).
  double relative_tolerance = 1e-8;
  /// Largest trial step of the line search, in normalized units.
  double initial_step = 1.0;
  double backtracking_factor = 0.5;
  /// Divide data and peak rates by the data maximum while optimizing.
  bool normalize = true;

  void validate() const;
};

enum class StopReason {
  tolerance,       // relative objective change fell below the tolerance
  max_iterations,  // iteration budget exhausted
  stalled,         // line search could not find a decreasing step
};

struct FitReport {
  WeeklyModel model;
  /// J at the starting point followed by J after every accepted step.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  double elapsed_seconds = 0.0;
  bool converged = false;
  StopReason stop_reason = StopReason::max_iterations;
};

/// Sum of squared residuals between the model and every sample of `data`.
/// Throws InvalidArgument on empty data.
double objective(const WeeklyModel& model, const TrafficSeries& data);

/// Analytic gradient of `objective` with respect to the 27 model parameters.
ParameterVector gradient(const WeeklyModel& model, const TrafficSeries& data);

/// Starting point built from the mean weekday, Saturday and Sunday profiles.
///
/// Each profile is searched for its maximum inside the morning [6, 14),
/// afternoon [14, 19) and evening [19, 30) windows (hours past midnight
/// read the same profile from hour 0). The earliest hour wins ties. The
/// peak value becomes the peak rate and every variance starts at 4 h^2.
WeeklyModel init_heuristic(const TrafficSeries& data);

/// Least-squares fit of all nine components by projected gradient descent
/// with an Armijo backtracking line search.
///
/// Variances are optimized as log-variances, peak rates are projected onto
/// [0, inf) after each step and peak times move freely, being wrapped into
/// [0, 24) only in the returned model. The objective trace never increases.
///
/// Requires at least one full week of data; uses init_heuristic when `init`
/// is empty. Non-convergence is reported through FitReport::converged.
FitReport fit(const TrafficSeries& data, const FitConfig& config = {},
              const std::optional<WeeklyModel>& init = std::nullopt);

/// Forecaster that fits the nine-component model on its training window.
class FittedModelForecaster final : public Forecaster {
 public:
  explicit FittedModelForecaster(FitConfig config = {}) : config_(config) {}

  std::string name() const override { return "ubb"; }
  void train(const TrafficSeries& history) override;
  TrafficSeries predict(std::size_t n_hours) const override;

  /// Report of the last train() call.
  const std::optional<FitReport>& report() const { return report_; }

 private:
  FitConfig config_;
  std::optional<FitReport> report_;
  std::int64_t next_hour_ = 0;
};

/// Forecaster around an already-known model; training only records where
/// the window ends.
class FixedModelForecaster final : public Forecaster {
 public:
  explicit FixedModelForecaster(WeeklyModel model) : model_(std::move(model)) {}

  std::string name() const override { return "ubb"; }
  void train(const TrafficSeries& history) override { next_hour_ = history.end_index(); }
  TrafficSeries predict(std::size_t n_hours) const override;

 private:
  WeeklyModel model_;
  std::int64_t next_hour_ = 0;
};

}  // namespace ubb
