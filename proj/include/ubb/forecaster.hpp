#pragma once

#include <cstddef>
#include <string>

#include "ubb/model.hpp"

namespace ubb {

/// Anything that can be trained on a window and then forecast the hours
/// that immediately follow it.
class Forecaster {
 public:
  virtual ~Forecaster() = default;

  virtual std::string name() const = 0;
  virtual void train(const TrafficSeries& history) = 0;
  /// Forecast `n_hours` starting the hour after the training window ends.
  virtual TrafficSeries predict(std::size_t n_hours) const = 0;
};

}  // namespace ubb
