#include "ubb/metrics.hpp"

#include <chrono>
#include <cmath>

#include "json.hpp"
#include "ubb/text.hpp"

namespace ubb {

namespace {

void check_pair(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw MetricError("length mismatch: " + std::to_string(actual.size()) + " actual vs " +
                      std::to_string(predicted.size()) + " predicted");
  }
  if (actual.empty()) throw MetricError("metrics need at least one sample");
}

double sum_squared_error(std::span<const double> actual, std::span<const double> predicted) {
  double sse = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sse += e * e;
  }
  return sse;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double mean(std::span<const double> values) {
  if (values.empty()) throw MetricError("mean of an empty series");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  return sum_squared_error(actual, predicted) / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  return std::sqrt(mse(actual, predicted));
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(actual[i] - predicted[i]);
  return sum / static_cast<double>(actual.size());
}

double r2(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  const double centre = mean(actual);
  double ss_tot = 0.0;
  for (double y : actual) {
    const double d = y - centre;
    ss_tot += d * d;
  }
  if (ss_tot == 0.0) throw MetricError("R2 is undefined for a constant actual series");
  return 1.0 - sum_squared_error(actual, predicted) / ss_tot;
}

EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted) {
  EvalReport report;
  report.mse = mse(actual, predicted);
  report.rmse = std::sqrt(report.mse);
  report.mae = mae(actual, predicted);
  try {
    report.r2 = r2(actual, predicted);
  } catch (const MetricError&) {
    report.r2.reset();
  }
  report.n_samples = actual.size();
  return report;
}

EvalReport time_evaluation(Forecaster& forecaster, const TrafficSeries& train,
                           const TrafficSeries& test) {
  if (test.empty()) throw InvalidArgument("test window is empty");
  if (train.end_index() != test.start_index()) {
    throw InvalidArgument("test window must start the hour after the training window");
  }
  const auto t0 = std::chrono::steady_clock::now();
  forecaster.train(train);
  const double train_seconds = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const TrafficSeries predicted = forecaster.predict(test.size());
  const double predict_seconds = seconds_since(t1);

  if (predicted.start_index() != test.start_index() || predicted.size() != test.size()) {
    throw InvalidArgument(forecaster.name() + " returned a forecast not aligned with the test window");
  }
  EvalReport report = evaluate(test.values(), predicted.values());
  report.elapsed_train_seconds = train_seconds;
  report.elapsed_predict_seconds = predict_seconds;
  return report;
}

std::string to_json(const EvalReport& report, bool with_timing) {
  nlohmann::ordered_json j;
  j["n_samples"] = report.n_samples;
  j["mse"] = report.mse;
  j["rmse"] = report.rmse;
  j["mae"] = report.mae;
  j["r2"] = report.r2 ? nlohmann::ordered_json(*report.r2) : nlohmann::ordered_json(nullptr);
  if (with_timing) {
    j["elapsed_train_seconds"] = report.elapsed_train_seconds;
    j["elapsed_predict_seconds"] = report.elapsed_predict_seconds;
  }
  return j.dump(2);
}

std::string csv_header(bool with_timing) {
  std::string h = "method,n_samples,mse,rmse,mae,r2";
  if (with_timing) h += ",elapsed_train_seconds,elapsed_predict_seconds";
  return h;
}

std::string to_csv_row(const std::string& label, const EvalReport& report, bool with_timing) {
  std::string row = label + "," + std::to_string(report.n_samples) + "," +
                    format_number(report.mse) + "," + format_number(report.rmse) + "," +
                    format_number(report.mae) + "," + (report.r2 ? format_number(*report.r2) : "");
  if (with_timing) {
    row += "," + format_number(report.elapsed_train_seconds) + "," +
           format_number(report.elapsed_predict_seconds);
  }
  return row;
}

}  // namespace ubb
