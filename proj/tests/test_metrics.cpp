#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"
#include "ubb/estimator.hpp"
#include "ubb/metrics.hpp"

using namespace ubb;
using ubb::testing::relative_error;

namespace {

// Single streaming pass: Welford for the actual mean/variance, running sums
// for the errors.
struct StreamingOracle {
  std::size_t n = 0;
  double mean_y = 0.0;
  double m2_y = 0.0;
  double sse = 0.0;
  double sae = 0.0;

  void push(double y, double yhat) {
    ++n;
    const double delta = y - mean_y;
    mean_y += delta / static_cast<double>(n);
    m2_y += delta * (y - mean_y);
    sse += (y - yhat) * (y - yhat);
    sae += std::abs(y - yhat);
  }
  double mse() const { return sse / static_cast<double>(n); }
  double mae() const { return sae / static_cast<double>(n); }
  double r2() const { return 1.0 - sse / m2_y; }
};

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

class ZeroForecaster final : public Forecaster {
 public:
  std::string name() const override { return "zero"; }
  void train(const TrafficSeries& history) override { next_ = history.end_index(); }
  TrafficSeries predict(std::size_t n_hours) const override {
    return TrafficSeries(from_hour_index(next_), std::vector<double>(n_hours, 0.0));
  }

 private:
  std::int64_t next_ = 0;
};

class MisalignedForecaster final : public Forecaster {
 public:
  std::string name() const override { return "misaligned"; }
  void train(const TrafficSeries&) override {}
  TrafficSeries predict(std::size_t n_hours) const override {
    return TrafficSeries(WeekTime{}, std::vector<double>(n_hours, 0.0));
  }
};

}  // namespace

TEST_CASE("hand-computed example") {
  const std::vector<double> actual{1, 2, 3};
  const std::vector<double> predicted{2, 2, 2};
  CHECK(mse(actual, predicted) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(rmse(actual, predicted) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
  CHECK(mae(actual, predicted) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r2(actual, predicted) == 0.0);
}

TEST_CASE("perfect prediction") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto y = uniform(rng, 1 + trial * 13, 0.0, 1000.0);
    const EvalReport r = evaluate(y, y);
    CHECK(r.mse == 0.0);
    CHECK(r.rmse == 0.0);
    CHECK(r.mae == 0.0);
    if (y.size() > 1) CHECK(r.r2 == 1.0);
    CHECK(r.n_samples == y.size());
  }
}

TEST_CASE("errors") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{1, 2};
  const std::vector<double> empty;
  CHECK_THROWS_AS(mse(a, b), MetricError);
  CHECK_THROWS_AS(mae(a, b), MetricError);
  CHECK_THROWS_AS(rmse(a, b), MetricError);
  CHECK_THROWS_AS(r2(a, b), MetricError);
  CHECK_THROWS_AS(mse(empty, empty), MetricError);
  CHECK_THROWS_AS(r2(empty, empty), MetricError);
  CHECK_THROWS_AS(evaluate(empty, empty), MetricError);
  const std::vector<double> constant{5, 5, 5};
  CHECK_THROWS_AS(r2(constant, a), MetricError);
  CHECK_FALSE(evaluate(constant, a).r2.has_value());
}

TEST_CASE("metrics match a streaming oracle") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 50; ++trial) {
    const auto y = uniform(rng, 1000, 0.0, 5000.0);
    const auto yhat = uniform(rng, 1000, 0.0, 5000.0);
    StreamingOracle o;
    for (std::size_t i = 0; i < y.size(); ++i) o.push(y[i], yhat[i]);
    const EvalReport r = evaluate(y, yhat);
    CHECK(relative_error(r.mse, o.mse()) < 1e-12);
    CHECK(relative_error(r.rmse, std::sqrt(o.mse())) < 1e-12);
    CHECK(relative_error(r.mae, o.mae()) < 1e-12);
    REQUIRE(r.r2.has_value());
    CHECK(relative_error(*r.r2, o.r2()) < 1e-12);
    CHECK(r.rmse == std::sqrt(r.mse));
    CHECK(r.mae <= r.rmse);
    CHECK(*r.r2 <= 1.0);
  }
}

TEST_CASE("mean predictor has R2 exactly zero") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto y = uniform(rng, 2 + trial * 7, -100.0, 9000.0);
    const std::vector<double> yhat(y.size(), mean(y));
    CHECK(r2(y, yhat) == 0.0);
  }
}

TEST_CASE("invariances") {
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> coef(-50.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto y = uniform(rng, 300, 0.0, 100.0);
    auto yhat = uniform(rng, 300, 0.0, 100.0);
    const EvalReport base = evaluate(y, yhat);

    // Permuting both lists identically.
    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> py, pyhat;
    for (std::size_t i : order) {
      py.push_back(y[i]);
      pyhat.push_back(yhat[i]);
    }
    const EvalReport permuted = evaluate(py, pyhat);
    CHECK(relative_error(permuted.mse, base.mse) < 1e-12);
    CHECK(relative_error(permuted.mae, base.mae) < 1e-12);
    CHECK(relative_error(*permuted.r2, *base.r2) < 1e-12);

    // Common translation.
    const double c = coef(rng);
    std::vector<double> ty(y), tyhat(yhat);
    for (double& v : ty) v += c;
    for (double& v : tyhat) v += c;
    const EvalReport translated = evaluate(ty, tyhat);
    CHECK(relative_error(translated.mse, base.mse) < 1e-10);
    CHECK(relative_error(translated.rmse, base.rmse) < 1e-10);
    CHECK(relative_error(translated.mae, base.mae) < 1e-10);

    // Common affine map for R2.
    double a = coef(rng);
    if (std::abs(a) < 0.1) a = 0.1;
    const double b = coef(rng);
    std::vector<double> ay(y), ayhat(yhat);
    for (double& v : ay) v = a * v + b;
    for (double& v : ayhat) v = a * v + b;
    CHECK(std::abs(*evaluate(ay, ayhat).r2 - *base.r2) < 1e-10);
  }
}

TEST_CASE("time_evaluation") {
  SUBCASE("zero forecaster on zero data") {
    const TrafficSeries train(WeekTime{}, std::vector<double>(168, 0.0));
    const TrafficSeries test(WeekTime{1, {1, 0.0}}, std::vector<double>(48, 0.0));
    ZeroForecaster f;
    const EvalReport r = time_evaluation(f, train, test);
    CHECK(r.mse == 0.0);
    CHECK(r.mae == 0.0);
    CHECK_FALSE(r.r2.has_value());
    CHECK(r.n_samples == 48);
    CHECK(r.elapsed_train_seconds >= 0.0);
    CHECK(r.elapsed_predict_seconds >= 0.0);
  }
  SUBCASE("windows must be contiguous") {
    const TrafficSeries train(WeekTime{}, std::vector<double>(168, 0.0));
    const TrafficSeries gap(WeekTime{1, {1, 1.0}}, std::vector<double>(10, 0.0));
    ZeroForecaster f;
    CHECK_THROWS_AS(time_evaluation(f, train, gap), InvalidArgument);
  }
  SUBCASE("misaligned forecasts are rejected") {
    const TrafficSeries train(WeekTime{}, std::vector<double>(168, 1.0));
    const TrafficSeries test(WeekTime{1, {1, 0.0}}, std::vector<double>(5, 1.0));
    MisalignedForecaster f;
    CHECK_THROWS_AS(time_evaluation(f, train, test), InvalidArgument);
  }
  SUBCASE("fitting two weeks finishes within ten seconds") {
    const TrafficSeries data = generate_synthetic(ubb::testing::guangzhou(), 3, 200.0, 9);
    FittedModelForecaster f;
    const EvalReport r = time_evaluation(f, data.slice(0, 336), data.slice(336, 168));
    CHECK(r.elapsed_train_seconds + r.elapsed_predict_seconds < 10.0);
    CHECK(r.mse > 0.0);
  }
}

TEST_CASE("serialization") {
  EvalReport r;
  r.mse = 2.0 / 3.0;
  r.rmse = std::sqrt(r.mse);
  r.mae = 0.5;
  r.n_samples = 3;
  r.elapsed_train_seconds = 1.25;

  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["mse"].get<double>() == r.mse);
  CHECK(j["rmse"].get<double>() == r.rmse);
  CHECK(j["r2"].is_null());
  CHECK(j["n_samples"] == 3);
  CHECK(j["elapsed_train_seconds"].get<double>() == 1.25);
  CHECK_FALSE(nlohmann::json::parse(to_json(r, false)).contains("elapsed_train_seconds"));

  r.r2 = 0.75;
  CHECK(nlohmann::json::parse(to_json(r))["r2"].get<double>() == 0.75);

  CHECK(csv_header(false) == "method,n_samples,mse,rmse,mae,r2");
  CHECK(csv_header() == "method,n_samples,mse,rmse,mae,r2,elapsed_train_seconds,elapsed_predict_seconds");
  const std::string row = to_csv_row("ubb", r, false);
  CHECK(row.rfind("ubb,3,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 5);
  std::vector<std::string> fields;
  std::stringstream ss(row);
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() == 6);
  CHECK(std::stod(fields[2]) == r.mse);
  CHECK(std::stod(fields[3]) == r.rmse);
  CHECK(fields[5] == "0.75");
  r.r2.reset();
  const std::string no_r2 = to_csv_row("x", r, true);
  CHECK(std::count(no_r2.begin(), no_r2.end(), ',') == 7);
}
