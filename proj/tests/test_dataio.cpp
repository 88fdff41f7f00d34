#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"
#include "ubb/dataio.hpp"

using namespace ubb;
using namespace std::chrono;
using ubb::testing::fixture;
using ubb::testing::guangzhou;
using ubb::testing::milan;
using ubb::testing::TempDir;

namespace {

std::vector<RawRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return load_csv(in);
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

sys_seconds at(int y, unsigned m, unsigned d, int hour, int minute = 0) {
  return sys_days{year{y} / month{m} / day{d}} + hours{hour} + minutes{minute};
}

// Ten-minute records covering `n_hours` from `start`, values drawn at random.
std::vector<RawRecord> ten_minute_records(std::mt19937_64& rng, sys_seconds start, int n_hours) {
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<RawRecord> out;
  for (int i = 0; i < n_hours * 6; ++i) out.push_back({start + minutes{10 * i}, u(rng)});
  return out;
}

}  // namespace

TEST_CASE("timestamps") {
  CHECK(parse_timestamp("2013-11-04T00:00:00") == at(2013, 11, 4, 0));
  CHECK(parse_timestamp("2013-11-04 07:30") == at(2013, 11, 4, 7, 30));
  CHECK(parse_timestamp("2013-11-04T07:30:15Z") == at(2013, 11, 4, 7, 30) + seconds{15});
  CHECK(format_timestamp(at(2013, 11, 4, 5)) == "2013-11-04T05:00:00");
  for (const char* bad : {"2013-11-04", "2013-13-01T00:00", "2013-02-30T00:00", "2013-11-04T24:00",
                          "2013/11/04T00:00", "yesterday", ""}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_timestamp(bad), DataError);
  }
  CHECK(day_index(Monday) == 1);
  CHECK(day_index(Saturday) == 6);
  CHECK(day_index(Sunday) == 7);
}

TEST_CASE("load_csv") {
  const auto one = parse("timestamp,value\n2013-11-04T00:00:00,120\n");
  REQUIRE(one.size() == 1);
  CHECK(one[0].timestamp == at(2013, 11, 4, 0));
  CHECK(one[0].value == 120.0);

  CHECK(parse("timestamp,value\n").empty());
  CHECK(parse("\xEF\xBB\xBFtimestamp,value\r\n2013-11-04T01:00,2.5\r\n")[0].value == 2.5);

  // File order is kept.
  const auto two = parse("timestamp,value\n2013-11-04T02:00,1\n2013-11-04T01:00,2\n");
  CHECK(two[0].value == 1.0);
  CHECK(two[1].value == 2.0);

  const std::string negative =
      error_of([] { parse("timestamp,value\n2013-11-04T00:00,1\n2013-11-04T01:00,-5\n"); });
  CHECK(negative.find("line 3") != std::string::npos);
  CHECK(negative.find("-5") != std::string::npos);
  CHECK_THROWS_AS(parse("timestamp,value\n2013-11-04T01:00,-5\n"), DataError);

  CHECK(error_of([] { parse("timestamp,value\nnot-a-time,1\n"); }).find("line 2") != std::string::npos);
  CHECK(error_of([] { parse("timestamp,value\n2013-11-04T00:00,abc\n"); }).find("line 2") !=
        std::string::npos);
  CHECK(error_of([] { parse("timestamp,value\n2013-11-04T00:00,1,2\n"); }).find("line 2") !=
        std::string::npos);
  CHECK_THROWS_AS(parse("time,count\n"), DataError);
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(load_csv(std::filesystem::path("/nonexistent/file.csv")), DataError);
}

TEST_CASE("aggregate_hourly examples") {
  std::vector<RawRecord> six;
  for (int i = 0; i < 6; ++i) six.push_back({at(2013, 11, 4, 9, 10 * i), double(i + 1)});
  const TrafficSeries one = aggregate_hourly(six);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 21.0);
  CHECK(one.start() == WeekTime{0, {1, 9.0}});

  // 2013-11-04 is a Monday.
  const TrafficSeries monday = aggregate_hourly(std::vector<RawRecord>{{at(2013, 11, 4, 0), 1.0}});
  CHECK(monday.start().clock == WeekClock{1, 0.0});
  // 2013-11-02 is a Saturday.
  const TrafficSeries saturday =
      aggregate_hourly(std::vector<RawRecord>{{at(2013, 11, 2, 15, 59), 1.0}});
  CHECK(saturday.start().clock == WeekClock{6, 15.0});

  std::vector<RawRecord> gap;
  for (int h : {3, 4, 6, 7}) gap.push_back({at(2013, 11, 4, h, 30), 1.0});
  try {
    aggregate_hourly(gap);
    FAIL("expected a gap error");
  } catch (const GapError& e) {
    CHECK(e.missing_hour() == at(2013, 11, 4, 5));
    CHECK(std::string(e.what()).find("2013-11-04T05:00:00") != std::string::npos);
  }

  CHECK_THROWS_AS(aggregate_hourly(std::vector<RawRecord>{}), DataError);
}

TEST_CASE("aggregate_hourly properties") {
  std::mt19937_64 rng(2013);
  for (int trial = 0; trial < 30; ++trial) {
    const sys_seconds start = at(2013, 11, 1 + trial % 7, trial % 24, 10 * (trial % 6));
    auto records = ten_minute_records(rng, start, 24 + 17 * trial);
    const TrafficSeries base = aggregate_hourly(records);

    const double raw_total = std::accumulate(records.begin(), records.end(), 0.0,
                                             [](double s, const RawRecord& r) { return s + r.value; });
    const double hourly_total = std::accumulate(base.values().begin(), base.values().end(), 0.0);
    CHECK(hourly_total == doctest::Approx(raw_total).epsilon(1e-12));

    std::shuffle(records.begin(), records.end(), rng);
    CHECK(aggregate_hourly(records) == base);
  }
}

TEST_CASE("align_to_week_start") {
  // Starts Saturday 2013-11-02 10:00; the next Monday 00:00 is 38 hours later.
  const TrafficSeries s(WeekTime{0, {6, 10.0}}, std::vector<double>(100, 1.0));
  const TrafficSeries aligned = align_to_week_start(s, Monday);
  CHECK(aligned.start() == WeekTime{1, {1, 0.0}});
  CHECK(aligned.size() == 62);
  CHECK(align_to_week_start(aligned, Monday) == aligned);
  CHECK(align_to_week_start(s, Sunday).start().clock == WeekClock{7, 0.0});
  CHECK_THROWS_AS(align_to_week_start(s.slice(0, 20), Monday), TooShortError);
}

TEST_CASE("split") {
  std::mt19937_64 rng(6);
  const TrafficSeries three = ubb::testing::random_series(rng, 3 * 168);
  const auto [train, test] = split(three, SplitSpec{});
  CHECK(train.size() == 336);
  CHECK(test.size() == 168);
  CHECK(test.start() == WeekTime{2, {1, 0.0}});

  CHECK_THROWS_AS(split(three.slice(0, 336), SplitSpec{}), TooShortError);
  CHECK_THROWS_AS(split(three.slice(1, 400), SplitSpec{}), InvalidArgument);
  CHECK_THROWS_AS(split(three, SplitSpec{0, Monday}), InvalidArgument);

  // Partition property over random lengths and week counts.
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t weeks = 1 + trial % 3;
    const std::size_t n = 168 * (weeks + 1) + static_cast<std::size_t>(trial * 11);
    const TrafficSeries s = ubb::testing::random_series(rng, n, 10.0, WeekTime{trial, {1, 0.0}});
    const auto [a, b] = split(s, SplitSpec{weeks, Monday});
    CHECK(a.size() + b.size() == s.size());
    CHECK(a.end_index() == b.start_index());
    std::vector<double> joined(a.values().begin(), a.values().end());
    joined.insert(joined.end(), b.values().begin(), b.values().end());
    CHECK(TrafficSeries(a.start(), joined) == s);
  }

  // A Sunday-aligned split accepts a series starting Sunday 00:00.
  const TrafficSeries sunday(WeekTime{0, {7, 0.0}}, std::vector<double>(2 * 168, 1.0));
  CHECK(split(sunday, SplitSpec{1, Sunday}).second.start() == WeekTime{1, {7, 0.0}});
}

TEST_CASE("fixtures load the reference parameter sets") {
  CHECK(load_model(fixture("guangzhou.json")) == guangzhou());
  CHECK(load_model(fixture("milan.json")) == milan());
}

TEST_CASE("model JSON validation") {
  auto j = nlohmann::json::parse(model_to_json(guangzhou()));

  SUBCASE("missing component") {
    j.erase("esu");
    const std::string msg = error_of([&] { model_from_json(j.dump()); });
    CHECK(msg.find("esu") != std::string::npos);
    CHECK_THROWS_AS(model_from_json(j.dump()), DataError);
  }
  SUBCASE("unknown key") {
    j["xx"] = j["mw"];
    CHECK(error_of([&] { model_from_json(j.dump()); }).find("xx") != std::string::npos);
  }
  SUBCASE("unknown field") {
    j["mw"]["sigma"] = 1.0;
    CHECK(error_of([&] { model_from_json(j.dump()); }).find("sigma") != std::string::npos);
  }
  SUBCASE("missing field") {
    j["aw"].erase("variance");
    CHECK(error_of([&] { model_from_json(j.dump()); }).find("aw.variance") != std::string::npos);
  }
  SUBCASE("non-number") {
    j["ew"]["peak_time"] = "22:00";
    CHECK_THROWS_AS(model_from_json(j.dump()), DataError);
  }
  SUBCASE("non-finite") {
    std::string text = j.dump();
    const std::string needle = "\"peak_rate\":4626.0";
    REQUIRE(text.find(needle) != std::string::npos);
    text.replace(text.find(needle), needle.size(), "\"peak_rate\":1e400");
    CHECK_THROWS_AS(model_from_json(text), DataError);
  }
  SUBCASE("invalid parameter") {
    j["msa"]["variance"] = 0.0;
    CHECK_THROWS_AS(model_from_json(j.dump()), DataError);
    j["msa"]["variance"] = 1.0;
    j["msa"]["peak_time"] = 24.0;
    CHECK_THROWS_AS(model_from_json(j.dump()), DataError);
  }
  SUBCASE("not JSON") {
    CHECK_THROWS_AS(model_from_json("{mw: 1"), DataError);
    CHECK_THROWS_AS(model_from_json("[]"), DataError);
  }
}

TEST_CASE("model round trip is exact") {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> exponent(-12.0, 12.0);
  TempDir dir;
  for (int trial = 0; trial < 200; ++trial) {
    WeeklyModel m = ubb::testing::random_model(rng, 1.0, trial % 2 == 0);
    // Spread magnitudes so short and long decimal forms are both exercised.
    for (ComponentId id : kAllComponents) m[id].peak_rate *= std::pow(10.0, exponent(rng));
    CHECK(model_from_json(model_to_json(m)) == m);
    if (trial % 20 == 0) {
      const auto path = dir.path / "m.json";
      save_model(m, path);
      CHECK(load_model(path) == m);
    }
  }
  CHECK_THROWS_AS(load_model(dir.path / "missing.json"), DataError);
}

TEST_CASE("series CSV") {
  std::mt19937_64 rng(10);
  const TrafficSeries s = ubb::testing::random_series(rng, 200, 1e4, WeekTime{3, {6, 20.0}});
  std::stringstream buf;
  write_series_csv(s, buf);
  const std::string text = buf.str();
  CHECK(text.rfind("week,day_k,hour,value\n3,6,20,", 0) == 0);
  std::istringstream in(text);
  CHECK(read_series_csv(in) == s);

  std::istringstream broken("week,day_k,hour,value\n0,1,0,1\n0,1,2,1\n");
  CHECK(error_of([&] { read_series_csv(broken); }).find("line 3") != std::string::npos);
  std::istringstream bad_day("week,day_k,hour,value\n0,8,0,1\n");
  CHECK_THROWS_AS(read_series_csv(bad_day), DataError);
  std::istringstream empty("week,day_k,hour,value\n");
  CHECK_THROWS_AS(read_series_csv(empty), DataError);
}

TEST_CASE("load_series picks the format from the header") {
  TempDir dir;
  std::mt19937_64 rng(12);
  const TrafficSeries s = ubb::testing::random_series(rng, 30, 100.0);
  {
    std::ofstream out(dir.path / "series.csv");
    write_series_csv(s, out);
  }
  CHECK(load_series(dir.path / "series.csv") == s);

  {
    std::ofstream out(dir.path / "raw.csv");
    out << "timestamp,value\n2013-11-04T00:10,1\n2013-11-04T00:50,2\n2013-11-04T01:00,4\n";
  }
  const TrafficSeries raw = load_series(dir.path / "raw.csv");
  CHECK(raw.values().size() == 2);
  CHECK(raw[0] == 3.0);
  CHECK(raw[1] == 4.0);

  {
    std::ofstream out(dir.path / "gap.csv");
    out << "timestamp,value\n2013-11-04T00:10,1\n2013-11-04T02:00,4\n";
  }
  CHECK_THROWS_AS(load_series(dir.path / "gap.csv"), GapError);
}

TEST_CASE("trace CSV") {
  std::ostringstream out;
  const std::vector<double> trace{10.0, 2.5, 0.125};
  write_trace_csv(trace, out);
  CHECK(out.str() == "iteration,J\n0,10\n1,2.5\n2,0.125\n");
}
