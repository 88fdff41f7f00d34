#include "ubb/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace ubb {

namespace {

constexpr double kArmijoSlope = 1e-4;
constexpr double kRelativeFloor = 1e-12;
constexpr double kMinStep = 1e-20;
constexpr double kMinBbStep = 1e-10;
constexpr double kMaxBbStep = 1e10;
// exp(-q) is exactly zero in double precision beyond this.
constexpr double kUnderflowExponent = 746.0;
// Box on the log-variance: variances stay within [1e-6, 1e6] h^2.
constexpr double kMinLogVariance = -13.815510557964274;
constexpr double kMaxLogVariance = 13.815510557964274;

struct Shifts {
  int first_day;
  int last_day;
};

Shifts day_range(ComponentId id) {
  switch (category_of(id)) {
    case DayCategory::weekday: return {1, 5};
    case DayCategory::saturday: return {6, 6};
    case DayCategory::sunday: return {7, 7};
  }
  return {1, 0};
}

// Raw (possibly out-of-range) component parameters used during descent.
struct RawComponent {
  double amplitude;
  double peak_time;
  double variance;
};

using RawModel = std::array<RawComponent, kComponentCount>;

// Sums of the 63-term expansion for one component at one clock:
// sum e, sum e*x, sum e*x^2 with e = exp(-x^2 / (2 v)).
struct TermSums {
  double e = 0.0;
  double ex = 0.0;
  double ex2 = 0.0;
};

TermSums term_sums(ComponentId id, const RawComponent& c, int day, double hour) {
  TermSums s;
  const Shifts r = day_range(id);
  for (int d = r.first_day; d <= r.last_day; ++d) {
    const double base = hour + 24.0 * (d - day) - c.peak_time;
    for (int nw = -1; nw <= 1; ++nw) {
      const double x = base + static_cast<double>(kHoursPerWeek * nw);
      const double q = (x * x) / (2.0 * c.variance);
      if (q > kUnderflowExponent) continue;
      const double e = std::exp(-q);
      s.e += e;
      s.ex += e * x;
      s.ex2 += e * x * x;
    }
  }
  return s;
}

// Squared-error problem over a gap-free hourly series. The model depends
// only on the 168 week slots, so values and partials are evaluated per slot
// and residuals are accumulated per sample in series order.
class SlotProblem {
 public:
  SlotProblem(const TrafficSeries& data, double scale) : scale_(scale) {
    targets_.reserve(data.size());
    slots_.reserve(data.size());
    const std::int64_t first = data.start_index();
    for (std::size_t i = 0; i < data.size(); ++i) {
      targets_.push_back(data[i] / scale);
      const std::int64_t h = first + static_cast<std::int64_t>(i);
      slots_.push_back(static_cast<int>(((h % kHoursPerWeek) + kHoursPerWeek) % kHoursPerWeek));
    }
  }

  double scale() const { return scale_; }

  double objective(const RawModel& m) const {
    std::array<double, kHoursPerWeek> f{};
    slot_values(m, f);
    double j = 0.0;
    for (std::size_t i = 0; i < targets_.size(); ++i) {
      const double r = f[slots_[i]] - targets_[i];
      j += r * r;
    }
    return j;
  }

  // Gradient with respect to (amplitude, peak_time, variance) per component.
  ParameterVector gradient(const RawModel& m) const {
    std::array<double, kHoursPerWeek> f{};
    slot_values(m, f);
    std::array<double, kHoursPerWeek> weight{};
    for (std::size_t i = 0; i < targets_.size(); ++i) {
      weight[slots_[i]] += 2.0 * (f[slots_[i]] - targets_[i]);
    }
    ParameterVector g{};
    for (int s = 0; s < kHoursPerWeek; ++s) {
      if (weight[s] == 0.0) continue;
      const int day = s / kHoursPerDay + 1;
      const double hour = s % kHoursPerDay;
      for (ComponentId id : kAllComponents) {
        const RawComponent& c = m[index_of(id)];
        const TermSums t = term_sums(id, c, day, hour);
        const double v = c.variance;
        g[parameter_index(id, Parameter::peak_rate)] += weight[s] * t.e;
        g[parameter_index(id, Parameter::peak_time)] += weight[s] * c.amplitude * t.ex / v;
        g[parameter_index(id, Parameter::variance)] +=
            weight[s] * c.amplitude * t.ex2 / (2.0 * v * v);
      }
    }
    return g;
  }

 private:
  void slot_values(const RawModel& m, std::array<double, kHoursPerWeek>& f) const {
    for (int s = 0; s < kHoursPerWeek; ++s) {
      const int day = s / kHoursPerDay + 1;
      const double hour = s % kHoursPerDay;
      double total = 0.0;
      for (ComponentId id : kAllComponents) {
        const RawComponent& c = m[index_of(id)];
        if (c.amplitude == 0.0) continue;
        total += c.amplitude * term_sums(id, c, day, hour).e;
      }
      f[s] = total;
    }
  }

  double scale_;
  std::vector<double> targets_;
  std::vector<int> slots_;
};

RawModel to_raw(const WeeklyModel& model, double scale) {
  RawModel raw{};
  for (ComponentId id : kAllComponents) {
    const ComponentParams& p = model[id];
    raw[index_of(id)] = {p.peak_rate / scale, p.peak_time, p.variance};
  }
  return raw;
}

double wrap_hour(double t) {
  double w = std::fmod(t, 24.0);
  if (w < 0.0) w += 24.0;
  if (w >= 24.0) w = 0.0;
  return w;
}

void require_nonempty(const TrafficSeries& data) {
  if (data.empty()) throw InvalidArgument("objective needs at least one sample");
}

void require_full_week(const TrafficSeries& data) {
  if (data.size() < static_cast<std::size_t>(kHoursPerWeek)) {
    throw InvalidArgument("need at least one full week (168 hourly samples), got " +
                          std::to_string(data.size()));
  }
}

// Optimizer coordinates: (amplitude, peak_time, log variance) per component.
using Coordinates = ParameterVector;

Coordinates to_coordinates(const RawModel& m) {
  Coordinates x{};
  for (std::size_t c = 0; c < kComponentCount; ++c) {
    x[3 * c] = m[c].amplitude;
    x[3 * c + 1] = m[c].peak_time;
    x[3 * c + 2] = std::clamp(std::log(m[c].variance), kMinLogVariance, kMaxLogVariance);
  }
  return x;
}

RawModel from_coordinates(const Coordinates& x) {
  RawModel m{};
  for (std::size_t c = 0; c < kComponentCount; ++c) {
    m[c] = {x[3 * c], x[3 * c + 1], std::exp(x[3 * c + 2])};
  }
  return m;
}

Coordinates coordinate_gradient(const SlotProblem& problem, const Coordinates& x) {
  const RawModel m = from_coordinates(x);
  Coordinates g = problem.gradient(m);
  for (std::size_t c = 0; c < kComponentCount; ++c) g[3 * c + 2] *= m[c].variance;
  return g;
}

Coordinates project(Coordinates x) {
  for (std::size_t c = 0; c < kComponentCount; ++c) {
    x[3 * c] = std::max(0.0, x[3 * c]);
    x[3 * c + 2] = std::clamp(x[3 * c + 2], kMinLogVariance, kMaxLogVariance);
  }
  return x;
}

}  // namespace

void FitConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(relative_tolerance > 0.0)) throw InvalidArgument("relative_tolerance must be > 0");
  if (!(initial_step > 0.0) || !std::isfinite(initial_step)) {
    throw InvalidArgument("initial_step must be finite and > 0");
  }
  if (!(backtracking_factor > 0.0 && backtracking_factor < 1.0)) {
    throw InvalidArgument("backtracking_factor must lie in (0, 1)");
  }
}

double objective(const WeeklyModel& model, const TrafficSeries& data) {
  require_nonempty(data);
  double j = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = weekly_value(model, data.clock_at(i)) - data[i];
    j += r * r;
  }
  return j;
}

ParameterVector gradient(const WeeklyModel& model, const TrafficSeries& data) {
  require_nonempty(data);
  const SlotProblem problem(data, 1.0);
  return problem.gradient(to_raw(model, 1.0));
}

WeeklyModel init_heuristic(const TrafficSeries& data) {
  require_full_week(data);

  std::array<std::array<double, kHoursPerDay>, 3> sum{};
  std::array<std::array<std::size_t, kHoursPerDay>, 3> count{};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const WeekClock c = data.clock_at(i);
    const std::size_t cat = c.day <= 5 ? 0 : static_cast<std::size_t>(c.day - 5);
    const auto h = static_cast<std::size_t>(c.hour);
    sum[cat][h] += data[i];
    ++count[cat][h];
  }

  struct Window {
    Period period;
    int begin;
    int end;
  };
  constexpr std::array<Window, 3> windows = {
      Window{Period::morning, 6, 14}, Window{Period::afternoon, 14, 19},
      Window{Period::evening, 19, 30}};

  WeeklyModel model;
  for (std::size_t cat = 0; cat < 3; ++cat) {
    std::array<double, kHoursPerDay> profile{};
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      profile[h] = count[cat][h] ? sum[cat][h] / static_cast<double>(count[cat][h]) : 0.0;
    }
    for (const Window& w : windows) {
      int best = w.begin;
      double best_value = profile[static_cast<std::size_t>(w.begin % kHoursPerDay)];
      for (int h = w.begin + 1; h < w.end; ++h) {
        const double v = profile[static_cast<std::size_t>(h % kHoursPerDay)];
        if (v > best_value) {
          best = h;
          best_value = v;
        }
      }
      const ComponentId id = make_component(static_cast<DayCategory>(cat), w.period);
      model[id] = ComponentParams{best_value, static_cast<double>(best % kHoursPerDay), 4.0};
    }
  }
  return model;
}

FitReport fit(const TrafficSeries& data, const FitConfig& config,
              const std::optional<WeeklyModel>& init) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  require_full_week(data);

  const WeeklyModel start = init ? *init : init_heuristic(data);
  validate(start);

  double scale = 1.0;
  if (config.normalize) {
    const auto values = data.values();
    const double peak = *std::max_element(values.begin(), values.end());
    if (peak > 0.0) {
      scale = peak;
    } else {
      // All-zero data: any scale works, so use the initial rates instead.
      for (ComponentId id : kAllComponents) scale = std::max(scale, start[id].peak_rate);
    }
  }
  const double scale2 = scale * scale;
  const SlotProblem problem(data, scale);

  Coordinates x = project(to_coordinates(to_raw(start, scale)));
  double j = problem.objective(from_coordinates(x));

  FitReport report;
  report.objective_trace.push_back(j * scale2);

  // Trial step: initial_step on the first iteration, then the Barzilai-Borwein
  // length s's / s'y from the last accepted move. Backtracking enforces descent.
  double trial_step = config.initial_step;
  Coordinates x_prev{};
  Coordinates g_prev{};
  while (report.iterations < config.max_iterations) {
    if (j == 0.0) {
      report.converged = true;
      report.stop_reason = StopReason::tolerance;
      break;
    }
    const Coordinates g = coordinate_gradient(problem, x);
    if (report.iterations > 0) {
      double ss = 0.0;
      double sy = 0.0;
      for (std::size_t i = 0; i < kParameterCount; ++i) {
        const double si = x[i] - x_prev[i];
        ss += si * si;
        sy += si * (g[i] - g_prev[i]);
      }
      if (sy > 0.0) trial_step = std::clamp(ss / sy, kMinBbStep, kMaxBbStep);
    }

    bool accepted = false;
    Coordinates trial{};
    double j_trial = 0.0;
    for (double alpha = trial_step; alpha >= kMinStep; alpha *= config.backtracking_factor) {
      for (std::size_t i = 0; i < kParameterCount; ++i) trial[i] = x[i] - alpha * g[i];
      trial = project(trial);
      double slope = 0.0;
      for (std::size_t i = 0; i < kParameterCount; ++i) slope += g[i] * (trial[i] - x[i]);
      j_trial = problem.objective(from_coordinates(trial));
      if (j_trial <= j + kArmijoSlope * slope && j_trial <= j) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      report.stop_reason = StopReason::stalled;
      break;
    }

    const double change = std::abs(j - j_trial) / std::max(j, kRelativeFloor);
    x_prev = x;
    g_prev = g;
    x = trial;
    j = j_trial;
    ++report.iterations;
    report.objective_trace.push_back(j * scale2);

    if (change < config.relative_tolerance) {
      report.converged = true;
      report.stop_reason = StopReason::tolerance;
      break;
    }
  }

  const RawModel raw = from_coordinates(x);
  for (ComponentId id : kAllComponents) {
    const RawComponent& c = raw[index_of(id)];
    report.model[id] = ComponentParams{c.amplitude * scale, wrap_hour(c.peak_time), c.variance};
  }
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void FittedModelForecaster::train(const TrafficSeries& history) {
  report_ = fit(history, config_);
  next_hour_ = history.end_index();
}

TrafficSeries FittedModelForecaster::predict(std::size_t n_hours) const {
  if (!report_) throw std::logic_error("FittedModelForecaster::predict called before train");
  return predict_series(report_->model, from_hour_index(next_hour_), n_hours);
}

TrafficSeries FixedModelForecaster::predict(std::size_t n_hours) const {
  return predict_series(model_, from_hour_index(next_hour_), n_hours);
}

}  // namespace ubb
