#include "ubb/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ubb/baselines.hpp"
#include "ubb/dataio.hpp"
#include "ubb/estimator.hpp"
#include "ubb/metrics.hpp"
#include "ubb/model.hpp"
#include "ubb/text.hpp"

namespace ubb::cli {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::chrono::weekday parse_weekday(const std::string& name) {
  static const std::map<std::string, std::chrono::weekday> days = {
      {"monday", std::chrono::Monday},     {"tuesday", std::chrono::Tuesday},
      {"wednesday", std::chrono::Wednesday}, {"thursday", std::chrono::Thursday},
      {"friday", std::chrono::Friday},     {"saturday", std::chrono::Saturday},
      {"sunday", std::chrono::Sunday}};
  const auto it = days.find(name);
  if (it == days.end()) throw InvalidArgument("unknown weekday '" + name + "'");
  return it->second;
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  writer(out);
  if (!out) throw DataError("failed writing " + path);
}

struct FitOptions {
  std::size_t max_iterations = FitConfig{}.max_iterations;
  double tolerance = FitConfig{}.relative_tolerance;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--max-iterations", max_iterations, "Gradient descent iteration budget")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--tolerance", tolerance, "Relative objective change stopping threshold")
        ->check(CLI::PositiveNumber);
  }

  FitConfig config() const {
    FitConfig c;
    c.max_iterations = max_iterations;
    c.relative_tolerance = tolerance;
    return c;
  }
};

struct DataOptions {
  std::string input;
  std::size_t train_weeks = 2;
  std::string alignment = "monday";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--input", input, "Traffic CSV (timestamp,value or week,day_k,hour,value)")
        ->required();
    cmd.add_option("--train-weeks", train_weeks, "Leading whole weeks used for training")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--align", alignment, "Week start day for the training window");
  }

  SplitSpec spec() const { return SplitSpec{train_weeks, parse_weekday(alignment)}; }

  TrafficSeries load_aligned(std::ostream& err) const {
    const TrafficSeries raw = load_series(input);
    const TrafficSeries aligned = align_to_week_start(raw, spec().alignment);
    if (aligned.size() != raw.size()) {
      err << "note: dropped " << raw.size() - aligned.size()
          << " leading hour(s) before the first " << alignment << " 00:00\n";
    }
    return aligned;
  }
};

void warn_if_not_converged(const FitReport& report, std::ostream& err) {
  if (report.converged) return;
  err << "warning: fit did not converge ("
      << (report.stop_reason == StopReason::stalled ? "line search stalled"
                                                    : "iteration budget exhausted")
      << " after " << report.iterations << " iterations)\n";
}

void print_report(const std::string& format, const EvalReport& report, bool timing,
                  std::ostream& out) {
  if (format == "json") {
    out << to_json(report, timing) << '\n';
  } else if (format == "csv") {
    out << csv_header(timing) << '\n' << to_csv_row("ubb", report, timing) << '\n';
  } else {
    out << "n_samples  " << report.n_samples << '\n'
        << "MSE        " << fixed(report.mse, 4) << '\n'
        << "RMSE       " << fixed(report.rmse, 4) << '\n'
        << "MAE        " << fixed(report.mae, 4) << '\n'
        << "R2         " << (report.r2 ? fixed(*report.r2, 6) : std::string("undefined")) << '\n';
    if (timing) {
      out << "train_s    " << fixed(report.elapsed_train_seconds, 6) << '\n'
          << "predict_s  " << fixed(report.elapsed_predict_seconds, 6) << '\n';
    }
  }
}

int input_error(std::ostream& err, const std::string& kind, const std::string& what) {
  err << "error: " << kind << ": " << what << '\n';
  return kInputError;
}

}  // namespace

std::string format_clock(double hours) {
  const auto minutes = static_cast<long long>(std::llround(hours * 60.0));
  long long day = minutes / 1440;
  long long rem = minutes % 1440;
  if (rem < 0) {
    rem += 1440;
    --day;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lld:%02lld", rem / 60, rem % 60);
  std::string s = buf;
  if (day != 0) s += " (" + std::string(day > 0 ? "+" : "") + std::to_string(day) + "d)";
  return s;
}

void write_svg_plot(std::span<const double> values, const std::string& title,
                    const std::string& x_label, const std::string& y_label, std::ostream& out) {
  constexpr double width = 800.0;
  constexpr double height = 400.0;
  constexpr double margin = 50.0;
  double lo = 0.0;
  double hi = 1.0;
  if (!values.empty()) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = std::min(0.0, *mn);
    hi = *mx > lo ? *mx : lo + 1.0;
  }
  const double span_x = values.size() > 1 ? static_cast<double>(values.size() - 1) : 1.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
      << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"#888\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"30\" text-anchor=\"middle\">" << title << "</text>\n"
      << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n"
      << "<text x=\"15\" y=\"" << height / 2 << "\" transform=\"rotate(-90 15 " << height / 2
      << ")\" text-anchor=\"middle\">" << y_label << "</text>\n"
      << "<text x=\"" << margin - 4 << "\" y=\"" << height - margin
      << "\" text-anchor=\"end\" font-size=\"10\">" << fixed(lo, 2) << "</text>\n"
      << "<text x=\"" << margin - 4 << "\" y=\"" << margin + 10
      << "\" text-anchor=\"end\" font-size=\"10\">" << fixed(hi, 2) << "</text>\n"
      << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = margin + (width - 2 * margin) * static_cast<double>(i) / span_x;
    const double y = height - margin - (height - 2 * margin) * (values[i] - lo) / (hi - lo);
    out << (i ? " " : "") << fixed(x, 2) << ',' << fixed(y, 2);
  }
  out << "\"/>\n</svg>\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weekly nine-component traffic model: fit, predict, evaluate and inspect"};
  app.require_subcommand(1, 1);

  // fit
  DataOptions fit_data;
  FitOptions fit_opts;
  std::string fit_out;
  std::string fit_trace;
  std::string fit_trace_svg;
  std::string fit_init;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the model to the training weeks of a series");
  fit_data.add_to(*fit_cmd);
  fit_opts.add_to(*fit_cmd);
  fit_cmd->add_option("--out", fit_out, "Fitted model JSON")->required();
  fit_cmd->add_option("--trace", fit_trace, "Objective trace CSV (iteration,J)");
  fit_cmd->add_option("--trace-svg", fit_trace_svg, "Objective trace SVG plot");
  fit_cmd->add_option("--init", fit_init, "Starting model JSON (default: profile heuristic)");

  // predict
  std::string predict_model;
  std::size_t predict_weeks = 1;
  std::int64_t predict_start_week = 0;
  std::string predict_out;
  std::string predict_svg;
  auto* predict_cmd = app.add_subcommand("predict", "Evaluate a model over whole weeks");
  predict_cmd->add_option("--model", predict_model, "Model JSON")->required();
  predict_cmd->add_option("--weeks", predict_weeks, "Number of weeks")->check(CLI::PositiveNumber);
  predict_cmd->add_option("--start-week", predict_start_week, "Week number of the first sample");
  predict_cmd->add_option("--out", predict_out, "Series CSV")->required();
  predict_cmd->add_option("--svg", predict_svg, "SVG line plot of the prediction");

  // evaluate
  DataOptions eval_data;
  std::string eval_model;
  std::string eval_format = "table";
  bool eval_no_timing = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on the test weeks of a series");
  eval_data.add_to(*eval_cmd);
  eval_cmd->add_option("--model", eval_model, "Model JSON")->required();
  eval_cmd->add_option("--format", eval_format, "table, json or csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  eval_cmd->add_flag("--no-timing", eval_no_timing, "Omit elapsed times (byte-stable output)");

  // synth
  std::string synth_model;
  std::size_t synth_weeks = 2;
  double synth_noise = 0.0;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a noisy synthetic series from a model");
  synth_cmd->add_option("--model", synth_model, "Model JSON")->required();
  synth_cmd->add_option("--weeks", synth_weeks, "Number of weeks")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise", synth_noise, "Gaussian noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", synth_seed, "Random seed");
  synth_cmd->add_option("--out", synth_out, "Series CSV")->required();

  // inspect
  std::string inspect_model;
  auto* inspect_cmd = app.add_subcommand("inspect", "Per-component peak times and 1-sigma windows");
  inspect_cmd->add_option("--model", inspect_model, "Model JSON")->required();

  // compare
  DataOptions cmp_data;
  FitOptions cmp_opts;
  std::string cmp_format = "table";
  bool cmp_no_timing = false;
  auto* cmp_cmd = app.add_subcommand("compare", "Fitted model versus reference baselines");
  cmp_data.add_to(*cmp_cmd);
  cmp_opts.add_to(*cmp_cmd);
  cmp_cmd->add_option("--format", cmp_format, "table, json or csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  cmp_cmd->add_flag("--no-timing", cmp_no_timing, "Omit elapsed times (byte-stable output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*fit_cmd) {
      const TrafficSeries series = fit_data.load_aligned(err);
      const std::size_t train_hours = fit_data.train_weeks * kHoursPerWeek;
      if (series.size() < train_hours) {
        throw TooShortError("series of " + std::to_string(series.size()) +
                            " hours is shorter than " + std::to_string(fit_data.train_weeks) +
                            " training week(s)");
      }
      const TrafficSeries train = series.slice(0, train_hours);
      std::optional<WeeklyModel> init;
      if (!fit_init.empty()) init = load_model(fit_init);
      const FitReport report = fit(train, fit_opts.config(), init);
      save_model(report.model, fit_out);
      if (!fit_trace.empty()) {
        write_file(fit_trace, [&](std::ostream& o) { write_trace_csv(report.objective_trace, o); });
      }
      if (!fit_trace_svg.empty()) {
        write_file(fit_trace_svg, [&](std::ostream& o) {
          write_svg_plot(report.objective_trace, "Objective J per iteration", "iteration", "J", o);
        });
      }
      const double j0 = report.objective_trace.front();
      const double j1 = report.objective_trace.back();
      out << "training samples  " << train.size() << '\n'
          << "iterations        " << report.iterations << '\n'
          << "J initial         " << format_number(j0) << '\n'
          << "J final           " << format_number(j1) << '\n'
          << "J final/initial   " << format_number(j0 > 0.0 ? j1 / j0 : 0.0) << '\n'
          << "converged         " << (report.converged ? "yes" : "no") << '\n';
      err << "elapsed " << fixed(report.elapsed_seconds, 3) << " s\n";
      warn_if_not_converged(report, err);
      return kOk;
    }

    if (*predict_cmd) {
      const WeeklyModel model = load_model(predict_model);
      const TrafficSeries pred =
          predict_series(model, WeekTime{predict_start_week, WeekClock{1, 0.0}},
                         predict_weeks * kHoursPerWeek);
      write_file(predict_out, [&](std::ostream& o) { write_series_csv(pred, o); });
      if (!predict_svg.empty()) {
        write_file(predict_svg, [&](std::ostream& o) {
          write_svg_plot(pred.values(), "Predicted traffic", "hour", "messages/hour", o);
        });
      }
      return kOk;
    }

    if (*eval_cmd) {
      const WeeklyModel model = load_model(eval_model);
      const auto [train, test] = split(eval_data.load_aligned(err), eval_data.spec());
      FixedModelForecaster forecaster(model);
      const EvalReport report = time_evaluation(forecaster, train, test);
      print_report(eval_format, report, !eval_no_timing, out);
      return kOk;
    }

    if (*synth_cmd) {
      const WeeklyModel model = load_model(synth_model);
      const TrafficSeries series = generate_synthetic(model, synth_weeks, synth_noise, synth_seed);
      write_file(synth_out, [&](std::ostream& o) { write_series_csv(series, o); });
      return kOk;
    }

    if (*inspect_cmd) {
      const WeeklyModel model = load_model(inspect_model);
      out << pad("component", 11) << pad("category", 10) << pad("period", 11) << pad("peak_rate", 12)
          << pad("peak_time", 11) << pad("sigma_h", 9) << "1-sigma window\n";
      for (ComponentId id : kAllComponents) {
        const ComponentParams& p = model[id];
        const auto [lo, hi] = sigma_interval(p);
        out << pad(std::string(name_of(id)), 11) << pad(std::string(name_of(category_of(id))), 10)
            << pad(std::string(name_of(period_of(id))), 11) << pad(fixed(p.peak_rate, 2), 12)
            << pad(format_clock(p.peak_time), 11) << pad(fixed(std::sqrt(p.variance), 3), 9)
            << format_clock(lo) << " - " << format_clock(hi) << '\n';
      }
      return kOk;
    }

    if (*cmp_cmd) {
      const auto [train, test] = split(cmp_data.load_aligned(err), cmp_data.spec());
      std::vector<std::unique_ptr<Forecaster>> forecasters;
      auto fitted = std::make_unique<FittedModelForecaster>(cmp_opts.config());
      const FittedModelForecaster* fitted_view = fitted.get();
      forecasters.push_back(std::move(fitted));
      for (BaselineKind kind : kAllBaselines) {
        forecasters.push_back(std::make_unique<BaselineForecaster>(kind));
      }
      std::vector<std::pair<std::string, EvalReport>> rows;
      for (auto& f : forecasters) rows.emplace_back(f->name(), time_evaluation(*f, train, test));
      if (fitted_view->report()) warn_if_not_converged(*fitted_view->report(), err);

      const bool timing = !cmp_no_timing;
      if (cmp_format == "csv") {
        out << csv_header(timing) << '\n';
        for (const auto& [name, r] : rows) out << to_csv_row(name, r, timing) << '\n';
      } else if (cmp_format == "json") {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& [name, r] : rows) {
          nlohmann::ordered_json row;
          row["method"] = name;
          const auto fields = nlohmann::ordered_json::parse(to_json(r, timing));
          for (const auto& [k, v] : fields.items()) row[k] = v;
          arr.push_back(row);
        }
        out << arr.dump(2) << '\n';
      } else {
        out << pad("method", 22) << pad("MSE", 16) << pad("RMSE", 12) << pad("MAE", 12)
            << pad("R2", 10);
        if (timing) out << pad("train_s", 11) << "predict_s";
        out << '\n';
        for (const auto& [name, r] : rows) {
          out << pad(name, 22) << pad(fixed(r.mse, 2), 16) << pad(fixed(r.rmse, 3), 12)
              << pad(fixed(r.mae, 3), 12) << pad(r.r2 ? fixed(*r.r2, 5) : "n/a", 10);
          if (timing) out << pad(fixed(r.elapsed_train_seconds, 4), 11) << fixed(r.elapsed_predict_seconds, 6);
          out << '\n';
        }
      }
      return kOk;
    }
  } catch (const GapError& e) {
    return input_error(err, "gap", e.what());
  } catch (const TooShortError& e) {
    return input_error(err, "too-short", e.what());
  } catch (const DataError& e) {
    return input_error(err, "parse", e.what());
  } catch (const InvalidArgument& e) {
    return input_error(err, "invalid", e.what());
  } catch (const MetricError& e) {
    return input_error(err, "metric", e.what());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kInternalError;
  }
  err << "error: internal: no subcommand handled\n";
  return kInternalError;
}

}  // namespace ubb::cli
