#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace ubb::cli {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

/// Runs one subcommand (fit, predict, evaluate, synth, inspect, compare).
/// Diagnostics go to `err` as a single line per failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Hours as "H:MM"; values past midnight get " (+1d)", before it " (-1d)".
std::string format_clock(double hours);

/// Static SVG line plot of `values` against their index.
void write_svg_plot(std::span<const double> values, const std::string& title,
                    const std::string& x_label, const std::string& y_label, std::ostream& out);

}  // namespace ubb::cli
