#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ulfkit/signal_model.hpp"

namespace ulfkit {

// Seconds since the Unix epoch for "YYYY-MM-DD[THH:MM[:SS[.fff]]][Z|+hh:mm]",
// or a plain decimal number of seconds.
double parse_time(const std::string& text);

// CSV with a header row; first column is time, each further column is a
// channel. Lines starting with '#' are skipped.
std::vector<TimeSeries> read_series_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<TimeSeries> load_series(const std::string& path);

// Single column of epochs (header optional).
std::vector<double> read_events_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<double> load_events(const std::string& path);

}  // namespace ulfkit
