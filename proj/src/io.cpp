#include "ulfkit/io.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ulfkit/errors.hpp"

namespace ulfkit {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool is_comment_or_blank(const std::string& line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

int read_int(const std::string& s, std::size_t pos, std::size_t len, const std::string& text) {
  if (pos + len > s.size()) throw FormatError("malformed timestamp '" + text + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') throw FormatError("malformed timestamp '" + text + "'");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

double parse_iso8601(const std::string& s) {
  using namespace std::chrono;
  const int y = read_int(s, 0, 4, s);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw FormatError("malformed timestamp '" + s + "'");
  const int mo = read_int(s, 5, 2, s);
  const int d = read_int(s, 8, 2, s);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw FormatError("invalid calendar date in '" + s + "'");
  double secs = static_cast<double>(sys_days{ymd}.time_since_epoch().count()) * 86400.0;

  std::size_t pos = 10;
  if (pos == s.size()) return secs;
  if (s[pos] != 'T' && s[pos] != ' ') throw FormatError("malformed timestamp '" + s + "'");
  ++pos;
  const int hh = read_int(s, pos, 2, s);
  if (pos + 2 >= s.size() || s[pos + 2] != ':') throw FormatError("malformed timestamp '" + s + "'");
  const int mm = read_int(s, pos + 3, 2, s);
  pos += 5;
  double ss = 0.0;
  if (pos < s.size() && s[pos] == ':') {
    std::size_t end = pos + 1;
    while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.')) ++end;
    if (!parse_number(s.substr(pos + 1, end - pos - 1), ss)) {
      throw FormatError("malformed seconds in '" + s + "'");
    }
    pos = end;
  }
  if (hh > 23 || mm > 59 || ss >= 61.0) throw FormatError("time of day out of range in '" + s + "'");
  secs += hh * 3600.0 + mm * 60.0 + ss;

  if (pos == s.size()) return secs;
  if (s[pos] == 'Z' && pos + 1 == s.size()) return secs;
  if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
    const int oh = read_int(s, pos + 1, 2, s);
    const int om = read_int(s, pos + 4, 2, s);
    const double offset = oh * 3600.0 + om * 60.0;
    return s[pos] == '+' ? secs - offset : secs + offset;
  }
  throw FormatError("malformed timezone in '" + s + "'");
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return in;
}

}  // namespace

double parse_time(const std::string& text) {
  const auto t = trim(text);
  double v = 0.0;
  if (parse_number(t, v)) {
    if (!std::isfinite(v)) throw FormatError("non-finite time '" + text + "'");
    return v;
  }
  return parse_iso8601(t);
}

std::vector<TimeSeries> read_series_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (is_comment_or_blank(line)) continue;
    header = split_csv(line);
    break;
  }
  if (header.size() < 2) {
    throw FormatError(source + ": expected a header with a time column and >= 1 channel");
  }
  const std::size_t n_channels = header.size() - 1;
  std::vector<double> times;
  std::vector<std::vector<double>> columns(n_channels);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (is_comment_or_blank(line)) continue;
    ++row;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw FormatError(source + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    }
    double t = 0.0;
    try {
      t = parse_time(cells[0]);
    } catch (const FormatError& e) {
      throw FormatError(source + ": row " + std::to_string(row) + ": " + e.what());
    }
    for (std::size_t c = 0; c < n_channels; ++c) {
      double v = 0.0;
      if (!parse_number(cells[c + 1], v) || !std::isfinite(v)) {
        throw FormatError(source + ": row " + std::to_string(row) + ", column '" +
                          header[c + 1] + "': not a finite number ('" + cells[c + 1] + "')");
      }
      columns[c].push_back(v);
    }
    if (times.size() >= 2) {
      const double dt = times[1] - times[0];
      const double step = t - times.back();
      if (std::abs(step - dt) > 1e-9 * std::abs(dt)) {
        throw FormatError(source + ": non-uniform step at row " + std::to_string(row));
      }
    } else if (times.size() == 1 && !(t > times[0])) {
      throw FormatError(source + ": non-increasing time at row " + std::to_string(row));
    }
    times.push_back(t);
  }
  if (times.size() < 2) throw FormatError(source + ": need at least two data rows to infer dt");

  const double dt = times[1] - times[0];
  std::vector<TimeSeries> out;
  out.reserve(n_channels);
  for (std::size_t c = 0; c < n_channels; ++c) {
    out.emplace_back(std::move(columns[c]), dt, times[0], header[c + 1]);
  }
  return out;
}

std::vector<TimeSeries> load_series(const std::string& path) {
  auto in = open_or_throw(path);
  return read_series_csv(in, path);
}

std::vector<double> read_events_csv(std::istream& in, const std::string& source) {
  std::vector<double> events;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (is_comment_or_blank(line)) continue;
    ++row;
    const auto cells = split_csv(line);
    if (cells.size() != 1) {
      throw FormatError(source + ": row " + std::to_string(row) + ": expected a single column");
    }
    try {
      events.push_back(parse_time(cells[0]));
    } catch (const FormatError& e) {
      if (first) {
        // header row
        first = false;
        continue;
      }
      throw FormatError(source + ": row " + std::to_string(row) + ": " + e.what());
    }
    first = false;
  }
  return events;
}

std::vector<double> load_events(const std::string& path) {
  auto in = open_or_throw(path);
  return read_events_csv(in, path);
}

}  // namespace ulfkit
