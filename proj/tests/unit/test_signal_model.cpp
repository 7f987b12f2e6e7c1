#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ulfkit/errors.hpp"
#include "ulfkit/signal_model.hpp"

using namespace ulfkit;

TEST_CASE("frequency_grid: Fig. 11 and Fig. 13 resolutions") {
  const auto g = frequency_grid(65536, 3600.0);
  CHECK(g.fmax == doctest::Approx(138.89e-6).epsilon(1e-4));
  CHECK(g.df == doctest::Approx(4.2385e-9).epsilon(1e-4));
  CHECK(g.n_bins == 32768);
  const auto g13 = frequency_grid(8192, 3600.0);
  CHECK(g13.df == doctest::Approx(33.9e-9).epsilon(1e-3));
}

TEST_CASE("frequency_grid: trivial case and invariants") {
  const auto g = frequency_grid(4, 1.0);
  CHECK(g.fmax == 0.5);
  CHECK(g.df == 0.25);
  CHECK(g.n_bins == 2);
  for (std::size_t n = 4; n <= (1u << 20); n *= 2) {
    const auto a = frequency_grid(n, 7.5);
    const auto b = frequency_grid(2 * n, 7.5);
    CHECK(a.fmax / a.df == static_cast<double>(n / 2));
    CHECK(b.df == a.df / 2.0);
    CHECK(b.fmax == a.fmax);
  }
}

TEST_CASE("frequency_grid: errors") {
  CHECK_THROWS_AS(frequency_grid(100, 1.0), InvalidArgument);
  CHECK_THROWS_AS(frequency_grid(2, 1.0), InvalidArgument);
  CHECK_THROWS_AS(frequency_grid(64, 0.0), InvalidArgument);
  CHECK_THROWS_AS(frequency_grid(64, -1.0), InvalidArgument);
}

TEST_CASE("nearest_bin rounds to the closest grid line") {
  const auto g = frequency_grid(16, 1.0);
  CHECK(g.nearest_bin(0.0) == 0);
  CHECK(g.nearest_bin(3.4 * g.df) == 3);
  CHECK(g.nearest_bin(3.6 * g.df) == 4);
}

TEST_CASE("period_of: paper periods") {
  CHECK(period_of(1653.04e-9).days() == doctest::Approx(7.0017).epsilon(1e-4));
  CHECK(period_of(11575.48e-9).hours() == doctest::Approx(23.997).epsilon(1e-4));
  CHECK(period_of(1.0).seconds == 1.0);
  CHECK_THROWS_AS(period_of(0.0), InvalidArgument);
  CHECK_THROWS_AS(period_of(-2.0), InvalidArgument);
}

TEST_CASE("period_of and frequency_of round-trip") {
  for (double p : {1.0, 3600.0, 86400.0 * 7.00171, 1e9, 0.00123}) {
    CHECK(period_of(frequency_of(Period{p})).seconds == doctest::Approx(p).epsilon(1e-15));
  }
}

TEST_CASE("Period::human picks a readable unit") {
  CHECK(period_of(1653.04e-9).human().find(" d") != std::string::npos);
  CHECK(period_of(11575.48e-9).human().find(" h") != std::string::npos);
}

TEST_CASE("TimeSeries invariants") {
  const TimeSeries s({1.0, 2.0, 3.0}, 2.0, 10.0, "v");
  CHECK(s.duration() == 4.0);
  CHECK(s.end_time() == 14.0);
  CHECK(s.time_at(1) == 12.0);
  CHECK_THROWS_AS(TimeSeries({}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(TimeSeries({1.0}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(TimeSeries({1.0, NAN}, 1.0), InvalidArgument);
  const auto sl = s.slice(1, 2);
  CHECK(sl.size() == 2);
  CHECK(sl.t0() == 12.0);
}

TEST_CASE("ProcessComplex cuts to the common window") {
  const TimeSeries a({0, 1, 2, 3, 4, 5}, 1.0, 0.0, "a");
  const TimeSeries b({10, 11, 12, 13}, 1.0, 2.0, "b");
  const ProcessComplex pc(a, {b});
  CHECK(pc.length() == 4);
  CHECK(pc.output()[0] == 2.0);
  CHECK(pc.inputs()[0][0] == 10.0);
  CHECK_THROWS_AS(ProcessComplex(a, {TimeSeries({1, 2}, 0.5)}), InvalidArgument);
}

TEST_CASE("bin_events: examples") {
  const double h = 3600.0;
  auto e = bin_events({0.5 * h, 2.3 * h}, h, EventMode::binary, 0.0, 4 * h);
  CHECK(e.realization.data() == std::vector<double>{1, 0, 1, 0});
  CHECK(e.realization.dt() == h);
  e = bin_events({0.1 * h, 0.2 * h}, h, EventMode::count, 0.0, 2 * h);
  CHECK(e.realization.data() == std::vector<double>{2, 0});
  e = bin_events({0.1 * h, 0.2 * h}, h, EventMode::binary, 0.0, 2 * h);
  CHECK(e.realization.data() == std::vector<double>{1, 0});
}

TEST_CASE("bin_events: boundaries and errors") {
  CHECK_THROWS_AS(bin_events({2.0}, 1.0, EventMode::binary, 0.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(bin_events({-0.5}, 1.0, EventMode::binary, 0.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(bin_events({0.5}, 0.0, EventMode::binary, 0.0, 2.0), InvalidArgument);
  const auto e = bin_events({1.0}, 1.0, EventMode::count, 0.0, 2.0);
  CHECK(e.realization.data() == std::vector<double>{0, 1});
}

TEST_CASE("bin_events: count sum and binary sign") {
  std::vector<double> t;
  for (int i = 0; i < 500; ++i) t.push_back(std::fmod(i * 37.77, 999.0));
  const auto c = bin_events(t, 10.0, EventMode::count, 0.0, 1000.0);
  const auto b = bin_events(t, 10.0, EventMode::binary, 0.0, 1000.0);
  const auto& cv = c.realization.data();
  CHECK(std::accumulate(cv.begin(), cv.end(), 0.0) == 500.0);
  for (std::size_t i = 0; i < cv.size(); ++i) CHECK(b.realization[i] == (cv[i] > 0 ? 1.0 : 0.0));
}

TEST_CASE("event mode names") {
  CHECK(parse_event_mode("count") == EventMode::count);
  CHECK(to_string(EventMode::binary) == "binary");
  CHECK_THROWS_AS(parse_event_mode("other"), InvalidArgument);
}
