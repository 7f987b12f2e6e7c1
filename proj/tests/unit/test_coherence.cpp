#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "ulfkit/coherence.hpp"
#include "ulfkit/errors.hpp"

using namespace ulfkit;

namespace {

constexpr double kPi = std::numbers::pi;

PsdOptions seg_options(std::size_t segments) {
  PsdOptions o;
  o.segments = segments;
  o.taper_fraction = 0.0;
  o.detrend_degree = 0;
  return o;
}

std::vector<TimeSeries> as_series(std::initializer_list<std::vector<double>> cols, double dt = 1.0) {
  std::vector<TimeSeries> out;
  int i = 0;
  for (const auto& c : cols) out.emplace_back(c, dt, 0.0, "ch" + std::to_string(i++));
  return out;
}

// Population spectral matrix from a random complex mixing matrix: S = A A^H.
SpectralMatrix random_population_matrix(std::mt19937_64& rng, std::size_t m, std::size_t bins) {
  std::normal_distribution<double> d;
  std::vector<ComplexMatrix> mats;
  for (std::size_t k = 0; k < bins; ++k) {
    ComplexMatrix a(m, m + 1);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c <= m; ++c) a(r, c) = cplx(d(rng), d(rng));
    ComplexMatrix s(m, m);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) {
        cplx v = 0.0;
        for (std::size_t l = 0; l <= m; ++l) v += std::conj(a(r, l)) * a(c, l);
        s(r, c) = v;
      }
    mats.push_back(s);
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < m; ++i) labels.push_back("c" + std::to_string(i));
  return SpectralMatrix(frequency_grid(2 * (bins - 1), 1.0), labels, 16, mats);
}

double max_defined_diff(const CoherenceFunction& a, const CoherenceFunction& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    REQUIRE(a.values[k].has_value() == b.values[k].has_value());
    if (a.values[k]) m = std::max(m, std::abs(*a.values[k] - *b.values[k]));
  }
  return m;
}

}  // namespace

TEST_CASE("spectral_matrix: consistency with cross_psd, Hermitian, rank one for copies") {
  std::mt19937_64 rng(1);
  const auto x = oracle::gaussian(rng, 2048), y = oracle::gaussian(rng, 2048);
  const auto ch = as_series({x, y, x});
  const auto o = seg_options(8);
  const auto s = spectral_matrix(ch, o);
  const auto gxy = cross_psd(ch[0], ch[1], o);
  for (std::size_t k = 0; k < s.bin_count(); ++k) {
    CHECK(std::abs(s(k, 0, 1) - gxy.cross[k]) <= 1e-12 * (1.0 + std::abs(gxy.cross[k])));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(s(k, i, i).imag() == 0.0);
      CHECK(s(k, i, i).real() >= 0.0);
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(s(k, i, j) - std::conj(s(k, j, i))) <= 1e-12);
    }
    // Channels 0 and 2 are identical: their 2x2 block is singular.
    const double det = std::abs(s(k, 0, 0) * s(k, 2, 2) - s(k, 0, 2) * s(k, 2, 0));
    CHECK(det <= 1e-12 * std::norm(s(k, 0, 0)) + 1e-300);
  }
  CHECK_THROWS_AS(spectral_matrix(ch, seg_options(1)), InvalidArgument);
  CHECK_NOTHROW(spectral_matrix(ch, seg_options(1), false));
}

TEST_CASE("spectral_matrix: independent noises have small cross terms") {
  std::mt19937_64 rng(2);
  const auto ch = as_series({oracle::gaussian(rng, 64 * 64), oracle::gaussian(rng, 64 * 64),
                             oracle::gaussian(rng, 64 * 64)});
  const auto s = spectral_matrix(ch, seg_options(64));
  double off = 0.0, diag = 0.0;
  for (std::size_t k = 1; k + 1 < s.bin_count(); ++k) {
    off += std::abs(s(k, 0, 1)) + std::abs(s(k, 0, 2)) + std::abs(s(k, 1, 2));
    diag += s(k, 0, 0).real() + s(k, 1, 1).real() + s(k, 2, 2).real();
  }
  CHECK(off < 0.25 * diag);
}

TEST_CASE("ordinary_coherence: copy, bounds, undefined bins") {
  std::mt19937_64 rng(3);
  const auto x = oracle::gaussian(rng, 1024);
  const auto s = spectral_matrix(as_series({x, x, std::vector<double>(1024, 2.0)}), seg_options(8));
  const auto g = ordinary_coherence(s, 0, 1);
  // Mean removal empties the DC bin.
  CHECK_FALSE(g.values[0].has_value());
  for (std::size_t k = 1; k < g.values.size(); ++k) {
    REQUIRE(g.values[k].has_value());
    CHECK(*g.values[k] == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Channel 2 is constant; detrending leaves a zero spectrum everywhere.
  const auto u = ordinary_coherence(s, 0, 2);
  CHECK(u.defined_count() == 0);
  CHECK_FALSE(u.band_mean(0.0, 0.5).has_value());
  CHECK_THROWS_AS(ordinary_coherence(s, 1, 1), InvalidArgument);
}

TEST_CASE("ordinary_coherence: independent noise bias near 1/n_d") {
  std::mt19937_64 rng(4);
  const std::size_t nd = 32, seg = 64;
  double total = 0.0;
  std::size_t count = 0;
  for (int r = 0; r < 200; ++r) {
    const auto s = spectral_matrix(as_series({oracle::gaussian(rng, nd * seg), oracle::gaussian(rng, nd * seg)}),
                                   seg_options(nd));
    const auto g = ordinary_coherence(s, 0, 1);
    for (std::size_t k = 1; k + 1 < g.values.size(); ++k) {
      total += *g.values[k];
      ++count;
    }
  }
  const double m = total / double(count);
  CHECK(m >= 0.7 / double(nd));
  CHECK(m <= 1.3 / double(nd));
}

TEST_CASE("ordinary_coherence: y = x + noise follows rho/(1+rho)") {
  // Noise e_t = s (w_t - w_{t-1}) has |H|^2 = 2 - 2 cos(2 pi f): SNR varies across the band.
  std::mt19937_64 rng(5);
  const std::size_t nd = 64, seg = 64, n = nd * seg;
  const double sn = 0.6;
  const std::size_t k_lo = 20, k_hi = 28;
  std::vector<double> means;
  for (int r = 0; r < 200; ++r) {
    const auto x = oracle::gaussian(rng, n);
    const auto w = oracle::gaussian(rng, n + 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + sn * (w[i + 1] - w[i]);
    const auto g = ordinary_coherence(spectral_matrix(as_series({x, y}), seg_options(nd)), 0, 1);
    double s = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) s += *g.values[k];
    means.push_back(s / double(k_hi - k_lo + 1));
  }
  double target = 0.0;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const double rho = 1.0 / (sn * sn * (2.0 - 2.0 * std::cos(2.0 * kPi * double(k) / double(seg))));
    target += rho / (1.0 + rho);
  }
  target /= double(k_hi - k_lo + 1);
  std::sort(means.begin(), means.end());
  CHECK(means[4] <= target);
  CHECK(means[195] >= target);
}

TEST_CASE("partial coherence: Eq. 6 vs Schur complement") {
  std::mt19937_64 rng(6);
  for (int r = 0; r < 20; ++r) {
    const auto p = oracle::gaussian(rng, 2048), t = oracle::gaussian(rng, 2048), e = oracle::gaussian(rng, 2048);
    std::vector<double> n(2048);
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = 0.7 * p[i] + 0.9 * t[i] + 0.5 * e[i];
    const auto s = spectral_matrix(as_series({p, n, t}), seg_options(16));
    const std::size_t z[] = {2};
    CHECK(max_defined_diff(partial_coherence_eq6(s, 0, 1, 2), partial_coherence(s, 0, 1, z)) <= 1e-10);
  }
  std::mt19937_64 rng2(7);
  for (int r = 0; r < 20; ++r) {
    const auto s = random_population_matrix(rng2, 3, 33);
    const std::size_t z[] = {2};
    CHECK(max_defined_diff(partial_coherence_eq6(s, 0, 1, 2), partial_coherence(s, 0, 1, z)) <= 1e-10);
  }
}

TEST_CASE("partial coherence: empty Z, independent t, forced singularity") {
  std::mt19937_64 rng(8);
  const auto s = random_population_matrix(rng, 4, 17);
  CHECK(max_defined_diff(partial_coherence(s, 0, 1, {}), ordinary_coherence(s, 0, 1)) <= 1e-12);

  // Population matrix with zero cross terms to t: Eq. 6 reduces to ordinary.
  std::vector<ComplexMatrix> mats;
  for (std::size_t k = 0; k < 9; ++k) {
    ComplexMatrix m(3, 3);
    m(0, 0) = 2.0;
    m(1, 1) = 3.0;
    m(2, 2) = 1.5;
    m(0, 1) = cplx(1.0, 0.5 * double(k) / 9.0);
    m(1, 0) = std::conj(m(0, 1));
    mats.push_back(m);
  }
  const SpectralMatrix ind(frequency_grid(16, 1.0), {"p", "n", "t"}, 16, mats);
  CHECK(max_defined_diff(partial_coherence_eq6(ind, 0, 1, 2), ordinary_coherence(ind, 0, 1)) <= 1e-12);

  const auto p = oracle::gaussian(rng, 1024), t = oracle::gaussian(rng, 1024);
  const auto sing = spectral_matrix(as_series({p, t, t}), seg_options(8));
  CHECK(partial_coherence_eq6(sing, 0, 1, 2).defined_count() == 0);
  const std::size_t z[] = {2};
  CHECK(partial_coherence(sing, 0, 1, z).defined_count() == 0);
  const std::size_t bad[] = {1};
  CHECK_THROWS_AS(partial_coherence(sing, 0, 1, bad), InvalidArgument);
}

TEST_CASE("partial coherence: mediation chain x -> z -> y") {
  std::mt19937_64 rng(9);
  const std::size_t nd = 64, seg = 64, n = nd * seg;
  const auto x = oracle::gaussian(rng, n);
  const auto u = oracle::gaussian(rng, n), v = oracle::gaussian(rng, n);
  std::vector<double> z(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = x[i] + 0.3 * u[i];
    y[i] = z[i] + 0.3 * v[i];
  }
  const auto s = spectral_matrix(as_series({x, y, z}), seg_options(nd));
  const std::size_t cond[] = {2};
  const auto part = partial_coherence(s, 0, 1, cond);
  const auto ord = ordinary_coherence(s, 0, 1);
  CHECK(*part.band_mean(0.0, 0.5) < 3.0 / double(nd));
  CHECK(*ord.band_mean(0.0, 0.5) > 0.8);
}

TEST_CASE("multiple coherence: single input, noiseless, monotone in X") {
  std::mt19937_64 rng(10);
  const auto s = random_population_matrix(rng, 5, 17);
  const std::size_t one[] = {2};
  CHECK(max_defined_diff(multiple_coherence(s, 0, one), ordinary_coherence(s, 2, 0)) <= 1e-12);
  for (std::size_t k = 0; k < 17; ++k) {
    double prev = 0.0;
    std::vector<std::size_t> inputs;
    for (std::size_t c = 1; c < 5; ++c) {
      inputs.push_back(c);
      const auto g = multiple_coherence(s, 0, inputs);
      REQUIRE(g.values[k].has_value());
      CHECK(*g.values[k] >= prev - 1e-9);
      prev = *g.values[k];
    }
  }

  const auto b = oracle::gaussian(rng, 2048), c = oracle::gaussian(rng, 2048);
  std::vector<double> y(2048);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.8 * b[i] + 0.5 * c[i];
  const auto sm = spectral_matrix(as_series({y, b, c}), seg_options(16));
  const std::size_t in2[] = {1, 2};
  const auto g = multiple_coherence(sm, 0, in2);
  for (std::size_t k = 1; k + 1 < g.values.size(); ++k) {
    if (g.values[k]) CHECK(*g.values[k] == doctest::Approx(1.0).epsilon(1e-6));
  }
  const std::size_t bad[] = {0};
  CHECK_THROWS_AS(multiple_coherence(sm, 0, bad), InvalidArgument);
}

TEST_CASE("multiple coherence: Eq. 1 generator matches 1 - q") {
  const synthetic::Eq1Model model;
  std::mt19937_64 rng(11);
  const std::size_t nd = 64, seg = 64;
  const std::size_t k_lo = 8, k_hi = 16;
  std::vector<double> means;
  for (int r = 0; r < 200; ++r) {
    const auto d = model.draw(rng, nd * seg);
    const auto s = spectral_matrix(as_series({d.y, d.b, d.c}), seg_options(nd));
    const std::size_t in[] = {1, 2};
    const auto g = multiple_coherence(s, 0, in);
    double m = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) m += *g.values[k];
    means.push_back(m / double(k_hi - k_lo + 1));
  }
  std::sort(means.begin(), means.end());
  const double target = model.band_target(k_lo, k_hi, seg);
  CHECK(means[4] <= target);
  CHECK(means[195] >= target);
}

TEST_CASE("coherence: bounds and rescaling invariance") {
  std::mt19937_64 rng(12);
  const auto d = synthetic::Eq1Model{}.draw(rng, 4096);
  std::vector<double> y2 = d.y, b2 = d.b, c2 = d.c;
  for (auto& v : y2) v *= 1e3;
  for (auto& v : b2) v *= 0.01;
  for (auto& v : c2) v *= 7.0;
  const auto s1 = spectral_matrix(as_series({d.y, d.b, d.c}), seg_options(16));
  const auto s2 = spectral_matrix(as_series({y2, b2, c2}), seg_options(16));
  const std::size_t z[] = {2};
  const std::size_t in[] = {1, 2};
  const std::vector<std::pair<CoherenceFunction, CoherenceFunction>> pairs{
      {ordinary_coherence(s1, 0, 1), ordinary_coherence(s2, 0, 1)},
      {partial_coherence(s1, 0, 1, z), partial_coherence(s2, 0, 1, z)},
      {partial_coherence_eq6(s1, 0, 1, 2), partial_coherence_eq6(s2, 0, 1, 2)},
      {multiple_coherence(s1, 0, in), multiple_coherence(s2, 0, in)}};
  for (const auto& [a, b] : pairs) {
    CHECK(max_defined_diff(a, b) <= 1e-10);
    for (const auto& v : a.values)
      if (v) {
        CHECK(*v >= 0.0);
        CHECK(*v <= 1.0);
      }
  }
}

TEST_CASE("coherence: more output noise lowers partial coherence") {
  double prev = 2.0;
  for (double sigma : {0.1, 0.3, 0.6, 1.0, 2.0}) {
    std::mt19937_64 rng(13);
    const auto p = oracle::gaussian(rng, 4096), t = oracle::gaussian(rng, 4096), e = oracle::gaussian(rng, 4096);
    std::vector<double> n(4096);
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = 0.8 * p[i] + 0.6 * t[i] + sigma * e[i];
    const auto s = spectral_matrix(as_series({p, n, t}), seg_options(32));
    const double m = *partial_coherence_eq6(s, 0, 1, 2).band_mean(0.0, 0.5);
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("gain_phase: scaling, sign flip, delay") {
  std::mt19937_64 rng(14);
  const auto x = oracle::gaussian(rng, 1024);
  std::vector<double> two(x), neg(x);
  for (auto& v : two) v *= 2.0;
  for (auto& v : neg) v = -v;
  const auto s = spectral_matrix(as_series({x, two, neg}), seg_options(8));
  const auto g2 = gain_phase(s, 0, 1);
  const auto gn = gain_phase(s, 0, 2);
  CHECK_FALSE(g2.gain[0].has_value());
  for (std::size_t k = 1; k < g2.gain.size(); ++k) {
    REQUIRE(g2.gain[k].has_value());
    REQUIRE(gn.phase[k].has_value());
    CHECK(*g2.gain[k] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(*g2.phase[k]) <= 1e-12);
    CHECK(*gn.phase[k] == doctest::Approx(kPi).epsilon(1e-12));
  }

  // Circular delay in every segment gives the exact phase.
  const std::size_t seg = 128, nd = 4, lag = 5;
  const double dt = 0.5;
  std::vector<double> a, b;
  for (std::size_t sidx = 0; sidx < nd; ++sidx) {
    const auto base = oracle::gaussian(rng, seg);
    for (std::size_t i = 0; i < seg; ++i) {
      a.push_back(base[i]);
      b.push_back(base[(i + seg - lag) % seg]);
    }
  }
  auto o = seg_options(nd);
  o.detrend_degree = -1;
  const auto gd = gain_phase(spectral_matrix(as_series({a, b}, dt), o), 0, 1);
  for (std::size_t k = 1; k + 1 < gd.phase.size(); ++k) {
    const double expect = -2.0 * kPi * gd.axis[k] * double(lag) * dt;
    const double diff = std::remainder(*gd.phase[k] - expect, 2.0 * kPi);
    CHECK(std::abs(diff) <= 1e-6);
    CHECK(*gd.phase[k] > -kPi);
    CHECK(*gd.phase[k] <= kPi);
  }
  CHECK_THROWS_AS(gain_phase(s, 1, 1), InvalidArgument);
}

TEST_CASE("correlation: variance at lag 0, shift argmax, Cauchy-Schwarz") {
  std::mt19937_64 rng(15);
  const auto x = oracle::gaussian(rng, 500);
  const TimeSeries sx(x, 1.0);
  const auto r = correlation(sx, 20);
  CHECK(r.at_lag(0) == doctest::Approx(oracle::variance(x)).epsilon(1e-12));
  for (double v : r.values) CHECK(std::abs(v) <= r.at_lag(0) + 1e-15);

  const long lag = 7;
  std::vector<double> y(500, 0.0);
  for (std::size_t i = lag; i < 500; ++i) y[i] = x[i - lag];
  const auto rxy = correlation(sx, TimeSeries(y, 1.0), 20);
  CHECK(rxy.argmax() == lag);
  CHECK_THROWS_AS(correlation(sx, 500), InvalidArgument);
}
