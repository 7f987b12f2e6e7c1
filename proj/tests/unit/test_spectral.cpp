#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ulfkit/errors.hpp"
#include "ulfkit/spectral.hpp"
#include "ulfkit/stats.hpp"

using namespace ulfkit;

namespace {

constexpr double kPi = std::numbers::pi;

PsdOptions raw_options(std::size_t segments = 1) {
  PsdOptions o;
  o.segments = segments;
  o.taper_fraction = 0.0;
  o.detrend_degree = -1;
  o.allow_padding = false;
  return o;
}

std::vector<cplx> random_complex(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<cplx> x(n);
  for (auto& v : x) v = cplx(d(rng), d(rng));
  return x;
}

}  // namespace

TEST_CASE("fft: impulse and DC") {
  const auto a = fft({1, 0, 0, 0});
  for (const auto& v : a) CHECK(std::abs(v - cplx(1, 0)) <= 1e-15);
  const auto b = fft({1, 1, 1, 1});
  CHECK(std::abs(b[0] - cplx(4, 0)) <= 1e-15);
  for (int k = 1; k < 4; ++k) CHECK(std::abs(b[k]) <= 1e-15);
  CHECK_THROWS_AS(fft(std::vector<cplx>(6)), InvalidArgument);
}

TEST_CASE("fft: direct DFT oracle, round trip, linearity") {
  std::mt19937_64 rng(1);
  for (std::size_t n = 1; n <= 1024; n *= 2) {
    const auto x = random_complex(rng, n);
    const auto y = random_complex(rng, n);
    const auto fx = fft(x);
    if (n <= 256) CHECK(oracle::max_abs_diff(fx, oracle::direct_dft(x)) <= 1e-10 * std::sqrt(double(n)) * 4);
    const auto back = fft(fx, FftDirection::inverse);
    CHECK(oracle::max_abs_diff(back, x) <= 1e-12);
    std::vector<cplx> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = 2.0 * x[i] - cplx(0, 3) * y[i];
    const auto fy = fft(y);
    const auto fm = fft(mix);
    std::vector<cplx> expect(n);
    for (std::size_t i = 0; i < n; ++i) expect[i] = 2.0 * fx[i] - cplx(0, 3) * fy[i];
    CHECK(oracle::max_abs_diff(fm, expect) <= 1e-10);
  }
  const auto x16 = random_complex(rng, 16);
  CHECK(oracle::max_abs_diff(fft(x16), oracle::direct_dft(x16)) <= 1e-10);
}

TEST_CASE("dft_any_length matches the direct DFT") {
  std::mt19937_64 rng(2);
  for (std::size_t n : {1u, 3u, 5u, 12u, 31u, 100u}) {
    const auto x = random_complex(rng, n);
    CHECK(oracle::max_abs_diff(dft_any_length(x), oracle::direct_dft(x)) <= 1e-9);
  }
}

TEST_CASE("fwht: N=2 matrix, Hadamard oracle, involution") {
  CHECK(fwht({1, 1}) == std::vector<double>{2, 0});
  CHECK(fwht({1, -1}) == std::vector<double>{0, 2});
  std::mt19937_64 rng(3);
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    const auto x = oracle::gaussian(rng, n);
    const auto w = fwht(x);
    const auto ref = oracle::matvec(oracle::hadamard(n), x);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(w[i] - ref[i]) <= 1e-12);
  }
  const auto x8 = oracle::gaussian(rng, 8);
  const auto twice = fwht(fwht(x8));
  for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(twice[i] - 8.0 * x8[i]) <= 1e-12);
  CHECK_THROWS_AS(fwht(std::vector<double>(12)), InvalidArgument);
}

TEST_CASE("hadamard_to_sequency orders rows by sign changes") {
  // Transform of each Hadamard row is a delta at that row's natural index;
  // in sequency order the delta for a row with s sign changes lands at s.
  const std::size_t n = 16;
  const auto h = oracle::hadamard(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t changes = 0;
    for (std::size_t j = 1; j < n; ++j) changes += h[r][j] != h[r][j - 1];
    const auto seq = hadamard_to_sequency(fwht(h[r]));
    CHECK(seq[changes] == doctest::Approx(double(n)));
  }
}

TEST_CASE("psd: unit sine at a bin frequency") {
  const std::size_t n = 1024;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * kPi * 37.0 * double(i) / double(n));
  const auto g = psd(TimeSeries(x, 0.5), raw_options());
  CHECK(g.integrated() == doctest::Approx(0.5).epsilon(1e-6));
  std::size_t nonzero = 0;
  for (std::size_t k = 0; k < g.size(); ++k) nonzero += g.values[k] > 1e-10 * g.values[37];
  CHECK(nonzero == 1);
  CHECK(g.values[37] > 0.0);
}

TEST_CASE("psd: constant series has only DC") {
  const auto g = psd(TimeSeries(std::vector<double>(64, 3.0), 1.0), raw_options());
  CHECK(g.values[0] > 0.0);
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g.values[k] <= 1e-20);
}

TEST_CASE("psd: Parseval, non-negativity, direct periodogram oracle") {
  std::mt19937_64 rng(4);
  const auto x = oracle::gaussian(rng, 4096);
  const TimeSeries s(x, 2.0);
  auto o = raw_options();
  o.detrend_degree = 0;
  const auto g = psd(s, o);
  CHECK(std::abs(g.integrated() - oracle::variance(x)) / oracle::variance(x) <= 1e-6);
  for (double v : g.values) CHECK(v >= 0.0);

  // Direct O(N^2) periodogram on a short record.
  const auto y = oracle::gaussian(rng, 64);
  const auto gy = psd(TimeSeries(y, 0.1), raw_options());
  std::vector<cplx> yc(y.begin(), y.end());
  const auto dft = oracle::direct_dft(yc);
  for (std::size_t k = 0; k <= 32; ++k) {
    double expect = 2.0 * std::norm(dft[k]) * 0.1 / 64.0;
    if (k == 0 || k == 32) expect *= 0.5;
    CHECK(gy.values[k] == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("psd: errors") {
  const TimeSeries s(std::vector<double>(100, 1.0), 1.0);
  CHECK_THROWS_AS(psd(s, raw_options()), InvalidArgument);  // 100 is not a power of two, padding off
  auto o = raw_options();
  o.n_fft = 64;
  o.allow_padding = true;
  CHECK_THROWS_AS(psd(s, o), InvalidArgument);
}

TEST_CASE("psd: Welch averaging reduces periodogram variance by about k") {
  std::mt19937_64 rng(5);
  const std::size_t k = 16, seg = 256;
  double var1 = 0.0, vark = 0.0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    const TimeSeries s(oracle::gaussian(rng, k * seg), 1.0);
    auto o1 = raw_options();
    o1.n_fft = k * seg;
    const auto g1 = psd(s, o1);
    const auto gk = psd(s, raw_options(k));
    std::vector<double> i1(g1.values.begin() + 1, g1.values.end() - 1);
    std::vector<double> ik(gk.values.begin() + 1, gk.values.end() - 1);
    var1 += oracle::variance(i1) / std::pow(mean(i1), 2);
    vark += oracle::variance(ik) / std::pow(mean(ik), 2);
  }
  const double ratio = var1 / vark;
  CHECK(ratio >= 0.7 * double(k));
  CHECK(ratio <= 1.3 * double(k));
}

TEST_CASE("cross_psd: self, Hermitian, delay phase") {
  std::mt19937_64 rng(6);
  const auto x = oracle::gaussian(rng, 1024);
  const auto y = oracle::gaussian(rng, 1024);
  const TimeSeries sx(x, 1.0), sy(y, 1.0);
  const auto o = raw_options(4);
  const auto g = psd(sx, o);
  const auto gxx = cross_psd(sx, sx, o);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(std::abs(gxx.cross[k].real() - g.values[k]) <= 1e-12 * (1.0 + g.values[k]));
    CHECK(std::abs(gxx.cross[k].imag()) <= 1e-12 * (1.0 + g.values[k]));
  }
  const auto gxy = cross_psd(sx, sy, o);
  const auto gyx = cross_psd(sy, sx, o);
  for (std::size_t k = 0; k < gxy.size(); ++k) CHECK(std::abs(gxy.cross[k] - std::conj(gyx.cross[k])) <= 1e-12);
  const auto co = gxy.co();
  const auto quad = gxy.quad();
  for (std::size_t k = 0; k < gxy.size(); ++k) {
    CHECK(co[k] == gxy.cross[k].real());
    CHECK(quad[k] == -gxy.cross[k].imag());
  }

  // Circular delay by L samples: exact phase -2 pi f L dt.
  const std::size_t n = 512, lag = 7;
  const double dt = 0.25;
  const auto base = oracle::gaussian(rng, n);
  std::vector<double> delayed(n);
  for (std::size_t i = 0; i < n; ++i) delayed[i] = base[(i + n - lag) % n];
  const auto gd = cross_psd(TimeSeries(base, dt), TimeSeries(delayed, dt), raw_options());
  for (std::size_t k = 1; k < gd.size() - 1; ++k) {
    const double f = gd.axis[k];
    const cplx rotated = gd.cross[k] * std::polar(1.0, 2.0 * kPi * f * double(lag) * dt);
    CHECK(std::abs(std::arg(rotated)) <= 1e-6);
  }

  CHECK_THROWS_AS(cross_psd(sx, TimeSeries(y, 2.0), o), InvalidArgument);
}

TEST_CASE("smooth_frequency: hand boxcar, identity, power preservation") {
  SpectralEstimate e;
  e.grid = frequency_grid(8, 1.0);
  e.axis = {0, 0.125, 0.25, 0.375, 0.5};
  e.values = {1, 2, 3, 4, 5};
  const auto s3 = smooth_frequency(e, 3);
  const std::vector<double> expect{1.5, 2, 3, 4, 4.5};
  for (std::size_t i = 0; i < 5; ++i) CHECK(s3.values[i] == doctest::Approx(expect[i]));
  CHECK(s3.n_averages == 3);
  CHECK(smooth_frequency(e, 1).values == e.values);
  CHECK_THROWS_AS(smooth_frequency(e, 2), InvalidArgument);

  std::mt19937_64 rng(7);
  auto o = raw_options();
  const auto g = psd(TimeSeries(oracle::ar1(rng, 4096, 0.5), 1.0), o);
  const auto gs = smooth_frequency(g, 9);
  CHECK(std::abs(gs.integrated() / g.integrated() - 1.0) <= 0.01);
}

TEST_CASE("bispectrum: quadratic phase coupling and white noise") {
  const std::size_t nfft = 64, segs = 64;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const std::size_t k1 = 10, k2 = 6;
  std::vector<double> x;
  for (std::size_t s = 0; s < segs; ++s) {
    const double p1 = phase(rng), p2 = phase(rng);
    for (std::size_t i = 0; i < nfft; ++i) {
      const double t = double(i) / double(nfft);
      x.push_back(std::cos(2 * kPi * k1 * t + p1) + std::cos(2 * kPi * k2 * t + p2) +
                  std::cos(2 * kPi * (k1 + k2) * t + p1 + p2) + 0.1 * std::normal_distribution<double>()(rng));
    }
  }
  const auto b = bispectrum(TimeSeries(x, 1.0), nfft, segs);
  CHECK(b.at(k1, k2).bicoherence > 0.9);
  CHECK(b.at(k2, k1).bicoherence == b.at(k1, k2).bicoherence);
  for (const auto& p : b.points) {
    CHECK(p.bicoherence >= 0.0);
    CHECK(p.bicoherence <= 1.0 + 1e-12);
    CHECK(p.k1 >= p.k2);
    CHECK(p.k1 + p.k2 <= nfft / 2);
  }
  const auto w = bispectrum(TimeSeries(oracle::gaussian(rng, nfft * segs), 1.0), nfft, segs);
  CHECK(w.mean_bicoherence() < 0.1);
  CHECK_THROWS_AS(bispectrum(TimeSeries(x, 1.0), nfft, segs + 1), InvalidArgument);
}

TEST_CASE("cepstrum: echo peak, white noise, flooring, all-zero") {
  std::mt19937_64 rng(9);
  const std::size_t n = 4096, tau = 50;
  const double dt = 0.5;
  const auto e = oracle::gaussian(rng, n + tau);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = e[i + tau] + 0.8 * e[i];
  const auto c = cepstrum(TimeSeries(x, dt), n);
  std::size_t best = 1;
  for (std::size_t k = 1; k < c.size(); ++k)
    if (c.values[k] > c.values[best]) best = k;
  CHECK(c.axis[best] == doctest::Approx(double(tau) * dt));

  // c[0] carries the mean log level; everything else is estimator noise
  // (about 0.014 rms per coefficient at this length).
  const auto cw = cepstrum(TimeSeries(oracle::gaussian(rng, n, 10.0), 1.0), n);
  double rest = 0.0;
  for (std::size_t k = 1; k < cw.size(); ++k) rest = std::max(rest, std::abs(cw.values[k]));
  CHECK(rest < 0.15);
  CHECK(cw.values[0] > 20.0 * rest);

  std::vector<double> spiky(n, 0.0);
  spiky[0] = 1.0;
  spiky[3] = 1.0;
  const auto cs = cepstrum(TimeSeries(spiky, 1.0), n);
  for (double v : cs.values) CHECK(std::isfinite(v));
  CHECK_THROWS_AS(cepstrum(TimeSeries(std::vector<double>(64, 0.0), 1.0), 64), DegenerateInput);
}
