#include "ulfkit/selftest.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "ulfkit/coherence.hpp"
#include "ulfkit/fitting.hpp"
#include "ulfkit/spectral.hpp"
#include "ulfkit/stats.hpp"

namespace ulfkit {
namespace {

std::vector<cplx> direct_dft(const std::vector<cplx>& x) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * cplx(std::cos(a), std::sin(a));
    }
    out[k] = acc;
  }
  return out;
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

SelftestCheck run(const std::string& name, const std::function<std::string(bool&)>& body) {
  SelftestCheck c;
  c.name = name;
  try {
    c.pass = true;
    c.detail = body(c.pass);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail = std::string("exception: ") + e.what();
  }
  return c;
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

}  // namespace

std::vector<SelftestCheck> run_selftest(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SelftestCheck> out;

  out.push_back(run("fft_vs_direct_dft", [&](bool& pass) {
    double worst = 0.0;
    for (std::size_t n = 2; n <= 64; n *= 2) {
      for (int rep = 0; rep < 10; ++rep) {
        const auto re = gaussian(rng, n);
        const auto im = gaussian(rng, n);
        std::vector<cplx> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = {re[i], im[i]};
        const auto a = fft(x);
        const auto b = direct_dft(x);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          num = std::max(num, std::abs(a[k] - b[k]));
          den = std::max(den, std::abs(b[k]));
        }
        worst = std::max(worst, num / den);
      }
    }
    pass = worst <= 1e-10;
    return "max rel err " + sci(worst);
  }));

  out.push_back(run("fft_roundtrip", [&](bool& pass) {
    const auto re = gaussian(rng, 256);
    std::vector<cplx> x(re.begin(), re.end());
    const auto y = fft(fft(x), FftDirection::inverse);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
    pass = worst <= 1e-12;
    return "max abs err " + sci(worst);
  }));

  out.push_back(run("fwht_vs_hadamard", [&](bool& pass) {
    double worst = 0.0;
    for (std::size_t n = 1; n <= 16; n *= 2) {
      const auto x = gaussian(rng, n);
      const auto y = fwht(x);
      for (std::size_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += (std::popcount(r & c) % 2 ? -1.0 : 1.0) * x[c];
        worst = std::max(worst, std::abs(acc - y[r]));
      }
    }
    pass = worst <= 1e-10;
    return "max abs err " + sci(worst);
  }));

  out.push_back(run("parseval", [&](bool& pass) {
    PsdOptions o;
    o.taper_fraction = 0.0;
    const auto x = gaussian(rng, 1000);
    const auto est = psd(TimeSeries(x, 0.5), o);
    const double rel = std::abs(est.integrated() - variance(x)) / variance(x);
    pass = rel <= 1e-6;
    return "rel err " + sci(rel);
  }));

  out.push_back(run("coherence_bounds", [&](bool& pass) {
    std::vector<TimeSeries> ch;
    const auto a = gaussian(rng, 2048);
    const auto b = gaussian(rng, 2048);
    auto c = gaussian(rng, 2048);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += 0.7 * a[i] - 0.4 * b[i];
    ch.emplace_back(a, 1.0, 0.0, "a");
    ch.emplace_back(b, 1.0, 0.0, "b");
    ch.emplace_back(c, 1.0, 0.0, "c");
    ch.emplace_back(a, 1.0, 0.0, "a_copy");
    PsdOptions o;
    o.n_fft = 128;
    o.segments = 16;
    const auto s = spectral_matrix(ch, o);
    double self_err = 0.0;
    bool in_range = true;
    const auto self = ordinary_coherence(s, 0, 3);
    for (const auto& v : self.values)
      if (v) self_err = std::max(self_err, std::abs(*v - 1.0));
    const std::size_t in2[] = {0, 1};
    for (const auto& f : {ordinary_coherence(s, 0, 2), multiple_coherence(s, 2, in2)})
      for (const auto& v : f.values)
        if (v && (*v < 0.0 || *v > 1.0)) in_range = false;
    const std::size_t z[] = {2};
    const auto eq6 = partial_coherence_eq6(s, 0, 1, 2);
    const auto gen = partial_coherence(s, 0, 1, z);
    double agree = 0.0;
    for (std::size_t k = 0; k < eq6.values.size(); ++k)
      if (eq6.values[k] && gen.values[k]) agree = std::max(agree, std::abs(*eq6.values[k] - *gen.values[k]));
    pass = self_err <= 1e-12 && in_range && agree <= 1e-10;
    return "self " + sci(self_err) + ", eq6 vs schur " + sci(agree) + (in_range ? "" : ", out of [0,1]");
  }));

  out.push_back(run("mnk_exact_line", [&](bool& pass) {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
      x.push_back(i * 0.5);
      y.push_back(2.0 + 3.0 * i * 0.5);
    }
    const auto f = fit_mnk(x, y, ModelSpec::polynomial(1));
    const double err = std::max(std::abs(f.parameters[0] - 2.0), std::abs(f.parameters[1] - 3.0));
    pass = err <= 1e-10;
    return "max param err " + sci(err);
  }));

  out.push_back(run("mvvkp_median", [&](bool& pass) {
    const std::vector<double> x{0.0, 1.0, 2.0}, y{1.0, 2.0, 10.0};
    const auto f = fit_mvvkp(x, y, ModelSpec::polynomial(0));
    bool monotone = true;
    for (std::size_t i = 1; i < f.objective_trace.size(); ++i)
      monotone = monotone && f.objective_trace[i] <= f.objective_trace[i - 1] * (1.0 + 1e-12);
    const double err = std::abs(f.parameters[0] - 2.0);
    pass = err <= 1e-6 && f.converged && monotone;
    return "|c - 2| = " + sci(err) + (monotone ? "" : ", objective increased");
  }));

  return out;
}

}  // namespace ulfkit
