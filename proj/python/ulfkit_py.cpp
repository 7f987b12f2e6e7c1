#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>

#include "ulfkit/coherence.hpp"
#include "ulfkit/errors.hpp"
#include "ulfkit/event_analysis.hpp"
#include "ulfkit/features.hpp"
#include "ulfkit/fitting.hpp"
#include "ulfkit/selftest.hpp"
#include "ulfkit/serialization.hpp"
#include "ulfkit/spectral.hpp"

namespace py = pybind11;
using namespace ulfkit;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw InvalidArgument("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

PsdOptions psd_options(std::size_t n_fft, std::size_t segments, double overlap, double taper_fraction,
                       int detrend_degree) {
  PsdOptions o;
  o.n_fft = n_fft;
  o.segments = segments;
  o.overlap = overlap;
  o.taper_fraction = taper_fraction;
  o.detrend_degree = detrend_degree;
  return o;
}

std::vector<TimeSeries> channels_of(const std::vector<Array>& arrays, double dt) {
  std::vector<TimeSeries> out;
  for (std::size_t i = 0; i < arrays.size(); ++i) out.emplace_back(to_vector(arrays[i]), dt, 0.0, "ch" + std::to_string(i));
  return out;
}

// Undefined bins become NaN.
py::tuple coherence_arrays(const CoherenceFunction& c) {
  std::vector<double> v(c.values.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = c.values[k] ? *c.values[k] : std::numeric_limits<double>::quiet_NaN();
  return py::make_tuple(to_array(c.axis), to_array(v));
}

py::dict grid_dict(const FrequencyGrid& g) {
  py::dict d;
  d["df"] = g.df;
  d["fmax"] = g.fmax;
  d["n_bins"] = g.n_bins;
  d["n_fft"] = g.n_fft;
  d["dt"] = g.dt;
  return d;
}

ModelSpec model_of(const std::string& kind, int order) {
  if (kind == "polynomial") return ModelSpec::polynomial(order);
  if (kind == "exp_poly") return ModelSpec::exp_poly(order);
  if (kind == "sum_of_exponentials") return ModelSpec::sum_of_exponentials(order);
  throw InvalidArgument("unknown model '" + kind + "' (expected polynomial, exp_poly or sum_of_exponentials)");
}

}  // namespace

PYBIND11_MODULE(_ulfkit, m) {
  m.doc() = "Ultra-low-frequency spectral analysis, coherence, recognition and fitting";

  py::register_exception<DegenerateInput>(m, "DegenerateInput", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_RuntimeError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<SingularMatrix>(m, "SingularMatrix", numerical.ptr());

  m.def("version", &version);

  m.def("frequency_grid", [](std::size_t n_fft, double dt) { return grid_dict(frequency_grid(n_fft, dt)); },
        py::arg("n_fft"), py::arg("dt"));
  m.def("period_of", [](double f) { return period_of(f).seconds; }, py::arg("frequency"));
  m.def("format_period", &format_period, py::arg("seconds"));

  m.def(
      "psd",
      [](const Array& values, double dt, std::size_t n_fft, std::size_t segments, double overlap,
         double taper_fraction, int detrend_degree) {
        const auto e = psd(TimeSeries(to_vector(values), dt),
                           psd_options(n_fft, segments, overlap, taper_fraction, detrend_degree));
        return py::make_tuple(to_array(e.axis), to_array(e.values));
      },
      py::arg("values"), py::arg("dt"), py::arg("n_fft") = 0, py::arg("segments") = 1, py::arg("overlap") = 0.0,
      py::arg("taper_fraction") = 0.1, py::arg("detrend_degree") = 0,
      "One-sided PSD; returns (frequency, density).");

  m.def(
      "ordinary_coherence",
      [](const Array& x, const Array& y, double dt, std::size_t segments, double taper_fraction) {
        const auto s = spectral_matrix(channels_of({x, y}, dt), psd_options(0, segments, 0.0, taper_fraction, 0));
        return coherence_arrays(ordinary_coherence(s, 0, 1));
      },
      py::arg("x"), py::arg("y"), py::arg("dt"), py::arg("segments"), py::arg("taper_fraction") = 0.0,
      "Returns (frequency, gamma2); undefined bins are NaN.");

  m.def(
      "partial_coherence",
      [](const Array& x, const Array& y, const std::vector<Array>& given, double dt, std::size_t segments,
         double taper_fraction) {
        std::vector<Array> all{x, y};
        all.insert(all.end(), given.begin(), given.end());
        const auto s = spectral_matrix(channels_of(all, dt), psd_options(0, segments, 0.0, taper_fraction, 0));
        std::vector<std::size_t> z;
        for (std::size_t i = 2; i < all.size(); ++i) z.push_back(i);
        return coherence_arrays(partial_coherence(s, 0, 1, z));
      },
      py::arg("x"), py::arg("y"), py::arg("given"), py::arg("dt"), py::arg("segments"),
      py::arg("taper_fraction") = 0.0);

  m.def(
      "multiple_coherence",
      [](const Array& output, const std::vector<Array>& inputs, double dt, std::size_t segments,
         double taper_fraction) {
        std::vector<Array> all{output};
        all.insert(all.end(), inputs.begin(), inputs.end());
        const auto s = spectral_matrix(channels_of(all, dt), psd_options(0, segments, 0.0, taper_fraction, 0));
        std::vector<std::size_t> in;
        for (std::size_t i = 1; i < all.size(); ++i) in.push_back(i);
        return coherence_arrays(multiple_coherence(s, 0, in));
      },
      py::arg("output"), py::arg("inputs"), py::arg("dt"), py::arg("segments"), py::arg("taper_fraction") = 0.0);

  m.def(
      "statistical_features",
      [](const Array& values, double dt) {
        const auto fv = extract_statistical(TimeSeries(to_vector(values), dt));
        py::dict d;
        for (std::size_t i = 0; i < fv.names.size(); ++i) d[py::str(fv.names[i])] = fv.values[i];
        return d;
      },
      py::arg("values"), py::arg("dt"));

  m.def(
      "fit",
      [](const Array& x, const Array& y, const std::string& model, int order, const std::string& method) {
        const auto xv = to_vector(x), yv = to_vector(y);
        const auto f = fit(xv, yv, model_of(model, order), parse_fit_method(method));
        py::dict d;
        d["model"] = f.model.name();
        d["parameters"] = to_array(f.parameters);
        d["breakpoints"] = to_array(f.breakpoints);
        d["fitted"] = to_array(f.fitted);
        d["residuals"] = to_array(f.residuals);
        d["objective"] = f.objective;
        d["objective_trace"] = to_array(f.objective_trace);
        d["iterations"] = f.iterations;
        d["converged"] = f.converged;
        return d;
      },
      py::arg("x"), py::arg("y"), py::arg("model") = "polynomial", py::arg("order") = 1, py::arg("method") = "mnk");

  m.def(
      "bin_events",
      [](const Array& timestamps, double bin_width, const std::string& mode, double t_start, double t_end) {
        const auto ev = bin_events(to_vector(timestamps), bin_width, parse_event_mode(mode), t_start, t_end);
        return to_array(ev.realization.data());
      },
      py::arg("timestamps"), py::arg("bin_width"), py::arg("mode"), py::arg("t_start"), py::arg("t_end"));

  m.def(
      "harmonics",
      [](const Array& realization, double dt, double alpha, std::size_t n_shuffles, std::uint64_t seed) {
        const TimeSeries r(to_vector(realization), dt);
        const auto est = event_psd(r);
        const auto null = flat_null_threshold(r, {}, alpha, n_shuffles, seed);
        const double thr = null.threshold > 0.0 ? null.threshold : std::numeric_limits<double>::min();
        const auto table = detect_harmonics(est, thr);
        py::list lines;
        for (const auto& h : table.lines) {
          py::dict d;
          d["bin"] = h.bin;
          d["frequency"] = h.frequency;
          d["period_s"] = h.period.seconds;
          d["period"] = h.period.human();
          d["amplitude"] = h.amplitude;
          d["z_score"] = h.z_score;
          lines.append(d);
        }
        py::dict out;
        out["grid"] = grid_dict(est.grid);
        out["threshold"] = null.threshold;
        out["frequency"] = to_array(est.axis);
        out["psd"] = to_array(est.values);
        out["lines"] = lines;
        return out;
      },
      py::arg("realization"), py::arg("dt"), py::arg("alpha") = 0.05, py::arg("n_shuffles") = 99,
      py::arg("seed") = 0);

  m.def(
      "selftest",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& c : run_selftest(seed)) out.append(py::make_tuple(c.name, c.pass, c.detail));
        return out;
      },
      py::arg("seed") = 1);
}
