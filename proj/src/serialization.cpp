#include "ulfkit/serialization.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "ulfkit/errors.hpp"

namespace ulfkit {
namespace {

json optional_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

json trace_to_json(const std::vector<TraceStep>& trace) {
  json out = json::array();
  for (const auto& s : trace) {
    out.push_back({{"action", s.action == TraceStep::Action::remove ? "remove" : "add"},
                   {"feature", s.feature},
                   {"name", s.name},
                   {"worst_margin", s.worst_margin}});
  }
  return out;
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("json: missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("json: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

const char* version() { return ULFKIT_VERSION; }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string config_hash(const json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_header(std::ostream& out, const OutputHeader& header) {
  out << "# tool: ulfkit " << version() << '\n';
  out << "# command: " << header.command << '\n';
  out << "# config_hash: " << header.config_hash << '\n';
  out << "# seed: " << header.seed << '\n';
}

json to_json(const FrequencyGrid& g) {
  return {{"n_fft", g.n_fft}, {"dt", g.dt}, {"df", g.df}, {"fmax", g.fmax}, {"n_bins", g.n_bins}};
}

json to_json(const PreprocessReport& r) {
  return {{"removed_trend", r.removed_trend},
          {"trend_scaled", r.trend_scaled},
          {"detrend_degree", r.detrend_degree},
          {"original_mean", r.original_mean},
          {"original_std", r.original_std},
          {"taper_fraction", r.taper_fraction},
          {"taper_power_correction", r.taper_power_correction},
          {"steps", r.steps}};
}

json to_json(const DescriptionSet& set) {
  json classes = json::array();
  for (const auto& c : set.classes()) classes.push_back({{"label", c.label}, {"descriptions", c.descriptions}});
  json out = {{"features", set.feature_names()}, {"active", set.active_mask()}, {"classes", classes}};
  if (const auto& s = set.standardization()) {
    out["standardization"] = {{"mean", s->mean}, {"std", s->std}};
  } else {
    out["standardization"] = nullptr;
  }
  return out;
}

DescriptionSet description_set_from_json(const json& j) {
  DescriptionSet set(required<std::vector<std::string>>(j, "features"));
  for (const auto& c : required<json>(j, "classes")) {
    const auto label = required<std::string>(c, "label");
    for (auto& d : required<std::vector<std::vector<double>>>(c, "descriptions")) set.add(label, std::move(d));
  }
  if (j.contains("active")) set.set_active_mask(required<std::vector<bool>>(j, "active"));
  if (j.contains("standardization") && !j.at("standardization").is_null()) {
    const auto& s = j.at("standardization");
    set.set_standardization({required<std::vector<double>>(s, "mean"), required<std::vector<double>>(s, "std")});
  }
  return set;
}

json to_json(const SeparatingModel& m) {
  json log = json::array();
  for (const auto& e : m.log) log.push_back({{"epoch", e.epoch}, {"errors", e.errors}});
  return {{"class_labels", m.class_labels},     {"feature_names", m.feature_names},
          {"feature_indices", m.feature_indices}, {"coefficients", m.coefficients},
          {"converged", m.converged},             {"log", log}};
}

SeparatingModel separating_model_from_json(const json& j) {
  SeparatingModel m;
  m.class_labels = required<std::vector<std::string>>(j, "class_labels");
  m.feature_names = required<std::vector<std::string>>(j, "feature_names");
  m.feature_indices = required<std::vector<std::size_t>>(j, "feature_indices");
  m.coefficients = required<std::vector<std::vector<double>>>(j, "coefficients");
  m.converged = required<bool>(j, "converged");
  if (m.coefficients.size() != m.class_labels.size()) throw FormatError("model json: one coefficient row per class");
  for (const auto& row : m.coefficients) {
    if (row.size() != m.feature_names.size() + 1) throw FormatError("model json: coefficient row has the wrong length");
  }
  return m;
}

json to_json(const MinimizationResult& r) {
  return {{"method", r.method},
          {"mask", r.mask},
          {"trace", trace_to_json(r.trace)},
          {"margins", {{"min", r.margins.min}, {"mean", r.margins.mean}}},
          {"delta", r.delta},
          {"seed", r.seed},
          {"restarts", r.restarts},
          {"non_separable", r.non_separable},
          {"dispersion", r.dispersion},
          {"ranking", r.ranking}};
}

MinimizationResult minimization_from_json(const json& j) {
  MinimizationResult r;
  r.method = required<std::string>(j, "method");
  r.mask = required<std::vector<bool>>(j, "mask");
  for (const auto& s : required<json>(j, "trace")) {
    TraceStep t;
    const auto action = required<std::string>(s, "action");
    if (action != "remove" && action != "add") throw FormatError("trace json: unknown action '" + action + "'");
    t.action = action == "remove" ? TraceStep::Action::remove : TraceStep::Action::add;
    t.feature = required<std::size_t>(s, "feature");
    t.name = required<std::string>(s, "name");
    t.worst_margin = s.at("worst_margin").is_null() ? std::nan("") : required<double>(s, "worst_margin");
    r.trace.push_back(t);
  }
  r.delta = required<double>(j, "delta");
  r.seed = required<std::uint64_t>(j, "seed");
  r.restarts = required<std::size_t>(j, "restarts");
  r.non_separable = required<bool>(j, "non_separable");
  if (j.contains("dispersion")) r.dispersion = required<std::vector<double>>(j, "dispersion");
  if (j.contains("ranking")) r.ranking = required<std::vector<std::size_t>>(j, "ranking");
  return r;
}

json to_json(const Whiteness& w) { return {{"score", w.score}, {"threshold", w.threshold}, {"white", w.white}}; }

json to_json(const FitResult& f) {
  return {{"model", f.model.name()},
          {"method", to_string(f.method)},
          {"parameters", f.parameters},
          {"breakpoints", f.breakpoints},
          {"objective", f.objective},
          {"objective_trace", f.objective_trace},
          {"iterations", f.iterations},
          {"converged", f.converged}};
}

json to_json(const ModelComparison& c) {
  json out = json::array();
  for (const auto& s : c.ranked) {
    json e = {{"candidate", s.candidate}, {"model", s.model}, {"ok", s.ok}};
    if (s.ok) {
      e["objective"] = s.objective;
      e["dof"] = s.dof;
      e["penalized"] = s.penalized;
      e["residual_skewness"] = s.residual_skewness;
      e["residual_kurtosis"] = s.residual_kurtosis;
      e["whiteness"] = s.whiteness ? to_json(*s.whiteness) : json(nullptr);
      if (s.fit) e["fit"] = to_json(*s.fit);
    } else {
      e["error"] = s.error;
    }
    out.push_back(std::move(e));
  }
  return out;
}

json to_json(const HarmonicTable& t) {
  json lines = json::array();
  for (const auto& h : t.lines) {
    lines.push_back({{"bin", h.bin},
                     {"frequency_hz", h.frequency},
                     {"half_width_hz", h.half_width},
                     {"period_s", h.period.seconds},
                     {"period", h.period.human()},
                     {"amplitude", h.amplitude},
                     {"z_score", h.z_score}});
  }
  return {{"grid", to_json(t.grid)}, {"threshold", t.threshold}, {"lines", lines}};
}

json to_json(const SeriesVerdict& v, const HarmonicTable& t) {
  json members = json::array();
  for (const auto& m : v.members) {
    members.push_back({{"line", m.line},
                       {"frequency_hz", t.lines.at(m.line).frequency},
                       {"series", to_string(m.series)},
                       {"multiple", m.multiple},
                       {"deviation_bins", m.deviation}});
  }
  return {{"f1_hz", v.f1},
          {"f1_period", period_of(v.f1).human()},
          {"f2_hz", optional_double(v.f2)},
          {"f2_period", v.f2 ? json(period_of(*v.f2).human()) : json(nullptr)},
          {"ratio", optional_double(v.ratio)},
          {"deviation_bins", v.f2 ? json(v.deviation_bins) : json(nullptr)},
          {"tolerance_bins", v.tolerance_bins},
          {"df_hz", v.df},
          {"splitting_reported", v.splitting_reported},
          {"counts",
           {{"f1", v.count(HarmonicSeries::f1)},
            {"f2", v.count(HarmonicSeries::f2)},
            {"splitting", v.count(HarmonicSeries::splitting)},
            {"unassigned", v.count(HarmonicSeries::unassigned)}}},
          {"members", members}};
}

json to_json(const NearMonthlyVerdict& v) {
  json lines = json::array();
  for (const auto& l : v.lines) {
    lines.push_back({{"frequency_hz", l.line.frequency},
                     {"period", l.line.period.human()},
                     {"lunar_separation_bins", l.lunar_separation_bins},
                     {"lunar_compatible", l.lunar_compatible}});
  }
  return {{"f_lo_hz", v.f_lo},         {"f_hi_hz", v.f_hi},       {"first_bin", v.first_bin},
          {"last_bin", v.last_bin},    {"threshold", v.threshold}, {"detected", v.detected},
          {"lines", lines}};
}

json to_json(const NullThreshold& n, bool include_statistics) {
  json out = {{"threshold", n.threshold}, {"alpha", n.alpha}, {"n_shuffles", n.n_shuffles}, {"seed", n.seed}};
  if (include_statistics) out["max_statistics"] = n.max_statistics;
  return out;
}

void write_spectrum_csv(std::ostream& out, const SpectralEstimate& e) {
  const bool cep = e.kind == SpectrumKind::cepstrum;
  if (cep) {
    out << "quefrency_s,value\n";
  } else if (e.kind == SpectrumKind::cross_spectrum) {
    out << "frequency_hz,period_s,magnitude,co,quad\n";
  } else {
    out << "frequency_hz,period_s,psd\n";
  }
  const auto co = e.kind == SpectrumKind::cross_spectrum ? e.co() : std::vector<double>{};
  const auto quad = e.kind == SpectrumKind::cross_spectrum ? e.quad() : std::vector<double>{};
  for (std::size_t k = 0; k < e.size(); ++k) {
    out << format_double(e.axis[k]);
    if (!cep) out << ',' << (e.axis[k] > 0.0 ? format_double(1.0 / e.axis[k]) : std::string());
    out << ',' << format_double(e.values[k]);
    if (!co.empty()) out << ',' << format_double(co[k]) << ',' << format_double(quad[k]);
    out << '\n';
  }
}

void write_coherence_csv(std::ostream& out, const std::vector<CoherenceFunction>& fns) {
  if (fns.empty()) return;
  out << "frequency_hz,period_s";
  for (const auto& f : fns) out << ',' << f.description << ',' << f.description << "_defined";
  out << '\n';
  const auto& axis = fns.front().axis;
  for (std::size_t k = 0; k < axis.size(); ++k) {
    out << format_double(axis[k]) << ',' << (axis[k] > 0.0 ? format_double(1.0 / axis[k]) : std::string());
    for (const auto& f : fns) {
      out << ',' << (f.values[k] ? csv_number(*f.values[k]) : std::string()) << ',' << (f.values[k] ? 1 : 0);
    }
    out << '\n';
  }
}

void write_spectral_matrix_csv(std::ostream& out, const SpectralMatrix& s) {
  out << "frequency_hz,i,j,re,im\n";
  for (std::size_t k = 0; k < s.bin_count(); ++k) {
    const std::string f = format_double(s.grid().frequency(k));
    for (std::size_t i = 0; i < s.channels(); ++i)
      for (std::size_t j = 0; j < s.channels(); ++j) {
        const cplx v = s(k, i, j);
        out << f << ',' << s.labels()[i] << ',' << s.labels()[j] << ',' << format_double(v.real()) << ','
            << format_double(v.imag()) << '\n';
      }
  }
}

void write_harmonics_csv(std::ostream& out, const HarmonicTable& t, const SeriesVerdict* v) {
  out << "bin,frequency_hz,half_width_hz,period_s,period,amplitude,z_score";
  if (v) out << ",series,multiple,deviation_bins";
  out << '\n';
  for (std::size_t i = 0; i < t.lines.size(); ++i) {
    const auto& h = t.lines[i];
    out << h.bin << ',' << format_double(h.frequency) << ',' << format_double(h.half_width) << ','
        << format_double(h.period.seconds) << ',' << h.period.human() << ',' << format_double(h.amplitude) << ','
        << format_double(h.z_score);
    if (v) {
      const auto& m = v->members[i];
      out << ',' << to_string(m.series) << ',' << m.multiple << ',' << format_double(m.deviation);
    }
    out << '\n';
  }
}

void write_fit_csv(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y,
                   const FitResult& f) {
  out << "x,y,fitted,residual\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << format_double(x[i]) << ',' << format_double(y[i]) << ',' << format_double(f.fitted[i]) << ','
        << format_double(f.residuals[i]) << '\n';
  }
}

}  // namespace ulfkit
