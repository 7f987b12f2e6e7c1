#include "pipeline_config.hpp"

#include <fstream>
#include <sstream>

namespace ulfkit::cli {
namespace {

// Typed view of one json object. Every accessed key is recorded; finish()
// rejects whatever was not.
class Section {
 public:
  Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_null() && !j_->is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return present() && j_->contains(key) && !j_->at(key).is_null();
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return v.get<double>();
  }

  std::optional<double> opt_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    return v.get<long long>();
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 0) {
    const auto v = integer(key, static_cast<long long>(fallback));
    if (v < static_cast<long long>(min)) throw ConfigError(where(key) + " must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }

  std::optional<std::size_t> opt_count(const std::string& key, std::size_t min = 0) {
    if (!has(key)) return std::nullopt;
    return count(key, 0, min);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return v.get<std::string>();
  }

  std::vector<std::string> strings(const std::string& key) {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const auto& v = j_->at(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of strings");
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(where(key) + " must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  const json* array(const std::string& key) {
    if (!has(key)) return nullptr;
    const auto& v = j_->at(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array");
    return &v;
  }

  Section child(const std::string& key) { return Section(has(key) ? &j_->at(key) : nullptr, where(key)); }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    if (!present()) return;
    for (const auto& [k, v] : j_->items()) {
      if (!used_.count(k)) throw ConfigError("unknown key '" + where(k) + "'");
    }
  }

 private:
  bool present() const { return j_ && j_->is_object(); }

  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void check_fraction(double v, double lo, double hi, bool hi_open, const std::string& what) {
  if (!(v >= lo && (hi_open ? v < hi : v <= hi))) {
    throw ConfigError(what + " must be in [" + format_double(lo) + ", " + format_double(hi) + (hi_open ? ")" : "]"));
  }
}

InputSpec parse_input(Section s, const std::filesystem::path& base) {
  InputSpec in;
  const auto path = s.string("path", "");
  if (path.empty()) throw ConfigError(s.where("path") + " is required");
  in.path = resolve(base, path);
  const auto format = s.string("format", "series");
  if (format == "series") {
    in.format = InputFormat::series;
  } else if (format == "events") {
    in.format = InputFormat::events;
  } else {
    throw ConfigError(s.where("format") + " must be 'series' or 'events'");
  }
  in.channels = s.strings("channels");
  in.bin_width = s.number("bin_width", 3600.0);
  if (!(in.bin_width > 0.0)) throw ConfigError(s.where("bin_width") + " must be > 0");
  try {
    in.mode = parse_event_mode(s.string("mode", "binary"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(s.where("mode") + ": " + e.what());
  }
  in.t_start = s.opt_number("t_start");
  in.n_bins = s.opt_count("n_bins", 1);
  s.finish();
  return in;
}

std::vector<Band> parse_bands(Section& s, const std::string& key) {
  std::vector<Band> out;
  if (const auto* arr = s.array(key)) {
    for (const auto& b : *arr) {
      if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
        throw ConfigError(s.where(key) + " entries must be [f_lo, f_hi] pairs");
      }
      Band band{b[0].get<double>(), b[1].get<double>()};
      if (!(band.f_lo >= 0.0 && band.f_hi > band.f_lo)) {
        throw ConfigError(s.where(key) + " needs 0 <= f_lo < f_hi");
      }
      out.push_back(band);
    }
  }
  return out;
}

std::vector<PairSpec> parse_pairs(Section& s, const std::string& key, bool conditioned) {
  std::vector<PairSpec> out;
  const auto* arr = s.array(key);
  if (!arr) return out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    Section e(&(*arr)[i], s.where(key) + "[" + std::to_string(i) + "]");
    const auto pair = e.strings("pair");
    if (pair.size() != 2) throw ConfigError(e.where("pair") + " must name two channels");
    PairSpec p{pair[0], pair[1], {}};
    if (conditioned) {
      p.given = e.strings("given");
      if (p.given.empty()) throw ConfigError(e.where("given") + " must name at least one channel");
    }
    e.finish();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

ModelSpec parse_model(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  int order = 1;
  if (colon != std::string::npos) {
    const std::string rest = text.substr(colon + 1);
    std::size_t used = 0;
    try {
      order = std::stoi(rest, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (rest.empty() || used != rest.size()) throw ConfigError("model '" + text + "': bad order");
  }
  try {
    if (kind == "polynomial") return ModelSpec::polynomial(order);
    if (kind == "exp_poly") return ModelSpec::exp_poly(order);
    if (kind == "sum_of_exponentials") return ModelSpec::sum_of_exponentials(order);
  } catch (const InvalidArgument& e) {
    throw ConfigError("model '" + text + "': " + e.what());
  }
  throw ConfigError("unknown model '" + kind + "' (expected polynomial, exp_poly or sum_of_exponentials)");
}

PipelineConfig parse_config(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw ConfigError("config must be a json object");
  PipelineConfig c;
  c.raw = j;
  Section top(&j, "");

  {
    auto s = top.child("input");
    if (top.has("input")) c.input = parse_input(std::move(s), base);
  }

  {
    auto s = top.child("preprocess");
    const auto degree = s.integer("detrend_degree", -1);
    if (degree < -1 || degree > 5) throw ConfigError(s.where("detrend_degree") + " must be in -1..5");
    c.preprocess.condition.detrend_degree = static_cast<int>(degree);
    c.preprocess.condition.normalize = s.boolean("normalize", false);
    c.preprocess.condition.taper_fraction = s.number("taper_fraction", 0.0);
    check_fraction(c.preprocess.condition.taper_fraction, 0.0, 1.0, false, s.where("taper_fraction"));
    c.preprocess.stationarity_segments = s.count("stationarity_segments", 0);
    if (c.preprocess.stationarity_segments != 0 && c.preprocess.stationarity_segments < 8) {
      throw ConfigError(s.where("stationarity_segments") + " must be 0 or >= 8");
    }
    c.preprocess.alpha = s.number("alpha", 0.05);
    check_fraction(c.preprocess.alpha, 0.0, 1.0, false, s.where("alpha"));
    s.finish();
  }

  {
    auto s = top.child("spectral");
    auto& p = c.spectral.psd;
    p.n_fft = s.count("n_fft", 0);
    if (p.n_fft != 0 && (!is_power_of_two(p.n_fft) || p.n_fft < 4)) {
      throw ConfigError(s.where("n_fft") + " must be 0 or a power of two >= 4");
    }
    p.segments = s.count("segments", 1, 1);
    p.overlap = s.number("overlap", 0.0);
    check_fraction(p.overlap, 0.0, 1.0, true, s.where("overlap"));
    p.taper_fraction = s.number("taper_fraction", 0.1);
    check_fraction(p.taper_fraction, 0.0, 1.0, false, s.where("taper_fraction"));
    const auto degree = s.integer("detrend_degree", 0);
    if (degree < -1 || degree > 5) throw ConfigError(s.where("detrend_degree") + " must be in -1..5");
    p.detrend_degree = static_cast<int>(degree);
    p.normalize = s.boolean("normalize", false);
    c.spectral.smoothing_span = s.count("smoothing_span", 1, 1);
    if (c.spectral.smoothing_span % 2 == 0) throw ConfigError(s.where("smoothing_span") + " must be odd");
    c.spectral.cepstrum = s.boolean("cepstrum", false);
    s.finish();
  }

  {
    auto s = top.child("coherence");
    c.coherence.ordinary = parse_pairs(s, "ordinary", false);
    c.coherence.partial = parse_pairs(s, "partial", true);
    c.coherence.gain_phase = parse_pairs(s, "gain_phase", false);
    if (const auto* arr = s.array("multiple")) {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        Section e(&(*arr)[i], s.where("multiple") + "[" + std::to_string(i) + "]");
        MultipleSpec m;
        m.output = e.string("output", "");
        m.inputs = e.strings("inputs");
        if (m.output.empty() || m.inputs.empty()) throw ConfigError(e.where() + " needs output and inputs");
        e.finish();
        c.coherence.multiple.push_back(std::move(m));
      }
    }
    c.coherence.bands = parse_bands(s, "bands");
    s.finish();
  }

  {
    auto s = top.child("features");
    if (const auto* arr = s.array("inputs")) {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        Section e(&(*arr)[i], s.where("inputs") + "[" + std::to_string(i) + "]");
        LabelledInput li;
        li.label = e.string("class", "");
        if (li.label.empty()) throw ConfigError(e.where("class") + " is required");
        li.input = parse_input(e.child("input"), base);
        e.finish();
        c.features.inputs.push_back(std::move(li));
      }
    }
    c.features.statistical = s.boolean("statistical", true);
    c.features.bands = parse_bands(s, "bands");
    s.finish();
  }

  {
    auto s = top.child("minimize");
    if (s.has("descriptions")) c.minimize.descriptions = resolve(base, s.string("descriptions", ""));
    c.minimize.method = s.string("method", "resolution");
    if (c.minimize.method != "resolution" && c.minimize.method != "dispersion") {
      throw ConfigError(s.where("method") + " must be 'resolution' or 'dispersion'");
    }
    c.minimize.delta = s.opt_number("delta");
    if (c.minimize.delta && !(*c.minimize.delta >= 0.0)) throw ConfigError(s.where("delta") + " must be >= 0");
    c.minimize.max_restarts = s.count("max_restarts", 10);
    c.minimize.keep = s.opt_count("keep", 1);
    c.minimize.min_dispersion = s.opt_number("min_dispersion");
    c.minimize.max_epochs = s.count("max_epochs", 100, 1);
    c.minimize.standardize = s.boolean("standardize", true);
    if (c.minimize.method == "dispersion" && c.minimize.keep.has_value() == c.minimize.min_dispersion.has_value()) {
      throw ConfigError(s.where() + ": dispersion method needs exactly one of keep or min_dispersion");
    }
    s.finish();
  }

  {
    auto s = top.child("classify");
    if (s.has("training")) c.classify.training = resolve(base, s.string("training", ""));
    if (s.has("model")) c.classify.model = resolve(base, s.string("model", ""));
    if (s.has("inputs")) c.classify.inputs = resolve(base, s.string("inputs", ""));
    c.classify.max_epochs = s.count("max_epochs", 100, 1);
    s.finish();
  }

  {
    auto s = top.child("fit");
    c.fit.column = s.string("column", "");
    if (s.has("models")) c.fit.models = s.strings("models");
    if (c.fit.models.empty()) throw ConfigError(s.where("models") + " must not be empty");
    for (const auto& m : c.fit.models) c.fit.specs.push_back(parse_model(m));
    c.fit.method = s.string("method", "mnk");
    if (c.fit.method != "mnk" && c.fit.method != "mvvkp") {
      throw ConfigError(s.where("method") + " must be 'mnk' or 'mvvkp'");
    }
    c.fit.epsilon_floor = s.opt_number("epsilon_floor");
    if (c.fit.epsilon_floor && !(*c.fit.epsilon_floor > 0.0)) {
      throw ConfigError(s.where("epsilon_floor") + " must be > 0");
    }
    c.fit.max_iter = s.count("max_iter", 200, 1);
    s.finish();
  }

  {
    auto s = top.child("harmonics");
    auto& h = c.harmonics;
    h.psd.n_fft = s.count("n_fft", 0);
    if (h.psd.n_fft != 0 && !is_power_of_two(h.psd.n_fft)) {
      throw ConfigError(s.where("n_fft") + " must be 0 or a power of two");
    }
    h.psd.taper_fraction = s.number("taper_fraction", 0.0);
    check_fraction(h.psd.taper_fraction, 0.0, 1.0, false, s.where("taper_fraction"));
    h.alpha = s.number("alpha", 0.05);
    check_fraction(h.alpha, 0.0, 1.0, false, s.where("alpha"));
    h.n_shuffles = s.count("n_shuffles", 99, 99);
    h.series.tolerance_bins = s.number("tolerance_bins", 2.0);
    if (!(h.series.tolerance_bins > 0.0)) throw ConfigError(s.where("tolerance_bins") + " must be > 0");
    h.series.f1_min_days = s.number("f1_min_days", 5.0);
    h.series.f1_max_days = s.number("f1_max_days", 10.0);
    if (!(h.series.f1_min_days > 0.0 && h.series.f1_max_days > h.series.f1_min_days)) {
      throw ConfigError(s.where() + ": need 0 < f1_min_days < f1_max_days");
    }
    h.near_monthly = s.boolean("near_monthly", false);
    h.monthly.min_period_days = s.number("monthly_min_days", 29.5);
    h.monthly.max_period_days = s.number("monthly_max_days", 30.5);
    s.finish();
  }

  if (top.has("out")) c.out = resolve(base, top.string("out", ""));
  const auto seed = top.integer("seed", 0);
  if (seed < 0) throw ConfigError("seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  top.finish();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid json: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

}  // namespace ulfkit::cli
