#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "ulfkit/coherence.hpp"
#include "ulfkit/event_analysis.hpp"
#include "ulfkit/fitting.hpp"
#include "ulfkit/io.hpp"
#include "ulfkit/recognition.hpp"
#include "ulfkit/stats.hpp"

namespace ulfkit::cli {
namespace {

void log(const RunContext& ctx, const std::string& msg) {
  if (ctx.verbose) std::cerr << "[" << ctx.command << "] " << msg << '\n';
}

OutputHeader header(const RunContext& ctx) { return {ctx.command, config_hash(ctx.config.raw), ctx.seed}; }

std::string file_stem(const std::string& label) {
  std::string out;
  for (char c : label) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return out.empty() ? "channel" : out;
}

template <typename Writer>
void add_csv(const RunContext& ctx, Outputs& out, const std::string& name, Writer&& write) {
  std::ostringstream s;
  write_header(s, header(ctx));
  write(s);
  out.files.emplace_back(name, s.str());
}

json report_base(const RunContext& ctx) {
  return {{"tool", "ulfkit"},
          {"version", version()},
          {"command", ctx.command},
          {"config_hash", config_hash(ctx.config.raw)},
          {"seed", ctx.seed},
          {"config", ctx.config.raw}};
}

void add_json(Outputs& out, const std::string& name, const json& j) { out.files.emplace_back(name, j.dump(2) + "\n"); }

json header_json(const RunContext& ctx) {
  return {{"tool", "ulfkit"}, {"version", version()}, {"command", ctx.command},
          {"config_hash", config_hash(ctx.config.raw)}, {"seed", ctx.seed}};
}

json check(const std::string& name, bool pass, const std::string& detail) {
  return {{"name", name}, {"pass", pass}, {"detail", detail}};
}

const InputSpec& require_input(const RunContext& ctx) {
  if (!ctx.config.input) throw ConfigError(ctx.command + ": config needs an 'input' section");
  return *ctx.config.input;
}

TimeSeries event_realization(const InputSpec& in) {
  const auto ts = load_events(in.path.string());
  if (ts.empty()) throw DegenerateInput("'" + in.path.string() + "' holds no events");
  const auto [lo, hi] = std::minmax_element(ts.begin(), ts.end());
  const double t0 = in.t_start ? *in.t_start : *lo;
  const std::size_t n = in.n_bins ? *in.n_bins : static_cast<std::size_t>(std::floor((*hi - t0) / in.bin_width)) + 1;
  auto ev = bin_events(ts, in.bin_width, in.mode, t0, t0 + static_cast<double>(n) * in.bin_width);
  return ev.realization.with_values(ev.realization.data());
}

std::vector<TimeSeries> load_channels(const InputSpec& in) {
  if (in.format == InputFormat::events) {
    auto r = event_realization(in);
    return {TimeSeries(r.data(), r.dt(), r.t0(), in.path.stem().string())};
  }
  auto all = load_series(in.path.string());
  if (in.channels.empty()) return all;
  std::vector<TimeSeries> out;
  for (const auto& name : in.channels) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const TimeSeries& s) { return s.label() == name; });
    if (it == all.end()) throw InvalidArgument("'" + in.path.string() + "' has no channel '" + name + "'");
    out.push_back(*it);
  }
  return out;
}

std::size_t channel_index(const std::vector<std::string>& labels, const std::string& name) {
  const auto it = std::find(labels.begin(), labels.end(), name);
  if (it == labels.end()) throw InvalidArgument("coherence: unknown channel '" + name + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

DescriptionSet load_descriptions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    json j;
    try {
      j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw FormatError("'" + path.string() + "': " + e.what());
    }
    if (j.contains("descriptions")) j = j.at("descriptions");
    return description_set_from_json(j);
  }
  return DescriptionSet::from_csv(buf.str());
}

json describe_psd(const SpectralEstimate& e) {
  std::size_t best = 1;
  for (std::size_t k = 1; k < e.values.size(); ++k)
    if (e.values[k] > e.values[best]) best = k;
  json j = {{"label", e.label},
            {"grid", to_json(e.grid)},
            {"n_averages", e.n_averages},
            {"segment_length", e.segment_length},
            {"window_correction", e.window_correction},
            {"integrated_power", e.integrated()}};
  if (best < e.values.size()) {
    const double f = e.axis[best];
    j["max_bin"] = {{"bin", best}, {"frequency_hz", f}, {"period_s", 1.0 / f}, {"period", format_period(1.0 / f)}};
  }
  return j;
}

}  // namespace

Outputs cmd_psd(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto channels = load_channels(require_input(ctx));
  Outputs out;
  auto report = report_base(ctx);
  json results = json::array();
  json checks = json::array();
  for (const auto& raw : channels) {
    log(ctx, "channel " + raw.label() + ": " + std::to_string(raw.size()) + " samples");
    const auto cond = condition(raw, cfg.preprocess.condition);
    const auto est = psd(cond.series, cfg.spectral.psd);
    const auto shown = cfg.spectral.smoothing_span > 1 ? smooth_frequency(est, cfg.spectral.smoothing_span) : est;
    const std::string stem = file_stem(raw.label());
    add_csv(ctx, out, "psd_" + stem + ".csv", [&](std::ostream& s) { write_spectrum_csv(s, shown); });

    json r = describe_psd(est);
    r["preprocess"] = to_json(cond.report);
    r["smoothing_span"] = cfg.spectral.smoothing_span;
    const double var = variance(cond.series.values());
    r["variance"] = var;
    // Exact only for one untapered segment; otherwise a diagnostic.
    const bool exact = cfg.spectral.psd.segments == 1 && cfg.spectral.psd.taper_fraction == 0.0 &&
                       cfg.spectral.psd.detrend_degree >= 0 && !cfg.spectral.psd.normalize;
    if (exact && var > 0.0) {
      const double rel = std::abs(est.integrated() - var) / var;
      checks.push_back(check("parseval_" + stem, rel <= 1e-6, "rel err " + format_double(rel)));
    }
    if (cfg.preprocess.stationarity_segments > 0) {
      json st = json::object();
      for (auto q : {StationarityQuantity::mean, StationarityQuantity::variance}) {
        const auto v = stationarity_test(raw, cfg.preprocess.stationarity_segments, q, cfg.preprocess.alpha);
        st[q == StationarityQuantity::mean ? "mean" : "variance"] = {
            {"statistic", v.statistic}, {"reverse_arrangements", v.reverse_arrangements},
            {"p_value", v.p_value},     {"n_segments", v.n_segments},
            {"alpha", v.alpha},         {"pass", v.pass}};
      }
      r["stationarity"] = st;
    }
    if (cfg.spectral.cepstrum) {
      const std::size_t n_fft = cfg.spectral.psd.n_fft ? cfg.spectral.psd.n_fft : next_power_of_two(raw.size());
      const auto cep = cepstrum(cond.series, n_fft, cfg.spectral.psd.taper_fraction);
      add_csv(ctx, out, "cepstrum_" + stem + ".csv", [&](std::ostream& s) { write_spectrum_csv(s, cep); });
    }
    results.push_back(std::move(r));
  }
  report["results"] = results;
  report["checks"] = checks;
  add_json(out, "psd_report.json", report);
  return out;
}

Outputs cmd_coherence(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto raw = load_channels(require_input(ctx));
  std::vector<TimeSeries> channels;
  for (const auto& c : raw) channels.push_back(condition(c, cfg.preprocess.condition).series);
  if (channels.size() < 2) throw InvalidArgument("coherence: need at least 2 channels");
  const auto s = spectral_matrix(channels, cfg.spectral.psd);
  const auto& labels = s.labels();
  log(ctx, std::to_string(labels.size()) + " channels, " + std::to_string(s.n_averages()) + " averages");

  std::vector<CoherenceFunction> fns;
  auto cc = cfg.coherence;
  if (cc.ordinary.empty() && cc.partial.empty() && cc.multiple.empty() && cc.gain_phase.empty()) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      for (std::size_t j = i + 1; j < labels.size(); ++j) cc.ordinary.push_back({labels[i], labels[j], {}});
  }
  for (const auto& p : cc.ordinary) {
    auto f = ordinary_coherence(s, channel_index(labels, p.a), channel_index(labels, p.b));
    f.description = "gamma2_" + p.a + "_" + p.b;
    fns.push_back(std::move(f));
  }
  for (const auto& p : cc.partial) {
    std::vector<std::size_t> z;
    std::string tag;
    for (const auto& g : p.given) {
      z.push_back(channel_index(labels, g));
      tag += "_" + g;
    }
    auto f = partial_coherence(s, channel_index(labels, p.a), channel_index(labels, p.b), z);
    f.description = "partial_" + p.a + "_" + p.b + "_given" + tag;
    fns.push_back(std::move(f));
  }
  for (const auto& m : cc.multiple) {
    std::vector<std::size_t> in;
    std::string tag;
    for (const auto& g : m.inputs) {
      in.push_back(channel_index(labels, g));
      tag += "_" + g;
    }
    auto f = multiple_coherence(s, channel_index(labels, m.output), in);
    f.description = "multiple_" + m.output + "_from" + tag;
    fns.push_back(std::move(f));
  }

  Outputs out;
  auto report = report_base(ctx);
  json results = json::array();
  json checks = json::array();
  for (const auto& f : fns) {
    double lo = 1.0, hi = 0.0;
    for (const auto& v : f.values) {
      if (!v) continue;
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
    json r = {{"function", f.description}, {"n_averages", f.n_averages}, {"defined_bins", f.defined_count()},
              {"undefined_bins", f.values.size() - f.defined_count()}};
    json bands = json::array();
    for (const auto& b : cc.bands) {
      const auto m = f.band_mean(b.f_lo, b.f_hi);
      bands.push_back({{"f_lo", b.f_lo}, {"f_hi", b.f_hi}, {"mean", m ? json(*m) : json(nullptr)}});
    }
    r["bands"] = bands;
    results.push_back(std::move(r));
    const bool ok = f.defined_count() == 0 || (lo >= 0.0 && hi <= 1.0);
    checks.push_back(check("bounds_" + f.description, ok, "range [" + format_double(lo) + ", " + format_double(hi) + "]"));
  }
  if (!fns.empty()) add_csv(ctx, out, "coherence.csv", [&](std::ostream& os) { write_coherence_csv(os, fns); });
  add_csv(ctx, out, "spectral_matrix.csv", [&](std::ostream& os) { write_spectral_matrix_csv(os, s); });

  if (!cc.gain_phase.empty()) {
    std::vector<std::pair<std::string, GainPhase>> gp;
    for (const auto& p : cc.gain_phase) {
      gp.emplace_back(p.a + "_" + p.b, gain_phase(s, channel_index(labels, p.a), channel_index(labels, p.b)));
    }
    add_csv(ctx, out, "gain_phase.csv", [&](std::ostream& os) {
      os << "frequency_hz";
      for (const auto& [name, g] : gp) os << ",gain_" << name << ",phase_" << name;
      os << '\n';
      const auto& axis = gp.front().second.axis;
      for (std::size_t k = 0; k < axis.size(); ++k) {
        os << format_double(axis[k]);
        for (const auto& [name, g] : gp) {
          os << ',' << (g.gain[k] ? format_double(*g.gain[k]) : "") << ','
             << (g.phase[k] ? format_double(*g.phase[k]) : "");
        }
        os << '\n';
      }
    });
  }
  report["grid"] = to_json(s.grid());
  report["results"] = results;
  report["checks"] = checks;
  add_json(out, "coherence_report.json", report);
  return out;
}

Outputs cmd_features(const RunContext& ctx) {
  const auto& cfg = ctx.config.features;
  if (cfg.inputs.empty()) throw ConfigError("features: config needs features.inputs");
  if (!cfg.statistical && cfg.bands.empty()) throw ConfigError("features: nothing to extract");
  std::optional<DescriptionSet> set;
  for (const auto& li : cfg.inputs) {
    for (const auto& raw : load_channels(li.input)) {
      const auto series = condition(raw, ctx.config.preprocess.condition).series;
      FeatureVector fv;
      if (cfg.statistical) fv = extract_statistical(series);
      if (!cfg.bands.empty()) fv = fv.append(extract_spectral(psd(series, ctx.config.spectral.psd), cfg.bands));
      if (!set) set.emplace(fv.names);
      if (fv.names != set->feature_names()) throw InvalidArgument("features: inconsistent feature lists");
      set->add(li.label, fv.values);
      log(ctx, li.label + " <- " + raw.label());
    }
  }
  Outputs out;
  add_csv(ctx, out, "descriptions.csv", [&](std::ostream& s) { s << set->to_csv(); });
  add_json(out, "descriptions.json", {{"header", header_json(ctx)}, {"descriptions", to_json(*set)}});
  auto report = report_base(ctx);
  json classes = json::array();
  for (const auto& c : set->classes()) classes.push_back({{"label", c.label}, {"descriptions", c.descriptions.size()}});
  report["results"] = {{"features", set->feature_names()}, {"classes", classes}};
  report["checks"] = json::array();
  add_json(out, "features_report.json", report);
  return out;
}

Outputs cmd_minimize(const RunContext& ctx) {
  const auto& cfg = ctx.config.minimize;
  if (!cfg.descriptions) throw ConfigError("minimize: config needs minimize.descriptions");
  auto set = load_descriptions(*cfg.descriptions);
  if (cfg.standardize && !set.standardization()) set = standardize(set);

  MinimizationResult result;
  if (cfg.method == "resolution") {
    ResolutionOptions o;
    o.delta = cfg.delta;
    o.seed = ctx.seed;
    o.max_restarts = cfg.max_restarts;
    result = minimize_resolution(set, o);
  } else {
    DispersionOptions o;
    o.keep = cfg.keep;
    o.min_dispersion = cfg.min_dispersion;
    o.max_epochs = cfg.max_epochs;
    result = minimize_dispersion(set, o);
  }
  DescriptionSet reduced = set;
  reduced.set_active_mask(result.mask);
  const auto model = train_potential(reduced, cfg.max_epochs);
  log(ctx, "kept " + std::to_string(reduced.active_indices().size()) + " of " + std::to_string(set.feature_count()));

  const auto replayed = replay_trace(set.active_mask(), result.trace);
  Outputs out;
  add_json(out, "minimization.json", {{"header", header_json(ctx)}, {"result", to_json(result)}});
  add_json(out, "descriptions_reduced.json", {{"header", header_json(ctx)}, {"descriptions", to_json(reduced)}});
  add_json(out, "model.json", {{"header", header_json(ctx)}, {"model", to_json(model)}});
  auto report = report_base(ctx);
  report["results"] = {{"method", result.method},
                       {"kept", reduced.active_names()},
                       {"non_separable", result.non_separable},
                       {"delta", result.delta},
                       {"margins", {{"min", result.margins.min}, {"mean", result.margins.mean}}},
                       {"restarts", result.restarts},
                       {"model_converged", model.converged}};
  report["checks"] = json::array({check("trace_replay", replayed == result.mask, "trace reproduces the mask")});
  add_json(out, "minimize_report.json", report);
  return out;
}

Outputs cmd_classify(const RunContext& ctx) {
  const auto& cfg = ctx.config.classify;
  if (!cfg.training) throw ConfigError("classify: config needs classify.training");
  if (!cfg.inputs) throw ConfigError("classify: config needs classify.inputs");
  const auto training = load_descriptions(*cfg.training);
  SeparatingModel model;
  if (cfg.model) {
    std::ifstream in(*cfg.model);
    if (!in) throw InvalidArgument("cannot open '" + cfg.model->string() + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw FormatError("'" + cfg.model->string() + "': " + e.what());
    }
    model = separating_model_from_json(j.contains("model") ? j.at("model") : j);
  } else {
    model = train_potential(training, cfg.max_epochs);
  }
  std::ifstream in(*cfg.inputs);
  if (!in) throw InvalidArgument("cannot open '" + cfg.inputs->string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto queries = DescriptionSet::from_csv(buf.str());
  if (queries.feature_names() != training.feature_names()) {
    throw InvalidArgument("classify: input features do not match the training set");
  }

  std::size_t known = 0, correct = 0;
  std::ostringstream rows;
  std::size_t row = 0;
  for (const auto& c : queries.classes()) {
    for (const auto& d : c.descriptions) {
      const auto z = training.apply_standardization(d);
      std::vector<double> x;
      for (auto f : model.feature_indices) x.push_back(z.at(f));
      const auto res = classify(model, x);
      rows << ++row << ',' << c.label << ',' << res.label;
      for (double s : res.scores) rows << ',' << format_double(s);
      rows << '\n';
      if (std::find(model.class_labels.begin(), model.class_labels.end(), c.label) != model.class_labels.end()) {
        ++known;
        correct += res.label == c.label;
      }
    }
  }
  Outputs out;
  add_csv(ctx, out, "classification.csv", [&](std::ostream& s) {
    s << "row,given_class,predicted";
    for (const auto& l : model.class_labels) s << ",score_" << l;
    s << '\n' << rows.str();
  });
  auto report = report_base(ctx);
  report["results"] = {{"rows", row},
                       {"labelled_rows", known},
                       {"correct", correct},
                       {"accuracy", known ? json(static_cast<double>(correct) / static_cast<double>(known)) : json(nullptr)},
                       {"model", to_json(model)}};
  report["checks"] = json::array({check("model_converged", model.converged, "training separated every description")});
  add_json(out, "classify_report.json", report);
  return out;
}

Outputs cmd_fit(const RunContext& ctx) {
  const auto& cfg = ctx.config.fit;
  const auto channels = load_channels(require_input(ctx));
  const TimeSeries* series = &channels.front();
  if (!cfg.column.empty()) {
    const auto it =
        std::find_if(channels.begin(), channels.end(), [&](const TimeSeries& s) { return s.label() == cfg.column; });
    if (it == channels.end()) throw InvalidArgument("fit: no column '" + cfg.column + "'");
    series = &*it;
  }
  std::vector<double> x(series->size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) * series->dt();
  const auto& y = series->data();
  const auto method = parse_fit_method(cfg.method);
  MvvkpOptions mo;
  mo.epsilon_floor = cfg.epsilon_floor;
  mo.max_iter = cfg.max_iter;

  ModelComparison cmp;
  if (cfg.specs.size() == 1) {
    ModelScore s;
    s.model = cfg.specs[0].name();
    auto f = fit(x, y, cfg.specs[0], method, mo);
    s.objective = f.objective;
    s.dof = x.size() - cfg.specs[0].parameter_count();
    s.penalized = s.objective / static_cast<double>(s.dof);
    s.fit = std::move(f);
    cmp.ranked.push_back(std::move(s));
  } else {
    cmp = compare_models(x, y, cfg.specs, method, mo);
  }

  Outputs out;
  json checks = json::array();
  for (const auto& s : cmp.ranked) {
    if (!s.ok) continue;
    const auto name = "fit_" + std::to_string(s.candidate) + "_" + file_stem(s.model) + ".csv";
    add_csv(ctx, out, name, [&](std::ostream& os) { write_fit_csv(os, x, y, *s.fit); });
    if (method == FitMethod::mvvkp) {
      bool monotone = true;
      const auto& tr = s.fit->objective_trace;
      for (std::size_t i = 1; i < tr.size(); ++i) monotone = monotone && tr[i] <= tr[i - 1] * (1.0 + 1e-12);
      checks.push_back(check("irls_monotone_" + file_stem(s.model), monotone, std::to_string(tr.size()) + " iterations"));
    }
  }
  json spectrum = nullptr;
  const auto& best = cmp.ranked.front();
  if (best.ok && best.fit->residuals.size() >= 32) {
    const auto rs = residual_spectrum(*best.fit, x, series->dt());
    if (rs.exact_fit) {
      spectrum = {{"exact_fit", true}};
    } else {
      add_csv(ctx, out, "residual_psd.csv", [&](std::ostream& os) { write_spectrum_csv(os, *rs.spectrum); });
      spectrum = {{"exact_fit", false}, {"whiteness", to_json(rs.whiteness)}};
    }
  }
  auto report = report_base(ctx);
  report["results"] = {{"column", series->label()}, {"method", cfg.method}, {"ranked", to_json(cmp)},
                       {"best_residual_spectrum", spectrum}};
  report["checks"] = checks;
  add_json(out, "fit_report.json", report);
  return out;
}

Outputs cmd_harmonics(const RunContext& ctx) {
  const auto& cfg = ctx.config.harmonics;
  const auto& in = require_input(ctx);
  const TimeSeries realization = in.format == InputFormat::events ? event_realization(in) : load_channels(in).front();
  log(ctx, std::to_string(realization.size()) + " bins of " + format_double(realization.dt()) + " s");
  const auto est = event_psd(realization, cfg.psd);
  const auto null = flat_null_threshold(realization, cfg.psd, cfg.alpha, cfg.n_shuffles, ctx.seed);
  log(ctx, "null threshold " + format_double(null.threshold));
  const double thr = null.threshold > 0.0 ? null.threshold : std::numeric_limits<double>::min();
  const auto table = detect_harmonics(est, thr);

  Outputs out;
  auto report = report_base(ctx);
  json results = {{"grid", to_json(est.grid)},
                  {"bins", realization.size()},
                  {"events", std::count_if(realization.data().begin(), realization.data().end(),
                                           [](double v) { return v > 0.0; })},
                  {"null", to_json(null)},
                  {"table", to_json(table)}};
  std::optional<SeriesVerdict> verdict;
  if (table.lines.size() >= 2) {
    try {
      verdict = harmonic_series_check(table, cfg.series);
      results["series"] = to_json(*verdict, table);
    } catch (const DegenerateInput& e) {
      results["series"] = {{"error", e.what()}};
    }
  } else {
    results["series"] = {{"error", "fewer than 2 significant lines"}};
  }
  if (cfg.near_monthly) results["near_monthly"] = to_json(near_monthly_test(est, null.threshold, cfg.monthly));

  add_csv(ctx, out, "event_psd.csv", [&](std::ostream& s) { write_spectrum_csv(s, est); });
  add_csv(ctx, out, "harmonics.csv",
          [&](std::ostream& s) { write_harmonics_csv(s, table, verdict ? &*verdict : nullptr); });
  report["results"] = results;
  json checks = json::array();
  bool increasing = true;
  for (std::size_t i = 1; i < table.lines.size(); ++i)
    increasing = increasing && table.lines[i].frequency > table.lines[i - 1].frequency;
  checks.push_back(check("table_increasing", increasing, std::to_string(table.lines.size()) + " lines"));
  if (verdict && verdict->f2) {
    checks.push_back(check("f2_within_tolerance", verdict->deviation_bins <= verdict->tolerance_bins,
                           "|f2 - 7 f1| = " + format_double(verdict->deviation_bins) + " bins"));
  }
  report["checks"] = checks;
  add_json(out, "harmonics_report.json", report);
  return out;
}

}  // namespace ulfkit::cli
