#include "ulfkit/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ulfkit/errors.hpp"
#include "ulfkit/stats.hpp"

namespace ulfkit {
namespace {

constexpr std::size_t kMinSegment = 3;

// Linear-in-parameters problem after the model's linearization.
struct LinearProblem {
  RealMatrix design;            // n x p
  std::vector<double> target;   // y, or ln y for exponential forms
};

LinearProblem linearize(std::span<const double> x, std::span<const double> y, const ModelSpec& model) {
  const std::size_t n = x.size();
  LinearProblem lp;
  switch (model.kind) {
    case ModelKind::polynomial: {
      const auto p = static_cast<std::size_t>(model.order + 1);
      lp.design = RealMatrix(n, p);
      for (std::size_t i = 0; i < n; ++i) {
        double v = 1.0;
        for (std::size_t k = 0; k < p; ++k, v *= x[i]) lp.design(i, k) = v;
      }
      lp.target.assign(y.begin(), y.end());
      break;
    }
    case ModelKind::exp_poly: {
      const auto p = static_cast<std::size_t>(model.order + 1);
      lp.design = RealMatrix(n, p);
      lp.target.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(y[i] > 0.0)) {
          throw InvalidArgument("exp_poly fit needs y > 0; y[" + std::to_string(i) + "] = " + std::to_string(y[i]));
        }
        double v = 1.0;
        for (std::size_t k = 0; k < p; ++k, v *= x[i]) lp.design(i, k) = v;
        lp.target[i] = std::log(y[i]);
      }
      break;
    }
    case ModelKind::user_basis: {
      const std::size_t p = model.basis.size();
      lp.design = RealMatrix(n, p);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < p; ++k) lp.design(i, k) = model.basis[k](x[i]);
      lp.target.assign(y.begin(), y.end());
      break;
    }
    case ModelKind::sum_of_exponentials:
      throw InvalidArgument("sum_of_exponentials has no single linearization");
  }
  return lp;
}

std::vector<double> residual_of(const LinearProblem& lp, const std::vector<double>& beta) {
  const auto pred = lp.design * beta;
  std::vector<double> r(pred.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = lp.target[i] - pred[i];
  return r;
}

// Normal equations with column equilibration and one refinement pass.
std::vector<double> solve_weighted(const LinearProblem& lp, std::span<const double> w, const std::string& basis) {
  const std::size_t n = lp.design.rows();
  const std::size_t p = lp.design.cols();
  std::vector<double> colscale(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * lp.design(i, k) * lp.design(i, k);
    colscale[k] = s > 0.0 ? 1.0 / std::sqrt(s) : 1.0;
  }
  RealMatrix gram(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += w[i] * lp.design(i, a) * lp.design(i, b);
      gram(a, b) = gram(b, a) = s * colscale[a] * colscale[b];
    }
  auto rhs_for = [&](const std::vector<double>& target) {
    std::vector<double> rhs(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += w[i] * lp.design(i, k) * target[i];
      rhs[k] = s * colscale[k];
    }
    return rhs;
  };
  std::vector<double> z;
  try {
    z = ulfkit::gauss_solve(gram, rhs_for(lp.target));
  } catch (const SingularMatrix&) {
    throw SingularMatrix("fit: rank-deficient basis for model " + basis);
  }
  std::vector<double> beta(p);
  for (std::size_t k = 0; k < p; ++k) beta[k] = z[k] * colscale[k];
  const auto dz = ulfkit::gauss_solve(gram, rhs_for(residual_of(lp, beta)));
  for (std::size_t k = 0; k < p; ++k) beta[k] += dz[k] * colscale[k];
  return beta;
}

void check_data(std::span<const double> x, std::span<const double> y, std::size_t params, const char* who) {
  if (x.size() != y.size()) throw InvalidArgument(std::string(who) + ": x and y differ in length");
  if (x.size() <= params) {
    throw InvalidArgument(std::string(who) + ": need more than " + std::to_string(params) + " points, have " +
                          std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidArgument(std::string(who) + ": non-finite data at index " + std::to_string(i));
    }
  }
}

double l1(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += std::abs(v);
  return s;
}

// Maps linear parameters back to model parameters and fills fitted values on
// the original scale.
void finish(FitResult& out, const LinearProblem& lp, const std::vector<double>& beta, std::span<const double> y,
            std::span<const double> weights) {
  const auto pred = lp.design * beta;
  out.fitted.resize(pred.size());
  out.residuals.resize(pred.size());
  if (out.model.kind == ModelKind::exp_poly) {
    out.parameters = beta;
    out.parameters[0] = std::exp(beta[0]);
    for (std::size_t i = 0; i < pred.size(); ++i) out.fitted[i] = std::exp(pred[i]);
  } else {
    out.parameters = beta;
    out.fitted = pred;
  }
  for (std::size_t i = 0; i < pred.size(); ++i) out.residuals[i] = y[i] - out.fitted[i];
  if (out.method == FitMethod::mnk) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      s += w * out.residuals[i] * out.residuals[i];
    }
    out.objective = s;
  } else {
    out.objective = l1(out.residuals);
  }
}

FitResult fit_linearized(std::span<const double> x, std::span<const double> y, const ModelSpec& model,
                         FitMethod method, std::span<const double> weights, const MvvkpOptions& opt) {
  check_data(x, y, model.parameter_count(), method == FitMethod::mnk ? "fit_mnk" : "fit_mvvkp");
  if (!weights.empty() && weights.size() != x.size()) throw InvalidArgument("fit: weights length mismatch");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("fit: weights must be finite and >= 0");

  const auto lp = linearize(x, y, model);
  const std::size_t n = x.size();
  std::vector<double> unit(n, 1.0);
  const std::span<const double> w0 = weights.empty() ? std::span<const double>(unit) : weights;

  FitResult out;
  out.model = model;
  out.method = method;
  auto beta = solve_weighted(lp, w0, model.name());
  if (method == FitMethod::mnk) {
    out.iterations = 1;
    finish(out, lp, beta, y, weights);
    return out;
  }

  std::vector<double> abs_target(n);
  for (std::size_t i = 0; i < n; ++i) abs_target[i] = std::abs(lp.target[i]);
  double eps = opt.epsilon_floor ? *opt.epsilon_floor : 1e-6 * median(abs_target);
  if (!(eps > 0.0)) eps = 1e-12;

  auto r = residual_of(lp, beta);
  double obj = l1(r);
  out.objective_trace.push_back(obj);
  out.converged = false;
  std::vector<double> w(n);
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    out.iterations = it;
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(std::abs(r[i]), eps);
    auto next = solve_weighted(lp, w, model.name());
    auto rn = residual_of(lp, next);
    double next_obj = l1(rn);
    // Step halving keeps the L1 objective monotone when the floor makes the
    // reweighted step overshoot.
    double t = 1.0;
    while (next_obj > obj && t > 1e-9) {
      t *= 0.5;
      for (std::size_t k = 0; k < next.size(); ++k) next[k] = beta[k] + t * (next[k] - beta[k]);
      rn = residual_of(lp, next);
      next_obj = l1(rn);
    }
    if (next_obj > obj) {
      out.converged = true;
      break;
    }
    double change = 0.0;
    double size = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
      change = std::max(change, std::abs(next[k] - beta[k]));
      size = std::max(size, std::abs(beta[k]));
    }
    beta = std::move(next);
    r = std::move(rn);
    obj = next_obj;
    out.objective_trace.push_back(obj);
    if (change <= opt.tolerance * std::max(size, 1e-300)) {
      out.converged = true;
      break;
    }
  }
  finish(out, lp, beta, y, {});
  return out;
}

double segment_exp_eval(double a1, double a2, double x) { return a1 * std::exp(a2 * x); }

FitResult fit_sum_of_exponentials(std::span<const double> x, std::span<const double> y, const ModelSpec& model,
                                  FitMethod method, const MvvkpOptions& opt) {
  const auto segments = static_cast<std::size_t>(model.order);
  if (segments < 1) throw InvalidArgument("sum_of_exponentials: need at least one segment");
  check_data(x, y, model.parameter_count(), "sum_of_exponentials");
  const std::size_t n = x.size();
  if (n < segments * kMinSegment) throw InvalidArgument("sum_of_exponentials: too few points for the segments");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1])) throw InvalidArgument("sum_of_exponentials: x must be strictly increasing");

  const auto single = ModelSpec::exp_poly(1);
  auto segment_fit = [&](std::size_t a, std::size_t b) {
    return fit_linearized(x.subspan(a, b - a), y.subspan(a, b - a), single, method, {}, opt);
  };

  // cost[a][b]: objective of one exponential on [a, b).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(n + 1, inf));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + kMinSegment; b <= n; ++b) cost[a][b] = segment_fit(a, b).objective;

  // best[s][b]: minimal total objective covering [0, b) with s segments.
  std::vector<std::vector<double>> best(segments + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> from(segments + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t s = 1; s <= segments; ++s)
    for (std::size_t b = s * kMinSegment; b <= n; ++b)
      for (std::size_t a = (s - 1) * kMinSegment; a + kMinSegment <= b; ++a) {
        const double c = best[s - 1][a] + cost[a][b];
        if (c < best[s][b]) {
          best[s][b] = c;
          from[s][b] = a;
        }
      }

  std::vector<std::size_t> starts(segments);
  std::size_t b = n;
  for (std::size_t s = segments; s >= 1; --s) {
    starts[s - 1] = from[s][b];
    b = from[s][b];
  }

  FitResult out;
  out.model = model;
  out.method = method;
  out.fitted.resize(n);
  out.residuals.resize(n);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t a = starts[s];
    const std::size_t e = s + 1 < segments ? starts[s + 1] : n;
    const auto f = segment_fit(a, e);
    out.parameters.push_back(f.parameters[0]);
    out.parameters.push_back(f.parameters[1]);
    out.iterations += f.iterations;
    out.converged = out.converged && f.converged;
    if (s > 0) out.breakpoints.push_back(x[a]);
    for (std::size_t i = a; i < e; ++i) {
      out.fitted[i] = f.fitted[i - a];
      out.residuals[i] = f.residuals[i - a];
    }
  }
  if (method == FitMethod::mnk) {
    out.objective = 0.0;
    for (double r : out.residuals) out.objective += r * r;
  } else {
    out.objective = l1(out.residuals);
  }
  return out;
}

}  // namespace

std::string to_string(FitMethod method) { return method == FitMethod::mnk ? "mnk" : "mvvkp"; }

FitMethod parse_fit_method(const std::string& name) {
  if (name == "mnk") return FitMethod::mnk;
  if (name == "mvvkp") return FitMethod::mvvkp;
  throw InvalidArgument("unknown fit method '" + name + "' (expected mnk or mvvkp)");
}

ModelSpec ModelSpec::polynomial(int degree) {
  if (degree < 0) throw InvalidArgument("polynomial degree must be >= 0");
  ModelSpec m;
  m.kind = ModelKind::polynomial;
  m.order = degree;
  return m;
}

ModelSpec ModelSpec::exp_poly(int order) {
  if (order < 1 || order > 3) throw InvalidArgument("exp_poly order must be 1, 2 or 3");
  ModelSpec m;
  m.kind = ModelKind::exp_poly;
  m.order = order;
  return m;
}

ModelSpec ModelSpec::sum_of_exponentials(int segments) {
  if (segments < 1) throw InvalidArgument("sum_of_exponentials needs >= 1 segment");
  ModelSpec m;
  m.kind = ModelKind::sum_of_exponentials;
  m.order = segments;
  return m;
}

ModelSpec ModelSpec::user(std::vector<std::function<double(double)>> basis, std::vector<std::string> names) {
  if (basis.empty()) throw InvalidArgument("user basis must be non-empty");
  if (names.size() != basis.size()) throw InvalidArgument("user basis names must match the basis");
  ModelSpec m;
  m.kind = ModelKind::user_basis;
  m.order = static_cast<int>(basis.size());
  m.basis = std::move(basis);
  m.basis_names = std::move(names);
  return m;
}

std::size_t ModelSpec::parameter_count() const {
  switch (kind) {
    case ModelKind::polynomial:
    case ModelKind::exp_poly:
      return static_cast<std::size_t>(order + 1);
    case ModelKind::sum_of_exponentials:
      return static_cast<std::size_t>(3 * order - 1);
    case ModelKind::user_basis:
      return basis.size();
  }
  return 0;
}

std::string ModelSpec::name() const {
  switch (kind) {
    case ModelKind::polynomial:
      return "polynomial(" + std::to_string(order) + ")";
    case ModelKind::exp_poly:
      return "exp_poly(" + std::to_string(order) + ")";
    case ModelKind::sum_of_exponentials:
      return "sum_of_exponentials(" + std::to_string(order) + ")";
    case ModelKind::user_basis: {
      std::string s = "user(";
      for (std::size_t i = 0; i < basis_names.size(); ++i) s += (i ? "," : "") + basis_names[i];
      return s + ")";
    }
  }
  return "?";
}

std::vector<double> gauss_solve(const RealMatrix& a, const std::vector<double>& b) {
  return gauss_solve<double>(a, b);
}

FitResult fit_mnk(std::span<const double> x, std::span<const double> y, const ModelSpec& model,
                  std::span<const double> weights) {
  if (model.kind == ModelKind::sum_of_exponentials) {
    if (!weights.empty()) throw InvalidArgument("sum_of_exponentials: weights are not supported");
    return fit_sum_of_exponentials(x, y, model, FitMethod::mnk, {});
  }
  return fit_linearized(x, y, model, FitMethod::mnk, weights, {});
}

FitResult fit_mvvkp(std::span<const double> x, std::span<const double> y, const ModelSpec& model,
                    const MvvkpOptions& options) {
  if (model.kind == ModelKind::sum_of_exponentials) {
    return fit_sum_of_exponentials(x, y, model, FitMethod::mvvkp, options);
  }
  return fit_linearized(x, y, model, FitMethod::mvvkp, {}, options);
}

FitResult fit_exp_poly(std::span<const double> x, std::span<const double> y, int order, FitMethod method) {
  const auto model = ModelSpec::exp_poly(order);
  return method == FitMethod::mnk ? fit_mnk(x, y, model) : fit_mvvkp(x, y, model);
}

FitResult fit(std::span<const double> x, std::span<const double> y, const ModelSpec& model, FitMethod method,
              const MvvkpOptions& options) {
  return method == FitMethod::mnk ? fit_mnk(x, y, model) : fit_mvvkp(x, y, model, options);
}

std::vector<double> evaluate(const FitResult& f, std::span<const double> x) {
  std::vector<double> out(x.size());
  const auto& p = f.parameters;
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (f.model.kind) {
      case ModelKind::polynomial: {
        double acc = 0.0;
        for (std::size_t k = p.size(); k-- > 0;) acc = acc * x[i] + p[k];
        out[i] = acc;
        break;
      }
      case ModelKind::exp_poly: {
        double acc = 0.0;
        for (std::size_t k = p.size(); k-- > 1;) acc = acc * x[i] + p[k];
        out[i] = p[0] * std::exp(acc * x[i]);
        break;
      }
      case ModelKind::sum_of_exponentials: {
        std::size_t s = 0;
        while (s < f.breakpoints.size() && x[i] >= f.breakpoints[s]) ++s;
        out[i] = segment_exp_eval(p[2 * s], p[2 * s + 1], x[i]);
        break;
      }
      case ModelKind::user_basis: {
        double acc = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) acc += p[k] * f.model.basis[k](x[i]);
        out[i] = acc;
        break;
      }
    }
  }
  return out;
}

Whiteness whiteness_test(std::span<const double> r) {
  const std::size_t n = r.size();
  if (n < 8) throw InvalidArgument("whiteness_test: need at least 8 residuals");
  const double m0 = mean(r);
  std::vector<cplx> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = r[i] - m0;
  const auto spec = dft_any_length(buf);
  const std::size_t m = (n - 1) / 2;
  std::vector<double> cum(m);
  double total = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    total += std::norm(spec[k]);
    cum[k - 1] = total;
  }
  Whiteness w;
  if (!(total > 0.0)) throw DegenerateInput("whiteness_test: residuals are constant");
  for (std::size_t j = 1; j < m; ++j) {
    const double dev = std::abs(cum[j - 1] / total - static_cast<double>(j) / static_cast<double>(m));
    w.score = std::max(w.score, dev);
  }
  // The normalized cumulative periodogram behaves like the empirical CDF of
  // m - 1 uniforms; Kolmogorov critical value with Stephens' correction.
  const double q = std::sqrt(static_cast<double>(m - 1));
  w.threshold = 1.358 / (q + 0.12 + 0.11 / q);
  w.white = w.score <= w.threshold;
  return w;
}

ResidualSpectrum residual_spectrum(const FitResult& f, std::span<const double> x, double dt) {
  const auto& r = f.residuals;
  if (r.size() < 32) throw InvalidArgument("residual_spectrum: need at least 32 residuals");
  if (x.size() != r.size()) throw InvalidArgument("residual_spectrum: x does not match the residuals");
  const double step = x[1] - x[0];
  for (std::size_t i = 2; i < x.size(); ++i) {
    if (std::abs((x[i] - x[i - 1]) - step) > 1e-9 * std::abs(step)) {
      throw InvalidArgument("residual_spectrum: x is not uniformly spaced (index " + std::to_string(i) + ")");
    }
  }
  ResidualSpectrum out;
  double scale = 0.0;
  for (double v : f.fitted) scale = std::max(scale, std::abs(v));
  double rmax = 0.0;
  for (double v : r) rmax = std::max(rmax, std::abs(v));
  if (rmax <= 1e-13 * std::max(scale, 1e-300) || !(variance(r) > 0.0)) {
    out.exact_fit = true;
    return out;
  }
  PsdOptions opt;
  opt.taper_fraction = 0.1;
  opt.detrend_degree = 0;
  out.spectrum = psd(TimeSeries(r, dt, 0.0, "residual"), opt);
  out.whiteness = whiteness_test(r);
  return out;
}

ModelComparison compare_models(std::span<const double> x, std::span<const double> y,
                               const std::vector<ModelSpec>& candidates, FitMethod method,
                               const MvvkpOptions& options) {
  if (candidates.size() < 2) throw InvalidArgument("compare_models: need at least 2 candidates");
  ModelComparison out;
  std::string failures;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    ModelScore s;
    s.candidate = c;
    s.model = candidates[c].name();
    try {
      auto f = fit(x, y, candidates[c], method, options);
      s.objective = f.objective;
      s.dof = x.size() - candidates[c].parameter_count();
      s.penalized = s.objective / static_cast<double>(s.dof);
      const auto cm = central_moments(f.residuals);
      if (cm.m2 > 0.0) {
        s.residual_skewness = cm.m3 / std::pow(cm.m2, 1.5);
        s.residual_kurtosis = cm.m4 / (cm.m2 * cm.m2) - 3.0;
      }
      if (f.residuals.size() >= 32) {
        try {
          const auto rs = residual_spectrum(f, x, x.size() > 1 ? x[1] - x[0] : 1.0);
          if (!rs.exact_fit) s.whiteness = rs.whiteness;
        } catch (const InvalidArgument&) {
          // non-uniform abscissae: no residual spectrum
        }
      }
      s.fit = std::move(f);
    } catch (const std::runtime_error& e) {
      s.ok = false;
      s.error = e.what();
    } catch (const std::invalid_argument& e) {
      s.ok = false;
      s.error = e.what();
    }
    if (!s.ok) failures += "\n  " + s.model + ": " + s.error;
    out.ranked.push_back(std::move(s));
  }
  if (std::none_of(out.ranked.begin(), out.ranked.end(), [](const auto& s) { return s.ok; })) {
    throw NumericalError("compare_models: every candidate failed:" + failures);
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const ModelScore& a, const ModelScore& b) {
    if (a.ok != b.ok) return a.ok;
    return a.ok && a.penalized < b.penalized;
  });
  return out;
}

}  // namespace ulfkit
