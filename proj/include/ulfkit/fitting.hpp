#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulfkit/linalg.hpp"
#include "ulfkit/spectral.hpp"

namespace ulfkit {

enum class ModelKind { polynomial, exp_poly, sum_of_exponentials, user_basis };
enum class FitMethod { mnk, mvvkp };

std::string to_string(FitMethod method);
FitMethod parse_fit_method(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::polynomial;
  // polynomial: degree; exp_poly: order (1..3); sum_of_exponentials: segment count.
  int order = 1;
  std::vector<std::function<double(double)>> basis;  // user_basis only
  std::vector<std::string> basis_names;

  static ModelSpec polynomial(int degree);
  // y = a1 exp(a2 x + a3 x^2 + a4 x^3), truncated at `order`; fitted on ln y.
  static ModelSpec exp_poly(int order);
  // Piecewise a1 exp(a2 x) segments joined at scanned breakpoints.
  static ModelSpec sum_of_exponentials(int segments);
  static ModelSpec user(std::vector<std::function<double(double)>> basis, std::vector<std::string> names);

  std::size_t parameter_count() const;
  std::string name() const;
};

struct FitResult {
  ModelSpec model;
  FitMethod method = FitMethod::mnk;
  // polynomial/user: basis coefficients. exp_poly: a1..a(order+1) on the
  // original scale. sum_of_exponentials: (a1, a2) per segment.
  std::vector<double> parameters;
  std::vector<double> breakpoints;  // sum_of_exponentials: x where each later segment starts
  std::vector<double> fitted;
  std::vector<double> residuals;         // y - fitted, original scale
  double objective = 0.0;                // sum w r^2 (mnk) or sum |r| (mvvkp), original scale
  std::vector<double> objective_trace;   // mvvkp: objective per IRLS iteration
  std::size_t iterations = 0;
  bool converged = true;
};

// Partial-pivoting elimination; thin wrapper kept next to the fitters.
std::vector<double> gauss_solve(const RealMatrix& a, const std::vector<double>& b);

// Weighted least squares via the normal equations.
FitResult fit_mnk(std::span<const double> x, std::span<const double> y, const ModelSpec& model,
                  std::span<const double> weights = {});

struct MvvkpOptions {
  std::optional<double> epsilon_floor;  // default 1e-6 * median |y|
  std::size_t max_iter = 200;
  double tolerance = 1e-8;
};

// Least absolute deviations by iteratively reweighted least squares,
// w_i = 1 / max(|r_i|, eps).
FitResult fit_mvvkp(std::span<const double> x, std::span<const double> y, const ModelSpec& model,
                    const MvvkpOptions& options = {});

FitResult fit_exp_poly(std::span<const double> x, std::span<const double> y, int order,
                       FitMethod method = FitMethod::mnk);

FitResult fit(std::span<const double> x, std::span<const double> y, const ModelSpec& model, FitMethod method,
              const MvvkpOptions& options = {});

// Evaluates a fitted model at new abscissae.
std::vector<double> evaluate(const FitResult& fit, std::span<const double> x);

struct Whiteness {
  double score = 0.0;      // max deviation of the cumulative periodogram from the uniform line
  double threshold = 0.0;  // alpha = 0.05 critical value
  bool white = true;
};

// Cumulative-periodogram test over the interior Fourier frequencies.
Whiteness whiteness_test(std::span<const double> residuals);

struct ResidualSpectrum {
  bool exact_fit = false;
  std::optional<SpectralEstimate> spectrum;
  Whiteness whiteness;
};

ResidualSpectrum residual_spectrum(const FitResult& fit, std::span<const double> x, double dt);

struct ModelScore {
  std::size_t candidate = 0;  // input position
  std::string model;
  bool ok = true;
  std::string error;
  double objective = 0.0;
  std::size_t dof = 0;
  double penalized = 0.0;  // objective / (n - p)
  double residual_skewness = 0.0;
  double residual_kurtosis = 0.0;
  std::optional<Whiteness> whiteness;
  std::optional<FitResult> fit;
};

struct ModelComparison {
  std::vector<ModelScore> ranked;  // ascending penalized objective; failures last
};

ModelComparison compare_models(std::span<const double> x, std::span<const double> y,
                               const std::vector<ModelSpec>& candidates, FitMethod method,
                               const MvvkpOptions& options = {});

}  // namespace ulfkit
