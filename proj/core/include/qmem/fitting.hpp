#pragma once

// Nonlinear least-squares fits of the three decay models.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qmem/measurement.hpp"

namespace qmem {

enum class FitModelKind {
  SingleExp,       // A e^{-t/T1} + C
  CoherentVacuum,  // A exp(-n0 e^{-t/T1}) + C
  RamseyFringe,    // A e^{-t/T2} cos(2 pi Delta t + phi) + C
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data carry no signal to fit.
class FlatDataError : public FitError {
 public:
  using FitError::FitError;
};

std::string_view to_string(FitModelKind kind);
/// Accepts "single_exp", "coherent_vacuum", "ramsey_fringe" (and CamelCase forms).
FitModelKind parse_fit_model(std::string_view name);

std::span<const std::string_view> parameter_names(FitModelKind kind);
int parameter_count(FitModelKind kind);
/// Index of the time-constant parameter (T1 or T2).
int time_constant_index(FitModelKind kind);

double model_eval(FitModelKind kind, std::span<const double> params, double t);
/// d model / d param, written into `grad` (size parameter_count).
void model_gradient(FitModelKind kind, std::span<const double> params, double t, std::span<double> grad);

struct FitOptions {
  int max_iterations = 500;
  double rss_rtol = 1e-12;
  double gradient_tol = 1e-10;
  /// Per-point weights; empty means unweighted.
  std::vector<double> weights;
  /// Restarts from perturbed guesses when the first attempt fails.
  int starts = 3;
};

struct FitResult {
  FitModelKind kind = FitModelKind::SingleExp;
  std::vector<double> params;
  std::vector<double> std_errors;
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::string message;

  [[nodiscard]] double param(std::string_view name) const;
  [[nodiscard]] double error(std::string_view name) const;
};

/// Heuristic starting point. Throws FlatDataError for constant traces.
std::vector<double> auto_guess(FitModelKind kind, std::span<const double> t, std::span<const double> y);

/// Levenberg-Marquardt with time constants optimized in log space. Returns a
/// result with converged == false rather than throwing on non-convergence.
FitResult fit(FitModelKind kind, std::span<const double> t, std::span<const double> y,
              const std::optional<std::vector<double>>& initial = std::nullopt, const FitOptions& options = {});

FitResult fit(FitModelKind kind, const Dataset& data,
              const std::optional<std::vector<double>>& initial = std::nullopt, const FitOptions& options = {});

/// Binomial weights 1/sigma^2 for shot-noise-weighted fits.
std::vector<double> shot_noise_weights(std::span<const double> y, int shots);

}  // namespace qmem
