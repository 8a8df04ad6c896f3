#pragma once

#include <optional>
#include <span>
#include <string>

namespace rydlife {

struct FitWindow {
  double start_us = 0.0;
  double end_us = 0.0;
};

/// Result of a weighted least-squares fit of a * exp(-t / tau).
struct LifetimeFit {
  double tau_us = 0.0;
  double sigma_tau_us = 0.0;
  double amplitude = 0.0;
  double sigma_amplitude = 0.0;
  FitWindow window;
  std::size_t points = 0;
  double residual_rms = 0.0;  // unweighted
  double chi2 = 0.0;          // weighted
  int iterations = 0;
};

struct FitOptions {
  /// Treat sigmas as absolute standard errors; otherwise the covariance is
  /// rescaled by chi2 / dof.
  bool absolute_sigma = false;
  int max_iterations = 200;
  double tolerance = 1e-13;
};

/// Levenberg-Marquardt fit over the points with t in [window.start, window.end].
/// `sigmas` empty means uniform weights. Throws FitError on fewer than four
/// points in the window, all-zero data, or non-convergence.
LifetimeFit fit_exponential(std::span<const double> times_us, std::span<const double> values,
                            std::span<const double> sigmas, FitWindow window, const FitOptions& options = {});

/// Same, over every point.
LifetimeFit fit_exponential(std::span<const double> times_us, std::span<const double> values);

}  // namespace rydlife
