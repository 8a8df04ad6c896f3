#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rydlife/kinetics.hpp"

namespace rydlife {

/// Parameters of the excite / wait / optional depump / field-ionize cycle.
struct ProtocolConfig {
  double initial_atoms = 4.0;  // Poisson mean per shot
  double alpha = 0.95;         // depump efficiency
  double alpha_sigma = 0.03;   // prior uncertainty on alpha
  double eta = 0.4;            // detection efficiency
  int n_min_detect = 60;       // field-ionization cutoff for the support
  std::vector<double> times_us;
  int shots = 100;             // per time point and branch
  std::uint64_t seed = 1;
  /// alpha(t) = alpha * exp(-alpha_drift_per_ms * t[ms]); models the cloud
  /// moving out of the depump beam.
  double alpha_drift_per_ms = 0.0;

  void validate() const;
  double effective_alpha(double t_us) const;
};

/// Shot-resolved detector counts for both branches: A (no depump) and
/// B (depumped). counts_a[k][shot] belongs to times_us[k].
struct SyntheticDataset {
  ProtocolConfig config;
  std::string target;
  double temperature_k = 0.0;
  std::vector<std::vector<int>> counts_a;
  std::vector<std::vector<int>> counts_b;
};

/// Per-atom state occupation probabilities at config.times_us are taken
/// from `truth` (n_tar and n_supp must be sampled on the same times).
/// Branches and time points use independent RNG streams derived from the
/// seed, so results are bit-identical for a given seed and config.
SyntheticDataset simulate_dataset(const ObservableSeries& truth, const ProtocolConfig& config,
                                  std::string target_label = {}, double temperature_k = 0.0);
SyntheticDataset simulate_dataset(const KineticsModel& model, const ProtocolConfig& config);

struct Reconstruction {
  double n_tar = 0.0;
  double sigma_tar = 0.0;
  double n_supp = 0.0;
  double sigma_supp = 0.0;
  bool negative = false;     // n_tar < 0 (kept, never clamped)
  bool beyond_noise = false; // N' exceeds N by more than two standard errors
};

/// Inverts N = N_tar + N_supp and N' = (1 - alpha) N_tar + N_supp.
/// Throws ConfigError for alpha outside (0, 1].
Reconstruction reconstruct(double n, double sigma_n, double n_depumped, double sigma_n_depumped, double alpha,
                           double sigma_alpha = 0.0);

struct EstimatorResult {
  std::vector<double> times_us;
  std::vector<double> n_ens, sigma_ens;
  std::vector<double> n_tar, sigma_tar;
  std::vector<double> n_supp, sigma_supp;
  LifetimeFit ensemble_fit;
  LifetimeFit target_fit;
  /// Difference of the ensemble and target fit curves at times_us.
  std::vector<double> support_from_fits;
  std::vector<std::string> warnings;
};

/// Detection-corrected branch means, reconstruction and exponential fits
/// weighted by the shot statistics.
EstimatorResult estimate_lifetimes(const SyntheticDataset& dataset);

}  // namespace rydlife
