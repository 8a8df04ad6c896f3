#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rydlife/radial.hpp"

namespace rydlife {

/// Dimensionless multiplier w(nu) applied to the Planck photon occupation.
/// Piecewise-linear in frequency with clamped extrapolation; an empty table
/// is the identity (w = 1).
class SpectralWeight {
 public:
  SpectralWeight() = default;
  /// Points must be strictly increasing in frequency with w >= 0.
  explicit SpectralWeight(std::vector<std::pair<double, double>> points);

  /// Two-column text table (Hz, multiplier); '#' comments, whitespace or
  /// comma separated.
  static SpectralWeight from_file(const std::filesystem::path& path);
  static SpectralWeight parse(std::string_view text, const std::string& origin = "<memory>");

  /// w = factor on [lo, hi], 1 outside, linear ramps of width `edge` outside
  /// the band.
  static SpectralWeight band(double lo_hz, double hi_hz, double factor, double edge_hz);
  /// Toy finite-cell model: w = 0 below cutoff, linear ramp to 1 over `ramp_hz`.
  static SpectralWeight cavity_cutoff(double cutoff_hz, double ramp_hz);
  /// Cutoff at c / (2 * largest cell dimension).
  static SpectralWeight cavity_cutoff_for_size(double max_dimension_m, double ramp_fraction = 0.2);

  double operator()(double frequency_hz) const;
  bool is_identity() const { return points_.empty(); }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_;
};

struct EnvironmentConfig {
  double temperature_k = 300.0;
  SpectralWeight spectral_weight{};
  /// Only used to flag validity against the Inglis-Teller field.
  double static_field_v_per_cm = 0.0;

  void validate() const;
};

/// Truncation of black-body sums: partners up to n + n_window with L <= l_max.
/// Lower partners are always included.
struct BasisLimits {
  int n_window = 40;
  int l_max = 3;
};

struct TransitionRate {
  StateLabel from;
  StateLabel to;
  double spontaneous = 0.0;     // s^-1, zero for upward transitions
  double bbr_stimulated = 0.0;  // s^-1
};

struct DecayChannel {
  StateLabel to;
  double rate = 0.0;  // s^-1
};

struct BbrDeparture {
  double total = 0.0;  // s^-1
  /// Share of `total` carried by the top shell n + n_window; a convergence
  /// indicator for the window.
  double outer_shell_fraction = 0.0;
  std::vector<DecayChannel> channels;
};

/// Mean photon number 1/(exp(h nu / k T) - 1); 0 at T = 0.
double planck_occupation(double frequency_hz, double temperature_k);

/// Spontaneous and black-body stimulated rates between fine-structure levels.
///
/// Both use the same line strength S = |<a||r||b>|^2 so that
/// g_a W(a->b) = g_b W(b->a) holds by construction. Black-body
/// photoionization is not included.
class RateCalculator {
 public:
  explicit RateCalculator(MatrixElementCache& cache);

  const RydbergAtom& atom() const { return cache_->atom(); }
  MatrixElementCache& cache() const { return *cache_; }

  /// |<a||r||b>|^2 in (e a0)^2.
  double line_strength(StateLabel a, StateLabel b) const;
  /// A(a -> b), s^-1. Requires E(a) > E(b) and a dipole-allowed pair.
  double einstein_a(StateLabel a, StateLabel b) const;
  /// Every dipole-allowed lower level with L <= 3, down to the lowest bound
  /// level of each channel.
  std::vector<DecayChannel> spontaneous_channels(StateLabel a) const;
  /// Gamma_0 = sum of einstein_a over spontaneous_channels, s^-1.
  double spontaneous_total(StateLabel a) const;

  /// W(a -> b) = (g-weighted A) * nbar(nu, T) * w(nu), s^-1, either direction.
  double bbr_rate(StateLabel a, StateLabel b, const EnvironmentConfig& env) const;
  TransitionRate transition_rate(StateLabel a, StateLabel b, const EnvironmentConfig& env) const;

  BbrDeparture bbr_departure(StateLabel a, const EnvironmentConfig& env, const BasisLimits& limits = {}) const;
  double bbr_departure_total(StateLabel a, const EnvironmentConfig& env, const BasisLimits& limits = {}) const;

  /// 1 / (Gamma_0 + BBR departure), microseconds. Ignores re-population.
  double effective_lifetime_departure_us(StateLabel a, const EnvironmentConfig& env,
                                         const BasisLimits& limits = {}) const;

 private:
  /// (4/3) alpha^3 omega^3 S / g_a in s^-1, with omega from |E_a - E_b|.
  double emission_coefficient(StateLabel a, StateLabel b) const;

  MatrixElementCache* cache_;
};

}  // namespace rydlife
