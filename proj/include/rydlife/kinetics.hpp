#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rydlife/fit.hpp"
#include "rydlife/rates.hpp"

namespace rydlife {

struct BasisMember {
  StateLabel state;
  bool detectable = false;  // n >= n_min_detect
};

/// Levels with L <= l_max and |n - n_target| <= n_window, plus a sink that
/// collects population lost to lower levels outside the basis (spontaneous
/// and stimulated emission alike). The sink has index size().
class StateBasis {
 public:
  StateBasis(StateLabel target, std::vector<BasisMember> members, int n_window, int l_max, int n_min_detect);

  StateLabel target() const { return target_; }
  std::size_t target_index() const { return target_index_; }
  const std::vector<BasisMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  std::size_t sink_index() const { return members_.size(); }
  std::optional<std::size_t> index_of(StateLabel s) const;

  int n_window() const { return n_window_; }
  int l_max() const { return l_max_; }
  int n_min_detect() const { return n_min_detect_; }
  int n_lo() const { return n_lo_; }
  int n_hi() const { return n_hi_; }

 private:
  StateLabel target_;
  std::vector<BasisMember> members_;
  std::size_t target_index_ = 0;
  int n_window_;
  int l_max_;
  int n_min_detect_;
  int n_lo_ = 0;
  int n_hi_ = 0;
};

/// Throws ConfigError for l_max > 3, n_window < 1, or an empty basis.
StateBasis build_basis(const RydbergAtom& atom, StateLabel target, int n_window, int l_max, int n_min_detect);

/// Generator M of dP/dt = M P over basis + sink, in s^-1. M(b, a) is the
/// a -> b rate; every column sums to zero.
struct RateMatrix {
  Eigen::MatrixXd generator;

  double max_abs_entry() const { return generator.cwiseAbs().maxCoeff(); }
};

RateMatrix build_rate_matrix(const StateBasis& basis, const EnvironmentConfig& env, const RateCalculator& rates);

struct PopulationTrajectory {
  std::vector<double> times_us;
  /// Column k holds the populations (basis members, then sink) at times_us[k].
  Eigen::MatrixXd populations;
};

/// Propagates with the exact propagator exp(M dt), one per distinct step.
/// Throws NumericError if probability conservation drifts beyond 1e-9.
PopulationTrajectory evolve(const Eigen::VectorXd& initial, const RateMatrix& matrix,
                            std::span<const double> times_us);

struct ObservableSeries {
  std::vector<double> times_us;
  std::vector<double> n_ens;
  std::vector<double> n_tar;
  std::vector<double> n_supp;
};

/// N_tar, N_supp and N_ens; the support counts members with n >= n_min_detect
/// (the basis cutoff unless given).
ObservableSeries observables(const PopulationTrajectory& trajectory, const StateBasis& basis);
ObservableSeries observables(const PopulationTrajectory& trajectory, const StateBasis& basis, int n_min_detect);

/// Fraction of the detectable population in S, P, D, F at time t (linear
/// interpolation between grid points). Zero shares when nothing detectable
/// survives.
std::array<double, 4> population_breakdown(const PopulationTrajectory& trajectory, const StateBasis& basis,
                                           double t_us);

struct KineticsConfig {
  int n_window = 40;
  int l_max = 3;
  int n_min_detect = 60;
  /// Samples per fit window.
  int time_points = 41;
  /// Target fit window is [0, factor * departure lifetime].
  double target_window_factor = 2.0;
  /// Ensemble fit window is [0, factor / Gamma_0].
  double ensemble_window_factor = 2.0;

  void validate() const;
};

/// One target level in one environment: basis, generator and the derived
/// lifetimes. Evolution always starts with unit population in the target.
class KineticsModel {
 public:
  KineticsModel(const RateCalculator& rates, StateLabel target, EnvironmentConfig env, KineticsConfig config = {});

  const StateBasis& basis() const { return basis_; }
  const RateMatrix& matrix() const { return matrix_; }
  const EnvironmentConfig& environment() const { return env_; }
  const KineticsConfig& config() const { return config_; }

  /// 1 / Gamma_0 of the target, us.
  double zero_temperature_lifetime_us() const { return tau_zero_us_; }
  /// 1 / (Gamma_0 + BBR departure) of the target, us.
  double departure_lifetime_us() const { return tau_departure_us_; }

  Eigen::VectorXd initial_populations() const;
  PopulationTrajectory evolve(std::span<const double> times_us) const;
  ObservableSeries observe(std::span<const double> times_us) const;

  std::vector<double> target_grid() const;
  std::vector<double> ensemble_grid() const;
  FitWindow target_window() const;
  FitWindow ensemble_window() const;

  LifetimeFit target_lifetime() const;
  LifetimeFit ensemble_lifetime() const;

 private:
  EnvironmentConfig env_;
  KineticsConfig config_;
  StateBasis basis_;
  RateMatrix matrix_;
  double tau_zero_us_ = 0.0;
  double tau_departure_us_ = 0.0;
};

/// Uniform grid of `points` samples over [0, end].
std::vector<double> uniform_grid(double end_us, int points);

LifetimeFit target_lifetime(const RateCalculator& rates, StateLabel target, const EnvironmentConfig& env,
                            const KineticsConfig& config = {});
LifetimeFit ensemble_lifetime(const RateCalculator& rates, StateLabel target, const EnvironmentConfig& env,
                              const KineticsConfig& config = {});

}  // namespace rydlife
