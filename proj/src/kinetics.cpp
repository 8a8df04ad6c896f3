#include "rydlife/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "rydlife/error.hpp"
#include "rydlife/units.hpp"

namespace rydlife {

StateBasis::StateBasis(StateLabel target, std::vector<BasisMember> members, int n_window, int l_max,
                       int n_min_detect)
    : target_(target), members_(std::move(members)), n_window_(n_window), l_max_(l_max), n_min_detect_(n_min_detect) {
  if (members_.empty()) throw ConfigError("state basis is empty");
  std::size_t found = 0;
  n_lo_ = members_.front().state.n;
  n_hi_ = members_.front().state.n;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i > 0 && !(members_[i - 1].state < members_[i].state)) {
      throw ConfigError("basis members must be unique and ordered");
    }
    if (members_[i].state == target_) {
      target_index_ = i;
      ++found;
    }
    n_lo_ = std::min(n_lo_, members_[i].state.n);
    n_hi_ = std::max(n_hi_, members_[i].state.n);
  }
  if (found != 1) throw ConfigError("target " + to_string(target_) + " must appear exactly once in the basis");
}

std::optional<std::size_t> StateBasis::index_of(StateLabel s) const {
  const auto it = std::lower_bound(members_.begin(), members_.end(), s,
                                   [](const BasisMember& m, const StateLabel& v) { return m.state < v; });
  if (it == members_.end() || it->state != s) return std::nullopt;
  return static_cast<std::size_t>(it - members_.begin());
}

StateBasis build_basis(const RydbergAtom& atom, StateLabel target, int n_window, int l_max, int n_min_detect) {
  if (l_max < 0 || l_max > QuantumDefectTable::kMaxL) throw ConfigError("l_max must be in [0, 3]");
  if (n_window < 1) throw ConfigError("n_window must be >= 1");
  atom.require_state(target);
  if (target.l > l_max) throw ConfigError("target " + to_string(target) + " lies outside l_max");

  std::vector<BasisMember> members;
  for (int n = std::max(1, target.n - n_window); n <= target.n + n_window; ++n) {
    for (int l = 0; l <= l_max; ++l) {
      for (int two_j = 2 * l - 1; two_j <= 2 * l + 1; two_j += 2) {
        const StateLabel s{n, l, two_j};
        if (atom.has_state(s)) members.push_back({s, n >= n_min_detect});
      }
    }
  }
  if (members.empty()) throw ConfigError("state basis is empty");
  StateBasis basis(target, std::move(members), n_window, l_max, n_min_detect);

  // An S-only ladder has no dipole couplings; otherwise every member must
  // reach at least one other member.
  if (l_max >= 1) {
    for (const auto& m : basis.members()) {
      const auto partners = atom.dipole_partners(m.state, basis.n_lo(), basis.n_hi(), l_max);
      if (partners.empty()) throw ConfigError("basis member " + to_string(m.state) + " is isolated");
    }
  }
  return basis;
}

RateMatrix build_rate_matrix(const StateBasis& basis, const EnvironmentConfig& env, const RateCalculator& rates) {
  env.validate();
  const auto dim = static_cast<Eigen::Index>(basis.size() + 1);
  const auto sink = static_cast<Eigen::Index>(basis.sink_index());
  RateMatrix m{Eigen::MatrixXd::Zero(dim, dim)};
  const auto& atom = rates.atom();

  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto a = basis.members()[i].state;
    const auto col = static_cast<Eigen::Index>(i);
    for (const auto& ch : rates.spontaneous_channels(a)) {
      const auto j = basis.index_of(ch.to);
      if (j) {
        m.generator(static_cast<Eigen::Index>(*j), col) += ch.rate;
      } else {
        // Lower levels outside the basis also take the stimulated emission.
        m.generator(sink, col) += ch.rate + (env.temperature_k > 0.0 ? rates.bbr_rate(a, ch.to, env) : 0.0);
      }
    }
    if (env.temperature_k > 0.0) {
      for (const auto& b : atom.dipole_partners(a, basis.n_lo(), basis.n_hi(), basis.l_max())) {
        const auto j = basis.index_of(b);
        if (!j) continue;
        m.generator(static_cast<Eigen::Index>(*j), col) += rates.bbr_rate(a, b, env);
      }
    }
    double out = 0.0;
    for (Eigen::Index r = 0; r < dim; ++r) {
      if (r != col) out += m.generator(r, col);
    }
    m.generator(col, col) = -out;
  }
  return m;
}

PopulationTrajectory evolve(const Eigen::VectorXd& initial, const RateMatrix& matrix,
                            std::span<const double> times_us) {
  const auto dim = matrix.generator.rows();
  if (initial.size() != dim) throw ConfigError("initial population has wrong dimension");
  if ((initial.array() < 0.0).any() || std::abs(initial.sum() - 1.0) > 1e-9) {
    throw ConfigError("initial populations must be >= 0 and sum to 1");
  }
  for (std::size_t k = 0; k < times_us.size(); ++k) {
    if (times_us[k] < 0.0 || (k > 0 && times_us[k] < times_us[k - 1])) {
      throw ConfigError("time grid must be nonnegative and sorted");
    }
  }

  PopulationTrajectory traj;
  traj.times_us.assign(times_us.begin(), times_us.end());
  traj.populations.resize(dim, static_cast<Eigen::Index>(times_us.size()));

  std::vector<std::pair<double, Eigen::MatrixXd>> propagators;
  auto propagator = [&](double dt_us) -> const Eigen::MatrixXd& {
    for (const auto& [dt, p] : propagators) {
      if (std::abs(dt - dt_us) <= 1e-12 * std::max(dt, dt_us)) return p;
    }
    const Eigen::MatrixXd scaled = matrix.generator * (dt_us * units::kSecondsPerMicrosecond);
    propagators.emplace_back(dt_us, scaled.exp());
    return propagators.back().second;
  };

  Eigen::VectorXd p = initial;
  double t = 0.0;
  for (std::size_t k = 0; k < times_us.size(); ++k) {
    const double dt = times_us[k] - t;
    if (dt > 0.0) p = propagator(dt) * p;
    t = times_us[k];
    const double total = p.sum();
    if (!p.allFinite() || std::abs(total - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "population not conserved at t=" << t << " us: total=" << total << " (step " << dt
          << " us, generator max |entry| " << matrix.max_abs_entry() << " s^-1)";
      throw NumericError(msg.str());
    }
    traj.populations.col(static_cast<Eigen::Index>(k)) = p;
  }
  return traj;
}

ObservableSeries observables(const PopulationTrajectory& trajectory, const StateBasis& basis) {
  return observables(trajectory, basis, basis.n_min_detect());
}

ObservableSeries observables(const PopulationTrajectory& trajectory, const StateBasis& basis, int n_min_detect) {
  if (trajectory.populations.rows() != static_cast<Eigen::Index>(basis.size() + 1)) {
    throw ConfigError("trajectory and basis dimensions differ");
  }
  ObservableSeries out;
  out.times_us = trajectory.times_us;
  const auto target = static_cast<Eigen::Index>(basis.target_index());
  for (Eigen::Index k = 0; k < trajectory.populations.cols(); ++k) {
    const auto col = trajectory.populations.col(k);
    double support = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (basis.members()[i].state.n >= n_min_detect && static_cast<Eigen::Index>(i) != target) {
        support += col(static_cast<Eigen::Index>(i));
      }
    }
    out.n_tar.push_back(col(target));
    out.n_supp.push_back(support);
    out.n_ens.push_back(col(target) + support);
  }
  return out;
}

std::array<double, 4> population_breakdown(const PopulationTrajectory& trajectory, const StateBasis& basis,
                                           double t_us) {
  const auto& times = trajectory.times_us;
  if (times.empty() || t_us < times.front() || t_us > times.back()) {
    throw ConfigError("breakdown time outside the trajectory grid");
  }
  const auto upper = std::lower_bound(times.begin(), times.end(), t_us);
  const auto hi = static_cast<Eigen::Index>(upper - times.begin());
  Eigen::VectorXd p = trajectory.populations.col(hi);
  if (*upper != t_us) {
    const auto lo = hi - 1;
    const double w = (t_us - times[lo]) / (times[hi] - times[lo]);
    p = (1.0 - w) * trajectory.populations.col(lo) + w * trajectory.populations.col(hi);
  }
  std::array<double, 4> shares{};
  double total = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& m = basis.members()[i];
    if (!m.detectable) continue;
    shares[static_cast<std::size_t>(m.state.l)] += p(static_cast<Eigen::Index>(i));
    total += p(static_cast<Eigen::Index>(i));
  }
  if (total > 0.0) {
    for (auto& s : shares) s /= total;
  }
  return shares;
}

void KineticsConfig::validate() const {
  if (l_max < 0 || l_max > QuantumDefectTable::kMaxL) throw ConfigError("l_max must be in [0, 3]");
  if (n_window < 1) throw ConfigError("n_window must be >= 1");
  if (time_points < 4) throw ConfigError("time_points must be >= 4");
  if (!(target_window_factor > 0.0) || !(ensemble_window_factor > 0.0)) {
    throw ConfigError("fit window factors must be positive");
  }
}

std::vector<double> uniform_grid(double end_us, int points) {
  if (points < 2 || !(end_us > 0.0)) throw ConfigError("time grid needs >= 2 points and a positive end");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = end_us * i / (points - 1);
  return grid;
}

KineticsModel::KineticsModel(const RateCalculator& rates, StateLabel target, EnvironmentConfig env,
                             KineticsConfig config)
    : env_(std::move(env)),
      config_(config),
      basis_((config_.validate(), build_basis(rates.atom(), target, config_.n_window, config_.l_max,
                                              config_.n_min_detect))),
      matrix_(build_rate_matrix(basis_, env_, rates)) {
  const auto t = static_cast<Eigen::Index>(basis_.target_index());
  tau_zero_us_ = 1.0 / rates.spontaneous_total(target) / units::kSecondsPerMicrosecond;
  tau_departure_us_ = 1.0 / -matrix_.generator(t, t) / units::kSecondsPerMicrosecond;
}

Eigen::VectorXd KineticsModel::initial_populations() const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(matrix_.generator.rows());
  p(static_cast<Eigen::Index>(basis_.target_index())) = 1.0;
  return p;
}

PopulationTrajectory KineticsModel::evolve(std::span<const double> times_us) const {
  return rydlife::evolve(initial_populations(), matrix_, times_us);
}

ObservableSeries KineticsModel::observe(std::span<const double> times_us) const {
  return observables(evolve(times_us), basis_);
}

std::vector<double> KineticsModel::target_grid() const {
  return uniform_grid(target_window().end_us, config_.time_points);
}

std::vector<double> KineticsModel::ensemble_grid() const {
  return uniform_grid(ensemble_window().end_us, config_.time_points);
}

FitWindow KineticsModel::target_window() const { return {0.0, config_.target_window_factor * tau_departure_us_}; }

FitWindow KineticsModel::ensemble_window() const { return {0.0, config_.ensemble_window_factor * tau_zero_us_}; }

LifetimeFit KineticsModel::target_lifetime() const {
  const auto grid = target_grid();
  const auto series = observe(grid);
  return fit_exponential(series.times_us, series.n_tar, {}, target_window());
}

LifetimeFit KineticsModel::ensemble_lifetime() const {
  const auto grid = ensemble_grid();
  const auto series = observe(grid);
  return fit_exponential(series.times_us, series.n_ens, {}, ensemble_window());
}

LifetimeFit target_lifetime(const RateCalculator& rates, StateLabel target, const EnvironmentConfig& env,
                            const KineticsConfig& config) {
  return KineticsModel(rates, target, env, config).target_lifetime();
}

LifetimeFit ensemble_lifetime(const RateCalculator& rates, StateLabel target, const EnvironmentConfig& env,
                              const KineticsConfig& config) {
  return KineticsModel(rates, target, env, config).ensemble_lifetime();
}

}  // namespace rydlife
