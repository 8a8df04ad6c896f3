#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rydlife/error.hpp"
#include "rydlife/kinetics.hpp"
#include "test_support.hpp"

using namespace rydlife;
using rydlife::testing::rb87;
using rydlife::testing::rb87_rates;

namespace {

const KineticsModel& model_72s_300k() {
  static const KineticsModel model(rb87_rates(), make_state(72, 0, 1), EnvironmentConfig{});
  return model;
}

}  // namespace

TEST_CASE("basis construction") {
  const auto basis = build_basis(rb87(), make_state(72, 0, 1), 10, 3, 60);
  CHECK(basis.n_lo() == 62);
  CHECK(basis.n_hi() == 82);
  CHECK(basis.size() == 21 * 7);
  CHECK(basis.sink_index() == basis.size());
  CHECK(basis.members()[basis.target_index()].state == make_state(72, 0, 1));
  CHECK(basis.index_of(make_state(70, 2, 3)).has_value());
  CHECK_FALSE(basis.index_of(make_state(90, 0, 1)).has_value());
  for (const auto& m : basis.members()) CHECK(m.detectable == (m.state.n >= 60));

  const auto s_only = build_basis(rb87(), make_state(72, 0, 1), 2, 0, 60);
  CHECK(s_only.size() == 5);

  CHECK_THROWS_AS(build_basis(rb87(), make_state(72, 0, 1), 10, 4, 60), ConfigError);
  CHECK_THROWS_AS(build_basis(rb87(), make_state(72, 0, 1), 0, 3, 60), ConfigError);
  CHECK_THROWS_AS(build_basis(rb87(), make_state(72, 2, 5), 10, 1, 60), ConfigError);
  CHECK_THROWS_AS(build_basis(rb87(), StateLabel{72, 4, 9}, 10, 3, 60), UnsupportedStateError);
}

TEST_CASE("generator columns sum to zero") {
  const auto& m = model_72s_300k().matrix().generator;
  const double tol = 1e-12 * model_72s_300k().matrix().max_abs_entry();
  for (Eigen::Index c = 0; c < m.cols(); ++c) CHECK(std::abs(m.col(c).sum()) <= tol);
  // Off-diagonal rates are nonnegative and the sink never empties.
  double min_off_diagonal = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r != c) min_off_diagonal = std::min(min_off_diagonal, m(r, c));
    }
  }
  CHECK(min_off_diagonal == 0.0);
  CHECK(m.col(m.cols() - 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("probability is conserved over the full horizon") {
  const auto& model = model_72s_300k();
  const auto traj = model.evolve(uniform_grid(10.0 * model.zero_temperature_lifetime_us(), 21));
  for (Eigen::Index k = 0; k < traj.populations.cols(); ++k) {
    CHECK(std::abs(traj.populations.col(k).sum() - 1.0) <= 1e-9);
    CHECK(traj.populations.col(k).minCoeff() >= -1e-12);
  }
}

TEST_CASE("three-level cascade matches the closed form") {
  // a -> b at k1, b -> sink at k2, a -> sink at k3 (rates in s^-1).
  const double k1 = 3000.0, k2 = 1200.0, k3 = 500.0;
  RateMatrix m{Eigen::MatrixXd::Zero(3, 3)};
  m.generator(1, 0) = k1;
  m.generator(2, 0) = k3;
  m.generator(0, 0) = -(k1 + k3);
  m.generator(2, 1) = k2;
  m.generator(1, 1) = -k2;
  Eigen::VectorXd p0(3);
  p0 << 1.0, 0.0, 0.0;
  std::vector<double> times;
  for (int i = 0; i <= 30; ++i) times.push_back(i * i * 2.0);  // nonuniform steps
  const auto traj = evolve(p0, m, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k] * 1e-6;
    const double ka = k1 + k3;
    const double pa = std::exp(-ka * t);
    const double pb = k1 / (k2 - ka) * (std::exp(-ka * t) - std::exp(-k2 * t));
    const auto col = traj.populations.col(static_cast<Eigen::Index>(k));
    CHECK(std::abs(col(0) - pa) <= 1e-8);
    CHECK(std::abs(col(1) - pb) <= 1e-8);
    CHECK(std::abs(col(2) - (1.0 - pa - pb)) <= 1e-8);
  }
}

TEST_CASE("two-level exchange relaxes to detailed balance") {
  RateMatrix m{Eigen::MatrixXd::Zero(2, 2)};
  const double up = 100.0, down = 300.0;
  m.generator << -up, down, up, -down;
  Eigen::VectorXd p0(2);
  p0 << 1.0, 0.0;
  const std::vector<double> times{0.0, 1000.0, 5000.0, 100000.0};
  const auto traj = evolve(p0, m, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k] * 1e-6;
    const double expected = down / (up + down) + up / (up + down) * std::exp(-(up + down) * t);
    CHECK(traj.populations(0, static_cast<Eigen::Index>(k)) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("evolve validates its inputs") {
  RateMatrix m{Eigen::MatrixXd::Zero(2, 2)};
  Eigen::VectorXd p(2);
  p << 1.0, 0.0;
  const std::vector<double> unsorted{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(evolve(p, m, unsorted), ConfigError);
  const std::vector<double> negative{-1.0};
  CHECK_THROWS_AS(evolve(p, m, negative), ConfigError);
  Eigen::VectorXd bad(2);
  bad << 0.7, 0.7;
  const std::vector<double> ok{0.0};
  CHECK_THROWS_AS(evolve(bad, m, ok), ConfigError);
  Eigen::VectorXd wrong(3);
  wrong << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(evolve(wrong, m, ok), ConfigError);
}

TEST_CASE("zero temperature collapses to single exponential decay") {
  EnvironmentConfig cold;
  cold.temperature_k = 0.0;
  const KineticsModel model(rb87_rates(), make_state(72, 0, 1), cold);
  const double gamma0 = rb87_rates().spontaneous_total(make_state(72, 0, 1));
  CHECK(model.departure_lifetime_us() == doctest::Approx(model.zero_temperature_lifetime_us()).epsilon(1e-12));
  const auto grid = uniform_grid(3.0 * model.zero_temperature_lifetime_us(), 16);
  const auto series = model.observe(grid);
  // Without black-body transfer the support is fed only by direct
  // spontaneous decay into detectable lower levels.
  double detectable_branch = 0.0;
  for (const auto& ch : rb87_rates().spontaneous_channels(make_state(72, 0, 1))) {
    if (ch.to.n >= 60) detectable_branch += ch.rate / gamma0;
  }
  CHECK(detectable_branch < 0.01);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(series.n_tar[k] - std::exp(-gamma0 * grid[k] * 1e-6)) <= 1e-6);
    CHECK(series.n_supp[k] <= detectable_branch + 1e-12);
  }
  const double tau0 = model.zero_temperature_lifetime_us();
  CHECK(model.target_lifetime().tau_us == doctest::Approx(tau0).epsilon(1e-6));
  CHECK(model.ensemble_lifetime().tau_us == doctest::Approx(tau0).epsilon(0.02));
}

TEST_CASE("target lifetime exceeds the departure lifetime by re-population") {
  const auto& model = model_72s_300k();
  const auto fit = model.target_lifetime();
  const double ratio = fit.tau_us / model.departure_lifetime_us();
  CHECK(ratio > 1.0);
  CHECK(ratio < 1.12);
  CHECK(model.ensemble_lifetime().tau_us > fit.tau_us);
  CHECK(model.departure_lifetime_us() <
        rb87_rates().effective_lifetime_departure_us(make_state(72, 0, 1), EnvironmentConfig{}) * 1.01);
}

TEST_CASE("results are insensitive to grid density and fit window") {
  const auto& model = model_72s_300k();
  const double base = model.target_lifetime().tau_us;

  KineticsConfig dense;
  dense.time_points = 81;
  const KineticsModel dense_model(rb87_rates(), make_state(72, 0, 1), EnvironmentConfig{}, dense);
  CHECK(std::abs(dense_model.target_lifetime().tau_us / base - 1.0) < 0.002);

  KineticsConfig short_window;
  short_window.target_window_factor = 1.0;
  const KineticsModel short_model(rb87_rates(), make_state(72, 0, 1), EnvironmentConfig{}, short_window);
  CHECK(std::abs(short_model.target_lifetime().tau_us / base - 1.0) < 0.05);
}

TEST_CASE("basis window sensitivity") {
  KineticsConfig wide;
  wide.n_window = 60;
  const KineticsModel wide_model(rb87_rates(), make_state(72, 0, 1), EnvironmentConfig{}, wide);
  const auto& model = model_72s_300k();
  CHECK(std::abs(wide_model.target_lifetime().tau_us / model.target_lifetime().tau_us - 1.0) < 0.01);
  CHECK(std::abs(wide_model.ensemble_lifetime().tau_us / model.ensemble_lifetime().tau_us - 1.0) < 0.01);
}

TEST_CASE("detection cutoff controls the support") {
  const auto& model = model_72s_300k();
  const auto traj = model.evolve(uniform_grid(300.0, 7));
  const auto all = observables(traj, model.basis(), 1);
  const auto none = observables(traj, model.basis(), 1000);
  const auto standard = observables(traj, model.basis());
  for (std::size_t k = 0; k < all.times_us.size(); ++k) {
    CHECK(none.n_supp[k] == 0.0);
    CHECK(none.n_ens[k] == none.n_tar[k]);
    CHECK(standard.n_supp[k] <= all.n_supp[k] + 1e-15);
    CHECK(standard.n_ens[k] == doctest::Approx(standard.n_tar[k] + standard.n_supp[k]));
  }
}

TEST_CASE("population breakdown by L") {
  const auto& model = model_72s_300k();
  const auto traj = model.evolve(uniform_grid(400.0, 9));
  const auto at0 = population_breakdown(traj, model.basis(), 0.0);
  CHECK(at0[0] == doctest::Approx(1.0));
  const auto later = population_breakdown(traj, model.basis(), 125.0);  // between grid points
  CHECK(later[0] + later[1] + later[2] + later[3] == doctest::Approx(1.0));
  CHECK(later[1] > later[2]);  // S couples directly to P only
  CHECK_THROWS_AS(population_breakdown(traj, model.basis(), 500.0), ConfigError);
}

TEST_CASE("kinetics configuration validation") {
  KineticsConfig bad;
  bad.time_points = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = KineticsConfig{};
  bad.target_window_factor = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(uniform_grid(0.0, 10), ConfigError);
  CHECK(uniform_grid(10.0, 3) == std::vector<double>{0.0, 5.0, 10.0});
}
