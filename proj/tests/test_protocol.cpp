#include <cmath>
#include <vector>

#include "doctest.h"
#include "rydlife/error.hpp"
#include "rydlife/protocol.hpp"
#include "test_support.hpp"

using namespace rydlife;
using rydlife::testing::rb87_rates;

namespace {

const KineticsModel& model_80s() {
  static const KineticsModel model(rb87_rates(), make_state(80, 0, 1), EnvironmentConfig{});
  return model;
}

ProtocolConfig paper_scale() {
  ProtocolConfig c;
  c.times_us = uniform_grid(model_80s().target_window().end_us, 11);
  return c;
}

double mean(const std::vector<int>& v) {
  double s = 0.0;
  for (int x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("identical seeds give identical datasets") {
  const auto cfg = paper_scale();
  const auto a = simulate_dataset(model_80s(), cfg);
  const auto b = simulate_dataset(model_80s(), cfg);
  CHECK(a.counts_a == b.counts_a);
  CHECK(a.counts_b == b.counts_b);
  auto other = cfg;
  other.seed = cfg.seed + 1;
  CHECK(simulate_dataset(model_80s(), other).counts_a != a.counts_a);
  CHECK(a.target == "80S1/2");
  CHECK(a.counts_a.size() == cfg.times_us.size());
  CHECK(a.counts_a.front().size() == static_cast<std::size_t>(cfg.shots));
}

TEST_CASE("trivial limits of the sampler") {
  auto cfg = paper_scale();
  cfg.alpha = 1.0;
  cfg.times_us = {0.0, 10.0, 20.0, 30.0};
  const auto d = simulate_dataset(model_80s(), cfg);
  for (int c : d.counts_b.front()) CHECK(c == 0);

  cfg.eta = 0.0;
  const auto dark = simulate_dataset(model_80s(), cfg);
  for (const auto& point : dark.counts_a) {
    for (int c : point) CHECK(c == 0);
  }
}

TEST_CASE("branch-A mean converges to eta N0 N_ens") {
  auto cfg = paper_scale();
  cfg.shots = 100000;
  cfg.times_us = {0.0, 100.0, 300.0, 600.0};
  const auto truth = model_80s().observe(cfg.times_us);
  const auto d = simulate_dataset(truth, cfg);
  for (std::size_t k = 0; k < cfg.times_us.size(); ++k) {
    const double expected = cfg.eta * cfg.initial_atoms * truth.n_ens[k];
    // Thinned Poisson counts: variance equals the mean.
    const double se = std::sqrt(expected / cfg.shots);
    CHECK(std::abs(mean(d.counts_a[k]) - expected) <= 3.0 * se);
    const double expected_b =
        cfg.eta * cfg.initial_atoms * ((1.0 - cfg.alpha) * truth.n_tar[k] + truth.n_supp[k]);
    CHECK(std::abs(mean(d.counts_b[k]) - expected_b) <= 3.0 * std::sqrt(expected_b / cfg.shots));
  }
}

TEST_CASE("reconstruction identities") {
  const auto r1 = reconstruct(3.0, 0.1, 1.0, 0.1, 1.0);
  CHECK(r1.n_tar == doctest::Approx(2.0));
  CHECK(r1.n_supp == doctest::Approx(1.0));
  const auto r0 = reconstruct(2.5, 0.1, 2.5, 0.1, 0.9);
  CHECK(r0.n_tar == 0.0);
  CHECK_FALSE(r0.negative);
  CHECK_THROWS_AS(reconstruct(1.0, 0.1, 0.5, 0.1, 0.0), ConfigError);
  CHECK_THROWS_AS(reconstruct(1.0, 0.1, 0.5, 0.1, 1.5), ConfigError);

  // Exact expectations map back to the kinetics populations.
  const auto truth = model_80s().observe(std::vector<double>{0.0, 150.0, 400.0});
  const double alpha = 0.93;
  for (std::size_t k = 0; k < truth.times_us.size(); ++k) {
    const double n = truth.n_ens[k];
    const double np = (1.0 - alpha) * truth.n_tar[k] + truth.n_supp[k];
    const auto r = reconstruct(n, 0.0, np, 0.0, alpha);
    CHECK(r.n_tar == doctest::Approx(truth.n_tar[k]).epsilon(1e-12));
    CHECK(r.n_supp == doctest::Approx(truth.n_supp[k]).epsilon(1e-10));
  }
}

TEST_CASE("reconstruction error propagation") {
  const double n = 2.0, sn = 0.2, np = 0.8, snp = 0.15, alpha = 0.95, sa = 0.03;
  const auto r = reconstruct(n, sn, np, snp, alpha, sa);
  // Finite-difference partial derivatives as the reference.
  const double h = 1e-6;
  auto tar = [](double a, double b, double al) { return (a - b) / al; };
  const double d_n = (tar(n + h, np, alpha) - tar(n - h, np, alpha)) / (2 * h);
  const double d_np = (tar(n, np + h, alpha) - tar(n, np - h, alpha)) / (2 * h);
  const double d_a = (tar(n, np, alpha + h) - tar(n, np, alpha - h)) / (2 * h);
  const double expected = std::sqrt(d_n * d_n * sn * sn + d_np * d_np * snp * snp + d_a * d_a * sa * sa);
  CHECK(r.sigma_tar == doctest::Approx(expected).epsilon(1e-6));
  CHECK(r.sigma_supp > 0.0);
}

TEST_CASE("negative target estimates are kept and flagged") {
  const auto small = reconstruct(1.0, 0.2, 1.1, 0.2, 0.95);
  CHECK(small.negative);
  CHECK_FALSE(small.beyond_noise);
  CHECK(small.n_tar < 0.0);
  const auto large = reconstruct(1.0, 0.05, 1.5, 0.05, 0.95);
  CHECK(large.negative);
  CHECK(large.beyond_noise);

  SyntheticDataset d;
  d.config = paper_scale();
  d.config.shots = 2;
  d.config.times_us = {0.0, 10.0, 20.0, 30.0, 40.0};
  d.counts_a = {{4, 4}, {3, 3}, {2, 3}, {2, 2}, {0, 0}};
  d.counts_b = {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 1}};
  const auto est = estimate_lifetimes(d);
  CHECK(est.n_tar.back() < 0.0);
  REQUIRE(est.warnings.size() == 1);
  CHECK(est.warnings.front().find("t=40") != std::string::npos);
}

TEST_CASE("noiseless limit recovers the kinetics lifetimes") {
  auto cfg = paper_scale();
  cfg.eta = 1.0;
  cfg.alpha = 1.0;
  cfg.alpha_sigma = 0.0;
  cfg.shots = 200000;
  const auto est = estimate_lifetimes(simulate_dataset(model_80s(), cfg));
  const auto truth = model_80s().observe(cfg.times_us);
  const auto tar_truth = fit_exponential(truth.times_us, truth.n_tar);
  const auto ens_truth = fit_exponential(truth.times_us, truth.n_ens);
  CHECK(est.target_fit.tau_us == doctest::Approx(tar_truth.tau_us).epsilon(0.01));
  CHECK(est.ensemble_fit.tau_us == doctest::Approx(ens_truth.tau_us).epsilon(0.01));
  CHECK(est.n_ens.front() == doctest::Approx(cfg.initial_atoms).epsilon(0.01));
}

TEST_CASE("round trip at paper-scale noise") {
  const auto cfg = paper_scale();
  const auto est = estimate_lifetimes(simulate_dataset(model_80s(), cfg));
  const double oracle = model_80s().target_lifetime().tau_us;
  CHECK(std::abs(est.target_fit.tau_us - oracle) <= 2.0 * est.target_fit.sigma_tau_us);
  CHECK(est.times_us == cfg.times_us);
  for (std::size_t k = 0; k < est.times_us.size(); ++k) {
    CHECK(est.sigma_ens[k] >= 0.0);
    CHECK(est.sigma_tar[k] >= 0.0);
    CHECK(est.n_ens[k] == doctest::Approx(est.n_tar[k] + est.n_supp[k]));
    const double fit_diff = est.ensemble_fit.amplitude * std::exp(-est.times_us[k] / est.ensemble_fit.tau_us) -
                            est.target_fit.amplitude * std::exp(-est.times_us[k] / est.target_fit.tau_us);
    CHECK(est.support_from_fits[k] == doctest::Approx(fit_diff));
  }
}

TEST_CASE("depump efficiency uncertainty does not change the fitted lifetime") {
  auto cfg = paper_scale();
  const auto d = simulate_dataset(model_80s(), cfg);
  auto d2 = d;
  d2.config.alpha_sigma = 0.2;
  const auto a = estimate_lifetimes(d);
  const auto b = estimate_lifetimes(d2);
  CHECK(a.target_fit.tau_us == b.target_fit.tau_us);
  CHECK(b.sigma_tar[0] > a.sigma_tar[0]);
}

TEST_CASE("alpha drift biases the target lifetime monotonically") {
  auto cfg = paper_scale();
  cfg.eta = 1.0;
  cfg.shots = 20000;
  double previous = 1e300;
  for (double drift : {0.0, 0.5, 1.0, 2.0}) {
    cfg.alpha_drift_per_ms = drift;
    const double tau = estimate_lifetimes(simulate_dataset(model_80s(), cfg)).target_fit.tau_us;
    CHECK(tau < previous);
    previous = tau;
  }
  CHECK(cfg.effective_alpha(1000.0) == doctest::Approx(cfg.alpha * std::exp(-2.0)));
}

TEST_CASE("protocol configuration validation") {
  ProtocolConfig c;
  c.times_us = {0.0, 1.0};
  CHECK_NOTHROW(c.validate());
  c.alpha = 1.2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.alpha = 0.9;
  c.eta = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.eta = 0.4;
  c.shots = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.shots = 10;
  c.times_us = {5.0, 1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.times_us = {0.0, 1.0, 2.0};
  SyntheticDataset d;
  d.config = c;
  CHECK_THROWS_AS(estimate_lifetimes(d), FitError);
  ObservableSeries wrong;
  wrong.times_us = {0.0};
  wrong.n_tar = {1.0};
  wrong.n_supp = {0.0};
  wrong.n_ens = {1.0};
  CHECK_THROWS_AS(simulate_dataset(wrong, c), ConfigError);
}
