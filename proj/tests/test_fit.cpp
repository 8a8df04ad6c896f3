#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rydlife/error.hpp"
#include "rydlife/fit.hpp"

using namespace rydlife;

namespace {

std::vector<double> grid(double end, int points) {
  std::vector<double> t;
  for (int i = 0; i < points; ++i) t.push_back(end * i / (points - 1));
  return t;
}

}  // namespace

TEST_CASE("noiseless exponential is recovered exactly") {
  for (double tau : {1.0, 100.0, 719.0}) {
    const auto t = grid(2.0 * tau, 41);
    std::vector<double> y;
    for (double x : t) y.push_back(3.7 * std::exp(-x / tau));
    const auto fit = fit_exponential(t, y);
    CHECK(std::abs(fit.tau_us / tau - 1.0) < 1e-6);
    CHECK(fit.amplitude == doctest::Approx(3.7).epsilon(1e-6));
    CHECK(fit.residual_rms < 1e-9);
    CHECK(fit.points == 41);
  }
}

TEST_CASE("window restricts the fitted points") {
  const auto t = grid(400.0, 41);
  std::vector<double> y;
  for (double x : t) y.push_back(x <= 200.0 ? std::exp(-x / 50.0) : 5.0);
  const auto fit = fit_exponential(t, y, {}, FitWindow{0.0, 200.0});
  CHECK(fit.points == 21);
  CHECK(fit.tau_us == doctest::Approx(50.0).epsilon(1e-6));
  CHECK(fit.window.end_us == 200.0);
}

TEST_CASE("reported uncertainty matches the scatter of repeated fits") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.02);
  const auto t = grid(200.0, 21);
  const std::vector<double> sigma(t.size(), 0.02);
  FitOptions options;
  options.absolute_sigma = true;
  double sum = 0.0, sum2 = 0.0, reported = 0.0;
  const int trials = 400;
  for (int k = 0; k < trials; ++k) {
    std::vector<double> y;
    for (double x : t) y.push_back(std::exp(-x / 100.0) + noise(rng));
    const auto fit = fit_exponential(t, y, sigma, FitWindow{0.0, 200.0}, options);
    sum += fit.tau_us;
    sum2 += fit.tau_us * fit.tau_us;
    reported += fit.sigma_tau_us;
  }
  const double mean = sum / trials;
  const double scatter = std::sqrt(sum2 / trials - mean * mean);
  CHECK(mean == doctest::Approx(100.0).epsilon(0.01));
  CHECK(reported / trials == doctest::Approx(scatter).epsilon(0.15));
}

TEST_CASE("relative weights are rescaled by the residuals") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto t = grid(300.0, 31);
  std::vector<double> y;
  for (double x : t) y.push_back(2.0 * std::exp(-x / 150.0) + noise(rng));
  const std::vector<double> tiny(t.size(), 1e-6);
  const auto scaled = fit_exponential(t, y, tiny, FitWindow{0.0, 300.0});
  const auto uniform = fit_exponential(t, y);
  CHECK(scaled.tau_us == doctest::Approx(uniform.tau_us).epsilon(1e-9));
  CHECK(scaled.sigma_tau_us == doctest::Approx(uniform.sigma_tau_us).epsilon(1e-6));
}

TEST_CASE("fit failures are reported") {
  const std::vector<double> t3{0.0, 1.0, 2.0};
  const std::vector<double> y3{1.0, 0.5, 0.25};
  CHECK_THROWS_AS(fit_exponential(t3, y3), FitError);

  const auto t = grid(10.0, 11);
  const std::vector<double> zeros(t.size(), 0.0);
  CHECK_THROWS_AS(fit_exponential(t, zeros), FitError);

  std::vector<double> y;
  for (double x : t) y.push_back(std::exp(-x));
  CHECK_THROWS_AS(fit_exponential(t, y, {}, FitWindow{20.0, 30.0}), FitError);
  const std::vector<double> short_sigma(3, 1.0);
  CHECK_THROWS_AS(fit_exponential(t, y, short_sigma, FitWindow{0.0, 10.0}), FitError);
  try {
    fit_exponential(t, zeros);
  } catch (const FitError& e) {
    CHECK(std::string(e.what()).size() > 10);
  }
}

TEST_CASE("negative points are allowed in the data") {
  // Reconstructed target counts can dip below zero at late times.
  const auto t = grid(300.0, 16);
  std::vector<double> y;
  for (std::size_t i = 0; i < t.size(); ++i) y.push_back(std::exp(-t[i] / 60.0) + (i % 2 ? -0.01 : 0.01));
  const auto fit = fit_exponential(t, y);
  CHECK(fit.tau_us == doctest::Approx(60.0).epsilon(0.05));
}
