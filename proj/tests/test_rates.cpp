#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "rydlife/error.hpp"
#include "rydlife/rates.hpp"
#include "test_support.hpp"

using namespace rydlife;
using rydlife::testing::rb87;
using rydlife::testing::rb87_rates;

TEST_CASE("Planck occupation") {
  // Independent evaluation with SI constants written out here.
  const long double h = 6.62607015e-34L;
  const long double kb = 1.380649e-23L;
  const long double x = h * 10e9L / (kb * 300.0L);
  const double expected = static_cast<double>(1.0L / (std::exp(x) - 1.0L));
  CHECK(planck_occupation(10e9, 300.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(planck_occupation(10e9, 300.0) == doctest::Approx(624.7).epsilon(1e-3));
  CHECK(planck_occupation(10e9, 0.0) == 0.0);
  CHECK(planck_occupation(1e6, 300.0) == doctest::Approx(static_cast<double>(kb * 300.0L / (h * 1e6L)) - 0.5).epsilon(1e-9));
  CHECK(planck_occupation(5e15, 300.0) < 1e-300);
}

TEST_CASE("hydrogen 2p lifetime") {
  const auto& h = rydlife::testing::hydrogen();
  MatrixElementCache cache(h);
  RateCalculator rates(cache);
  // A(2p -> 1s) = 6.2649e8 s^-1 for an infinitely heavy nucleus.
  CHECK(rates.einstein_a(make_state(2, 1, 3), make_state(1, 0, 1)) == doctest::Approx(6.2649e8).epsilon(1e-3));
  CHECK(rates.spontaneous_total(make_state(2, 1, 1)) == doctest::Approx(6.2649e8).epsilon(1e-3));
}

TEST_CASE("Einstein A input checks") {
  auto& rates = rb87_rates();
  CHECK_THROWS_AS(rates.einstein_a(make_state(60, 0, 1), make_state(61, 1, 1)), Error);
  CHECK_THROWS_AS(rates.einstein_a(make_state(60, 0, 1), make_state(59, 0, 1)), SelectionRuleError);
  CHECK_THROWS_AS(rates.einstein_a(make_state(60, 1, 1), make_state(59, 2, 5)), SelectionRuleError);
}

TEST_CASE("spontaneous decay channels") {
  auto& rates = rb87_rates();
  const auto s = make_state(70, 0, 1);
  const auto channels = rates.spontaneous_channels(s);
  double total = 0.0;
  double low = 0.0;
  for (const auto& ch : channels) {
    CHECK(ch.rate > 0.0);
    CHECK(ch.to.l == 1);
    CHECK(rb87().binding_energy_hz(ch.to) < rb87().binding_energy_hz(s));
    total += ch.rate;
    if (ch.to.n >= 5 && ch.to.n <= 17) low += ch.rate;
  }
  CHECK(total == doctest::Approx(rates.spontaneous_total(s)));
  CHECK(low / total >= 0.90);
  // nP lies above nS, so every P level from 5P to 69P appears in both J components.
  CHECK(channels.size() == 2 * (69 - 5 + 1));
}

TEST_CASE("zero-temperature lifetime scales as n*^3") {
  auto& rates = rb87_rates();
  std::vector<double> x, y;
  for (int n = 60; n <= 88; n += 7) {
    const auto s = make_state(n, 0, 1);
    x.push_back(std::log(rb87().effective_n(s)));
    y.push_back(std::log(1.0 / rates.spontaneous_total(s)));
  }
  const double slope = (y.back() - y.front()) / (x.back() - x.front());
  CHECK(slope == doctest::Approx(3.0).epsilon(0.10));
}

TEST_CASE("black-body rates obey degeneracy-weighted detailed balance") {
  auto& rates = rb87_rates();
  const EnvironmentConfig env;
  const std::pair<StateLabel, StateLabel> pairs[] = {
      {make_state(72, 0, 1), make_state(72, 1, 3)},
      {make_state(72, 0, 1), make_state(71, 1, 1)},
      {make_state(60, 1, 3), make_state(58, 2, 5)},
      {make_state(85, 2, 3), make_state(86, 3, 5)},
  };
  for (const auto& [a, b] : pairs) {
    const double ab = a.degeneracy() * rates.bbr_rate(a, b, env);
    const double ba = b.degeneracy() * rates.bbr_rate(b, a, env);
    CHECK(std::abs(ab - ba) <= 1e-12 * std::abs(ab));
  }
}

TEST_CASE("black-body rates equal A times occupation for downward transitions") {
  auto& rates = rb87_rates();
  const EnvironmentConfig env;
  const auto a = make_state(72, 0, 1);
  const auto b = make_state(71, 1, 3);
  const double nu = rb87().transition_frequency_hz(a, b);
  CHECK(rates.bbr_rate(a, b, env) == doctest::Approx(rates.einstein_a(a, b) * planck_occupation(nu, 300.0)));
  const auto tr = rates.transition_rate(a, b, env);
  CHECK(tr.spontaneous == doctest::Approx(rates.einstein_a(a, b)));
  CHECK(tr.bbr_stimulated == doctest::Approx(rates.bbr_rate(a, b, env)));
  CHECK(rates.transition_rate(b, a, env).spontaneous == 0.0);
}

TEST_CASE("black-body rates are linear in the spectral weight") {
  auto& rates = rb87_rates();
  EnvironmentConfig base;
  EnvironmentConfig half;
  half.spectral_weight = SpectralWeight({{0.0, 0.5}, {1e16, 0.5}});
  EnvironmentConfig zero;
  zero.spectral_weight = SpectralWeight({{0.0, 0.0}, {1e16, 0.0}});
  const auto a = make_state(80, 0, 1);
  for (const auto& b : rb87().dipole_partners(a, 75, 85, 1)) {
    CHECK(rates.bbr_rate(a, b, half) == doctest::Approx(0.5 * rates.bbr_rate(a, b, base)).epsilon(1e-14));
    CHECK(rates.bbr_rate(a, b, zero) == 0.0);
  }
  EnvironmentConfig cold;
  cold.temperature_k = 0.0;
  CHECK(rates.bbr_departure_total(a, cold) == 0.0);
}

TEST_CASE("black-body departure converges within the window") {
  auto& rates = rb87_rates();
  const EnvironmentConfig env;
  const auto s = make_state(85, 0, 1);
  const auto dep = rates.bbr_departure(s, env, {40, 3});
  CHECK(dep.outer_shell_fraction < 1e-2);
  const double wide = rates.bbr_departure_total(s, env, {100, 3});
  CHECK(dep.total == doctest::Approx(wide).epsilon(0.01));
  bool reaches_low_n = false;
  for (const auto& ch : dep.channels) reaches_low_n = reaches_low_n || ch.to.n < 20;
  CHECK(reaches_low_n);
  double sum = 0.0;
  for (const auto& ch : dep.channels) sum += ch.rate;
  CHECK(sum == doctest::Approx(dep.total));
  CHECK(rates.effective_lifetime_departure_us(s, env) ==
        doctest::Approx(1e6 / (rates.spontaneous_total(s) + dep.total)));
}

TEST_CASE("spectral weight tables") {
  const SpectralWeight identity;
  CHECK(identity.is_identity());
  CHECK(identity(1e10) == 1.0);

  const SpectralWeight w({{1e9, 0.0}, {2e9, 1.0}, {4e9, 0.5}});
  CHECK(w(0.0) == 0.0);
  CHECK(w(1.5e9) == doctest::Approx(0.5));
  CHECK(w(3e9) == doctest::Approx(0.75));
  CHECK(w(1e12) == doctest::Approx(0.5));

  const auto band = SpectralWeight::band(9e9, 11e9, 0.5, 0.2e9);
  CHECK(band(10e9) == doctest::Approx(0.5));
  CHECK(band(8.7e9) == doctest::Approx(1.0));
  CHECK(band(8.9e9) == doctest::Approx(0.75));
  CHECK(band(12e9) == doctest::Approx(1.0));

  const auto cavity = SpectralWeight::cavity_cutoff_for_size(0.01);
  CHECK(cavity(1e9) == 0.0);
  CHECK(cavity(20e9) == doctest::Approx(1.0));

  CHECK_THROWS_AS(SpectralWeight({{2e9, 1.0}, {1e9, 1.0}}), ConfigError);
  CHECK_THROWS_AS(SpectralWeight({{1e9, -1.0}}), ConfigError);
}

TEST_CASE("spectral weight parsing") {
  const auto w = SpectralWeight::parse("# Hz  w\n1e9, 0.5\n\n2e9 1.0  # comment\n");
  CHECK(w(1.5e9) == doctest::Approx(0.75));
  try {
    SpectralWeight::parse("1e9 0.5\n2e9 x\n", "w.txt");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("w.txt:2") != std::string::npos);
  }
  CHECK_THROWS_AS(SpectralWeight::parse("2e9 1\n1e9 1\n"), ParseError);
  CHECK_THROWS_AS(SpectralWeight::parse("1e9 1 3\n"), ParseError);
  CHECK_THROWS_AS(SpectralWeight::from_file("/nonexistent/w.txt"), IoError);

  const auto path = std::filesystem::temp_directory_path() / "rydlife_weight_test.txt";
  {
    std::ofstream out(path);
    out << "1e9 0.25\n2e9 0.25\n";
  }
  CHECK(SpectralWeight::from_file(path)(1.5e9) == doctest::Approx(0.25));
  std::filesystem::remove(path);
}

TEST_CASE("environment validation") {
  EnvironmentConfig env;
  env.temperature_k = -1.0;
  CHECK_THROWS_AS(env.validate(), ConfigError);
  env.temperature_k = 300.0;
  CHECK_NOTHROW(env.validate());
}
