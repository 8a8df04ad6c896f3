#include "rydlife/rates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rydlife/angular.hpp"
#include "rydlife/error.hpp"
#include "rydlife/units.hpp"
#include "text_util.hpp"

namespace rydlife {

SpectralWeight::SpectralWeight(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].second >= 0.0)) throw ConfigError("spectral weight must be >= 0");
    if (i > 0 && !(points_[i].first > points_[i - 1].first)) {
      throw ConfigError("spectral weight frequencies must be strictly increasing");
    }
  }
}

SpectralWeight SpectralWeight::parse(std::string_view text, const std::string& origin) {
  std::vector<std::pair<double, double>> points;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    auto line = text.substr(start, end == std::string_view::npos ? end : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::string normalized(detail::trim(line));
    if (normalized.empty()) continue;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::replace(normalized.begin(), normalized.end(), '\t', ' ');
    std::vector<std::string_view> fields;
    for (auto f : detail::split(normalized, ' ')) {
      if (!f.empty()) fields.push_back(f);
    }
    const auto nu = fields.size() == 2 ? detail::parse_double(fields[0]) : std::nullopt;
    const auto w = fields.size() == 2 ? detail::parse_double(fields[1]) : std::nullopt;
    if (!nu || !w) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected '<frequency_hz> <multiplier>'");
    }
    if (!points.empty() && !(*nu > points.back().first)) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": frequencies must be strictly increasing");
    }
    if (*w < 0.0) throw ParseError(origin + ":" + std::to_string(line_no) + ": multiplier must be >= 0");
    points.emplace_back(*nu, *w);
  }
  if (points.empty()) throw ParseError(origin + ": spectral weight table is empty");
  return SpectralWeight(std::move(points));
}

SpectralWeight SpectralWeight::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spectral-weight file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

SpectralWeight SpectralWeight::band(double lo_hz, double hi_hz, double factor, double edge_hz) {
  if (!(lo_hz < hi_hz) || !(edge_hz > 0.0) || lo_hz - edge_hz < 0.0) {
    throw ConfigError("spectral band needs 0 <= lo - edge < lo < hi and edge > 0");
  }
  return SpectralWeight({{lo_hz - edge_hz, 1.0}, {lo_hz, factor}, {hi_hz, factor}, {hi_hz + edge_hz, 1.0}});
}

SpectralWeight SpectralWeight::cavity_cutoff(double cutoff_hz, double ramp_hz) {
  if (!(cutoff_hz > 0.0) || !(ramp_hz > 0.0)) throw ConfigError("cavity cutoff and ramp must be positive");
  return SpectralWeight({{cutoff_hz, 0.0}, {cutoff_hz + ramp_hz, 1.0}});
}

SpectralWeight SpectralWeight::cavity_cutoff_for_size(double max_dimension_m, double ramp_fraction) {
  if (!(max_dimension_m > 0.0)) throw ConfigError("cell dimension must be positive");
  const double cutoff = units::kSpeedOfLight / (2.0 * max_dimension_m);
  return cavity_cutoff(cutoff, ramp_fraction * cutoff);
}

double SpectralWeight::operator()(double frequency_hz) const {
  if (points_.empty()) return 1.0;
  if (frequency_hz <= points_.front().first) return points_.front().second;
  if (frequency_hz >= points_.back().first) return points_.back().second;
  const auto upper = std::upper_bound(points_.begin(), points_.end(), frequency_hz,
                                      [](double f, const auto& p) { return f < p.first; });
  const auto lower = upper - 1;
  const double t = (frequency_hz - lower->first) / (upper->first - lower->first);
  return lower->second + t * (upper->second - lower->second);
}

void EnvironmentConfig::validate() const {
  if (!(temperature_k >= 0.0)) throw ConfigError("temperature must be >= 0 K");
}

double planck_occupation(double frequency_hz, double temperature_k) {
  if (temperature_k <= 0.0) return 0.0;
  const double x = units::kPlanck * frequency_hz / (units::kBoltzmann * temperature_k);
  return 1.0 / std::expm1(x);
}

RateCalculator::RateCalculator(MatrixElementCache& cache) : cache_(&cache) {}

double RateCalculator::line_strength(StateLabel a, StateLabel b) const {
  if (!dipole_allowed(a, b)) {
    throw SelectionRuleError("not an electric-dipole pair: " + to_string(a) + " - " + to_string(b));
  }
  const double r = cache_->radial(a, b);
  return dipole_angular_factor(a.l, a.two_j, b.l, b.two_j) * r * r;
}

double RateCalculator::emission_coefficient(StateLabel a, StateLabel b) const {
  const double omega = units::hz_to_hartree(atom().transition_frequency_hz(a, b));
  const double alpha = units::kFineStructure;
  const double rate_au = 4.0 / 3.0 * alpha * alpha * alpha * omega * omega * omega * line_strength(a, b) /
                         a.degeneracy();
  return units::au_rate_to_per_second(rate_au);
}

double RateCalculator::einstein_a(StateLabel a, StateLabel b) const {
  if (!dipole_allowed(a, b)) {
    throw SelectionRuleError("not an electric-dipole pair: " + to_string(a) + " - " + to_string(b));
  }
  if (!(atom().binding_energy_hz(a) > atom().binding_energy_hz(b))) {
    throw SelectionRuleError("spontaneous emission needs E(a) > E(b): " + to_string(a) + " -> " + to_string(b));
  }
  return emission_coefficient(a, b);
}

std::vector<DecayChannel> RateCalculator::spontaneous_channels(StateLabel a) const {
  atom().require_state(a);
  const double energy = atom().binding_energy_hz(a);
  // Levels of lower L can lie below a with n up to a.n + 3 or so; the energy
  // test selects the relevant ones.
  const auto partners = atom().dipole_partners(a, 1, a.n + 4, QuantumDefectTable::kMaxL);
  std::vector<DecayChannel> out;
  for (const auto& b : partners) {
    if (atom().binding_energy_hz(b) < energy) out.push_back({b, emission_coefficient(a, b)});
  }
  return out;
}

double RateCalculator::spontaneous_total(StateLabel a) const {
  double total = 0.0;
  for (const auto& c : spontaneous_channels(a)) total += c.rate;
  return total;
}

double RateCalculator::bbr_rate(StateLabel a, StateLabel b, const EnvironmentConfig& env) const {
  if (!dipole_allowed(a, b)) {
    throw SelectionRuleError("not an electric-dipole pair: " + to_string(a) + " - " + to_string(b));
  }
  if (env.temperature_k <= 0.0) return 0.0;
  const double nu = atom().transition_frequency_hz(a, b);
  const double occupation = planck_occupation(nu, env.temperature_k) * env.spectral_weight(nu);
  if (occupation == 0.0) return 0.0;
  return emission_coefficient(a, b) * occupation;
}

TransitionRate RateCalculator::transition_rate(StateLabel a, StateLabel b, const EnvironmentConfig& env) const {
  TransitionRate out{a, b, 0.0, bbr_rate(a, b, env)};
  if (atom().binding_energy_hz(a) > atom().binding_energy_hz(b)) out.spontaneous = emission_coefficient(a, b);
  return out;
}

BbrDeparture RateCalculator::bbr_departure(StateLabel a, const EnvironmentConfig& env,
                                           const BasisLimits& limits) const {
  atom().require_state(a);
  BbrDeparture out;
  double outer = 0.0;
  // Stimulated emission reaches every lower level; only the upward side is
  // truncated at the window.
  const auto partners = atom().dipole_partners(a, 1, a.n + limits.n_window, limits.l_max);
  for (const auto& b : partners) {
    const double w = bbr_rate(a, b, env);
    out.total += w;
    if (b.n == a.n + limits.n_window) outer += w;
    out.channels.push_back({b, w});
  }
  out.outer_shell_fraction = out.total > 0.0 ? outer / out.total : 0.0;
  return out;
}

double RateCalculator::bbr_departure_total(StateLabel a, const EnvironmentConfig& env,
                                           const BasisLimits& limits) const {
  return bbr_departure(a, env, limits).total;
}

double RateCalculator::effective_lifetime_departure_us(StateLabel a, const EnvironmentConfig& env,
                                                       const BasisLimits& limits) const {
  const double rate = spontaneous_total(a) + bbr_departure_total(a, env, limits);
  return 1.0 / rate / units::kSecondsPerMicrosecond;
}

}  // namespace rydlife
