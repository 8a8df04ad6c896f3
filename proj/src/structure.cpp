#include "rydlife/structure.hpp"

#include <cmath>

#include "rydlife/error.hpp"
#include "rydlife/units.hpp"

namespace rydlife {

std::string_view to_string(FieldValidity v) {
  switch (v) {
    case FieldValidity::Valid:
      return "Valid";
    case FieldValidity::Marginal:
      return "Marginal";
    case FieldValidity::AboveInglisTeller:
      return "AboveIT";
  }
  return "?";
}

RydbergAtom::RydbergAtom(QuantumDefectTable table) : table_(std::move(table)) {
  rydberg_hz_ = table_.rydberg_constant_cm() * units::kInverseCmHz;
  const double ion_mass_me = table_.ion_mass_u() / units::kElectronMassU;
  reduced_mass_ = ion_mass_me / (ion_mass_me + 1.0);
}

bool RydbergAtom::has_state(StateLabel s) const noexcept {
  if (s.l < 0 || s.l > QuantumDefectTable::kMaxL || s.n <= s.l) return false;
  if (s.two_j < 1 || (s.two_j != 2 * s.l + 1 && s.two_j != 2 * s.l - 1)) return false;
  return s.n >= table_.lowest_n(s.l);
}

void RydbergAtom::require_state(StateLabel s) const {
  if (!has_state(s)) {
    throw UnsupportedStateError("state (n=" + std::to_string(s.n) + ", L=" + std::to_string(s.l) +
                                ", 2J=" + std::to_string(s.two_j) + ") is not supported by " +
                                table_.species() + " data");
  }
}

double RydbergAtom::effective_n(StateLabel s) const {
  require_state(s);
  if (const auto term = table_.measured_term_cm(s)) {
    const double binding_cm = table_.ionization_limit_cm() - *term;
    return std::sqrt(table_.rydberg_constant_cm() / binding_cm);
  }
  const auto coeffs = table_.ritz_coefficients(s.l, s.two_j);
  const double d0 = coeffs[0];
  const double x = 1.0 / ((s.n - d0) * (s.n - d0));
  double delta = d0;
  double power = x;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    delta += coeffs[k] * power;
    power *= x;
  }
  return s.n - delta;
}

double RydbergAtom::quantum_defect(StateLabel s) const { return s.n - effective_n(s); }

double RydbergAtom::binding_energy_hz(StateLabel s) const {
  const double ns = effective_n(s);
  return -rydberg_hz_ / (ns * ns);
}

double RydbergAtom::transition_frequency_hz(StateLabel a, StateLabel b) const {
  return std::abs(binding_energy_hz(a) - binding_energy_hz(b));
}

double RydbergAtom::ionization_threshold_field(StateLabel s) const {
  const double ns = effective_n(s);
  return units::au_field_to_v_per_cm(1.0 / (16.0 * std::pow(ns, 4)));
}

double RydbergAtom::inglis_teller_field(StateLabel s) const {
  if (s.l != 0) {
    throw UnsupportedStateError("Inglis-Teller crossing is defined for S states only, got " + to_string(s));
  }
  // The nS level sits below the hydrogenic manifold m = n - floor(delta)
  // (m = n - 3 for Rb). Its extreme red Stark state, shifted by
  // (3/2) m (m - 1) F, reaches the nS level at the returned field.
  const double delta = quantum_defect(s);
  const int m = s.n - static_cast<int>(std::floor(delta));
  const double manifold_hz = -rydberg_hz_ / (static_cast<double>(m) * m);
  const double gap_au = units::hz_to_hartree(manifold_hz - binding_energy_hz(s));
  if (m < 2 || gap_au <= 0.0) return 0.0;
  return units::au_field_to_v_per_cm(2.0 * gap_au / (3.0 * m * (m - 1.0)));
}

FieldThresholds RydbergAtom::field_thresholds(StateLabel s) const {
  return FieldThresholds{inglis_teller_field(s), ionization_threshold_field(s)};
}

FieldValidity RydbergAtom::field_validity(StateLabel s, double field_v_per_cm) const {
  const double it = inglis_teller_field(s);
  const double f = std::abs(field_v_per_cm);
  if (f < 0.9 * it || f == 0.0) return FieldValidity::Valid;
  if (f < it) return FieldValidity::Marginal;
  return FieldValidity::AboveInglisTeller;
}

std::vector<StateLabel> RydbergAtom::dipole_partners(StateLabel s, int n_min, int n_max, int l_max) const {
  std::vector<StateLabel> out;
  for (int n = n_min; n <= n_max; ++n) {
    for (int l = s.l - 1; l <= s.l + 1; l += 2) {
      if (l < 0 || l > l_max) continue;
      for (int two_j = 2 * l - 1; two_j <= 2 * l + 1; two_j += 2) {
        const StateLabel t{n, l, two_j};
        if (has_state(t) && dipole_allowed(s, t)) out.push_back(t);
      }
    }
  }
  return out;
}

}  // namespace rydlife
