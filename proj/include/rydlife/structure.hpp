#pragma once

#include <string_view>
#include <vector>

#include "rydlife/quantum_defects.hpp"
#include "rydlife/state.hpp"

namespace rydlife {

enum class FieldValidity { Valid, Marginal, AboveInglisTeller };

std::string_view to_string(FieldValidity v);

/// Characteristic static fields of a level, V/cm.
struct FieldThresholds {
  double inglis_teller = 0.0;
  double ionization = 0.0;
};

/// Single-atom level structure built on a QuantumDefectTable.
///
/// Rydberg levels use the Ritz expansion; levels listed with a measured term
/// energy in the table use that energy instead, and their quantum defect is
/// the one implied by it. All methods are const and thread-safe.
class RydbergAtom {
 public:
  explicit RydbergAtom(QuantumDefectTable table = QuantumDefectTable::embedded_rb87());

  const QuantumDefectTable& table() const { return table_; }

  /// False for labels the species does not have (e.g. L > 3, n below the
  /// lowest level of the channel).
  bool has_state(StateLabel s) const noexcept;
  void require_state(StateLabel s) const;

  double quantum_defect(StateLabel s) const;
  double effective_n(StateLabel s) const;
  /// Energy relative to the ionization limit, Hz (negative).
  double binding_energy_hz(StateLabel s) const;
  /// |E(a) - E(b)|, Hz.
  double transition_frequency_hz(StateLabel a, StateLabel b) const;

  /// Classical saddle-point threshold 1/(16 n*^4) a.u., in V/cm.
  double ionization_threshold_field(StateLabel s) const;
  /// Field where the red edge of the hydrogenic (n-3) Stark manifold reaches
  /// the nS level, V/cm. Only defined for S states.
  double inglis_teller_field(StateLabel s) const;
  FieldThresholds field_thresholds(StateLabel s) const;
  /// Valid below 0.9 E_IT, Marginal in [0.9 E_IT, E_IT), AboveInglisTeller above.
  FieldValidity field_validity(StateLabel s, double field_v_per_cm) const;

  /// Reduced mass of the valence electron in electron masses.
  double reduced_mass() const { return reduced_mass_; }

  /// Existing dipole partners of `s` with n in [n_min, n_max] and L <= l_max,
  /// ordered by (n, L, J).
  std::vector<StateLabel> dipole_partners(StateLabel s, int n_min, int n_max, int l_max) const;

 private:
  QuantumDefectTable table_;
  double rydberg_hz_ = 0.0;
  double reduced_mass_ = 1.0;
};

}  // namespace rydlife
