#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rydlife/state.hpp"

namespace rydlife {

/// Parametric core potential Z_l(r) coefficients for one L channel.
struct CorePotential {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
  double rc = 1.0;
};

/// Species structure data: Rydberg-Ritz coefficients per (L, J) channel,
/// measured low-lying term energies, and model-potential parameters.
///
/// Loaded from a key-value text file (see data/rb87_quantum_defects.txt);
/// replacing the file changes the data without touching code.
class QuantumDefectTable {
 public:
  static constexpr int kMaxL = 3;

  /// Parses the text format. `origin` is used in error messages.
  static QuantumDefectTable parse(std::string_view text, std::string origin = "<memory>");
  static QuantumDefectTable from_file(const std::filesystem::path& path);
  /// Copy shipped inside the library.
  static const QuantumDefectTable& embedded_rb87();
  static std::string_view embedded_rb87_text();

  const std::string& species() const { return species_; }
  const std::string& version() const { return version_; }
  const std::string& provenance() const { return provenance_; }
  const std::string& origin() const { return origin_; }

  double rydberg_constant_cm() const { return rydberg_cm_; }
  double ionization_limit_cm() const { return ionization_limit_cm_; }
  double ion_mass_u() const { return ion_mass_u_; }
  int nuclear_charge() const { return nuclear_charge_; }
  double core_polarizability() const { return core_polarizability_; }
  /// Channel L > 3 falls back to the L = 3 parameters.
  const CorePotential& core_potential(int l) const;
  int lowest_n(int l) const;

  /// Throws UnsupportedStateError for L > 3 or an unknown channel.
  std::span<const double> ritz_coefficients(int l, int two_j) const;
  std::optional<double> measured_term_cm(StateLabel s) const;

 private:
  std::string species_;
  std::string version_;
  std::string provenance_;
  std::string origin_;
  double rydberg_cm_ = 0.0;
  double ionization_limit_cm_ = 0.0;
  double ion_mass_u_ = 0.0;
  int nuclear_charge_ = 1;
  double core_polarizability_ = 0.0;
  std::array<int, kMaxL + 1> lowest_n_{1, 2, 3, 4};
  std::array<CorePotential, kMaxL + 1> core_{};
  std::map<std::string, std::vector<double>> channels_;
  std::map<StateLabel, double> levels_;
};

}  // namespace rydlife
