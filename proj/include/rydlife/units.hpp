#pragma once

// Physical constants (CODATA 2018) and unit conversions. Internal
// computation uses Hartree atomic units; external interfaces use Hz, V/cm
// and microseconds.

#include <numbers>

namespace rydlife::units {

inline constexpr double kSpeedOfLight = 299792458.0;        // m/s
inline constexpr double kPlanck = 6.62607015e-34;           // J s
inline constexpr double kBoltzmann = 1.380649e-23;          // J/K
inline constexpr double kFineStructure = 7.2973525693e-3;
inline constexpr double kHartreeHz = 6.579683920502e15;     // E_h / h
inline constexpr double kAtomicTimeS = 2.4188843265857e-17; // hbar / E_h
inline constexpr double kAtomicFieldVPerCm = 5.14220674763e9;
inline constexpr double kElectronMassU = 5.48579909065e-4;
inline constexpr double kInverseCmHz = kSpeedOfLight * 100.0;

inline constexpr double kSecondsPerMicrosecond = 1e-6;

constexpr double hz_to_hartree(double hz) { return hz / kHartreeHz; }
constexpr double hartree_to_hz(double eh) { return eh * kHartreeHz; }
constexpr double au_rate_to_per_second(double rate) { return rate / kAtomicTimeS; }
constexpr double au_field_to_v_per_cm(double f) { return f * kAtomicFieldVPerCm; }
constexpr double wavelength_m(double hz) { return kSpeedOfLight / hz; }

}  // namespace rydlife::units
