#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rydlife/structure.hpp"

namespace rydlife {

/// Default step of the sqrt(r) grid, in sqrt(a0).
inline constexpr double kDefaultNumerovStep = 0.01;

/// Radial solution on the grid x_k = k * step with r = x^2. Stores
/// y(x) = u(r) / sqrt(x) with u = r R(r), normalised so that
/// 2 * sum x^2 y^2 dx = 1.
struct RadialWavefunction {
  StateLabel state;
  double step = kDefaultNumerovStep;
  std::size_t first = 0;  // grid index of y.front()
  std::vector<double> y;

  double inner_radius() const { return sq(first * step); }
  double outer_radius() const { return sq((first + y.size() - 1) * step); }

 private:
  static double sq(double x) { return x * x; }
};

/// Integrates the radial equation inward at the level energy (from the
/// quantum-defect table) in a parametric core potential with spin-orbit term.
/// The outer boundary is 2 n*(n* + 15) a0; the inner boundary is the cube
/// root of the core polarizability. A solution that diverges in an inner
/// classically forbidden region is cut at its minimum there.
class RadialSolver {
 public:
  explicit RadialSolver(const RydbergAtom& atom, double step = kDefaultNumerovStep);

  RadialWavefunction solve(StateLabel s) const;
  /// Model potential V_{l,j}(r) in Hartree.
  double potential(int l, int two_j, double r) const;
  double step() const { return step_; }
  double inner_radius() const { return inner_radius_; }

 private:
  const RydbergAtom* atom_;
  double step_;
  double inner_radius_;
};

/// Overlap <a|b> = integral u_a u_b dr over the common grid range.
double radial_overlap(const RadialWavefunction& a, const RadialWavefunction& b);
/// <a|r|b> in a0 over the common grid range.
double radial_dipole(const RadialWavefunction& a, const RadialWavefunction& b);

/// Closed-form quasiclassical estimate of |<a|r|b>| from the Fourier
/// component of a Kepler orbit, evaluated at the mean effective quantum
/// number. Intended for nearby Rydberg levels (cross-checks only).
double quasiclassical_radial_dipole(const RydbergAtom& atom, StateLabel a, StateLabel b);

enum class MatrixElementMethod { Numerov, Quasiclassical };
std::string_view to_string(MatrixElementMethod m);

/// A radial matrix element with the method and grid it came from.
struct RadialMatrixElement {
  double value = 0.0;  // a0, sign convention of the Numerov solutions
  MatrixElementMethod method = MatrixElementMethod::Numerov;
  double grid_step = 0.0;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
};

/// <a|r|b> for a dipole-coupled pair (|L_a - L_b| = 1); throws
/// SelectionRuleError otherwise.
RadialMatrixElement radial_matrix_element(const RydbergAtom& atom, StateLabel a, StateLabel b,
                                          MatrixElementMethod method = MatrixElementMethod::Numerov,
                                          double step = kDefaultNumerovStep);

/// Memoised Numerov wavefunctions and radial integrals. Safe for concurrent
/// readers and writers.
class MatrixElementCache {
 public:
  explicit MatrixElementCache(const RydbergAtom& atom, double step = kDefaultNumerovStep);

  const RydbergAtom& atom() const { return *atom_; }
  double step() const { return solver_.step(); }

  std::shared_ptr<const RadialWavefunction> wavefunction(StateLabel s);
  /// <a|r|b> in a0; symmetric; throws SelectionRuleError for |dL| != 1.
  double radial(StateLabel a, StateLabel b);
  RadialMatrixElement radial_matrix_element(StateLabel a, StateLabel b);

  std::size_t cached_pairs() const;
  std::size_t cached_wavefunctions() const;
  /// Drops stored wavefunctions; radial integrals are kept.
  void release_wavefunctions();

 private:
  struct PairKey {
    StateLabel a, b;
    bool operator==(const PairKey&) const = default;
  };
  struct PairHash {
    std::size_t operator()(const PairKey& k) const noexcept {
      const StateLabelHash h;
      return h(k.a) * 1000003u ^ h(k.b);
    }
  };

  const RydbergAtom* atom_;
  RadialSolver solver_;
  mutable std::shared_mutex wf_mutex_;
  std::unordered_map<StateLabel, std::shared_ptr<const RadialWavefunction>, StateLabelHash> wavefunctions_;
  mutable std::shared_mutex pair_mutex_;
  std::unordered_map<PairKey, double, PairHash> pairs_;
};

}  // namespace rydlife
