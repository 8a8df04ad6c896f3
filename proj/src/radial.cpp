#include "rydlife/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rydlife/error.hpp"
#include "rydlife/units.hpp"

namespace rydlife {

std::string_view to_string(MatrixElementMethod m) {
  return m == MatrixElementMethod::Numerov ? "numerov" : "quasiclassical";
}

RadialSolver::RadialSolver(const RydbergAtom& atom, double step)
    : atom_(&atom), step_(step), inner_radius_(std::cbrt(atom.table().core_polarizability())) {
  if (!(step > 0.0)) throw ConfigError("Numerov step must be positive");
  // Pure Coulomb tables have no core; start close to the origin instead.
  if (inner_radius_ < 4.0 * step * step) inner_radius_ = 4.0 * step * step;
}

double RadialSolver::potential(int l, int two_j, double r) const {
  const auto& table = atom_->table();
  const auto& c = table.core_potential(l);
  const double z = table.nuclear_charge();
  const double z_eff = 1.0 + (z - 1.0) * std::exp(-c.a1 * r) - r * (c.a3 + c.a4 * r) * std::exp(-c.a2 * r);
  const double r4 = r * r * r * r;
  const double polarization =
      table.core_polarizability() / (2.0 * r4) * (1.0 - std::exp(-std::pow(r / c.rc, 6)));
  double v = -z_eff / r - polarization;
  if (l > 0) {
    const double j = two_j / 2.0;
    const double ls = (j * (j + 1.0) - l * (l + 1.0) - 0.75) / 2.0;
    const double alpha = units::kFineStructure;
    v += alpha * alpha / (2.0 * r * r * r) * ls;
  }
  return v;
}

RadialWavefunction RadialSolver::solve(StateLabel s) const {
  atom_->require_state(s);
  const double ns = atom_->effective_n(s);
  const double mu = atom_->reduced_mass();
  const double energy = units::hz_to_hartree(atom_->binding_energy_hz(s));
  const double r_outer = 2.0 * ns * (ns + 15.0);

  const auto k_in = static_cast<std::size_t>(std::ceil(std::sqrt(inner_radius_) / step_));
  const auto k_out = static_cast<std::size_t>(std::floor(std::sqrt(r_outer) / step_));
  if (k_out < k_in + 16) {
    std::ostringstream msg;
    msg << "radial grid too short for " << to_string(s) << " (inner r=" << inner_radius_ << ", outer r=" << r_outer
        << ", step=" << step_ << ")";
    throw NumericError(msg.str());
  }
  const std::size_t count = k_out - k_in + 1;
  const double centrifugal = (2.0 * s.l + 0.5) * (2.0 * s.l + 1.5);
  const double h2 = step_ * step_;

  // y'' = g(x) y in x = sqrt(r).
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = (k_in + i) * step_;
    const double r = x * x;
    g[i] = 8.0 * mu * r * (potential(s.l, s.two_j, r) - energy) + centrifugal / r;
  }
  auto f = [&](std::size_t i) { return 1.0 - h2 * g[i] / 12.0; };

  std::vector<double> y(count, 0.0);
  y[count - 1] = 1e-10;
  y[count - 2] = 1e-10 * std::exp(step_ * std::sqrt(std::max(g[count - 1], 0.0)));
  for (std::size_t i = count - 2; i > 0; --i) {
    y[i - 1] = ((12.0 - 10.0 * f(i)) * y[i] - f(i + 1) * y[i + 1]) / f(i - 1);
    if (std::abs(y[i - 1]) > 1e100) {
      for (std::size_t k = i - 1; k < count; ++k) y[k] *= 1e-100;
    }
  }

  // Inner forbidden region: the inward solution picks up the growing branch.
  if (g[0] > 0.0) {
    std::size_t turning = 0;
    while (turning < count && g[turning] > 0.0) ++turning;
    std::size_t min_at = 0;
    double min_val = std::abs(y[0]) * std::sqrt((k_in) * step_);
    for (std::size_t i = 1; i < turning; ++i) {
      const double u = std::abs(y[i]) * std::sqrt((k_in + i) * step_);
      if (u < min_val) {
        min_val = u;
        min_at = i;
      }
    }
    std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(min_at), 0.0);
  }

  double norm = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = (k_in + i) * step_;
    norm += 2.0 * x * x * y[i] * y[i];
  }
  norm *= step_;
  if (!std::isfinite(norm) || norm <= 0.0) {
    std::ostringstream msg;
    msg << "Numerov integration failed for " << to_string(s) << ": norm=" << norm << " over " << count
        << " points, r in [" << inner_radius_ << ", " << r_outer << "], step=" << step_;
    throw NumericError(msg.str());
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (auto& v : y) v *= scale;

  RadialWavefunction wf;
  wf.state = s;
  wf.step = step_;
  wf.first = k_in;
  wf.y = std::move(y);
  return wf;
}

namespace {

template <int Power>
double radial_moment(const RadialWavefunction& a, const RadialWavefunction& b) {
  if (a.step != b.step) throw NumericError("radial integral needs wavefunctions on the same grid");
  const std::size_t lo = std::max(a.first, b.first);
  const std::size_t hi = std::min(a.first + a.y.size(), b.first + b.y.size());
  double sum = 0.0;
  for (std::size_t k = lo; k < hi; ++k) {
    const double x = k * a.step;
    double w = x * x;
    if constexpr (Power == 1) w *= x * x;
    sum += w * a.y[k - a.first] * b.y[k - b.first];
  }
  return 2.0 * sum * a.step;
}

}  // namespace

double radial_overlap(const RadialWavefunction& a, const RadialWavefunction& b) { return radial_moment<0>(a, b); }

double radial_dipole(const RadialWavefunction& a, const RadialWavefunction& b) { return radial_moment<1>(a, b); }

double quasiclassical_radial_dipole(const RydbergAtom& atom, StateLabel a, StateLabel b) {
  if (std::abs(a.l - b.l) != 1) {
    throw SelectionRuleError("radial dipole needs |dL| = 1: " + to_string(a) + " - " + to_string(b));
  }
  const double na = atom.effective_n(a);
  const double nb = atom.effective_n(b);
  const double nc = 2.0 * na * nb / (na + nb);
  const double lc = std::max(a.l, b.l);
  const double ecc = std::sqrt(std::max(0.0, 1.0 - (lc / nc) * (lc / nc)));
  const double minor = std::sqrt(1.0 - ecc * ecc);
  const double s = nb - na;
  const double dl = b.l - a.l;

  // (1/pi) * int_0^pi r(M) cos(dl*(phi - pi) - s*(M - pi)) dM, i.e. the
  // Fourier component of the Kepler orbit with the phase referenced to the
  // outer turning point where both levels share their boundary condition.
  // Written in the eccentric anomaly xi with r cos(phi) = a(cos xi - e) and
  // r sin(phi) = a sqrt(1 - e^2) sin xi.
  const double shift = (dl - s) * std::numbers::pi;
  const double cos_shift = std::cos(shift);
  const double sin_shift = std::sin(shift);
  constexpr int kIntervals = 4000;
  const double h = std::numbers::pi / kIntervals;
  double sum = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double xi = i * h;
    const double mean_anomaly = xi - ecc * std::sin(xi);
    const double x = std::cos(xi) - ecc;
    const double y = minor * std::sin(xi);
    const double cs = std::cos(s * mean_anomaly);
    const double sn = std::sin(s * mean_anomaly);
    const double r_cos = x * cs + dl * y * sn;
    const double r_sin = dl * y * cs - x * sn;
    const double value = (r_cos * cos_shift + r_sin * sin_shift) * (1.0 - ecc * std::cos(xi));
    const double weight = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += weight * value;
  }
  return std::abs(nc * nc * sum * h / 3.0 / std::numbers::pi);
}

RadialMatrixElement radial_matrix_element(const RydbergAtom& atom, StateLabel a, StateLabel b,
                                          MatrixElementMethod method, double step) {
  if (std::abs(a.l - b.l) != 1) {
    throw SelectionRuleError("radial dipole needs |dL| = 1: " + to_string(a) + " - " + to_string(b));
  }
  RadialMatrixElement out;
  out.method = method;
  if (method == MatrixElementMethod::Quasiclassical) {
    out.value = quasiclassical_radial_dipole(atom, a, b);
    return out;
  }
  const RadialSolver solver(atom, step);
  const auto wa = solver.solve(a);
  const auto wb = solver.solve(b);
  out.value = radial_dipole(wa, wb);
  out.grid_step = step;
  out.inner_radius = std::max(wa.inner_radius(), wb.inner_radius());
  out.outer_radius = std::min(wa.outer_radius(), wb.outer_radius());
  return out;
}

MatrixElementCache::MatrixElementCache(const RydbergAtom& atom, double step) : atom_(&atom), solver_(atom, step) {}

std::shared_ptr<const RadialWavefunction> MatrixElementCache::wavefunction(StateLabel s) {
  {
    std::shared_lock lock(wf_mutex_);
    if (const auto it = wavefunctions_.find(s); it != wavefunctions_.end()) return it->second;
  }
  auto wf = std::make_shared<const RadialWavefunction>(solver_.solve(s));
  std::unique_lock lock(wf_mutex_);
  return wavefunctions_.try_emplace(s, std::move(wf)).first->second;
}

double MatrixElementCache::radial(StateLabel a, StateLabel b) {
  if (std::abs(a.l - b.l) != 1) {
    throw SelectionRuleError("radial dipole needs |dL| = 1: " + to_string(a) + " - " + to_string(b));
  }
  const PairKey key = a < b ? PairKey{a, b} : PairKey{b, a};
  {
    std::shared_lock lock(pair_mutex_);
    if (const auto it = pairs_.find(key); it != pairs_.end()) return it->second;
  }
  const double value = radial_dipole(*wavefunction(key.a), *wavefunction(key.b));
  std::unique_lock lock(pair_mutex_);
  pairs_.try_emplace(key, value);
  return value;
}

RadialMatrixElement MatrixElementCache::radial_matrix_element(StateLabel a, StateLabel b) {
  RadialMatrixElement out;
  out.value = radial(a, b);
  const auto wa = wavefunction(a);
  const auto wb = wavefunction(b);
  out.grid_step = step();
  out.inner_radius = std::max(wa->inner_radius(), wb->inner_radius());
  out.outer_radius = std::min(wa->outer_radius(), wb->outer_radius());
  return out;
}

std::size_t MatrixElementCache::cached_pairs() const {
  std::shared_lock lock(pair_mutex_);
  return pairs_.size();
}

std::size_t MatrixElementCache::cached_wavefunctions() const {
  std::shared_lock lock(wf_mutex_);
  return wavefunctions_.size();
}

void MatrixElementCache::release_wavefunctions() {
  std::unique_lock lock(wf_mutex_);
  wavefunctions_.clear();
}

}  // namespace rydlife
