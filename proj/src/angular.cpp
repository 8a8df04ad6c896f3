#include "rydlife/angular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

namespace rydlife {

namespace {

constexpr int kMaxFactorial = 170;

double factorial(int n) {
  static const auto table = [] {
    std::array<double, kMaxFactorial + 1> f{};
    f[0] = 1.0;
    for (int i = 1; i <= kMaxFactorial; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  return table[static_cast<std::size_t>(n)];
}

// Arguments doubled; callers guarantee the sums are even.
bool triangle(int a, int b, int c) {
  return c >= std::abs(a - b) && c <= a + b && (a + b + c) % 2 == 0;
}

double delta(int a, int b, int c) {
  return factorial((a + b - c) / 2) * factorial((a - b + c) / 2) * factorial((-a + b + c) / 2) /
         factorial((a + b + c) / 2 + 1);
}

}  // namespace

double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0 || !triangle(j1, j2, j3)) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if ((j1 + m1) % 2 || (j2 + m2) % 2 || (j3 + m3) % 2) return 0.0;

  const int k_min = std::max({0, (j2 - j3 - m1) / 2, (j1 - j3 + m2) / 2});
  const int k_max = std::min({(j1 + j2 - j3) / 2, (j1 - m1) / 2, (j2 + m2) / 2});
  double sum = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const double denom = factorial(k) * factorial((j3 - j2 + m1) / 2 + k) * factorial((j3 - j1 - m2) / 2 + k) *
                         factorial((j1 + j2 - j3) / 2 - k) * factorial((j1 - m1) / 2 - k) *
                         factorial((j2 + m2) / 2 - k);
    sum += (k % 2 ? -1.0 : 1.0) / denom;
  }
  const double norm = std::sqrt(delta(j1, j2, j3) * factorial((j1 + m1) / 2) * factorial((j1 - m1) / 2) *
                                factorial((j2 + m2) / 2) * factorial((j2 - m2) / 2) *
                                factorial((j3 + m3) / 2) * factorial((j3 - m3) / 2));
  const int phase = (j1 - j2 - m3) / 2;
  return (phase % 2 ? -1.0 : 1.0) * norm * sum;
}

double wigner_6j(int j1, int j2, int j3, int j4, int j5, int j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) || !triangle(j4, j5, j3)) {
    return 0.0;
  }
  const int a1 = (j1 + j2 + j3) / 2;
  const int a2 = (j1 + j5 + j6) / 2;
  const int a3 = (j4 + j2 + j6) / 2;
  const int a4 = (j4 + j5 + j3) / 2;
  const int b1 = (j1 + j2 + j4 + j5) / 2;
  const int b2 = (j2 + j3 + j5 + j6) / 2;
  const int b3 = (j3 + j1 + j6 + j4) / 2;
  const int t_min = std::max({a1, a2, a3, a4});
  const int t_max = std::min({b1, b2, b3});
  double sum = 0.0;
  for (int t = t_min; t <= t_max; ++t) {
    const double denom = factorial(t - a1) * factorial(t - a2) * factorial(t - a3) * factorial(t - a4) *
                         factorial(b1 - t) * factorial(b2 - t) * factorial(b3 - t);
    sum += (t % 2 ? -1.0 : 1.0) * factorial(t + 1) / denom;
  }
  return std::sqrt(delta(j1, j2, j3) * delta(j1, j5, j6) * delta(j4, j2, j6) * delta(j4, j5, j3)) * sum;
}

double dipole_angular_factor(int l_a, int two_j_a, int l_b, int two_j_b) {
  if (std::abs(l_a - l_b) != 1 || std::abs(two_j_a - two_j_b) > 2) return 0.0;
  const double six_j = wigner_6j(2 * l_a, two_j_a, 1, two_j_b, 2 * l_b, 2);
  const double three_j = wigner_3j(2 * l_a, 2, 2 * l_b, 0, 0, 0);
  return (two_j_a + 1.0) * (two_j_b + 1.0) * six_j * six_j * (2.0 * l_a + 1.0) * (2.0 * l_b + 1.0) * three_j *
         three_j;
}

}  // namespace rydlife
