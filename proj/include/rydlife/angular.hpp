#pragma once

// Angular-momentum coupling coefficients. Arguments are doubled (2j) so that
// half-integers stay exact.

namespace rydlife {

double wigner_3j(int two_j1, int two_j2, int two_j3, int two_m1, int two_m2, int two_m3);
double wigner_6j(int two_j1, int two_j2, int two_j3, int two_j4, int two_j5, int two_j6);

/// |<l_a j_a || C1 || l_b j_b>|^2 for a single electron with s = 1/2. The
/// line strength of a J-resolved dipole transition is this factor times the
/// squared radial integral. Symmetric in a and b; zero when not dipole-allowed.
double dipole_angular_factor(int l_a, int two_j_a, int l_b, int two_j_b);

}  // namespace rydlife
