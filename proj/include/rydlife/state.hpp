#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace rydlife {

/// A fine-structure resolved level (n, L, J). J is stored doubled.
struct StateLabel {
  int n = 0;
  int l = 0;
  int two_j = 1;

  constexpr double j() const { return two_j / 2.0; }
  constexpr int degeneracy() const { return two_j + 1; }

  friend constexpr auto operator<=>(const StateLabel&, const StateLabel&) = default;
};

/// Builds a label and checks n > L, J = L +- 1/2, J >= 1/2.
StateLabel make_state(int n, int l, int two_j);

char orbital_letter(int l);
int orbital_from_letter(char c);

/// "85S1/2", "84P3/2".
std::string to_string(StateLabel s);
/// "S1/2" style channel key.
std::string channel_key(int l, int two_j);

/// Accepts "85S1/2", "84P3/2", "85S" (J defaults to L + 1/2).
StateLabel parse_state(std::string_view text);

/// True when |L_a - L_b| = 1 and |J_a - J_b| <= 1.
bool dipole_allowed(StateLabel a, StateLabel b);

struct StateLabelHash {
  std::size_t operator()(const StateLabel& s) const noexcept {
    return std::hash<long long>{}((static_cast<long long>(s.n) << 16) ^ (s.l << 8) ^ s.two_j);
  }
};

}  // namespace rydlife
