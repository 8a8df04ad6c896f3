#include "rydlife/state.hpp"

#include <cctype>
#include <cstdlib>

#include "rydlife/error.hpp"
#include "text_util.hpp"

namespace rydlife {

namespace {
constexpr std::string_view kLetters = "SPDFGHIK";
}

StateLabel make_state(int n, int l, int two_j) {
  if (l < 0 || n <= l) {
    throw UnsupportedStateError("state requires n > L >= 0 (n=" + std::to_string(n) +
                                ", L=" + std::to_string(l) + ")");
  }
  if (two_j < 1 || (two_j != 2 * l + 1 && two_j != 2 * l - 1)) {
    throw UnsupportedStateError("J must be L +- 1/2 and >= 1/2 (L=" + std::to_string(l) +
                                ", 2J=" + std::to_string(two_j) + ")");
  }
  return StateLabel{n, l, two_j};
}

char orbital_letter(int l) {
  if (l < 0 || l >= static_cast<int>(kLetters.size())) {
    throw UnsupportedStateError("no spectroscopic letter for L=" + std::to_string(l));
  }
  return kLetters[static_cast<std::size_t>(l)];
}

int orbital_from_letter(char c) {
  const auto pos = kLetters.find(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (pos == std::string_view::npos) {
    throw UnsupportedStateError(std::string("unknown orbital letter '") + c + "'");
  }
  return static_cast<int>(pos);
}

std::string channel_key(int l, int two_j) {
  return std::string(1, orbital_letter(l)) + std::to_string(two_j) + "/2";
}

std::string to_string(StateLabel s) { return std::to_string(s.n) + channel_key(s.l, s.two_j); }

StateLabel parse_state(std::string_view text) {
  const auto t = detail::trim(text);
  std::size_t i = 0;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
  if (i == 0 || i == t.size()) {
    throw ParseError("cannot parse state label '" + std::string(text) + "'");
  }
  const auto n = detail::parse_int(t.substr(0, i));
  const int l = orbital_from_letter(t[i]);
  const auto rest = t.substr(i + 1);
  int two_j = 2 * l + 1;
  if (!rest.empty()) {
    if (rest.size() < 3 || rest.substr(rest.size() - 2) != "/2") {
      throw ParseError("cannot parse J in state label '" + std::string(text) + "'");
    }
    const auto j = detail::parse_int(rest.substr(0, rest.size() - 2));
    if (!j) throw ParseError("cannot parse J in state label '" + std::string(text) + "'");
    two_j = static_cast<int>(*j);
  }
  return make_state(static_cast<int>(*n), l, two_j);
}

bool dipole_allowed(StateLabel a, StateLabel b) {
  return std::abs(a.l - b.l) == 1 && std::abs(a.two_j - b.two_j) <= 2;
}

}  // namespace rydlife
