#include "rydlife/quantum_defects.hpp"

#include <fstream>
#include <sstream>

#include "rydlife/error.hpp"
#include "text_util.hpp"

namespace rydlife {

namespace detail {
extern const std::string_view kEmbeddedRb87Table;
}

namespace {

constexpr std::string_view kFormatTag = "rydlife-qdt/1";

std::vector<double> parse_list(std::string_view value, const std::string& where) {
  std::vector<double> out;
  for (auto item : detail::split(value, ',')) {
    const auto v = detail::parse_double(item);
    if (!v) throw ParseError(where + ": expected a number, got '" + std::string(item) + "'");
    out.push_back(*v);
  }
  return out;
}

double parse_scalar(std::string_view value, const std::string& where) {
  const auto v = detail::parse_double(value);
  if (!v) throw ParseError(where + ": expected a number, got '" + std::string(value) + "'");
  return *v;
}

}  // namespace

QuantumDefectTable QuantumDefectTable::parse(std::string_view text, std::string origin) {
  QuantumDefectTable table;
  table.origin_ = origin;
  bool have_format = false;
  bool have_core[kMaxL + 1] = {false, false, false, false};

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    auto line = text.substr(start, end == std::string_view::npos ? end : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const std::string where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));

    if (key == "format") {
      if (value != kFormatTag) {
        throw ParseError(where + ": unsupported format '" + std::string(value) + "'");
      }
      have_format = true;
    } else if (key == "species") {
      table.species_ = value;
    } else if (key == "version") {
      table.version_ = value;
    } else if (key == "provenance") {
      table.provenance_ = value;
    } else if (key == "rydberg_constant_cm") {
      table.rydberg_cm_ = parse_scalar(value, where);
    } else if (key == "ionization_limit_cm") {
      table.ionization_limit_cm_ = parse_scalar(value, where);
    } else if (key == "ion_mass_u") {
      table.ion_mass_u_ = parse_scalar(value, where);
    } else if (key == "nuclear_charge") {
      table.nuclear_charge_ = static_cast<int>(parse_scalar(value, where));
    } else if (key == "core_polarizability") {
      table.core_polarizability_ = parse_scalar(value, where);
    } else if (key == "lowest_n") {
      const auto list = parse_list(value, where);
      if (list.size() != kMaxL + 1) throw ParseError(where + ": lowest_n needs 4 entries (S, P, D, F)");
      for (int l = 0; l <= kMaxL; ++l) table.lowest_n_[l] = static_cast<int>(list[l]);
    } else if (key.starts_with("core.")) {
      const auto channel = key.substr(5);
      if (channel.size() != 1) throw ParseError(where + ": bad core channel '" + std::string(key) + "'");
      int l = 0;
      try {
        l = orbital_from_letter(channel[0]);
      } catch (const Error&) {
        throw ParseError(where + ": bad core channel '" + std::string(key) + "'");
      }
      if (l > kMaxL) throw ParseError(where + ": core channel beyond F");
      const auto list = parse_list(value, where);
      if (list.size() != 5) throw ParseError(where + ": core potential needs a1, a2, a3, a4, rc");
      table.core_[l] = CorePotential{list[0], list[1], list[2], list[3], list[4]};
      have_core[l] = true;
    } else if (key.starts_with("level.")) {
      StateLabel s;
      try {
        s = parse_state(key.substr(6));
      } catch (const Error& e) {
        throw ParseError(where + ": " + e.what());
      }
      table.levels_[s] = parse_scalar(value, where);
    } else {
      // Channel keys: S1/2, P1/2, ...
      int l = 0;
      int two_j = 0;
      try {
        const auto probe = parse_state("9" + std::string(key));
        l = probe.l;
        two_j = probe.two_j;
      } catch (const Error&) {
        throw ParseError(where + ": unknown key '" + std::string(key) + "'");
      }
      if (channel_key(l, two_j) != key) throw ParseError(where + ": unknown key '" + std::string(key) + "'");
      if (l > kMaxL) throw ParseError(where + ": channel beyond F is not supported");
      auto coeffs = parse_list(value, where);
      if (coeffs.empty()) throw ParseError(where + ": empty coefficient list");
      table.channels_[std::string(key)] = std::move(coeffs);
    }
  }

  if (!have_format) throw ParseError(origin + ": missing 'format = " + std::string(kFormatTag) + "'");
  if (table.rydberg_cm_ <= 0.0) throw ParseError(origin + ": missing or invalid rydberg_constant_cm");
  if (table.ionization_limit_cm_ < 0.0) throw ParseError(origin + ": invalid ionization_limit_cm");
  if (table.ion_mass_u_ <= 0.0) throw ParseError(origin + ": missing or invalid ion_mass_u");
  for (int l = 0; l <= kMaxL; ++l) {
    if (!have_core[l] && table.nuclear_charge_ > 1) {
      throw ParseError(origin + ": missing core." + std::string(1, orbital_letter(l)));
    }
  }
  for (int l = 0; l <= kMaxL; ++l) {
    for (int two_j : {2 * l - 1, 2 * l + 1}) {
      if (two_j < 1) continue;
      if (!table.channels_.contains(channel_key(l, two_j))) {
        throw ParseError(origin + ": missing channel " + channel_key(l, two_j));
      }
    }
  }
  return table;
}

QuantumDefectTable QuantumDefectTable::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open quantum-defect table '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

std::string_view QuantumDefectTable::embedded_rb87_text() { return detail::kEmbeddedRb87Table; }

const QuantumDefectTable& QuantumDefectTable::embedded_rb87() {
  static const QuantumDefectTable table = parse(detail::kEmbeddedRb87Table, "<embedded rb87>");
  return table;
}

const CorePotential& QuantumDefectTable::core_potential(int l) const {
  return core_[static_cast<std::size_t>(std::min(l, kMaxL))];
}

int QuantumDefectTable::lowest_n(int l) const {
  if (l < 0 || l > kMaxL) throw UnsupportedStateError("no data for L=" + std::to_string(l));
  return lowest_n_[static_cast<std::size_t>(l)];
}

std::span<const double> QuantumDefectTable::ritz_coefficients(int l, int two_j) const {
  if (l < 0 || l > kMaxL) {
    throw UnsupportedStateError("quantum defects available only for L <= 3 (got L=" + std::to_string(l) + ")");
  }
  const auto it = channels_.find(channel_key(l, two_j));
  if (it == channels_.end()) {
    throw UnsupportedStateError("no quantum-defect channel " + channel_key(l, two_j));
  }
  return it->second;
}

std::optional<double> QuantumDefectTable::measured_term_cm(StateLabel s) const {
  const auto it = levels_.find(s);
  if (it == levels_.end()) return std::nullopt;
  return it->second;
}

}  // namespace rydlife
