#include "cli_support.hpp"

#include <algorithm>
#include <cstdlib>

#include "rydlife/error.hpp"

namespace rydlife::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

int to_int(const std::string& text, const std::string& whole) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) throw ConfigError("bad n selector '" + whole + "'");
  return v;
}

}  // namespace

std::vector<int> parse_n_selector(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    start = comma == std::string::npos ? text.size() + 1 : comma + 1;
    if (item.empty()) {
      if (text.find_first_not_of(" \t") == std::string::npos) break;
      throw ConfigError("bad n selector '" + text + "'");
    }
    std::size_t sep = item.find("..");
    std::size_t sep_len = 2;
    if (sep == std::string::npos) {
      sep = item.find('-', 1);
      sep_len = 1;
    }
    if (sep == std::string::npos) {
      out.push_back(to_int(item, text));
      continue;
    }
    const int lo = to_int(trim(item.substr(0, sep)), text);
    const int hi = to_int(trim(item.substr(sep + sep_len)), text);
    for (int n = lo; n <= hi; ++n) out.push_back(n);
  }
  for (int n : out) {
    if (n < 1) throw ConfigError("principal quantum numbers must be >= 1 in '" + text + "'");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int parse_l_selector(const std::string& text) {
  const auto t = trim(text);
  if (t.size() == 1 && t[0] >= '0' && t[0] <= '3') return t[0] - '0';
  if (t.size() == 1) {
    try {
      const int l = orbital_from_letter(t[0]);
      if (l <= 3) return l;
    } catch (const Error&) {
    }
  }
  throw ConfigError("bad L selector '" + text + "' (expected S, P, D or F)");
}

std::optional<int> parse_j_selector(const std::string& text) {
  const auto t = trim(text);
  if (t.empty()) return std::nullopt;
  const auto slash = t.find('/');
  if (slash == std::string::npos || t.substr(slash + 1) != "2") {
    throw ConfigError("bad J selector '" + text + "' (expected e.g. 1/2)");
  }
  const int two_j = to_int(t.substr(0, slash), text);
  if (two_j < 1 || two_j % 2 == 0) throw ConfigError("bad J selector '" + text + "'");
  return two_j;
}

std::vector<StateLabel> select_states(const std::vector<int>& ns, int l, std::optional<int> two_j) {
  if (two_j && *two_j != 2 * l - 1 && *two_j != 2 * l + 1) {
    throw ConfigError("J = " + std::to_string(*two_j) + "/2 is not allowed for L = " + std::to_string(l));
  }
  std::vector<StateLabel> out;
  for (int n : ns) {
    for (int tj = 2 * l - 1; tj <= 2 * l + 1; tj += 2) {
      if (tj < 1 || (two_j && tj != *two_j)) continue;
      out.push_back(StateLabel{n, l, tj});
    }
  }
  return out;
}

std::vector<double> parse_time_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    start = comma == std::string::npos ? text.size() : comma + 1;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) throw ConfigError("bad time list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

std::filesystem::path resolve_data_file(const std::string& name, const std::optional<std::string>& data_dir) {
  const std::filesystem::path direct(name);
  if (std::filesystem::exists(direct)) return direct;
  if (data_dir && direct.is_relative()) {
    const auto candidate = std::filesystem::path(*data_dir) / direct;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  throw IoError("data file '" + name + "' not found" +
                (data_dir ? " (also looked in " + *data_dir + ")" : std::string()));
}

QuantumDefectTable load_table(const std::string& table_flag, const std::optional<std::string>& data_dir) {
  if (!table_flag.empty()) return QuantumDefectTable::from_file(resolve_data_file(table_flag, data_dir));
  if (data_dir) {
    const auto candidate = std::filesystem::path(*data_dir) / kDefaultTableName;
    if (std::filesystem::exists(candidate)) return QuantumDefectTable::from_file(candidate);
  }
  return QuantumDefectTable::embedded_rb87();
}

std::optional<std::string> data_dir_from_environment() {
  const char* dir = std::getenv(kDataDirVariable);
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::string(dir);
}

}  // namespace rydlife::cli
