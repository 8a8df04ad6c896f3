#pragma once

// Helpers for the rydlife command-line tool that are worth testing on their own.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rydlife/quantum_defects.hpp"
#include "rydlife/rates.hpp"
#include "rydlife/state.hpp"

namespace rydlife::cli {

inline constexpr const char* kDataDirVariable = "RYDLIFE_DATA_DIR";
inline constexpr const char* kDefaultTableName = "rb87_quantum_defects.txt";

enum ExitCode : int { kOk = 0, kUsage = 2, kNumeric = 3, kIo = 4 };

/// "85", "80,81", "60-88", "60..88" and mixtures; ranges with hi < lo are
/// empty. Result is sorted and unique. Throws ConfigError on bad syntax.
std::vector<int> parse_n_selector(const std::string& text);

/// "S" / "P" / ... or 0..3.
int parse_l_selector(const std::string& text);

/// "1/2", "3/2", ... as doubled J; empty means every J of the channel.
std::optional<int> parse_j_selector(const std::string& text);

/// Every supported (n, L, J) level matching the selector, in order.
std::vector<StateLabel> select_states(const std::vector<int>& ns, int l, std::optional<int> two_j);

/// Comma separated list of times in microseconds.
std::vector<double> parse_time_list(const std::string& text);

/// Resolves a data file: as given if it exists, otherwise relative to the
/// data directory. Throws IoError when nothing matches.
std::filesystem::path resolve_data_file(const std::string& name, const std::optional<std::string>& data_dir);

/// The table named by --table, else the default file in the data directory,
/// else the embedded copy.
QuantumDefectTable load_table(const std::string& table_flag, const std::optional<std::string>& data_dir);

std::optional<std::string> data_dir_from_environment();

}  // namespace rydlife::cli
