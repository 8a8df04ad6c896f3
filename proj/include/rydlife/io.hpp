#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rydlife/kinetics.hpp"
#include "rydlife/protocol.hpp"

namespace rydlife {

/// Shortest round-trip decimal text, always with a dot separator.
std::string format_number(double v);

/// Minimal CSV writer: fields are written as given, numbers via format_number.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(&out) {}

  CsvWriter& header(const std::vector<std::string>& names);
  CsvWriter& field(std::string_view text);
  CsvWriter& field(double v);
  CsvWriter& field(int v);
  CsvWriter& end_row();

 private:
  std::ostream* out_;
  bool first_ = true;
};

/// time_us,N_ens,N_tar,N_supp
void write_series_csv(std::ostream& out, const ObservableSeries& series);

/// Numeric CSV with a header row. A `time_us` column is required; every other
/// column is kept by name. Throws ParseError naming the offending row.
struct SeriesTable {
  std::vector<double> times_us;
  std::map<std::string, std::vector<double>> columns;

  bool has(const std::string& name) const { return columns.contains(name); }
};

SeriesTable read_series_csv(std::istream& in, const std::string& origin = "<input>");
SeriesTable read_series_csv_file(const std::string& path);

void to_json(nlohmann::json& j, const FitWindow& w);
void to_json(nlohmann::json& j, const LifetimeFit& f);
void to_json(nlohmann::json& j, const EnvironmentConfig& env);
void to_json(nlohmann::json& j, const KineticsConfig& c);
void to_json(nlohmann::json& j, const ObservableSeries& s);
void to_json(nlohmann::json& j, const ProtocolConfig& c);
void to_json(nlohmann::json& j, const SyntheticDataset& d);
void to_json(nlohmann::json& j, const EstimatorResult& r);

/// Table provenance block: species, version, provenance, origin.
nlohmann::json table_json(const QuantumDefectTable& table);

/// Envelope for one kinetics run: basis metadata, environment, solver
/// settings, lifetimes and the sampled series.
nlohmann::json kinetics_json(const KineticsModel& model, const ObservableSeries& series, const LifetimeFit* target_fit,
                             const LifetimeFit* ensemble_fit);

/// Throws ParseError on malformed documents.
ProtocolConfig protocol_config_from_json(const nlohmann::json& j);
SyntheticDataset dataset_from_json(const nlohmann::json& j);
SyntheticDataset read_dataset_file(const std::string& path);

}  // namespace rydlife
