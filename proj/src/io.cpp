#include "rydlife/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rydlife/error.hpp"
#include "text_util.hpp"

namespace rydlife {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc{} ? ptr : buf);
}

CsvWriter& CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) field(n);
  return end_row();
}

CsvWriter& CsvWriter::field(std::string_view text) {
  if (!first_) *out_ << ',';
  first_ = false;
  if (text.find_first_of(",\"\n") != std::string_view::npos) {
    *out_ << '"';
    for (char c : text) {
      if (c == '"') *out_ << '"';
      *out_ << c;
    }
    *out_ << '"';
  } else {
    *out_ << text;
  }
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(std::string_view(format_number(v))); }

CsvWriter& CsvWriter::field(int v) { return field(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::end_row() {
  *out_ << '\n';
  first_ = true;
  return *this;
}

void write_series_csv(std::ostream& out, const ObservableSeries& series) {
  CsvWriter csv(out);
  csv.header({"time_us", "N_ens", "N_tar", "N_supp"});
  for (std::size_t k = 0; k < series.times_us.size(); ++k) {
    csv.field(series.times_us[k]).field(series.n_ens[k]).field(series.n_tar[k]).field(series.n_supp[k]).end_row();
  }
}

SeriesTable read_series_csv(std::istream& in, const std::string& origin) {
  SeriesTable table;
  std::vector<std::string> names;
  std::string line;
  std::size_t row = 0;
  int time_col = -1;
  while (std::getline(in, line)) {
    ++row;
    auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto cells = detail::split(text, ',');
    const std::string where = origin + ": row " + std::to_string(row);
    if (names.empty()) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        std::string name(cells[c]);
        if (name.empty()) throw ParseError(where + ": empty column name");
        for (const auto& prev : names) {
          if (prev == name) throw ParseError(where + ": duplicate column '" + name + "'");
        }
        if (name == "time_us") time_col = static_cast<int>(c);
        names.push_back(std::move(name));
      }
      if (time_col < 0) throw ParseError(where + ": header lacks a time_us column");
      for (const auto& n : names) {
        if (n != "time_us") table.columns[n];
      }
      continue;
    }
    if (cells.size() != names.size()) {
      throw ParseError(where + ": expected " + std::to_string(names.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = detail::parse_double(cells[c]);
      if (!v) {
        throw ParseError(where + ": column '" + names[c] + "' is not a number: '" + std::string(cells[c]) + "'");
      }
      if (static_cast<int>(c) == time_col) {
        if (*v < 0.0 || (!table.times_us.empty() && *v < table.times_us.back())) {
          throw ParseError(where + ": times must be nonnegative and sorted");
        }
        table.times_us.push_back(*v);
      } else {
        table.columns[names[c]].push_back(*v);
      }
    }
  }
  if (names.empty()) throw ParseError(origin + ": empty file, expected a header row");
  return table;
}

SeriesTable read_series_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_series_csv(in, path);
}

void to_json(nlohmann::json& j, const FitWindow& w) { j = {{"start_us", w.start_us}, {"end_us", w.end_us}}; }

void to_json(nlohmann::json& j, const LifetimeFit& f) {
  j = {{"tau_us", f.tau_us},
       {"sigma_tau_us", f.sigma_tau_us},
       {"amplitude", f.amplitude},
       {"sigma_amplitude", f.sigma_amplitude},
       {"window", f.window},
       {"points", f.points},
       {"residual_rms", f.residual_rms},
       {"chi2", f.chi2},
       {"iterations", f.iterations}};
}

void to_json(nlohmann::json& j, const EnvironmentConfig& env) {
  nlohmann::json weight = nlohmann::json::array();
  for (const auto& [nu, w] : env.spectral_weight.points()) weight.push_back({nu, w});
  j = {{"temperature_k", env.temperature_k},
       {"static_field_v_per_cm", env.static_field_v_per_cm},
       {"spectral_weight_hz", std::move(weight)}};
}

void to_json(nlohmann::json& j, const KineticsConfig& c) {
  j = {{"n_window", c.n_window},
       {"l_max", c.l_max},
       {"n_min_detect", c.n_min_detect},
       {"time_points", c.time_points},
       {"target_window_factor", c.target_window_factor},
       {"ensemble_window_factor", c.ensemble_window_factor}};
}

void to_json(nlohmann::json& j, const ObservableSeries& s) {
  j = {{"time_us", s.times_us}, {"N_ens", s.n_ens}, {"N_tar", s.n_tar}, {"N_supp", s.n_supp}};
}

void to_json(nlohmann::json& j, const ProtocolConfig& c) {
  j = {{"initial_atoms", c.initial_atoms},
       {"alpha", c.alpha},
       {"alpha_sigma", c.alpha_sigma},
       {"eta", c.eta},
       {"n_min_detect", c.n_min_detect},
       {"times_us", c.times_us},
       {"shots", c.shots},
       {"seed", c.seed},
       {"alpha_drift_per_ms", c.alpha_drift_per_ms}};
}

void to_json(nlohmann::json& j, const SyntheticDataset& d) {
  j = {{"kind", "rydlife-dataset/1"},
       {"target", d.target},
       {"temperature_k", d.temperature_k},
       {"config", d.config},
       {"counts_a", d.counts_a},
       {"counts_b", d.counts_b}};
}

void to_json(nlohmann::json& j, const EstimatorResult& r) {
  j = {{"kind", "rydlife-estimate/1"},
       {"series",
        {{"time_us", r.times_us},
         {"N_ens", r.n_ens},
         {"sigma_N_ens", r.sigma_ens},
         {"N_tar", r.n_tar},
         {"sigma_N_tar", r.sigma_tar},
         {"N_supp", r.n_supp},
         {"sigma_N_supp", r.sigma_supp},
         {"N_supp_from_fits", r.support_from_fits}}},
       {"ensemble_fit", r.ensemble_fit},
       {"target_fit", r.target_fit},
       {"warnings", r.warnings}};
}

nlohmann::json table_json(const QuantumDefectTable& table) {
  return {{"species", table.species()},
          {"version", table.version()},
          {"provenance", table.provenance()},
          {"origin", table.origin()}};
}

nlohmann::json kinetics_json(const KineticsModel& model, const ObservableSeries& series, const LifetimeFit* target_fit,
                             const LifetimeFit* ensemble_fit) {
  const auto& basis = model.basis();
  nlohmann::json j = {{"kind", "rydlife-kinetics/1"},
                      {"target", to_string(basis.target())},
                      {"basis",
                       {{"size", basis.size()},
                        {"n_lo", basis.n_lo()},
                        {"n_hi", basis.n_hi()},
                        {"l_max", basis.l_max()},
                        {"n_min_detect", basis.n_min_detect()}}},
                      {"environment", model.environment()},
                      {"kinetics", model.config()},
                      {"solver",
                       {{"method", "matrix exponential per step"},
                        {"conservation_tolerance", 1e-9},
                        {"generator_max_abs_per_s", model.matrix().max_abs_entry()}}},
                      {"tau_zero_us", model.zero_temperature_lifetime_us()},
                      {"tau_departure_us", model.departure_lifetime_us()},
                      {"series", series}};
  if (target_fit) j["target_fit"] = *target_fit;
  if (ensemble_fit) j["ensemble_fit"] = *ensemble_fit;
  return j;
}

namespace {

template <typename T>
T get_field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get_field<T>(j, key, where) : fallback;
}

std::vector<std::vector<int>> get_counts(const nlohmann::json& j, const char* key) {
  const auto counts = get_field<std::vector<std::vector<int>>>(j, key, "dataset");
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (int c : counts[k]) {
      if (c < 0) {
        throw ParseError("dataset: " + std::string(key) + "[" + std::to_string(k) + "] has a negative count");
      }
    }
  }
  return counts;
}

}  // namespace

ProtocolConfig protocol_config_from_json(const nlohmann::json& j) {
  const std::string where = "protocol config";
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  ProtocolConfig c;
  c.initial_atoms = get_or(j, "initial_atoms", c.initial_atoms, where);
  c.alpha = get_or(j, "alpha", c.alpha, where);
  c.alpha_sigma = get_or(j, "alpha_sigma", c.alpha_sigma, where);
  c.eta = get_or(j, "eta", c.eta, where);
  c.n_min_detect = get_or(j, "n_min_detect", c.n_min_detect, where);
  c.times_us = get_field<std::vector<double>>(j, "times_us", where);
  c.shots = get_or(j, "shots", c.shots, where);
  c.seed = get_or(j, "seed", c.seed, where);
  c.alpha_drift_per_ms = get_or(j, "alpha_drift_per_ms", c.alpha_drift_per_ms, where);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ParseError(where + ": " + e.what());
  }
  return c;
}

SyntheticDataset dataset_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("dataset: expected a JSON object");
  SyntheticDataset d;
  d.config = protocol_config_from_json(get_field<nlohmann::json>(j, "config", "dataset"));
  d.target = get_or<std::string>(j, "target", "", "dataset");
  d.temperature_k = get_or(j, "temperature_k", 0.0, "dataset");
  d.counts_a = get_counts(j, "counts_a");
  d.counts_b = get_counts(j, "counts_b");
  const auto points = d.config.times_us.size();
  if (d.counts_a.size() != points || d.counts_b.size() != points) {
    throw ParseError("dataset: counts_a/counts_b need one entry per time point (" + std::to_string(points) + ")");
  }
  for (std::size_t k = 0; k < points; ++k) {
    if (d.counts_a[k].size() != static_cast<std::size_t>(d.config.shots) ||
        d.counts_b[k].size() != static_cast<std::size_t>(d.config.shots)) {
      throw ParseError("dataset: time point " + std::to_string(k) + " does not hold " +
                       std::to_string(d.config.shots) + " shots per branch");
    }
  }
  return d;
}

SyntheticDataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return dataset_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace rydlife
