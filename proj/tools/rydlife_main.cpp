// rydlife: Rb Rydberg lifetimes, rates and protocol simulation from the command line.

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cli_support.hpp"
#include "rydlife/error.hpp"
#include "rydlife/io.hpp"
#include "rydlife/kinetics.hpp"
#include "rydlife/protocol.hpp"
#include "rydlife/units.hpp"

using namespace rydlife;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::string table;
  std::string format = "csv";
  std::string output;
  int threads = 0;
  bool quiet = false;
};

struct SelectorOptions {
  std::string n;
  std::string l = "S";
  std::string j;
};

struct EnvOptions {
  double temperature_k = 300.0;
  std::string spectral_weight;
  double field_mv_per_cm = 0.0;
};

struct ProtocolOptions {
  ProtocolConfig config;
  std::string times;
  int points = 11;
};

struct TimeOptions {
  double t_max_us = 0.0;  // 0: ensemble fit window
  int points = 0;         // 0: kinetics time_points
};

struct FitOptionsCli {
  std::string input;
  std::string window;
};

// Everything a command needs once options are parsed and files are loaded.
struct Context {
  GlobalOptions global;
  std::optional<std::string> data_dir;
  std::unique_ptr<RydbergAtom> atom;
  std::unique_ptr<MatrixElementCache> cache;
  std::unique_ptr<RateCalculator> rates;
  EnvironmentConfig env;
  std::string spectral_weight_origin;

  void log(const std::string& msg) const {
    if (!global.quiet) std::cerr << "rydlife: " << msg << '\n';
  }
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw IoError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw IoError("write failed");
  }

 private:
  std::ofstream file_;
};

json header_json(const std::string& command, const Context& ctx, json config) {
  config["table"] = ctx.global.table.empty() ? json() : json(ctx.global.table);
  config["format"] = ctx.global.format;
  return {{"tool", "rydlife"},
          {"version", RYDLIFE_VERSION},
          {"command", command},
          {"config", std::move(config)},
          {"data_dir", ctx.data_dir ? json(*ctx.data_dir) : json()},
          {"table", table_json(ctx.atom->table())},
          {"spectral_weight_file", ctx.spectral_weight_origin.empty() ? json() : json(ctx.spectral_weight_origin)}};
}

json selector_json(const SelectorOptions& s) { return {{"n", s.n}, {"l", s.l}, {"j", s.j}}; }

// CSV gets the header as a single '#' comment line; JSON wraps the payload.
void emit(const Context& ctx, const json& header, const std::function<void(std::ostream&)>& csv, const json& payload) {
  Output out(ctx.global.output);
  if (ctx.global.format == "json") {
    out.stream() << json{{"header", header}, {"data", payload}}.dump(2) << '\n';
  } else {
    out.stream() << "# " << header.dump() << '\n';
    csv(out.stream());
  }
  out.finish();
}

std::vector<StateLabel> resolve_states(const Context& ctx, const SelectorOptions& sel) {
  const auto states =
      cli::select_states(cli::parse_n_selector(sel.n), cli::parse_l_selector(sel.l), cli::parse_j_selector(sel.j));
  for (const auto& s : states) ctx.atom->require_state(s);
  return states;
}

StateLabel resolve_single_state(const Context& ctx, const SelectorOptions& sel) {
  auto s = sel;
  if (s.j.empty()) s.j = std::to_string(2 * cli::parse_l_selector(s.l) + 1) + "/2";
  const auto states = resolve_states(ctx, s);
  if (states.size() != 1) throw ConfigError("this command needs exactly one state, got selector '" + sel.n + "'");
  return states.front();
}

int worker_count(const Context& ctx, std::size_t jobs) {
  int n = ctx.global.threads > 0 ? ctx.global.threads : static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, std::min<int>(n, static_cast<int>(jobs)));
}

// Runs job(i) for i in [0, count) on a small thread pool; the first
// exception is rethrown after all workers stop.
void parallel_for(const Context& ctx, std::size_t count, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  const int workers = worker_count(ctx, count);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void cmd_levels(const Context& ctx, const SelectorOptions& sel, const EnvOptions& env) {
  const auto states = resolve_states(ctx, sel);
  const double field = env.field_mv_per_cm * 1e-3;
  const auto& atom = *ctx.atom;

  struct Row {
    StateLabel s;
    double n_star, delta, binding_ghz, ion_v_per_cm;
    std::optional<double> it_mv_per_cm;
    std::string validity;
  };
  std::vector<Row> rows;
  for (const auto& s : states) {
    Row r{s, atom.effective_n(s), atom.quantum_defect(s), atom.binding_energy_hz(s) * 1e-9,
          atom.ionization_threshold_field(s), std::nullopt, "n/a"};
    if (s.l == 0) {
      r.it_mv_per_cm = atom.inglis_teller_field(s) * 1e3;
      r.validity = std::string(to_string(atom.field_validity(s, field)));
    }
    rows.push_back(r);
  }

  json payload = json::array();
  for (const auto& r : rows) {
    payload.push_back({{"state", to_string(r.s)},
                       {"n_star", r.n_star},
                       {"quantum_defect", r.delta},
                       {"binding_energy_ghz", r.binding_ghz},
                       {"ionization_field_v_per_cm", r.ion_v_per_cm},
                       {"inglis_teller_mv_per_cm", r.it_mv_per_cm ? json(*r.it_mv_per_cm) : json()},
                       {"validity", r.validity}});
  }
  const auto header = header_json("levels", ctx, {{"selector", selector_json(sel)}, {"field_mv_per_cm", env.field_mv_per_cm}});
  emit(
      ctx, header,
      [&](std::ostream& os) {
        CsvWriter csv(os);
        csv.header({"state", "n_star", "quantum_defect", "binding_energy_ghz", "ionization_field_v_per_cm",
                    "inglis_teller_mv_per_cm", "field_mv_per_cm", "validity"});
        for (const auto& r : rows) {
          csv.field(to_string(r.s)).field(r.n_star).field(r.delta).field(r.binding_ghz).field(r.ion_v_per_cm);
          if (r.it_mv_per_cm) {
            csv.field(*r.it_mv_per_cm);
          } else {
            csv.field(std::string_view());
          }
          csv.field(env.field_mv_per_cm).field(r.validity).end_row();
        }
      },
      payload);
}

void cmd_rates(const Context& ctx, const SelectorOptions& sel, const KineticsConfig& kin, int transitions_dn) {
  const auto states = resolve_states(ctx, sel);
  const auto& rates = *ctx.rates;
  const BasisLimits limits{kin.n_window, kin.l_max};

  if (transitions_dn >= 0) {
    struct Row {
      StateLabel from, to;
      double ghz, cm, radial, a, w;
    };
    std::vector<Row> rows;
    for (const auto& s : states) {
      for (const auto& p : ctx.atom->dipole_partners(s, std::max(1, s.n - transitions_dn), s.n + transitions_dn, kin.l_max)) {
        const auto tr = rates.transition_rate(s, p, ctx.env);
        const double nu = ctx.atom->transition_frequency_hz(s, p);
        rows.push_back({s, p, nu * 1e-9, units::wavelength_m(nu) * 100.0, ctx.cache->radial(s, p), tr.spontaneous,
                        tr.bbr_stimulated});
      }
    }
    json payload = json::array();
    for (const auto& r : rows) {
      payload.push_back({{"from", to_string(r.from)},
                         {"to", to_string(r.to)},
                         {"frequency_ghz", r.ghz},
                         {"wavelength_cm", r.cm},
                         {"radial_au", r.radial},
                         {"spontaneous_per_s", r.a},
                         {"bbr_per_s", r.w}});
    }
    const auto header = header_json("rates", ctx,
                                    {{"selector", selector_json(sel)},
                                     {"environment", ctx.env},
                                     {"transitions_dn", transitions_dn},
                                     {"l_max", kin.l_max}});
    emit(
        ctx, header,
        [&](std::ostream& os) {
          CsvWriter csv(os);
          csv.header({"from", "to", "frequency_ghz", "wavelength_cm", "radial_au", "spontaneous_per_s", "bbr_per_s"});
          for (const auto& r : rows) {
            csv.field(to_string(r.from)).field(to_string(r.to)).field(r.ghz).field(r.cm).field(r.radial);
            csv.field(r.a).field(r.w).end_row();
          }
        },
        payload);
    return;
  }

  struct Row {
    StateLabel s;
    double gamma0, bbr, branch, outer;
  };
  std::vector<Row> rows(states.size());
  parallel_for(ctx, states.size(), [&](std::size_t i) {
    const auto s = states[i];
    double low = 0.0;
    double total = 0.0;
    for (const auto& ch : rates.spontaneous_channels(s)) {
      total += ch.rate;
      if (ch.to.n >= 5 && ch.to.n <= 17) low += ch.rate;
    }
    const auto dep = rates.bbr_departure(s, ctx.env, limits);
    rows[i] = {s, total, dep.total, total > 0.0 ? low / total : 0.0, dep.outer_shell_fraction};
  });

  json payload = json::array();
  for (const auto& r : rows) {
    payload.push_back({{"state", to_string(r.s)},
                       {"tau0_us", 1e6 / r.gamma0},
                       {"spontaneous_per_s", r.gamma0},
                       {"bbr_departure_per_s", r.bbr},
                       {"tau_departure_us", 1e6 / (r.gamma0 + r.bbr)},
                       {"branching_n5_17", r.branch},
                       {"bbr_outer_shell_fraction", r.outer}});
  }
  const auto header = header_json(
      "rates", ctx,
      {{"selector", selector_json(sel)}, {"environment", ctx.env}, {"n_window", kin.n_window}, {"l_max", kin.l_max}});
  emit(
      ctx, header,
      [&](std::ostream& os) {
        CsvWriter csv(os);
        csv.header({"state", "tau0_us", "spontaneous_per_s", "bbr_departure_per_s", "tau_departure_us",
                    "branching_n5_17", "bbr_outer_shell_fraction"});
        for (const auto& r : rows) {
          csv.field(to_string(r.s)).field(1e6 / r.gamma0).field(r.gamma0).field(r.bbr);
          csv.field(1e6 / (r.gamma0 + r.bbr)).field(r.branch).field(r.outer).end_row();
        }
      },
      payload);
}

void cmd_lifetimes(const Context& ctx, const SelectorOptions& sel, const KineticsConfig& kin) {
  const auto states = resolve_states(ctx, sel);
  struct Row {
    StateLabel s;
    double tau0, tau_dep;
    LifetimeFit tar, ens;
    std::size_t basis;
  };
  std::vector<Row> rows(states.size());
  parallel_for(ctx, states.size(), [&](std::size_t i) {
    ctx.log("lifetimes " + to_string(states[i]));
    const KineticsModel model(*ctx.rates, states[i], ctx.env, kin);
    rows[i] = {states[i], model.zero_temperature_lifetime_us(), model.departure_lifetime_us(), model.target_lifetime(),
               model.ensemble_lifetime(), model.basis().size()};
  });

  json payload = json::array();
  for (const auto& r : rows) {
    payload.push_back({{"state", to_string(r.s)},
                       {"tau0_us", r.tau0},
                       {"tau_departure_us", r.tau_dep},
                       {"target_fit", r.tar},
                       {"ensemble_fit", r.ens},
                       {"ensemble_over_target", r.ens.tau_us / r.tar.tau_us},
                       {"basis_size", r.basis}});
  }
  const auto header =
      header_json("lifetimes", ctx, {{"selector", selector_json(sel)}, {"environment", ctx.env}, {"kinetics", kin}});
  emit(
      ctx, header,
      [&](std::ostream& os) {
        CsvWriter csv(os);
        csv.header({"state", "n", "tau0_us", "tau_departure_us", "tau_tar_us", "sigma_tau_tar_us", "tau_ens_us",
                    "sigma_tau_ens_us", "ens_over_tar", "repopulation_pct"});
        for (const auto& r : rows) {
          csv.field(to_string(r.s)).field(r.s.n).field(r.tau0).field(r.tau_dep).field(r.tar.tau_us);
          csv.field(r.tar.sigma_tau_us).field(r.ens.tau_us).field(r.ens.sigma_tau_us);
          csv.field(r.ens.tau_us / r.tar.tau_us).field(100.0 * (r.tar.tau_us / r.tau_dep - 1.0)).end_row();
        }
      },
      payload);
}

void cmd_simulate_kinetics(const Context& ctx, const SelectorOptions& sel, const KineticsConfig& kin,
                           const TimeOptions& time) {
  const auto target = resolve_single_state(ctx, sel);
  const KineticsModel model(*ctx.rates, target, ctx.env, kin);
  const double t_max = time.t_max_us > 0.0 ? time.t_max_us : model.ensemble_window().end_us;
  const auto grid = uniform_grid(t_max, time.points > 0 ? time.points : kin.time_points);
  const auto series = model.observe(grid);
  const auto tar = model.target_lifetime();
  const auto ens = model.ensemble_lifetime();
  const auto header = header_json("simulate-kinetics", ctx,
                                  {{"selector", selector_json(sel)},
                                   {"environment", ctx.env},
                                   {"kinetics", kin},
                                   {"t_max_us", t_max},
                                   {"points", grid.size()}});
  emit(
      ctx, header, [&](std::ostream& os) { write_series_csv(os, series); }, kinetics_json(model, series, &tar, &ens));
}

void cmd_simulate_protocol(const Context& ctx, const SelectorOptions& sel, const KineticsConfig& kin,
                           ProtocolOptions proto) {
  const auto target = resolve_single_state(ctx, sel);
  auto k = kin;
  k.n_min_detect = proto.config.n_min_detect;
  const KineticsModel model(*ctx.rates, target, ctx.env, k);
  if (proto.times.empty()) {
    proto.config.times_us = uniform_grid(model.target_window().end_us, proto.points);
  } else {
    proto.config.times_us = cli::parse_time_list(proto.times);
  }
  const auto dataset = simulate_dataset(model, proto.config);
  const auto header = header_json(
      "simulate-protocol", ctx,
      {{"selector", selector_json(sel)}, {"environment", ctx.env}, {"kinetics", k}, {"protocol", proto.config}});
  // Datasets are always JSON so that `fit` can read them back.
  Output out(ctx.global.output);
  json doc = dataset;
  doc["header"] = header;
  doc["truth"] = {{"tau_tar_us", model.target_lifetime().tau_us},
                  {"tau_ens_us", model.ensemble_lifetime().tau_us},
                  {"tau_departure_us", model.departure_lifetime_us()},
                  {"tau0_us", model.zero_temperature_lifetime_us()}};
  out.stream() << doc.dump(2) << '\n';
  out.finish();
}

FitWindow parse_window(const std::string& text, const std::vector<double>& times) {
  if (text.empty()) return {times.empty() ? 0.0 : times.front(), times.empty() ? 0.0 : times.back()};
  const auto v = cli::parse_time_list(text);
  if (v.size() != 2 || !(v[1] > v[0])) throw ConfigError("--window needs 'start,end' with end > start");
  return {v[0], v[1]};
}

void cmd_fit(const Context& ctx, const FitOptionsCli& opts) {
  const auto path = cli::resolve_data_file(opts.input, std::nullopt).string();
  const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  const json config = {{"input", path}, {"window", opts.window}};

  if (is_json) {
    const auto dataset = read_dataset_file(path);
    const auto result = estimate_lifetimes(dataset);
    for (const auto& w : result.warnings) ctx.log("warning: " + w);
    const auto header = header_json("fit", ctx, config);
    emit(
        ctx, header,
        [&](std::ostream& os) {
          CsvWriter csv(os);
          csv.header({"time_us", "N_ens", "sigma_N_ens", "N_tar", "sigma_N_tar", "N_supp", "sigma_N_supp",
                      "N_supp_from_fits"});
          for (std::size_t k = 0; k < result.times_us.size(); ++k) {
            csv.field(result.times_us[k]).field(result.n_ens[k]).field(result.sigma_ens[k]);
            csv.field(result.n_tar[k]).field(result.sigma_tar[k]).field(result.n_supp[k]).field(result.sigma_supp[k]);
            csv.field(result.support_from_fits[k]).end_row();
          }
          os << "# tau_ens_us=" << format_number(result.ensemble_fit.tau_us)
             << " sigma=" << format_number(result.ensemble_fit.sigma_tau_us)
             << " tau_tar_us=" << format_number(result.target_fit.tau_us)
             << " sigma=" << format_number(result.target_fit.sigma_tau_us) << '\n';
        },
        result);
    return;
  }

  const auto table = read_series_csv_file(path);
  const auto window = parse_window(opts.window, table.times_us);
  std::vector<std::pair<std::string, LifetimeFit>> fits;
  for (const auto& [name, values] : table.columns) {
    if (name.starts_with("sigma_")) continue;
    std::vector<double> sigmas;
    if (const auto it = table.columns.find("sigma_" + name); it != table.columns.end()) sigmas = it->second;
    FitOptions options;
    options.absolute_sigma = !sigmas.empty();
    try {
      fits.emplace_back(name, fit_exponential(table.times_us, values, sigmas, window, options));
    } catch (const FitError& e) {
      throw FitError("column '" + name + "': " + e.what());
    }
  }
  if (fits.empty()) throw ConfigError(path + ": no data columns besides time_us");

  json payload = json::object();
  for (const auto& [name, f] : fits) payload[name] = f;
  const auto header = header_json("fit", ctx, config);
  emit(
      ctx, header,
      [&](std::ostream& os) {
        CsvWriter csv(os);
        csv.header({"column", "tau_us", "sigma_tau_us", "amplitude", "sigma_amplitude", "points", "residual_rms",
                    "chi2"});
        for (const auto& [name, f] : fits) {
          csv.field(name).field(f.tau_us).field(f.sigma_tau_us).field(f.amplitude).field(f.sigma_amplitude);
          csv.field(static_cast<int>(f.points)).field(f.residual_rms).field(f.chi2).end_row();
        }
      },
      payload);
}

void add_selector(CLI::App* cmd, SelectorOptions& sel, bool single) {
  cmd->add_option("-n,--n", sel.n, single ? "Principal quantum number" : "n values: 85, 80,81, 60-88 or 60..88")
      ->required();
  cmd->add_option("-l,--l", sel.l, "Orbital channel S, P, D or F")->capture_default_str();
  cmd->add_option("-j,--j", sel.j, "J as 1/2, 3/2, ... (default: every J, or L+1/2 for single-state commands)");
}

void add_environment(CLI::App* cmd, EnvOptions& env) {
  cmd->add_option("-T,--temperature", env.temperature_k, "Black-body temperature, K")->capture_default_str();
  cmd->add_option("--spectral-weight", env.spectral_weight,
                  "Two-column file (Hz, multiplier) scaling the black-body occupation");
}

void add_kinetics(CLI::App* cmd, KineticsConfig& kin) {
  cmd->add_option("--n-window", kin.n_window, "Basis half-width in n")->capture_default_str();
  cmd->add_option("--l-max", kin.l_max, "Largest L in the basis (<= 3)")->capture_default_str();
  cmd->add_option("--n-min-detect", kin.n_min_detect, "Smallest n counted as detectable")->capture_default_str();
  cmd->add_option("--time-points", kin.time_points, "Samples per fit window")->capture_default_str();
  cmd->add_option("--target-window", kin.target_window_factor, "Target fit window, multiples of tau_departure")
      ->capture_default_str();
  cmd->add_option("--ensemble-window", kin.ensemble_window_factor, "Ensemble fit window, multiples of tau0")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifetimes of Rb Rydberg states and simulation of the field-ionization / depump protocol"};
  app.set_version_flag("--version", std::string("rydlife ") + RYDLIFE_VERSION);
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--table", global.table,
                 std::string("Quantum-defect table file (default: $") + cli::kDataDirVariable + "/" +
                     cli::kDefaultTableName + ", else the built-in copy)");
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("-o,--output", global.output, "Output file (default: stdout)");
  app.add_option("--threads", global.threads, "Worker threads for sweeps (default: all cores)");
  app.add_flag("-q,--quiet", global.quiet, "No progress messages on stderr");

  SelectorOptions sel;
  EnvOptions env;
  KineticsConfig kin;
  ProtocolOptions proto;
  TimeOptions time;
  FitOptionsCli fit_opts;
  int transitions_dn = -1;

  auto* levels = app.add_subcommand("levels", "Energies, effective n and field thresholds");
  add_selector(levels, sel, false);
  levels->add_option("--field-mVcm", env.field_mv_per_cm, "Static field for the validity flag, mV/cm")
      ->capture_default_str();

  auto* rates = app.add_subcommand("rates", "Spontaneous and black-body rates per state");
  add_selector(rates, sel, false);
  add_environment(rates, env);
  rates->add_option("--n-window", kin.n_window, "Black-body partner window in n")->capture_default_str();
  rates->add_option("--l-max", kin.l_max, "Largest partner L")->capture_default_str();
  rates->add_option("--transitions", transitions_dn, "List individual transitions to partners with |dn| <= value");

  auto* lifetimes = app.add_subcommand("lifetimes", "tau0, departure, target and ensemble lifetimes");
  add_selector(lifetimes, sel, false);
  add_environment(lifetimes, env);
  add_kinetics(lifetimes, kin);

  auto* sim_kin = app.add_subcommand("simulate-kinetics", "Population series N_ens, N_tar, N_supp for one state");
  add_selector(sim_kin, sel, true);
  add_environment(sim_kin, env);
  add_kinetics(sim_kin, kin);
  sim_kin->add_option("--t-max", time.t_max_us, "End of the series, us (default: ensemble fit window)");
  sim_kin->add_option("--points", time.points, "Samples in the series (default: --time-points)");

  auto* sim_proto = app.add_subcommand("simulate-protocol", "Shot-level synthetic dataset for both branches (JSON)");
  add_selector(sim_proto, sel, true);
  add_environment(sim_proto, env);
  add_kinetics(sim_proto, kin);
  auto& pc = proto.config;
  sim_proto->add_option("--atoms", pc.initial_atoms, "Mean Rydberg atoms per shot")->capture_default_str();
  sim_proto->add_option("--alpha", pc.alpha, "Depump efficiency")->capture_default_str();
  sim_proto->add_option("--alpha-sigma", pc.alpha_sigma, "Uncertainty of alpha")->capture_default_str();
  sim_proto->add_option("--alpha-drift", pc.alpha_drift_per_ms, "Relative loss of alpha per ms")->capture_default_str();
  sim_proto->add_option("--eta", pc.eta, "Detection efficiency")->capture_default_str();
  sim_proto->add_option("--detect-n-min", pc.n_min_detect, "Smallest n counted by field ionization")
      ->capture_default_str();
  sim_proto->add_option("--shots", pc.shots, "Shots per time point and branch")->capture_default_str();
  sim_proto->add_option("--seed", pc.seed, "Random seed")->capture_default_str();
  sim_proto->add_option("--times", proto.times, "Comma separated wait times, us (default: uniform over 2 tau_dep)");
  sim_proto->add_option("--points", proto.points, "Number of default wait times")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "Fit a dataset (.json) or a series CSV (time_us plus N_* columns)");
  fit->add_option("-i,--input", fit_opts.input, "Input file")->required();
  fit->add_option("--window", fit_opts.window, "Fit window 'start,end' in us (CSV input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    app.exit(e);
    return cli::kIo;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsage;
  }

  Context ctx;
  ctx.global = global;
  try {
    ctx.data_dir = cli::data_dir_from_environment();
    ctx.atom = std::make_unique<RydbergAtom>(cli::load_table(global.table, ctx.data_dir));
    ctx.cache = std::make_unique<MatrixElementCache>(*ctx.atom);
    ctx.rates = std::make_unique<RateCalculator>(*ctx.cache);
    ctx.env.temperature_k = env.temperature_k;
    ctx.env.static_field_v_per_cm = env.field_mv_per_cm * 1e-3;
    if (!env.spectral_weight.empty()) {
      const auto path = cli::resolve_data_file(env.spectral_weight, ctx.data_dir);
      ctx.env.spectral_weight = SpectralWeight::from_file(path);
      ctx.spectral_weight_origin = path.string();
    }
    ctx.env.validate();
    kin.validate();

    if (levels->parsed()) {
      cmd_levels(ctx, sel, env);
    } else if (rates->parsed()) {
      cmd_rates(ctx, sel, kin, transitions_dn);
    } else if (lifetimes->parsed()) {
      cmd_lifetimes(ctx, sel, kin);
    } else if (sim_kin->parsed()) {
      cmd_simulate_kinetics(ctx, sel, kin, time);
    } else if (sim_proto->parsed()) {
      cmd_simulate_protocol(ctx, sel, kin, proto);
    } else if (fit->parsed()) {
      cmd_fit(ctx, fit_opts);
    }
  } catch (const ConfigError& e) {
    std::cerr << "rydlife: error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const UnsupportedStateError& e) {
    std::cerr << "rydlife: error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const SelectionRuleError& e) {
    std::cerr << "rydlife: error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const NumericError& e) {
    std::cerr << "rydlife: numeric failure: " << e.what() << '\n';
    return cli::kNumeric;
  } catch (const FitError& e) {
    std::cerr << "rydlife: fit failed: " << e.what() << '\n';
    return cli::kNumeric;
  } catch (const ParseError& e) {
    std::cerr << "rydlife: parse error: " << e.what() << '\n';
    return cli::kIo;
  } catch (const IoError& e) {
    std::cerr << "rydlife: I/O error: " << e.what() << '\n';
    return cli::kIo;
  } catch (const std::exception& e) {
    std::cerr << "rydlife: internal error: " << e.what() << '\n';
    return 1;
  }
  return cli::kOk;
}
