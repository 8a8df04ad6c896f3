#include "rydlife/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rydlife/error.hpp"

namespace rydlife {

void ProtocolConfig::validate() const {
  if (!(initial_atoms >= 0.0)) throw ConfigError("initial_atoms must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must be in [0, 1]");
  if (!(alpha_sigma >= 0.0)) throw ConfigError("alpha_sigma must be >= 0");
  if (!(alpha_drift_per_ms >= 0.0)) throw ConfigError("alpha_drift_per_ms must be >= 0");
  if (shots < 1) throw ConfigError("shots must be >= 1");
  for (std::size_t k = 0; k < times_us.size(); ++k) {
    if (times_us[k] < 0.0 || (k > 0 && times_us[k] < times_us[k - 1])) {
      throw ConfigError("protocol times must be nonnegative and sorted");
    }
  }
}

double ProtocolConfig::effective_alpha(double t_us) const {
  return alpha * std::exp(-alpha_drift_per_ms * t_us * 1e-3);
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::size_t time_index, int branch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(time_index), static_cast<std::uint32_t>(branch)};
  return std::mt19937_64(seq);
}

}  // namespace

SyntheticDataset simulate_dataset(const ObservableSeries& truth, const ProtocolConfig& config,
                                  std::string target_label, double temperature_k) {
  config.validate();
  if (truth.times_us.size() != config.times_us.size()) {
    throw ConfigError("truth series must be sampled on the protocol times");
  }
  SyntheticDataset data;
  data.config = config;
  data.target = std::move(target_label);
  data.temperature_k = temperature_k;
  const auto shots = static_cast<std::size_t>(config.shots);

  for (std::size_t k = 0; k < config.times_us.size(); ++k) {
    const double p_tar = std::clamp(truth.n_tar[k], 0.0, 1.0);
    const double p_supp = std::clamp(truth.n_supp[k], 0.0, 1.0 - p_tar);
    const double alpha_t = config.effective_alpha(config.times_us[k]);

    for (int branch = 0; branch < 2; ++branch) {
      auto rng = stream(config.seed, k, branch);
      std::poisson_distribution<int> atoms(config.initial_atoms);
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      std::vector<int> counts(shots, 0);
      for (auto& count : counts) {
        const int n = config.initial_atoms > 0.0 ? atoms(rng) : 0;
        for (int atom = 0; atom < n; ++atom) {
          const double u = uniform(rng);
          const bool in_target = u < p_tar;
          const bool in_support = !in_target && u < p_tar + p_supp;
          bool present = in_target || in_support;
          if (branch == 1 && in_target && uniform(rng) < alpha_t) present = false;
          if (present && uniform(rng) < config.eta) ++count;
        }
      }
      (branch == 0 ? data.counts_a : data.counts_b).push_back(std::move(counts));
    }
  }
  return data;
}

SyntheticDataset simulate_dataset(const KineticsModel& model, const ProtocolConfig& config) {
  config.validate();
  const auto truth = observables(model.evolve(config.times_us), model.basis(), config.n_min_detect);
  return simulate_dataset(truth, config, to_string(model.basis().target()), model.environment().temperature_k);
}

Reconstruction reconstruct(double n, double sigma_n, double n_depumped, double sigma_n_depumped, double alpha,
                           double sigma_alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("degenerate estimator: alpha must be in (0, 1], got " + std::to_string(alpha));
  }
  Reconstruction r;
  const double diff = n - n_depumped;
  r.n_tar = diff / alpha;
  r.n_supp = n - r.n_tar;
  const double var_stat = sigma_n * sigma_n + sigma_n_depumped * sigma_n_depumped;
  const double d_alpha = diff / (alpha * alpha);
  r.sigma_tar = std::sqrt(var_stat / (alpha * alpha) + d_alpha * d_alpha * sigma_alpha * sigma_alpha);
  const double c_n = 1.0 - 1.0 / alpha;
  r.sigma_supp = std::sqrt(c_n * c_n * sigma_n * sigma_n + sigma_n_depumped * sigma_n_depumped / (alpha * alpha) +
                           d_alpha * d_alpha * sigma_alpha * sigma_alpha);
  r.negative = r.n_tar < 0.0;
  r.beyond_noise = -diff > 2.0 * std::sqrt(var_stat);
  return r;
}

namespace {

struct BranchStats {
  double mean = 0.0;
  double sigma = 0.0;  // standard error of the mean
};

// Counts are Poisson under the model; the variance is estimated by the mean,
// floored at one count per branch so empty points keep a finite weight.
BranchStats branch_stats(const std::vector<int>& counts) {
  BranchStats s;
  const double shots = static_cast<double>(counts.size());
  for (int c : counts) s.mean += c;
  s.mean /= shots;
  s.sigma = std::sqrt(std::max(s.mean, 1.0 / shots) / shots);
  return s;
}

}  // namespace

EstimatorResult estimate_lifetimes(const SyntheticDataset& dataset) {
  const auto& cfg = dataset.config;
  cfg.validate();
  if (cfg.times_us.size() < 4) throw FitError("estimator needs at least 4 time points");
  if (dataset.counts_a.size() != cfg.times_us.size() || dataset.counts_b.size() != cfg.times_us.size()) {
    throw ConfigError("dataset branches do not match the time grid");
  }
  if (!(cfg.eta > 0.0)) throw ConfigError("degenerate estimator: eta = 0");

  EstimatorResult out;
  out.times_us = cfg.times_us;
  std::vector<double> sigma_tar_stat;
  for (std::size_t k = 0; k < cfg.times_us.size(); ++k) {
    const auto a = branch_stats(dataset.counts_a[k]);
    const auto b = branch_stats(dataset.counts_b[k]);
    const double n = a.mean / cfg.eta;
    const double sn = a.sigma / cfg.eta;
    const double np = b.mean / cfg.eta;
    const double snp = b.sigma / cfg.eta;
    const auto r = reconstruct(n, sn, np, snp, cfg.alpha, cfg.alpha_sigma);
    out.n_ens.push_back(n);
    out.sigma_ens.push_back(sn);
    out.n_tar.push_back(r.n_tar);
    out.sigma_tar.push_back(r.sigma_tar);
    out.n_supp.push_back(r.n_supp);
    out.sigma_supp.push_back(r.sigma_supp);
    // alpha rescales every target point by the same factor, so it does not
    // enter the lifetime; the target fit uses the statistical part only.
    sigma_tar_stat.push_back(std::sqrt(sn * sn + snp * snp) / cfg.alpha);
    if (r.negative) {
      std::ostringstream msg;
      msg << "negative target estimate " << r.n_tar << " at t=" << cfg.times_us[k] << " us"
          << (r.beyond_noise ? " (N' exceeds N beyond noise)" : "");
      out.warnings.push_back(msg.str());
    }
  }

  const FitWindow window{cfg.times_us.front(), cfg.times_us.back()};
  FitOptions options;
  options.absolute_sigma = true;
  out.ensemble_fit = fit_exponential(out.times_us, out.n_ens, out.sigma_ens, window, options);
  out.target_fit = fit_exponential(out.times_us, out.n_tar, sigma_tar_stat, window, options);
  for (double t : out.times_us) {
    out.support_from_fits.push_back(out.ensemble_fit.amplitude * std::exp(-t / out.ensemble_fit.tau_us) -
                                    out.target_fit.amplitude * std::exp(-t / out.target_fit.tau_us));
  }
  return out;
}

}  // namespace rydlife
