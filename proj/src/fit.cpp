#include "rydlife/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "rydlife/error.hpp"

namespace rydlife {

namespace {

struct Point {
  double t, y, w;
};

double weighted_cost(const std::vector<Point>& pts, double a, double k) {
  double c = 0.0;
  for (const auto& p : pts) {
    const double r = p.y - a * std::exp(-k * p.t);
    c += p.w * r * r;
  }
  return c;
}

}  // namespace

LifetimeFit fit_exponential(std::span<const double> times_us, std::span<const double> values,
                            std::span<const double> sigmas, FitWindow window, const FitOptions& options) {
  if (times_us.size() != values.size() || (!sigmas.empty() && sigmas.size() != values.size())) {
    throw FitError("fit input arrays have different lengths");
  }
  std::vector<Point> pts;
  for (std::size_t i = 0; i < times_us.size(); ++i) {
    if (times_us[i] < window.start_us || times_us[i] > window.end_us) continue;
    double w = 1.0;
    if (!sigmas.empty()) {
      if (!(sigmas[i] > 0.0)) throw FitError("non-positive standard error at t=" + std::to_string(times_us[i]));
      w = 1.0 / (sigmas[i] * sigmas[i]);
    }
    pts.push_back({times_us[i], values[i], w});
  }
  if (pts.size() < 4) throw FitError("exponential fit needs at least 4 points in the window");
  if (std::all_of(pts.begin(), pts.end(), [](const Point& p) { return p.y == 0.0; })) {
    throw FitError("degenerate input: all values are zero");
  }

  // Initial guess from a weighted log-linear fit of the positive points.
  double sw = 0, st = 0, sl = 0, stt = 0, stl = 0;
  std::size_t positive = 0;
  for (const auto& p : pts) {
    if (p.y <= 0.0) continue;
    const double w = p.w * p.y * p.y;
    const double l = std::log(p.y);
    sw += w;
    st += w * p.t;
    sl += w * l;
    stt += w * p.t * p.t;
    stl += w * p.t * l;
    ++positive;
  }
  const double span = pts.back().t - pts.front().t;
  double k = span > 0.0 ? 1.0 / span : 1.0;
  double a = std::max_element(pts.begin(), pts.end(), [](auto& l, auto& r) { return l.y < r.y; })->y;
  if (positive >= 2) {
    const double det = sw * stt - st * st;
    if (det > 0.0) {
      const double slope = (sw * stl - st * sl) / det;
      if (slope < 0.0) {
        k = -slope;
        a = std::exp((sl - slope * st) / sw);
      }
    }
  }

  double cost = weighted_cost(pts, a, k);
  double lambda = 1e-3;
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (const auto& p : pts) {
      const double e = std::exp(-k * p.t);
      const Eigen::Vector2d j(e, -a * p.t * e);
      const double r = p.y - a * e;
      jtj += p.w * j * j.transpose();
      jtr += p.w * j * r;
    }
    bool stepped = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::Matrix2d damped = jtj;
      damped.diagonal() *= 1.0 + lambda;
      const Eigen::Vector2d delta = damped.ldlt().solve(jtr);
      const double a_new = a + delta(0);
      const double k_new = k + delta(1);
      const double cost_new = weighted_cost(pts, a_new, k_new);
      if (std::isfinite(cost_new) && cost_new <= cost) {
        const double rel = std::abs(delta(1)) / std::max(std::abs(k_new), 1e-300) +
                           std::abs(delta(0)) / std::max(std::abs(a_new), 1e-300);
        a = a_new;
        k = k_new;
        const double drop = cost - cost_new;
        cost = cost_new;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (rel < options.tolerance || drop <= options.tolerance * cost) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No downhill step left: we are at the minimum to machine precision.
      converged = true;
    }
    if (converged) break;
  }

  if (!converged || !(k > 0.0) || !std::isfinite(a)) {
    std::ostringstream msg;
    msg << "exponential fit did not converge after " << it << " iterations (a=" << a << ", rate=" << k
        << ", weighted cost=" << cost << ", points=" << pts.size() << ")";
    throw FitError(msg.str());
  }

  LifetimeFit fit;
  fit.window = window;
  fit.points = pts.size();
  fit.iterations = it + 1;
  fit.amplitude = a;
  fit.tau_us = 1.0 / k;
  fit.chi2 = cost;
  double sq = 0.0;
  Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const double e = std::exp(-k * p.t);
    const double r = p.y - a * e;
    sq += r * r;
    const Eigen::Vector2d j(e, -a * p.t * e);
    jtj += p.w * j * j.transpose();
  }
  fit.residual_rms = std::sqrt(sq / pts.size());
  Eigen::Matrix2d cov = jtj.inverse();
  if (!options.absolute_sigma) cov *= cost / static_cast<double>(pts.size() - 2);
  fit.sigma_amplitude = std::sqrt(std::max(cov(0, 0), 0.0));
  fit.sigma_tau_us = std::sqrt(std::max(cov(1, 1), 0.0)) / (k * k);
  return fit;
}

LifetimeFit fit_exponential(std::span<const double> times_us, std::span<const double> values) {
  if (times_us.empty()) throw FitError("exponential fit needs at least 4 points in the window");
  const auto [lo, hi] = std::minmax_element(times_us.begin(), times_us.end());
  return fit_exponential(times_us, values, {}, FitWindow{*lo, *hi});
}

}  // namespace rydlife
