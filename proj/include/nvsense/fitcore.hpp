#pragma once

// Estimators: stretched-exponential coherence decays, T2 versus pulse-count
// scaling laws, exponential and linear stability fits, spectral
// decomposition of decoherence data and proton-line depth recovery.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nvsense/constants.hpp"
#include "nvsense/errors.hpp"
#include "nvsense/fieldcal.hpp"
#include "nvsense/least_squares.hpp"
#include "nvsense/noisebath.hpp"
#include "nvsense/pulses.hpp"
#include "nvsense/quadrature.hpp"
#include "nvsense/simkit.hpp"

namespace nvsense::fitcore {

struct FitResult {
  std::string model_id;
  std::map<std::string, double> parameters;
  std::map<std::string, double> standard_errors;
  std::map<std::string, double> diagnostics;
  double residual_norm = 0.0;
  std::size_t n_points = 0;
  bool converged = false;
  std::vector<std::string> warnings;

  double at(const std::string& name) const {
    const auto it = parameters.find(name);
    if (it == parameters.end()) throw ValidationError("fit has no parameter '" + name + "'");
    return it->second;
  }
  double error(const std::string& name) const {
    const auto it = standard_errors.find(name);
    if (it == standard_errors.end()) throw ValidationError("fit has no error for '" + name + "'");
    return it->second;
  }
};

namespace detail {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline double median(std::vector<double> v) {
  if (v.empty()) return nan;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  require(a == b, std::string(what) + ": input lengths differ");
}

inline std::vector<double> sqrt_weights(std::size_t m, std::optional<std::span<const double>> w) {
  std::vector<double> out(m, 1.0);
  if (!w) return out;
  require(w->size() == m, "weights length differs from data");
  for (std::size_t i = 0; i < m; ++i) {
    require(std::isfinite((*w)[i]) && (*w)[i] > 0.0, "weights must be positive and finite");
    out[i] = std::sqrt((*w)[i]);
  }
  return out;
}

// Small-sample corrected Akaike criterion from a weighted residual sum.
inline double aicc(double rss, std::size_t m, std::size_t k) {
  const double md = static_cast<double>(m), kd = static_cast<double>(k);
  const double rss_floor = std::max(rss, 1e-300);
  if (m <= k + 1) return std::numeric_limits<double>::infinity();
  return md * std::log(rss_floor / md) + 2.0 * kd + 2.0 * kd * (kd + 1.0) / (md - kd - 1.0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// stretched exponential A exp[-(t/T2)^n]
// ---------------------------------------------------------------------------

inline constexpr double kStretchMin = 0.5;
inline constexpr double kStretchMax = 3.0;

inline FitResult fit_stretched_exp(std::span<const double> times, std::span<const double> contrast,
                                   std::optional<std::span<const double>> weights = std::nullopt) {
  detail::require_same_size(times.size(), contrast.size(), "fit_stretched_exp");
  const std::size_t m = times.size();
  require(m >= 5, "stretched-exponential fit needs at least 5 points");
  for (std::size_t i = 0; i < m; ++i) {
    require(std::isfinite(times[i]) && times[i] > 0.0, "times must be positive");
    require(std::isfinite(contrast[i]), "contrast values must be finite");
    if (i > 0) require(times[i] > times[i - 1], "times must be strictly increasing");
  }
  const auto [lo_it, hi_it] = std::minmax_element(contrast.begin(), contrast.end());
  if (*hi_it - *lo_it <= 1e-12 * std::max(1.0, std::abs(*hi_it)))
    throw NumericalError("degenerate data: contrast is constant");

  const auto sw = detail::sqrt_weights(m, weights);
  const double t_scale = times.back();

  lsq::Problem problem;
  problem.n_residuals = static_cast<Eigen::Index>(m);
  problem.residuals = [&](const lsq::Vector& x, lsq::Vector& r) {
    for (std::size_t i = 0; i < m; ++i) {
      const double u = std::pow(times[i] / t_scale / x[1], x[2]);
      r[i] = sw[i] * (x[0] * std::exp(-u) - contrast[i]);
    }
  };
  problem.jacobian = [&](const lsq::Vector& x, lsq::Matrix& jac) {
    jac.resize(static_cast<Eigen::Index>(m), 3);
    for (std::size_t i = 0; i < m; ++i) {
      const double ratio = times[i] / t_scale / x[1];
      const double u = std::pow(ratio, x[2]);
      const double e = std::exp(-u);
      const auto row = static_cast<Eigen::Index>(i);
      jac(row, 0) = sw[i] * e;
      jac(row, 1) = sw[i] * x[0] * e * u * x[2] / x[1];
      jac(row, 2) = -sw[i] * x[0] * e * u * std::log(ratio);
    }
  };
  const double y_scale = std::max(std::abs(*hi_it), std::abs(*lo_it));
  problem.lower = (lsq::Vector(3) << 1e-9 * y_scale, 1e-6, kStretchMin).finished();
  problem.upper = (lsq::Vector(3) << 10.0 * y_scale, 1e3, kStretchMax).finished();

  // initial amplitude from the earliest points, T2 from the first 1/e crossing
  double a0 = *std::max_element(contrast.begin(), contrast.begin() + std::min<std::size_t>(3, m));
  if (!(a0 > 0.0)) a0 = y_scale;
  double t2_0 = 2.0;
  for (std::size_t i = 1; i < m; ++i) {
    const double level = a0 / std::exp(1.0);
    if (contrast[i] < level) {
      const double f = (contrast[i - 1] - level) / (contrast[i - 1] - contrast[i]);
      t2_0 = (times[i - 1] + f * (times[i] - times[i - 1])) / t_scale;
      break;
    }
  }
  t2_0 = std::clamp(t2_0, 1e-3, 1e2);

  std::optional<lsq::Solution> best;
  for (double n0 : {0.8, 1.2, 1.8}) {
    lsq::Vector x0(3);
    x0 << a0, t2_0, n0;
    auto solution = lsq::solve(problem, x0);
    if (!best || solution.cost < best->cost) best = std::move(solution);
  }

  FitResult result;
  result.model_id = "stretched_exp";
  result.n_points = m;
  result.converged = best->converged && best->x.allFinite();
  result.residual_norm = std::sqrt(2.0 * best->cost);
  const auto cov = lsq::covariance(*best, true);
  result.parameters = {{"A", best->x[0]}, {"T2", best->x[1] * t_scale}, {"n", best->x[2]}};
  result.standard_errors = {{"A", std::sqrt(cov(0, 0))},
                            {"T2", std::sqrt(cov(1, 1)) * t_scale},
                            {"n", std::sqrt(cov(2, 2))}};
  result.diagnostics["iterations"] = best->iterations;
  if (!result.converged) result.warnings.push_back("did not converge within 200 iterations");
  for (const char* key : {"n"}) {
    const double v = result.parameters[key];
    if (v <= kStretchMin + 1e-9 || v >= kStretchMax - 1e-9)
      result.warnings.push_back(std::string("stretch exponent at bound ") + std::to_string(v));
  }
  return result;
}

// ---------------------------------------------------------------------------
// T2 versus number of pulses
// ---------------------------------------------------------------------------

enum class T2nMode { Auto, Saturation, Power };

inline T2nMode t2n_mode_from_string(const std::string& s) {
  if (s == "auto") return T2nMode::Auto;
  if (s == "sat" || s == "saturation") return T2nMode::Saturation;
  if (s == "power") return T2nMode::Power;
  throw ValidationError("unknown T2(N) mode '" + s + "' (expected auto|sat|power)");
}

/// T2(1) N^s
inline double t2n_power(double n, double t2_1, double s) { return t2_1 * std::pow(n, s); }

/// T2(1) [N_sat^s + (N^s - N_sat^s) exp(-N / N_sat)], as printed; note it
/// is not exactly T2(1) at N = 1.
inline double t2n_saturation(double n, double t2_1, double s, double n_sat) {
  const double m = std::pow(n_sat, s);
  return t2_1 * (m + (std::pow(n, s) - m) * std::exp(-n / n_sat));
}

namespace detail {

struct T2nData {
  std::span<const double> n;
  std::vector<double> y;       // T2 / y_scale
  std::vector<double> sw;      // sqrt weights on scaled data
  double y_scale = 1.0;
  bool absolute_sigma = false;
};

inline FitResult finish_t2n(const lsq::Solution& s, const T2nData& d, const std::string& id,
                            const std::vector<std::string>& names) {
  FitResult r;
  r.model_id = id;
  r.n_points = d.n.size();
  r.converged = s.converged && s.x.allFinite();
  r.residual_norm = std::sqrt(2.0 * s.cost);
  const auto cov = lsq::covariance(s, !d.absolute_sigma);
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double unit = (names[j] == "T2_1") ? d.y_scale : 1.0;
    r.parameters[names[j]] = s.x[jj] * unit;
    r.standard_errors[names[j]] = std::sqrt(cov(jj, jj)) * unit;
  }
  r.diagnostics["aicc"] = aicc(2.0 * s.cost, d.n.size(), names.size());
  if (!r.converged) r.warnings.push_back("did not converge within 200 iterations");
  return r;
}

inline FitResult fit_power(const T2nData& d) {
  const std::size_t m = d.n.size();
  lsq::Problem p;
  p.n_residuals = static_cast<Eigen::Index>(m);
  p.residuals = [&](const lsq::Vector& x, lsq::Vector& r) {
    for (std::size_t i = 0; i < m; ++i) r[i] = d.sw[i] * (t2n_power(d.n[i], x[0], x[1]) - d.y[i]);
  };
  p.jacobian = [&](const lsq::Vector& x, lsq::Matrix& jac) {
    jac.resize(static_cast<Eigen::Index>(m), 2);
    for (std::size_t i = 0; i < m; ++i) {
      const double ns = std::pow(d.n[i], x[1]);
      jac(static_cast<Eigen::Index>(i), 0) = d.sw[i] * ns;
      jac(static_cast<Eigen::Index>(i), 1) = d.sw[i] * x[0] * ns * std::log(d.n[i]);
    }
  };
  p.lower = (lsq::Vector(2) << 1e-12, -5.0).finished();
  p.upper = (lsq::Vector(2) << 1e12, 5.0).finished();
  // log-log regression start
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(d.n[i]), ly = std::log(std::max(d.y[i], 1e-12));
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double md = static_cast<double>(m);
  const double denom = md * sxx - sx * sx;
  const double slope = denom > 0 ? (md * sxy - sx * sy) / denom : 0.0;
  const double icept = (sy - slope * sx) / md;
  lsq::Vector x0(2);
  x0 << std::exp(icept), std::clamp(slope, -4.0, 4.0);
  return finish_t2n(lsq::solve(p, x0), d, "t2n_power", {"T2_1", "s"});
}

inline FitResult fit_saturation(const T2nData& d, double s_start) {
  const std::size_t m = d.n.size();
  lsq::Problem p;
  p.n_residuals = static_cast<Eigen::Index>(m);
  p.residuals = [&](const lsq::Vector& x, lsq::Vector& r) {
    for (std::size_t i = 0; i < m; ++i)
      r[i] = d.sw[i] * (t2n_saturation(d.n[i], x[0], x[1], x[2]) - d.y[i]);
  };
  p.jacobian = [&](const lsq::Vector& x, lsq::Matrix& jac) {
    jac.resize(static_cast<Eigen::Index>(m), 3);
    const double a = x[0], s = x[1], ns = x[2];
    const double msat = std::pow(ns, s);
    for (std::size_t i = 0; i < m; ++i) {
      const double n = d.n[i];
      const double pn = std::pow(n, s);
      const double e = std::exp(-n / ns);
      const auto row = static_cast<Eigen::Index>(i);
      jac(row, 0) = d.sw[i] * (msat + (pn - msat) * e);
      jac(row, 1) =
          d.sw[i] * a * (msat * std::log(ns) + (pn * std::log(n) - msat * std::log(ns)) * e);
      jac(row, 2) =
          d.sw[i] * a * (s * msat / ns * (1.0 - e) + (pn - msat) * e * n / (ns * ns));
    }
  };
  const double n_max = *std::max_element(d.n.begin(), d.n.end());
  p.lower = (lsq::Vector(3) << 1e-12, -3.0, 1e-3).finished();
  p.upper = (lsq::Vector(3) << 1e12, 3.0, 1e3 * n_max).finished();
  const auto it_max = std::max_element(d.n.begin(), d.n.end());
  const double y_at_max = d.y[static_cast<std::size_t>(it_max - d.n.begin())];
  std::optional<lsq::Solution> best;
  for (double s0 : {std::clamp(s_start, 0.05, 2.0), 0.5}) {
    for (double nsat0 : {n_max / 8.0, n_max / 2.0, 2.0 * n_max}) {
      const double shape = t2n_saturation(n_max, 1.0, s0, nsat0);
      lsq::Vector x0(3);
      x0 << y_at_max / shape, s0, nsat0;
      auto sol = lsq::solve(p, x0);
      if (!best || sol.cost < best->cost) best = std::move(sol);
    }
  }
  return finish_t2n(*best, d, "t2n_saturation", {"T2_1", "s", "N_sat"});
}

}  // namespace detail

/// Fit T2 against pulse count. With `sigma` the per-point T2 uncertainties
/// are used as absolute weights; without it residuals are relative
/// (weight 1/T2^2) and errors scale with the residual variance. Auto mode
/// keeps the power law unless the saturation model improves AICc by more
/// than 2.
inline FitResult fit_t2_vs_n(std::span<const double> n_pulses, std::span<const double> t2,
                             T2nMode mode = T2nMode::Auto,
                             std::optional<std::span<const double>> sigma = std::nullopt) {
  detail::require_same_size(n_pulses.size(), t2.size(), "fit_t2_vs_n");
  const std::size_t m = n_pulses.size();
  for (std::size_t i = 0; i < m; ++i) {
    require(n_pulses[i] >= 1.0 && std::floor(n_pulses[i]) == n_pulses[i],
            "pulse counts must be positive integers");
    require(std::isfinite(t2[i]) && t2[i] > 0.0, "T2 values must be positive");
  }
  require(m >= 4, "T2(N) fit needs at least 4 points");
  require(mode != T2nMode::Saturation || m >= 5, "saturation fit needs at least 5 points");

  detail::T2nData d;
  d.n = n_pulses;
  d.y_scale = detail::median(std::vector<double>(t2.begin(), t2.end()));
  d.y.resize(m);
  d.sw.resize(m);
  d.absolute_sigma = sigma.has_value();
  if (sigma) require(sigma->size() == m, "sigma length differs from data");
  for (std::size_t i = 0; i < m; ++i) {
    d.y[i] = t2[i] / d.y_scale;
    if (sigma) {
      require((*sigma)[i] > 0.0, "sigma must be positive");
      d.sw[i] = d.y_scale / (*sigma)[i];
    } else {
      d.sw[i] = 1.0 / d.y[i];
    }
  }

  if (mode == T2nMode::Power) return detail::fit_power(d);
  const auto power = detail::fit_power(d);
  if (mode == T2nMode::Saturation) return detail::fit_saturation(d, power.at("s"));
  if (m < 5) {
    auto r = power;
    r.warnings.push_back("fewer than 5 points: saturation model not considered");
    return r;
  }
  auto saturation = detail::fit_saturation(d, power.at("s"));
  const double a_pow = power.diagnostics.at("aicc");
  const double a_sat = saturation.diagnostics.at("aicc");
  auto chosen = (a_sat < a_pow - 2.0 && saturation.converged) ? saturation : power;
  chosen.diagnostics["aicc_power"] = a_pow;
  chosen.diagnostics["aicc_saturation"] = a_sat;
  return chosen;
}

// ---------------------------------------------------------------------------
// stability fits
// ---------------------------------------------------------------------------

/// V0 2^(-t / half_life). Data without decay report an infinite half-life
/// and converged = false.
inline FitResult fit_exp_decay(std::span<const double> times, std::span<const double> values) {
  detail::require_same_size(times.size(), values.size(), "fit_exp_decay");
  const std::size_t m = times.size();
  require(m >= 3, "exponential fit needs at least 3 points");
  for (std::size_t i = 0; i < m; ++i)
    require(std::isfinite(times[i]) && std::isfinite(values[i]), "inputs must be finite");
  const auto [tmin, tmax] = std::minmax_element(times.begin(), times.end());
  const double span = *tmax - *tmin;
  require(span > 0.0, "times must not all be equal");

  const double v_scale = std::max(std::abs(*std::max_element(values.begin(), values.end())), 1e-300);
  lsq::Problem p;
  p.n_residuals = static_cast<Eigen::Index>(m);
  // x = (V0 / v_scale, rate * span)
  p.residuals = [&](const lsq::Vector& x, lsq::Vector& r) {
    for (std::size_t i = 0; i < m; ++i)
      r[i] = x[0] * std::exp(-x[1] * (times[i] - *tmin) / span) - values[i] / v_scale;
  };
  p.jacobian = [&](const lsq::Vector& x, lsq::Matrix& jac) {
    jac.resize(static_cast<Eigen::Index>(m), 2);
    for (std::size_t i = 0; i < m; ++i) {
      const double tau = (times[i] - *tmin) / span;
      const double e = std::exp(-x[1] * tau);
      jac(static_cast<Eigen::Index>(i), 0) = e;
      jac(static_cast<Eigen::Index>(i), 1) = -x[0] * tau * e;
    }
  };
  p.lower = (lsq::Vector(2) << -1e6, 0.0).finished();
  p.upper = (lsq::Vector(2) << 1e6, 1e4).finished();

  // log-linear start on positive values
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (values[i] <= 0.0) continue;
    const double x = (times[i] - *tmin) / span, y = std::log(values[i] / v_scale);
    sx += x, sy += y, sxx += x * x, sxy += x * y, cnt += 1;
  }
  double k0 = 1.0, v0 = 1.0;
  if (cnt >= 2 && cnt * sxx - sx * sx > 0) {
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    k0 = std::max(-slope, 1e-3);
    v0 = std::exp((sy - slope * sx) / cnt);
  }
  lsq::Vector x0(2);
  x0 << v0, k0;
  const auto s = lsq::solve(p, x0);
  const auto cov = lsq::covariance(s, true);

  FitResult r;
  r.model_id = "exp_decay";
  r.n_points = m;
  r.residual_norm = std::sqrt(2.0 * s.cost) * v_scale;
  const double rate = s.x[1] / span;
  const double rate_err = std::sqrt(cov(1, 1)) / span;
  // report V0 at t = 0 rather than at the first sample
  const double v0_fit = s.x[0] * v_scale * std::exp(rate * *tmin);
  r.parameters["V0"] = v0_fit;
  r.standard_errors["V0"] = std::sqrt(cov(0, 0)) * v_scale * std::exp(rate * *tmin);
  r.parameters["decay_rate"] = rate;
  r.standard_errors["decay_rate"] = rate_err;
  r.converged = s.converged && s.x.allFinite();
  if (rate <= 1e-9 / span) {
    r.parameters["half_life"] = std::numeric_limits<double>::infinity();
    r.standard_errors["half_life"] = std::numeric_limits<double>::infinity();
    r.converged = false;
    r.warnings.push_back("no decay detected: half-life unbounded");
  } else {
    r.parameters["half_life"] = std::log(2.0) / rate;
    r.standard_errors["half_life"] = std::log(2.0) * rate_err / (rate * rate);
  }
  if (!s.converged) r.warnings.push_back("did not converge within 200 iterations");
  return r;
}

/// Ordinary least squares y = intercept + slope t.
inline FitResult fit_linear(std::span<const double> x, std::span<const double> y) {
  detail::require_same_size(x.size(), y.size(), "fit_linear");
  const std::size_t m = x.size();
  require(m >= 2, "linear fit needs at least 2 points");
  const double md = static_cast<double>(m);
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / md;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / md;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  require(sxx > 0.0, "linear fit needs at least two distinct x values");
  const double slope = sxy / sxx;
  const double intercept = ym - slope * xm;
  double rss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = y[i] - intercept - slope * x[i];
    rss += e * e;
  }
  FitResult r;
  r.model_id = "linear";
  r.n_points = m;
  r.residual_norm = std::sqrt(rss);
  r.parameters = {{"intercept", intercept}, {"slope", slope}};
  if (m > 2) {
    const double s2 = rss / (md - 2.0);
    r.standard_errors = {{"intercept", std::sqrt(s2 * (1.0 / md + xm * xm / sxx))},
                         {"slope", std::sqrt(s2 / sxx)}};
    r.converged = true;
  } else {
    r.standard_errors = {{"intercept", detail::nan}, {"slope", detail::nan}};
    r.warnings.push_back("two points: exact interpolation, standard errors undefined");
  }
  return r;
}

// ---------------------------------------------------------------------------
// T2 change statistics
// ---------------------------------------------------------------------------

struct ChangeStats {
  double mean_percent = 0.0;
  double std_percent = 0.0;
  std::size_t n = 0;
  bool std_defined = false;
};

/// Per-NV reduction 100 (1 - after / before), mean and sample deviation.
inline ChangeStats t2_change_stats(std::span<const double> before, std::span<const double> after) {
  detail::require_same_size(before.size(), after.size(), "t2_change_stats");
  require(!before.empty(), "need at least one T2 pair");
  std::vector<double> change;
  for (std::size_t i = 0; i < before.size(); ++i) {
    require(before[i] > 0.0 && after[i] > 0.0, "T2 values must be positive");
    change.push_back(100.0 * (1.0 - after[i] / before[i]));
  }
  ChangeStats s;
  s.n = change.size();
  s.mean_percent = std::accumulate(change.begin(), change.end(), 0.0) / static_cast<double>(s.n);
  if (s.n < 2) {
    s.std_percent = detail::nan;
    return s;
  }
  double ss = 0;
  for (double c : change) ss += (c - s.mean_percent) * (c - s.mean_percent);
  s.std_percent = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.std_defined = true;
  return s;
}

// ---------------------------------------------------------------------------
// spectral decomposition
// ---------------------------------------------------------------------------

struct SpectrumSample {
  double omega = 0.0;  // rad/s, filter peak pi N / t
  double S = 0.0;      // rad^2/s
  int n_pulses = 0;
  double total_time = 0.0;
};

struct DecomposeOptions {
  // Reference contrast C(t -> 0); fitted per pulse-count group when unset.
  std::optional<double> reference_contrast;
  // Normalized coherence window; points outside are skipped with a warning.
  double min_coherence = 0.05;
  double max_coherence = 0.95;
};

struct Decomposition {
  std::vector<SpectrumSample> samples;
  std::vector<std::string> warnings;
};

inline pulses::Family family_for_count(int n) {
  if (n == 0) return pulses::Family::FreeEvolution;
  if (n == 1) return pulses::Family::SpinEcho;
  return pulses::Family::CPMG;
}

/// chi of the sequence under unit white noise, the filter's effective
/// bandwidth. Divides measured chi to give the spectral estimate.
inline double filter_bandwidth(int n_pulses, double total_time) {
  return noisebath::chi(pulses::build_sequence(family_for_count(n_pulses), n_pulses, total_time),
                        noisebath::white(1.0));
}

/// S(pi N / t) ~ -ln(C_norm) / kappa(N, t). Exact for white noise.
inline double estimate_spectrum_point(int n_pulses, double total_time, double normalized_coherence,
                                      double kappa) {
  require(normalized_coherence > 0.0, "normalized coherence must be positive");
  return -std::log(normalized_coherence) / kappa;
}

inline Decomposition spectral_decompose(std::span<const simkit::ExperimentDataset> datasets,
                                        const DecomposeOptions& options = {}) {
  Decomposition out;
  // chi under white noise is linear in T at fixed pulse count; one
  // bandwidth per count serves every total time.
  std::map<int, double> unit_bandwidth;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto& data = datasets[d];
    data.validate();
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < data.size(); ++i) groups[data.n_pulses[i]].push_back(i);
    for (auto& [n, rows] : groups) {
      const std::string tag = "dataset " + std::to_string(d) + ", N=" + std::to_string(n);
      if (n < 1) {
        out.warnings.push_back(tag + ": free evolution has no filter peak, skipped");
        continue;
      }
      std::sort(rows.begin(), rows.end(),
                [&](std::size_t a, std::size_t b) { return data.sweep_time[a] < data.sweep_time[b]; });
      std::vector<double> t, c, w;
      for (auto i : rows) {
        const double f0 = static_cast<double>(data.f0_counts[i]);
        const double f1 = static_cast<double>(data.f1_counts[i]);
        if (f0 + f1 <= 0.0) {
          out.warnings.push_back(tag + ": point with zero counts skipped");
          continue;
        }
        t.push_back(data.sweep_time[i]);
        c.push_back(simkit::normalize_contrast(f0, f1));
        w.push_back(1.0 / simkit::contrast_variance(f0, f1));
      }
      double reference = 0.0;
      if (options.reference_contrast) {
        reference = *options.reference_contrast;
      } else {
        try {
          const auto fit = fit_stretched_exp(t, c, std::span<const double>(w));
          reference = fit.at("A");
        } catch (const std::exception& e) {
          out.warnings.push_back(tag + ": amplitude fit failed (" + e.what() + "), skipped");
          continue;
        }
      }
      require(reference > 0.0, "reference contrast must be positive");
      if (!unit_bandwidth.count(n)) unit_bandwidth[n] = filter_bandwidth(n, 1.0);
      for (std::size_t k = 0; k < t.size(); ++k) {
        const double cn = c[k] / reference;
        if (cn <= 0.0) {
          out.warnings.push_back(tag + ": noise-dominated point at t=" + std::to_string(t[k]) +
                                 " skipped (C_norm <= 0)");
          continue;
        }
        if (cn < options.min_coherence || cn > options.max_coherence) continue;
        const double kappa = unit_bandwidth[n] * t[k];
        out.samples.push_back({constants::pi * n / t[k],
                               estimate_spectrum_point(n, t[k], cn, kappa), n, t[k]});
      }
    }
  }
  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const SpectrumSample& a, const SpectrumSample& b) { return a.omega < b.omega; });
  return out;
}

// ---------------------------------------------------------------------------
// proton line -> depth
// ---------------------------------------------------------------------------

/// Fraction of a narrow spectral line that the decomposition assigns to it
/// when the line is swept by the fundamental of an N-pulse filter. kappa
/// counts every harmonic, so a line much narrower than the filter comb is
/// seen at g times its area; g -> 8/pi^2 for CPMG at large N. In units
/// where T = 1 and u = w T:
///   g = N / (2 kappa_1) int_{pi N/2}^{2 pi N} |Y(u)|^2 / u du
/// N = 0 marks samples of the spectrum itself (g = 1).
inline double line_sensitivity(int n_pulses) {
  require(n_pulses >= 0, "pulse count must be non-negative");
  if (n_pulses == 0) return 1.0;
  const auto seq = pulses::build_sequence(family_for_count(n_pulses), n_pulses, 1.0);
  const double lo = 0.5 * constants::pi * n_pulses, hi = 2.0 * constants::pi * n_pulses;
  std::vector<double> pts;
  for (double u = lo; u < hi; u += constants::pi) pts.push_back(u);
  pts.push_back(hi);
  quad::Options opt;
  opt.rel_tol = 1e-8;
  const auto r = quad::integrate([&](double u) { return pulses::filter_weight(seq, u) / u; },
                                 std::span<const double>(pts), opt);
  return n_pulses * r.value / (2.0 * filter_bandwidth(n_pulses, 1.0));
}

/// Fit baseline + proton double-Lorentzian to spectrum samples. Parameters:
/// baseline (rad^2/s), area of the line in the sampled spectrum (rad^2/s^2),
/// center (rad/s), tau_h (s), the filter line sensitivity g and the derived
/// b_rms_sq = area / (g gamma_e^2) (T^2). g is averaged over the samples'
/// pulse counts.
inline FitResult fit_proton_peak(std::span<const SpectrumSample> samples, double center_guess) {
  const std::size_t m = samples.size();
  require(m >= 6, "proton-line fit needs at least 6 spectrum samples");
  require(center_guess > 0.0, "center guess must be positive");
  std::vector<double> w(m), s(m);
  double s_max = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = samples[i].omega / center_guess;
    s[i] = samples[i].S;
    s_max = std::max(s_max, std::abs(s[i]));
  }
  require(s_max > 0.0, "spectrum is identically zero");
  for (auto& v : s) v /= s_max;

  auto shape = [](double x, double c, double width) {
    const double lo = (x - c) / width, hi = (x + c) / width;
    return 1.0 / (1.0 + lo * lo) + 1.0 / (1.0 + hi * hi);
  };
  // x = (baseline, height, center, half width), frequencies in units of center_guess
  lsq::Problem p;
  p.n_residuals = static_cast<Eigen::Index>(m);
  p.residuals = [&](const lsq::Vector& x, lsq::Vector& r) {
    for (std::size_t i = 0; i < m; ++i) r[i] = x[0] + x[1] * shape(w[i], x[2], x[3]) - s[i];
  };
  const double wmin = *std::min_element(w.begin(), w.end());
  const double wmax = *std::max_element(w.begin(), w.end());
  p.lower = (lsq::Vector(4) << -10.0, 0.0, wmin, 1e-6).finished();
  p.upper = (lsq::Vector(4) << 10.0, 100.0, wmax, wmax - wmin).finished();

  const double base0 = detail::median(s);
  const auto peak_it = std::max_element(s.begin(), s.end());
  const std::size_t ip = static_cast<std::size_t>(peak_it - s.begin());
  const double height0 = std::max(*peak_it - base0, 1e-3);
  double half0 = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (s[i] - base0 >= 0.5 * height0) half0 = std::max(half0, std::abs(w[i] - w[ip]));
  half0 = std::clamp(half0, 2.0 * (wmax - wmin) / static_cast<double>(m), 0.25 * (wmax - wmin));
  std::optional<lsq::Solution> best;
  for (double hw : {half0, 0.5 * half0, 2.0 * half0}) {
    lsq::Vector x0(4);
    x0 << base0, height0, w[ip], hw;
    auto sol = lsq::solve(p, x0);
    if (!best || sol.cost < best->cost) best = std::move(sol);
  }
  const auto& x = best->x;
  const auto cov = lsq::covariance(*best, true);

  FitResult r;
  r.model_id = "proton_peak";
  r.n_points = m;
  r.converged = best->converged && x.allFinite();
  r.residual_norm = std::sqrt(2.0 * best->cost) * s_max;
  // height * tau_h = amplitude of S; area (1/pi) int S dw = height * width
  const double width = x[3] * center_guess;
  const double area = x[1] * s_max * width;
  const double area_var = s_max * s_max * center_guess * center_guess *
                          (x[3] * x[3] * cov(1, 1) + x[1] * x[1] * cov(3, 3) +
                           2.0 * x[1] * x[3] * cov(1, 3));
  std::map<int, std::size_t> counts;
  for (const auto& smp : samples) counts[smp.n_pulses]++;
  double g = 0.0;
  for (const auto& [n, k] : counts) g += line_sensitivity(n) * static_cast<double>(k) / static_cast<double>(m);
  if (counts.size() > 1) r.warnings.push_back("samples mix pulse counts; line sensitivity averaged");
  const double gamma_sq = constants::gamma_e * constants::gamma_e;
  r.parameters = {{"baseline", x[0] * s_max},
                  {"area", area},
                  {"center", x[2] * center_guess},
                  {"tau_h", 1.0 / width},
                  {"line_sensitivity", g},
                  {"b_rms_sq", area / (g * gamma_sq)}};
  r.standard_errors = {{"baseline", std::sqrt(cov(0, 0)) * s_max},
                       {"area", std::sqrt(std::max(area_var, 0.0))},
                       {"center", std::sqrt(cov(2, 2)) * center_guess},
                       {"tau_h", std::sqrt(cov(3, 3)) * center_guess / (width * width)},
                       {"line_sensitivity", 0.0},
                       {"b_rms_sq", std::sqrt(std::max(area_var, 0.0)) / (g * gamma_sq)}};
  if (!r.converged) r.warnings.push_back("proton-line fit did not converge");
  return r;
}

struct DepthFromSpectrum {
  fieldcal::DepthEstimate depth;
  FitResult peak;
};

/// Proton line near gamma_H B0 -> B_rms^2 -> depth.
inline DepthFromSpectrum estimate_depth_from_spectrum(std::span<const SpectrumSample> samples,
                                                      double rho_h, double b0_tesla) {
  auto peak = fit_proton_peak(samples, fieldcal::proton_larmor(b0_tesla));
  const double b2 = peak.at("b_rms_sq");
  if (!(b2 > 0.0)) throw NumericalError("proton line not detected (non-positive area)");
  return {fieldcal::estimate_depth(b2, rho_h), std::move(peak)};
}

}  // namespace nvsense::fitcore
