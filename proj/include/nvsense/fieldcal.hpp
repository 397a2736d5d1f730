#pragma once

// Geometry-to-field calculators: proton Larmor frequency, the proton-bath
// field variance versus NV depth, NV-13C dipolar coupling, and the
// integration-time budget for detecting a single nuclear spin.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "nvsense/constants.hpp"
#include "nvsense/errors.hpp"
#include "nvsense/quadrature.hpp"

namespace nvsense::fieldcal {

inline double proton_larmor(double b0_tesla) {
  require(b0_tesla >= 0.0, "B0 must be non-negative");
  return constants::gamma_h * b0_tesla;
}

// Unit vector of the NV axis in surface coordinates (z = surface normal).
inline std::array<double, 3> nv_axis() {
  return {std::sin(constants::nv_axis_tilt_rad), 0.0, std::cos(constants::nv_axis_tilt_rad)};
}

// Squared secular factor (3 cos^2 - 1)^2 between a direction and the NV axis.
inline double secular_factor_sq(const std::array<double, 3>& direction) {
  const auto axis = nv_axis();
  const double c = direction[0] * axis[0] + direction[1] * axis[1] + direction[2] * axis[2];
  const double f = 3.0 * c * c - 1.0;
  return f * f;
}

// Field along the NV axis from a proton whose spin precesses about the NV
// axis (B0 aligned with the NV): only the transverse moment oscillates at
// the Larmor frequency, giving B^2 ~ (9/4) x^2 (1 - x^2) / r^6 with
// x = cos(angle to NV axis) and <I_x^2> = <I_y^2> = 1/4.
inline double precessing_factor(const std::array<double, 3>& direction) {
  const auto axis = nv_axis();
  const double x = direction[0] * axis[0] + direction[1] * axis[1] + direction[2] * axis[2];
  return 2.25 * x * x * (1.0 - x * x);
}

namespace detail {

// Dimensionless half-space sum
//   I = d^3 * int_{z > d} precessing_factor / r^6 dV,
// reduced to a hemisphere integral by doing the radial part in closed form:
//   int_{d/c}^inf r^2 dr / r^6 = c^3 / (3 d^3),  c = cos(polar angle).
inline double half_space_dipolar_integral() {
  quad::Options options;
  options.rel_tol = 1e-12;
  auto over_phi = [&](double c) {
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    auto integrand = [&](double phi) {
      return precessing_factor({s * std::cos(phi), s * std::sin(phi), c});
    };
    return quad::integrate(integrand, 0.0, constants::two_pi, options).value * c * c * c / 3.0;
  };
  return quad::integrate(over_phi, 0.0, 1.0, options).value;
}

}  // namespace detail

/// K such that B_rms^2 = K rho_H / d^3 for an NV a depth d below a
/// semi-infinite bath of unpolarized protons, counting the Larmor-frequency
/// field component along the NV axis. Units T^2 m^3 per (proton/m^3).
inline double brms_constant() {
  static const double value = [] {
    const double moment = constants::mu0_over_4pi * constants::hbar * constants::gamma_h;
    return moment * moment * detail::half_space_dipolar_integral();
  }();
  return value;
}

inline double brms_from_depth(double depth, double rho_h) {
  require(depth > 0.0 && rho_h > 0.0, "depth and proton density must be positive");
  return brms_constant() * rho_h / (depth * depth * depth);
}

inline double depth_from_brms(double b_rms_sq, double rho_h) {
  require(b_rms_sq > 0.0 && rho_h > 0.0, "B_rms^2 and proton density must be positive");
  return std::cbrt(brms_constant() * rho_h / b_rms_sq);
}

struct DepthEstimate {
  double depth = 0.0;     // m
  double b_rms_sq = 0.0;  // T^2
  double rho_h = 0.0;     // m^-3
};

inline DepthEstimate estimate_depth(double b_rms_sq, double rho_h) {
  return {depth_from_brms(b_rms_sq, rho_h), b_rms_sq, rho_h};
}

// (mu0/4pi) gamma_e gamma_C hbar, rad/s m^3
inline double c13_dipolar_prefactor() {
  return constants::mu0_over_4pi * constants::gamma_e * constants::gamma_c13 * constants::hbar;
}

/// RMS secular NV-13C coupling at distance r, averaged over isotropic
/// orientations: <(1 - 3cos^2)^2> = 4/5.
inline double c13_coupling(double distance) {
  require(distance > 0.0, "distance must be positive");
  return c13_dipolar_prefactor() * std::sqrt(0.8) / (distance * distance * distance);
}

struct MoleculeCoupling {
  double rms_coupling = 0.0;  // rad/s, RMS over placements of one spin
  double expected_spins = 0.0;
};

/// Monte Carlo RMS coupling of a 13C spin placed uniformly in a spherical
/// molecule of the given radius whose bottom sits `standoff` above the NV
/// (measured along the surface normal). Expected spin count assumes natural
/// abundance at `carbon_density` (m^-3).
inline MoleculeCoupling c13_coupling_molecule(double standoff, double radius, double carbon_density,
                                              std::size_t samples, std::uint64_t seed) {
  require(standoff > 0.0 && radius > 0.0 && carbon_density > 0.0 && samples > 0,
          "molecule geometry must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto axis = nv_axis();
  const double centre_z = standoff + radius;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < samples;) {
    const double x = unit(rng), y = unit(rng), z = unit(rng);
    if (x * x + y * y + z * z > 1.0) continue;
    const double px = radius * x, py = radius * y, pz = centre_z + radius * z;
    const double r = std::sqrt(px * px + py * py + pz * pz);
    const double c = (px * axis[0] + py * axis[1] + pz * axis[2]) / r;
    const double coupling = c13_dipolar_prefactor() * (3.0 * c * c - 1.0) / (r * r * r);
    sum_sq += coupling * coupling;
    ++i;
  }
  const double volume = 4.0 / 3.0 * constants::pi * radius * radius * radius;
  return {std::sqrt(sum_sq / static_cast<double>(samples)),
          volume * carbon_density * constants::c13_natural_abundance};
}

struct SensingBudget {
  double f0 = 0.063;           // photons / readout, m_s = 0
  double f1 = 0.048;           // photons / readout, m_s = 1
  double t_read = 4.0e-6;      // s
  double t2 = 31e-6;           // s
  double stretch = 1.8;        // n of exp[-(tau/T2)^n]
  double coupling = constants::two_pi * 160.0;  // rad/s
  // calibrated against the 2.8 h single-readout estimate (calibrate_budget)
  double snr_target = 8.5;
  int n_logic = 1;

  void validate() const {
    require(f0 > f1 && f1 > 0.0, "readout requires f0 > f1 > 0");
    require(t_read > 0.0, "t_read must be positive");
    require(t2 > 0.0, "T2 must be positive");
    require(stretch > 0.0, "stretch exponent must be positive");
    require(snr_target > 0.0, "snr_target must be positive");
    require(n_logic >= 1, "n_logic must be at least 1");
    require(std::isfinite(coupling), "coupling must be finite");
  }
};

// Photon signal per shot: ((f0 - f1)/2) exp[-(tau/T2)^n] |sin(A tau)|.
inline double signal_per_shot(const SensingBudget& b, double tau) {
  return 0.5 * (b.f0 - b.f1) * std::exp(-std::pow(tau / b.t2, b.stretch)) *
         std::abs(std::sin(b.coupling * tau));
}

/// Total time for a single readout-limited measurement at phase time tau,
/// before any quantum-logic gain.
inline double required_time_at(const SensingBudget& b, double tau) {
  const double s = signal_per_shot(b, tau);
  if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
  const double variance = 0.5 * (b.f0 + b.f1);
  return b.snr_target * b.snr_target * (tau + b.t_read) * variance / (s * s);
}

struct IntegrationTime {
  double tau_opt = 0.0;     // s
  double t_required = 0.0;  // s, including the n_logic gain
  double t_single = 0.0;    // s, without repetitive readout
};

inline IntegrationTime integration_time(const SensingBudget& b) {
  b.validate();
  if (b.coupling == 0.0) throw NumericalError("target invisible: coupling is zero");
  const double lo = std::log(0.01 * b.t2);
  const double hi = std::log(5.0 * b.t2);
  constexpr int grid = 400;
  auto cost = [&](double log_tau) { return required_time_at(b, std::exp(log_tau)); };
  int best = 0;
  double best_cost = cost(lo);
  for (int i = 1; i <= grid; ++i) {
    const double c = cost(lo + (hi - lo) * i / grid);
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }
  if (!std::isfinite(best_cost)) throw NumericalError("target invisible: no signal on tau grid");
  // golden-section refinement between the grid neighbours
  double a = lo + (hi - lo) * std::max(best - 1, 0) / grid;
  double d = lo + (hi - lo) * std::min(best + 1, grid) / grid;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double b1 = d - ratio * (d - a);
  double c1 = a + ratio * (d - a);
  double fb = cost(b1), fc = cost(c1);
  for (int it = 0; it < 200 && (d - a) > 1e-12; ++it) {
    if (fb < fc) {
      d = c1;
      c1 = b1;
      fc = fb;
      b1 = d - ratio * (d - a);
      fb = cost(b1);
    } else {
      a = b1;
      b1 = c1;
      fb = fc;
      c1 = a + ratio * (d - a);
      fc = cost(c1);
    }
  }
  double log_tau = 0.5 * (a + d);
  double t_single = cost(log_tau);
  if (best_cost < t_single) {
    log_tau = lo + (hi - lo) * best / grid;
    t_single = best_cost;
  }
  return {std::exp(log_tau), t_single / b.n_logic, t_single};
}

struct Calibration {
  double snr_target = 0.0;
  double t_read = 0.0;
  double stretch = 0.0;
  double t_required = 0.0;
};

/// Grid search over (snr_target, t_read, stretch) for the triple whose
/// single-readout integration time lands closest to `target_seconds`.
/// Ties resolve to the earliest grid point (lowest snr, t_read, stretch).
inline Calibration calibrate_budget(SensingBudget base, double target_seconds,
                                    double snr_lo = 1.0, double snr_hi = 10.0, double snr_step = 0.5,
                                    double tread_lo = 1e-6, double tread_hi = 5e-6,
                                    double tread_step = 0.5e-6, double n_lo = 1.0,
                                    double n_hi = 1.8, double n_step = 0.1) {
  require(target_seconds > 0.0, "target time must be positive");
  base.n_logic = 1;
  Calibration best;
  double best_gap = std::numeric_limits<double>::infinity();
  const int ns = static_cast<int>(std::lround((snr_hi - snr_lo) / snr_step));
  const int nt = static_cast<int>(std::lround((tread_hi - tread_lo) / tread_step));
  const int nn = static_cast<int>(std::lround((n_hi - n_lo) / n_step));
  // lo + i * step carries representation noise (1e-6 + 6 * 0.5e-6 is not
  // 4e-6); snap grid values to 12 significant digits
  auto grid = [](double lo, int i, double step) {
    const double v = lo + i * step;
    if (v == 0.0) return v;
    const double scale = std::pow(10.0, 11 - std::floor(std::log10(std::abs(v))));
    return std::round(v * scale) / scale;
  };
  for (int i = 0; i <= ns; ++i) {
    for (int j = 0; j <= nt; ++j) {
      for (int k = 0; k <= nn; ++k) {
        base.snr_target = grid(snr_lo, i, snr_step);
        base.t_read = grid(tread_lo, j, tread_step);
        base.stretch = grid(n_lo, k, n_step);
        const double t = integration_time(base).t_single;
        const double gap = std::abs(std::log(t / target_seconds));
        if (gap < best_gap - 1e-12) {
          best_gap = gap;
          best = {base.snr_target, base.t_read, base.stretch, t};
        }
      }
    }
  }
  return best;
}

}  // namespace nvsense::fieldcal
