#pragma once

// Parametric noise spectra and the decoherence functional.
//
// Spectra are one-sided in the sense (1/pi) int_0^inf S(w) dw = variance of
// the frequency-shift noise (rad^2/s^2); numerically S(w) is the two-sided
// power spectral density of the stationary noise evaluated at w >= 0. With
// Gaussian noise the accumulated phase has <phi^2> = (1/pi) int S |Y|^2 dw,
// and the coherence is exp(-chi) with
//
//   chi = <phi^2> / 2 = (1/2pi) int_0^inf S(w) |Y(w)|^2 dw.

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "nvsense/constants.hpp"
#include "nvsense/errors.hpp"
#include "nvsense/fieldcal.hpp"
#include "nvsense/pulses.hpp"
#include "nvsense/quadrature.hpp"

namespace nvsense::noisebath {

struct Lorentzian {
  double variance = 0.0;  // rad^2/s^2
  double tau_c = 0.0;     // s
};

// amplitude * (w / w_ref)^(-exponent), w_ref = 2 pi x 1 MHz
struct PowerLaw {
  static constexpr double reference_omega = constants::two_pi * 1e6;
  double amplitude = 0.0;  // rad^2/s at w_ref
  double exponent = 0.0;
};

// Nuclear precession line of a proton bath: symmetric Lorentzian pair at
// +/- center with width 1/tau_h, area gamma_e^2 b_rms_sq.
struct ProtonBathPeak {
  double b_rms_sq = 0.0;  // T^2
  double center = 0.0;    // rad/s
  double tau_h = 1e-6;    // s
};

struct NoiseSpectrum;

struct SpectrumSum {
  std::vector<NoiseSpectrum> terms;
};

struct NoiseSpectrum {
  std::variant<Lorentzian, PowerLaw, ProtonBathPeak, SpectrumSum> model;

  NoiseSpectrum() : model(Lorentzian{}) {}
  NoiseSpectrum(Lorentzian m) : model(m) {}
  NoiseSpectrum(PowerLaw m) : model(m) {}
  NoiseSpectrum(ProtonBathPeak m) : model(m) {}
  NoiseSpectrum(SpectrumSum m) : model(std::move(m)) {}
};

inline NoiseSpectrum sum(std::vector<NoiseSpectrum> terms) { return SpectrumSum{std::move(terms)}; }

inline NoiseSpectrum white(double level) { return PowerLaw{level, 0.0}; }

inline NoiseSpectrum scaled(const NoiseSpectrum& spectrum, double factor) {
  return std::visit(
      [&](const auto& m) -> NoiseSpectrum {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Lorentzian>) {
          return Lorentzian{m.variance * factor, m.tau_c};
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          return PowerLaw{m.amplitude * factor, m.exponent};
        } else if constexpr (std::is_same_v<T, ProtonBathPeak>) {
          return ProtonBathPeak{m.b_rms_sq * factor, m.center, m.tau_h};
        } else {
          SpectrumSum out;
          for (const auto& term : m.terms) out.terms.push_back(scaled(term, factor));
          return out;
        }
      },
      spectrum.model);
}

inline void validate(const NoiseSpectrum& spectrum) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Lorentzian>) {
          require(m.variance >= 0.0 && m.tau_c > 0.0, "Lorentzian needs variance >= 0, tau_c > 0");
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          require(m.amplitude >= 0.0 && std::isfinite(m.exponent),
                  "power law needs amplitude >= 0 and a finite exponent");
          require(m.exponent < 1.0 && m.exponent > -1.0,
                  "power-law exponent must lie in (-1, 1) for a convergent decoherence integral");
        } else if constexpr (std::is_same_v<T, ProtonBathPeak>) {
          require(m.b_rms_sq >= 0.0 && m.center >= 0.0 && m.tau_h > 0.0,
                  "proton peak needs b_rms_sq >= 0, center >= 0, tau_h > 0");
        } else {
          for (const auto& term : m.terms) validate(term);
        }
      },
      spectrum.model);
}

inline double spectral_density(const NoiseSpectrum& spectrum, double omega) {
  require(omega >= 0.0, "omega must be non-negative");
  return std::visit(
      [omega](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Lorentzian>) {
          const double x = omega * m.tau_c;
          return m.variance * 2.0 * m.tau_c / (1.0 + x * x);
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          if (m.exponent == 0.0) return m.amplitude;
          return m.amplitude * std::pow(omega / PowerLaw::reference_omega, -m.exponent);
        } else if constexpr (std::is_same_v<T, ProtonBathPeak>) {
          const double lo = (omega - m.center) * m.tau_h;
          const double hi = (omega + m.center) * m.tau_h;
          return constants::gamma_e * constants::gamma_e * m.b_rms_sq *
                 (m.tau_h / (1.0 + lo * lo) + m.tau_h / (1.0 + hi * hi));
        } else {
          double total = 0.0;
          for (const auto& term : m.terms) total += spectral_density(term, omega);
          return total;
        }
      },
      spectrum.model);
}

// Frequencies where the spectrum changes shape; used as quadrature breakpoints.
inline void collect_features(const NoiseSpectrum& spectrum, std::vector<double>& out) {
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Lorentzian>) {
          for (double f : {0.1, 0.3, 1.0, 3.0, 10.0}) out.push_back(f / m.tau_c);
        } else if constexpr (std::is_same_v<T, ProtonBathPeak>) {
          for (double f : {-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0}) {
            const double w = m.center + f / m.tau_h;
            if (w > 0.0) out.push_back(w);
          }
        } else if constexpr (std::is_same_v<T, SpectrumSum>) {
          for (const auto& term : m.terms) collect_features(term, out);
        }
      },
      spectrum.model);
}

// Largest frequency the spectrum needs resolved explicitly.
inline double spectral_reach(const NoiseSpectrum& spectrum) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ProtonBathPeak>) {
          return 10.0 * m.center;
        } else if constexpr (std::is_same_v<T, SpectrumSum>) {
          double reach = 0.0;
          for (const auto& term : m.terms) reach = std::max(reach, spectral_reach(term));
          return reach;
        } else {
          return 0.0;
        }
      },
      spectrum.model);
}

struct ChiOptions {
  double rel_tol = 1e-4;
  int max_harmonic = 9;
};

/// chi for a pulse sequence in a Gaussian bath.
///
/// The integral runs adaptively to w_max = max(100 n/T, 10 w_c), rounded up
/// to a multiple of 4 pi n / T, with breakpoints every 2 pi / T, at the
/// filter harmonics pi k n / T and at the spectral features. Above w_max
/// |Y|^2 is replaced by its envelope jump_energy / w^2. Every pairwise jump
/// separation of the supported families is a multiple of T / 2n, so the
/// rounding of w_max zeroes the leading oscillatory tail correction.
inline double chi(const pulses::PulseSequence& seq, const NoiseSpectrum& spectrum,
                  const ChiOptions& options = {}) {
  validate(spectrum);
  const double total = seq.total_time();
  const int n_eff = std::max(seq.n_pulses(), 1);
  const double lattice = 2.0 * constants::two_pi * n_eff / total;
  const double wanted = std::max(100.0 * n_eff / total, spectral_reach(spectrum));
  const double omega_max = lattice * std::ceil(wanted / lattice);

  std::vector<double> points;
  const double panel = constants::two_pi / total;
  const auto n_panels = static_cast<std::size_t>(std::ceil(omega_max / panel));
  points.reserve(n_panels + 64);
  for (std::size_t i = 0; i < n_panels; ++i) points.push_back(panel * static_cast<double>(i));
  points.push_back(omega_max);
  if (seq.n_pulses() > 0) {
    const double peak = pulses::filter_peak_frequency(seq);
    for (int k = 1; k <= options.max_harmonic; ++k) points.push_back(peak * k);
  }
  std::vector<double> features;
  collect_features(spectrum, features);
  for (double f : features)
    if (f > 0.0 && f < omega_max) points.push_back(f);
  std::sort(points.begin(), points.end());
  points.erase(std::remove_if(points.begin(), points.end(),
                              [&](double w) { return w < 0.0 || w > omega_max; }),
               points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  auto body = [&](double omega) {
    return spectral_density(spectrum, omega) * pulses::filter_weight(seq, omega);
  };
  quad::Options qopt;
  qopt.rel_tol = options.rel_tol;
  qopt.abs_tol = 1e-300;
  const auto main = quad::integrate(body, std::span<const double>(points), qopt);
  if (!main.converged)
    throw NumericalError("decoherence integral did not converge (error estimate " +
                         std::to_string(main.error) + " vs value " + std::to_string(main.value) +
                         ")");

  // tail: int_{w_max}^inf S(w) / w^2 dw = (1/w_max) int_0^1 S(w_max / u) du
  std::vector<double> tail_points{0.0, 1.0};
  for (double f : features)
    if (f > omega_max) tail_points.push_back(omega_max / f);
  std::sort(tail_points.begin(), tail_points.end());
  tail_points.erase(std::unique(tail_points.begin(), tail_points.end()), tail_points.end());
  auto tail_body = [&](double u) { return spectral_density(spectrum, omega_max / u); };
  qopt.rel_tol = 1e-6;
  const auto tail = quad::integrate(tail_body, std::span<const double>(tail_points), qopt);
  if (!tail.converged) throw NumericalError("decoherence tail integral did not converge");

  const double integral = main.value + seq.jump_energy() * tail.value / omega_max;
  return std::max(integral, 0.0) / constants::two_pi;
}

inline double coherence(const pulses::PulseSequence& seq, const NoiseSpectrum& spectrum,
                        const ChiOptions& options = {}) {
  return std::exp(-chi(seq, spectrum, options));
}

struct CoherenceCurve {
  pulses::Family family = pulses::Family::CPMG;
  int n_pulses = 0;
  std::vector<double> times;
  std::vector<double> coherence;
};

inline CoherenceCurve coherence_curve(pulses::Family family, int n_pulses,
                                      const std::vector<double>& times,
                                      const NoiseSpectrum& spectrum) {
  CoherenceCurve curve{family, n_pulses, times, {}};
  curve.coherence.reserve(times.size());
  for (double t : times)
    curve.coherence.push_back(coherence(pulses::build_sequence(family, n_pulses, t), spectrum));
  return curve;
}

/// 1/e coherence time: the total time where chi = 1, by doubling from 1 ns
/// then bisection in log time to 1e-6 relative.
inline double t2_of_model(pulses::Family family, int n_pulses, const NoiseSpectrum& spectrum) {
  validate(spectrum);
  auto chi_at = [&](double t) {
    return chi(pulses::build_sequence(family, n_pulses, t), spectrum);
  };
  double lo = 1e-9;
  if (chi_at(lo) >= 1.0) throw NumericalError("coherence already lost at 1 ns");
  double hi = lo;
  while (true) {
    hi = std::min(2.0 * lo, 1.0);
    if (chi_at(hi) >= 1.0) break;
    if (hi >= 1.0) throw NumericalError("no 1/e crossing between 1 ns and 1 s");
    lo = hi;
  }
  while ((hi - lo) > 1e-6 * lo) {
    const double mid = std::sqrt(lo * hi);
    if (chi_at(mid) >= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return std::sqrt(lo * hi);
}

/// Proton line from an oil layer above an NV at `depth`, precessing in B0.
inline NoiseSpectrum proton_bath_spectrum(double rho_h, double depth, double b0_tesla,
                                          double tau_h) {
  require(rho_h > 0.0 && depth > 0.0 && b0_tesla > 0.0 && tau_h > 0.0,
          "proton bath parameters must be positive");
  return ProtonBathPeak{fieldcal::brms_from_depth(depth, rho_h), fieldcal::proton_larmor(b0_tesla),
                        tau_h};
}

}  // namespace nvsense::noisebath
