#pragma once

// Photon-level synthetic readout of dynamical-decoupling experiments.
//
// Each sweep point draws its two readout branches from Poisson statistics:
//   p  = (1 + C) / 2
//   F0 ~ Poisson(reps * (f1 + (f0 - f1) p))
//   F1 ~ Poisson(reps * (f1 + (f0 - f1) (1 - p)))
// so the spin contrast 2 (F0 - F1) / (F0 + F1) has mean close to
// 2 (f0 - f1) C / (f0 + f1).

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nvsense/errors.hpp"
#include "nvsense/noisebath.hpp"
#include "nvsense/pulses.hpp"

namespace nvsense::simkit {

struct ReadoutModel {
  double f0 = 0.063;
  double f1 = 0.048;
  double t_read = 4.0e-6;

  void validate() const {
    require(std::isfinite(f0) && std::isfinite(f1) && f0 > f1 && f1 > 0.0,
            "readout model requires f0 > f1 > 0");
    require(t_read > 0.0, "readout window must be positive");
  }

  // Contrast of a fully coherent spin, 2 (f0 - f1) / (f0 + f1).
  double ideal_contrast() const { return 2.0 * (f0 - f1) / (f0 + f1); }
};

struct ExperimentDataset {
  std::vector<double> sweep_time;  // s
  std::vector<int> n_pulses;
  std::vector<std::int64_t> f0_counts;
  std::vector<std::int64_t> f1_counts;
  std::vector<std::int64_t> reps;
  std::uint64_t seed = 0;
  std::string family = "cpmg";
  double field_gauss = 1750.0;

  std::size_t size() const { return sweep_time.size(); }

  void validate() const {
    const auto n = sweep_time.size();
    require(n_pulses.size() == n && f0_counts.size() == n && f1_counts.size() == n &&
                reps.size() == n,
            "dataset columns must have equal length");
    for (std::size_t i = 0; i < n; ++i) {
      require(f0_counts[i] >= 0 && f1_counts[i] >= 0, "photon counts must be non-negative");
      require(reps[i] >= 1, "repetitions must be at least 1");
      require(n_pulses[i] >= 0, "pulse count must be non-negative");
      require(std::isfinite(sweep_time[i]) && sweep_time[i] >= 0.0,
              "sweep times must be finite and non-negative");
    }
  }
};

/// Spin contrast 2 (F0 - F1) / (F0 + F1).
inline double normalize_contrast(double f0_counts, double f1_counts) {
  const double total = f0_counts + f1_counts;
  if (!(total > 0.0)) throw ValidationError("undefined contrast: F0 + F1 = 0");
  return 2.0 * (f0_counts - f1_counts) / total;
}

/// Poisson-propagated variance of the contrast, 16 F0 F1 / (F0 + F1)^3.
/// Zero counts are floored at one photon so the variance stays positive.
inline double contrast_variance(double f0_counts, double f1_counts) {
  const double total = f0_counts + f1_counts;
  if (!(total > 0.0)) throw ValidationError("undefined contrast: F0 + F1 = 0");
  return 16.0 * std::max(f0_counts, 1.0) * std::max(f1_counts, 1.0) / (total * total * total);
}

inline std::vector<double> contrasts(const ExperimentDataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out.push_back(normalize_contrast(static_cast<double>(data.f0_counts[i]),
                                     static_cast<double>(data.f1_counts[i])));
  return out;
}

// splitmix64 finalizer
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent generator for sweep point `index` of a run seeded by `seed`.
inline std::mt19937_64 point_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(mix(mix(seed) ^ mix(index + 0x632be59bd9b4e019ULL)));
}

/// Draw counts for given coherence values. `coherence[i]` belongs to the
/// sweep point (sweep_time[i], n_pulses[i]).
inline ExperimentDataset simulate_counts(std::span<const double> sweep_time,
                                         std::span<const int> n_pulses,
                                         std::span<const double> coherence,
                                         const ReadoutModel& readout, std::int64_t reps,
                                         std::uint64_t seed) {
  readout.validate();
  require(reps >= 1, "repetitions must be at least 1");
  require(sweep_time.size() == coherence.size() && n_pulses.size() == coherence.size(),
          "sweep and coherence lengths differ");
  ExperimentDataset data;
  data.seed = seed;
  for (std::size_t i = 0; i < coherence.size(); ++i) {
    const double c = coherence[i];
    require(std::isfinite(c) && c >= -1.0 && c <= 1.0, "coherence must lie in [-1, 1]");
    const double p = 0.5 * (1.0 + c);
    const double mean0 = static_cast<double>(reps) * (readout.f1 + (readout.f0 - readout.f1) * p);
    const double mean1 =
        static_cast<double>(reps) * (readout.f1 + (readout.f0 - readout.f1) * (1.0 - p));
    auto rng = point_stream(seed, i);
    std::poisson_distribution<std::int64_t> branch0(mean0);
    std::poisson_distribution<std::int64_t> branch1(mean1);
    data.sweep_time.push_back(sweep_time[i]);
    data.n_pulses.push_back(n_pulses[i]);
    data.f0_counts.push_back(branch0(rng));
    data.f1_counts.push_back(branch1(rng));
    data.reps.push_back(reps);
  }
  return data;
}

inline ExperimentDataset simulate_dd_dataset(std::span<const pulses::PulseSequence> sequences,
                                             const noisebath::NoiseSpectrum& model,
                                             const ReadoutModel& readout, std::int64_t reps,
                                             std::uint64_t seed) {
  readout.validate();
  require(reps >= 1, "repetitions must be at least 1");
  std::vector<double> times, coh;
  std::vector<int> counts;
  for (const auto& seq : sequences) {
    times.push_back(seq.total_time());
    counts.push_back(seq.n_pulses());
    coh.push_back(noisebath::coherence(seq, model));
  }
  auto data = simulate_counts(times, counts, coh, readout, reps, seed);
  if (!sequences.empty()) data.family = pulses::to_string(sequences.front().family());
  return data;
}

/// Longitudinal relaxation: exp(-t / T1) takes the place of the coherence.
inline ExperimentDataset simulate_t1_dataset(double t1, std::span<const double> times,
                                             const ReadoutModel& readout, std::int64_t reps,
                                             std::uint64_t seed) {
  require(t1 > 0.0, "T1 must be positive");
  std::vector<double> envelope;
  for (double t : times) {
    require(t >= 0.0, "relaxation times must be non-negative");
    envelope.push_back(std::exp(-t / t1));
  }
  const std::vector<int> zero(times.size(), 0);
  auto data = simulate_counts(times, zero, envelope, readout, reps, seed);
  data.family = "t1";
  return data;
}

}  // namespace nvsense::simkit
