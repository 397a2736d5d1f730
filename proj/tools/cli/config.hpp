#pragma once

// Run configuration: a sectioned key = value text file.
//
//   master_seed = 1
//   [readout]  f0, f1, t_read_us
//   [field]    B0_gauss
//   [bath]     variant = lorentzian+powerlaw+proton, then prefixed parameters
//   [sense]    snr_target, n_logic, T2_us, stretch_n, coupling_hz
//   [smassay]  pixel_pitch_um, psf_sigma_px
//
// '#' and ';' start comments. Unknown sections or keys are errors, and every
// bath component named in `variant` must have all of its parameters set.

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "nvsense/fieldcal.hpp"
#include "nvsense/noisebath.hpp"
#include "nvsense/simkit.hpp"

namespace nvsense::cli {

struct BathConfig {
  std::vector<std::string> variants{"lorentzian"};
  double lorentzian_variance = 1.4e12;  // rad^2/s^2
  double lorentzian_tau_c_us = 1.0;
  double powerlaw_amplitude = 1e-6;  // rad^2/s at 1 MHz
  double powerlaw_exponent = 0.5;
  double proton_rho_h = 6e28;  // m^-3
  double proton_depth_nm = 4.8;
  double proton_tau_h_us = 1.0;
};

struct RunConfig {
  simkit::ReadoutModel readout;
  double b0_gauss = 1750.0;
  BathConfig bath;
  double snr_target = 8.5;
  int n_logic = 1;
  double t2_us = 31.0;
  double stretch_n = 1.8;
  double coupling_hz = 160.0;
  double pixel_pitch_um = 0.22;
  double psf_sigma_px = 1.0;
  std::uint64_t master_seed = 1;

  double b0_tesla() const { return b0_gauss * constants::gauss_to_tesla; }
  noisebath::NoiseSpectrum bath_spectrum() const;
  fieldcal::SensingBudget budget() const;
  void validate() const;
};

RunConfig parse_config(std::istream& in, const std::string& source);
RunConfig load_config(const std::string& path);

}  // namespace nvsense::cli
