#include "cli/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cli/text.hpp"
#include "nvsense/errors.hpp"

namespace nvsense::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const std::map<std::string, std::vector<std::string>>& bath_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"lorentzian", {"lorentzian_variance", "lorentzian_tau_c_us"}},
      {"powerlaw", {"powerlaw_amplitude", "powerlaw_exponent"}},
      {"proton", {"proton_rho_h", "proton_depth_nm", "proton_tau_h_us"}},
  };
  return keys;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto number = [](double& dst) {
    return Setter([&dst](const std::string& v, const std::string& where) { dst = parse_double(v, where); });
  };
  auto integer = [](auto& dst) {
    return Setter([&dst](const std::string& v, const std::string& where) {
      const auto x = parse_int(v, where);
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(x);
    });
  };
  double t_read_us = cfg.readout.t_read * 1e6;
  std::int64_t seed = static_cast<std::int64_t>(cfg.master_seed);
  const std::map<std::string, std::map<std::string, Setter>> table{
      {"", {{"master_seed", integer(seed)}}},
      {"readout",
       {{"f0", number(cfg.readout.f0)}, {"f1", number(cfg.readout.f1)}, {"t_read_us", number(t_read_us)}}},
      {"field", {{"B0_gauss", number(cfg.b0_gauss)}}},
      {"bath",
       {{"variant",
         [&cfg](const std::string& v, const std::string& where) {
           cfg.bath.variants.clear();
           std::istringstream ss(v);
           std::string part;
           while (std::getline(ss, part, '+')) {
             part = trim(part);
             if (!bath_keys().count(part))
               throw ValidationError(where + ": unknown bath variant '" + part +
                                     "' (expected lorentzian|powerlaw|proton)");
             cfg.bath.variants.push_back(part);
           }
           if (cfg.bath.variants.empty()) throw ValidationError(where + ": empty bath variant");
         }},
        {"lorentzian_variance", number(cfg.bath.lorentzian_variance)},
        {"lorentzian_tau_c_us", number(cfg.bath.lorentzian_tau_c_us)},
        {"powerlaw_amplitude", number(cfg.bath.powerlaw_amplitude)},
        {"powerlaw_exponent", number(cfg.bath.powerlaw_exponent)},
        {"proton_rho_h", number(cfg.bath.proton_rho_h)},
        {"proton_depth_nm", number(cfg.bath.proton_depth_nm)},
        {"proton_tau_h_us", number(cfg.bath.proton_tau_h_us)}}},
      {"sense",
       {{"snr_target", number(cfg.snr_target)},
        {"n_logic", integer(cfg.n_logic)},
        {"T2_us", number(cfg.t2_us)},
        {"stretch_n", number(cfg.stretch_n)},
        {"coupling_hz", number(cfg.coupling_hz)}}},
      {"smassay", {{"pixel_pitch_um", number(cfg.pixel_pitch_um)}, {"psf_sigma_px", number(cfg.psf_sigma_px)}}},
  };

  std::string section;
  std::set<std::string> seen;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto where = source + ":" + std::to_string(n);
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!table.count(section) || section.empty())
        throw ValidationError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& keys = table.at(section);
    const auto it = keys.find(key);
    if (it == keys.end())
      throw ValidationError(where + ": unknown key '" + key + "'" +
                            (section.empty() ? std::string() : " in [" + section + "]"));
    const auto qualified = section + "." + key;
    if (!seen.insert(qualified).second) throw ValidationError(where + ": duplicate key '" + key + "'");
    it->second(value, where);
  }
  if (seen.count("bath.variant")) {
    for (const auto& v : cfg.bath.variants)
      for (const auto& k : bath_keys().at(v))
        if (!seen.count("bath." + k))
          throw ValidationError(source + ": missing config key [bath] " + k + " (required by variant " + v + ")");
  }
  if (seed < 0) throw ValidationError(source + ": master_seed must be non-negative");
  cfg.master_seed = static_cast<std::uint64_t>(seed);
  cfg.readout.t_read = t_read_us / 1e6;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  return parse_config(in, path);
}

void RunConfig::validate() const {
  readout.validate();
  require(b0_gauss > 0.0, "[field] B0_gauss must be positive");
  require(snr_target > 0.0, "[sense] snr_target must be positive");
  require(n_logic >= 1, "[sense] n_logic must be at least 1");
  require(t2_us > 0.0, "[sense] T2_us must be positive");
  require(stretch_n > 0.0, "[sense] stretch_n must be positive");
  require(coupling_hz >= 0.0, "[sense] coupling_hz must be non-negative");
  require(pixel_pitch_um > 0.0, "[smassay] pixel_pitch_um must be positive");
  require(psf_sigma_px > 0.0, "[smassay] psf_sigma_px must be positive");
  noisebath::validate(bath_spectrum());
}

noisebath::NoiseSpectrum RunConfig::bath_spectrum() const {
  std::vector<noisebath::NoiseSpectrum> terms;
  for (const auto& v : bath.variants) {
    if (v == "lorentzian") {
      require(bath.lorentzian_variance >= 0.0 && bath.lorentzian_tau_c_us > 0.0,
              "[bath] lorentzian parameters must be positive");
      terms.push_back(noisebath::Lorentzian{bath.lorentzian_variance, bath.lorentzian_tau_c_us * 1e-6});
    } else if (v == "powerlaw") {
      terms.push_back(noisebath::PowerLaw{bath.powerlaw_amplitude, bath.powerlaw_exponent});
    } else {
      require(bath.proton_rho_h > 0.0 && bath.proton_depth_nm > 0.0 && bath.proton_tau_h_us > 0.0,
              "[bath] proton parameters must be positive");
      terms.push_back(noisebath::proton_bath_spectrum(bath.proton_rho_h, bath.proton_depth_nm * 1e-9,
                                                      b0_tesla(), bath.proton_tau_h_us * 1e-6));
    }
  }
  return terms.size() == 1 ? terms.front() : noisebath::sum(std::move(terms));
}

fieldcal::SensingBudget RunConfig::budget() const {
  fieldcal::SensingBudget b;
  b.f0 = readout.f0;
  b.f1 = readout.f1;
  b.t_read = readout.t_read;
  b.t2 = t2_us * 1e-6;
  b.stretch = stretch_n;
  b.coupling = constants::two_pi * coupling_hz;
  b.snr_target = snr_target;
  b.n_logic = n_logic;
  return b;
}

}  // namespace nvsense::cli
