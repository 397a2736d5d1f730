#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "cli/config.hpp"
#include "cli/formats.hpp"
#include "cli/text.hpp"
#include "nvsense/errors.hpp"
#include "nvsense/fieldcal.hpp"
#include "nvsense/fitcore.hpp"
#include "nvsense/noisebath.hpp"
#include "nvsense/pulses.hpp"
#include "nvsense/simkit.hpp"
#include "nvsense/smassay.hpp"

namespace nvsense::cli {

namespace {

using json = nlohmann::json;
constexpr int kSchemaVersion = 1;

struct Common {
  std::string config_path;
  std::optional<std::int64_t> seed;

  RunConfig config() const {
    if (!config_path.empty()) return load_config(config_path);
    RunConfig cfg;
    cfg.validate();
    return cfg;
  }
  std::uint64_t seed_for(const RunConfig& cfg) const {
    if (!seed) return cfg.master_seed;
    if (*seed < 0) throw ValidationError("--seed must be non-negative");
    return static_cast<std::uint64_t>(*seed);
  }
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-")
    out << text;
  else
    write_file(path, text);
}

void emit_json(const std::string& path, json j, std::ostream& out) {
  j["schema_version"] = kSchemaVersion;
  emit(path, j.dump(2) + "\n", out);
}

json warnings_json(const std::vector<std::string>& w) { return json(w); }

// --- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string out;
  std::string family = "cpmg";
  std::vector<int> pulses;
  double t_min_us = 1.0;
  double t_max_us = 100.0;
  int points = 40;
  std::string spacing = "lin";
  std::int64_t reps = 100000;
  std::optional<double> t1_us;
};

std::vector<double> sweep_times(const SimulateArgs& a) {
  require(a.points >= 1, "--points must be at least 1");
  require(a.t_min_us > 0.0 && a.t_max_us >= a.t_min_us, "need 0 < --t-min-us <= --t-max-us");
  require(a.spacing == "lin" || a.spacing == "log", "--spacing must be lin or log");
  std::vector<double> t;
  for (int i = 0; i < a.points; ++i) {
    const double f = a.points == 1 ? 0.0 : static_cast<double>(i) / (a.points - 1);
    const double us = a.spacing == "lin" ? a.t_min_us + f * (a.t_max_us - a.t_min_us)
                                         : a.t_min_us * std::pow(a.t_max_us / a.t_min_us, f);
    t.push_back(us / kPerMicro);
  }
  return t;
}

void cmd_simulate(const Common& common, const SimulateArgs& a, std::ostream& out) {
  const auto cfg = common.config();
  const auto seed = common.seed_for(cfg);
  const auto times = sweep_times(a);
  simkit::ExperimentDataset data;
  if (a.t1_us) {
    require(*a.t1_us > 0.0, "--t1-us must be positive");
    data = simkit::simulate_t1_dataset(*a.t1_us / kPerMicro, times, cfg.readout, a.reps, seed);
  } else {
    const auto family = pulses::family_from_string(a.family);
    std::vector<int> counts = a.pulses;
    if (counts.empty()) counts = {family == pulses::Family::FreeEvolution ? 0
                                  : family == pulses::Family::SpinEcho    ? 1
                                                                          : 8};
    if (a.family == "yy8")
      for (auto& n : counts) {
        require(n >= 1, "(YY-8)_N needs N >= 1");
        n *= 8;
      }
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
    std::vector<pulses::PulseSequence> seqs;
    for (int n : counts)
      for (double t : times) seqs.push_back(pulses::build_sequence(family, n, t));
    data = simkit::simulate_dd_dataset(seqs, cfg.bath_spectrum(), cfg.readout, a.reps, seed);
  }
  std::ostringstream ss;
  write_dataset(ss, data);
  emit(a.out, ss.str(), out);
}

// --- fit-coherence --------------------------------------------------------------

struct CoherenceGroup {
  int n_pulses = 0;
  std::vector<double> t, c, w;
};

std::map<int, CoherenceGroup> coherence_groups(const simkit::ExperimentDataset& data) {
  std::map<int, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < data.size(); ++i) rows[data.n_pulses[i]].push_back(i);
  std::map<int, CoherenceGroup> out;
  for (auto& [n, idx] : rows) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return data.sweep_time[a] < data.sweep_time[b]; });
    auto& g = out[n];
    g.n_pulses = n;
    for (auto i : idx) {
      const double f0 = static_cast<double>(data.f0_counts[i]), f1 = static_cast<double>(data.f1_counts[i]);
      g.t.push_back(data.sweep_time[i]);
      g.c.push_back(simkit::normalize_contrast(f0, f1));
      g.w.push_back(1.0 / simkit::contrast_variance(f0, f1));
    }
  }
  return out;
}

fitcore::FitResult fit_group(const CoherenceGroup& g) {
  return fitcore::fit_stretched_exp(g.t, g.c, std::span<const double>(g.w));
}

void cmd_fit_coherence(const std::string& in, const std::string& out_path, std::optional<int> n_sel,
                       std::ostream& out) {
  const auto data = read_dataset_file(in);
  const auto groups = coherence_groups(data);
  require(!groups.empty(), in + ": dataset has no rows");
  const CoherenceGroup* g = nullptr;
  if (n_sel) {
    const auto it = groups.find(*n_sel);
    require(it != groups.end(), in + ": no rows with n_pulses = " + std::to_string(*n_sel));
    g = &it->second;
  } else {
    require(groups.size() == 1, in + ": dataset holds " + std::to_string(groups.size()) +
                                    " pulse counts; select one with --pulses");
    g = &groups.begin()->second;
  }
  const auto fit = fit_group(*g);
  json j;
  j["model_id"] = fit.model_id;
  j["n_pulses"] = g->n_pulses;
  j["A"] = fit.at("A");
  j["T2_us"] = fit.at("T2") * kPerMicro;
  j["n"] = fit.at("n");
  j["stderr_A"] = fit.error("A");
  j["stderr_T2_us"] = fit.error("T2") * kPerMicro;
  j["stderr_n"] = fit.error("n");
  j["residual_norm"] = fit.residual_norm;
  j["n_points"] = fit.n_points;
  j["converged"] = fit.converged;
  j["warnings"] = warnings_json(fit.warnings);
  emit_json(out_path, j, out);
}

// --- fit-t2n ----------------------------------------------------------------------

void cmd_fit_t2n(const std::string& in, const std::string& out_path, const std::string& mode_name,
                 std::ostream& out, std::ostream& err) {
  const auto mode = fitcore::t2n_mode_from_string(mode_name);
  const auto text = read_file(in);
  std::istringstream probe(text);
  const auto head = read_csv(probe, in);
  T2Table table;
  if (head.header == kDatasetHeader) {
    std::istringstream ss(text);
    const auto data = read_dataset(ss, in);
    for (const auto& [n, g] : coherence_groups(data)) {
      require(n >= 1, in + ": free-evolution rows cannot enter a T2(N) fit");
      const auto fit = fit_group(g);
      if (!fit.converged) err << "warning: coherence fit for N=" << n << " did not converge\n";
      table.n_pulses.push_back(n);
      table.t2.push_back(fit.at("T2"));
      table.sigma.push_back(fit.error("T2"));
    }
  } else {
    std::istringstream ss(text);
    table = read_t2_table(ss, in);
  }
  std::optional<std::span<const double>> sigma;
  if (!table.sigma.empty()) sigma = std::span<const double>(table.sigma);
  const auto fit = fitcore::fit_t2_vs_n(table.n_pulses, table.t2, mode, sigma);
  json j;
  j["model_id"] = fit.model_id;
  j["mode"] = mode_name;
  j["T2_1_us"] = fit.at("T2_1") * kPerMicro;
  j["s"] = fit.at("s");
  j["stderr_T2_1_us"] = fit.error("T2_1") * kPerMicro;
  j["stderr_s"] = fit.error("s");
  if (fit.parameters.count("N_sat")) {
    j["N_sat"] = fit.at("N_sat");
    j["stderr_N_sat"] = fit.error("N_sat");
  }
  for (const auto& [k, v] : fit.diagnostics) j[k] = v;
  j["residual_norm"] = fit.residual_norm;
  j["n_points"] = fit.n_points;
  j["converged"] = fit.converged;
  j["warnings"] = warnings_json(fit.warnings);
  json pts = json::array();
  for (std::size_t i = 0; i < table.n_pulses.size(); ++i) {
    json p;
    p["n_pulses"] = table.n_pulses[i];
    p["T2_us"] = table.t2[i] * kPerMicro;
    if (!table.sigma.empty()) p["sigma_us"] = table.sigma[i] * kPerMicro;
    pts.push_back(p);
  }
  j["points"] = pts;
  emit_json(out_path, j, out);
}

// --- spectrum ------------------------------------------------------------------------

void cmd_spectrum(const std::string& dir, const std::string& out_path, std::optional<double> amplitude,
                  double c_min, double c_max, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ValidationError("'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  require(!files.empty(), "no .csv datasets in '" + dir + "'");
  std::vector<simkit::ExperimentDataset> sets;
  for (const auto& f : files) sets.push_back(read_dataset_file(f));
  fitcore::DecomposeOptions opt;
  opt.reference_contrast = amplitude;
  opt.min_coherence = c_min;
  opt.max_coherence = c_max;
  require(c_min > 0.0 && c_max > c_min && c_max <= 1.0, "coherence window must satisfy 0 < min < max <= 1");
  const auto dec = fitcore::spectral_decompose(sets, opt);
  for (const auto& w : dec.warnings) err << "warning: " << w << '\n';
  if (dec.samples.empty()) throw NumericalError("no usable points inside the coherence window");
  std::ostringstream ss;
  write_spectrum(ss, dec.samples);
  emit(out_path, ss.str(), out);
}

// --- depth ----------------------------------------------------------------------------

void cmd_depth(const Common& common, const std::string& in, const std::string& out_path,
               std::optional<double> rho_opt, std::optional<double> b0_opt, double window,
               std::optional<int> pulses_opt, std::ostream& out, std::ostream& err) {
  const auto cfg = common.config();
  const double rho = rho_opt.value_or(cfg.bath.proton_rho_h);
  const double b0 = b0_opt.value_or(cfg.b0_gauss) * constants::gauss_to_tesla;
  require(rho > 0.0, "--rho-h must be positive");
  require(b0 > 0.0, "B0 must be positive");
  require(window > 0.0 && window < 1.0, "--window must lie in (0, 1)");
  const double center = fieldcal::proton_larmor(b0);
  require(!pulses_opt || *pulses_opt >= 1, "--pulses must be at least 1");
  std::vector<fitcore::SpectrumSample> near;
  for (auto s : read_spectrum_file(in)) {
    if (pulses_opt) s.n_pulses = *pulses_opt;
    if (std::abs(s.omega - center) <= window * center) near.push_back(s);
  }
  if (!near.empty() && near.front().n_pulses == 0)
    err << "warning: filter pulse count unknown (no n_pulses metadata or --pulses); line area left uncorrected\n";
  const auto r = fitcore::estimate_depth_from_spectrum(near, rho, b0);
  const double rel_b2 = r.peak.error("b_rms_sq") / r.peak.at("b_rms_sq");
  json j;
  j["depth_nm"] = r.depth.depth * 1e9;
  j["stderr_depth_nm"] = r.depth.depth * 1e9 * rel_b2 / 3.0;
  j["b_rms_sq_T2"] = r.depth.b_rms_sq;
  j["b_rms_nT"] = std::sqrt(r.depth.b_rms_sq) * 1e9;
  j["rho_h_m3"] = rho;
  j["B0_gauss"] = b0 / constants::gauss_to_tesla;
  j["center_MHz"] = r.peak.at("center") / constants::two_pi / kPerMicro;
  j["tau_h_us"] = r.peak.at("tau_h") * kPerMicro;
  j["baseline_rad2_s"] = r.peak.at("baseline");
  j["line_sensitivity"] = r.peak.at("line_sensitivity");
  j["n_points"] = r.peak.n_points;
  j["converged"] = r.peak.converged;
  j["warnings"] = warnings_json(r.peak.warnings);
  emit_json(out_path, j, out);
}

// --- sense -------------------------------------------------------------------------------

void cmd_sense(const Common& common, const std::string& out_path, double target, std::ostream& out) {
  const auto cfg = common.config();
  const auto b = cfg.budget();
  const auto r = fieldcal::integration_time(b);
  const auto cal = fieldcal::calibrate_budget(b, target);
  json j;
  j["tau_opt_us"] = r.tau_opt * kPerMicro;
  j["T_required_s"] = r.t_required;
  j["T_single_s"] = r.t_single;
  j["n_logic"] = b.n_logic;
  j["snr_target"] = b.snr_target;
  j["t_read_us"] = b.t_read * kPerMicro;
  j["stretch_n"] = b.stretch;
  j["T2_us"] = b.t2 * kPerMicro;
  j["coupling_hz"] = cfg.coupling_hz;
  j["calibration"] = {{"target_s", target},
                      {"snr_target", cal.snr_target},
                      // grid values are whole picoseconds
                      {"t_read_us", std::round(cal.t_read * 1e12) / 1e6},
                      {"stretch_n", cal.stretch},
                      {"T_required_s", cal.t_required}};
  emit_json(out_path, j, out);
}

// --- smassay -------------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::optional<std::string> truth;
  double density = 0.004;
  double fov = 2800.0;
  double photons = 500.0;
  double bg = 10.0;
  double exposure = 1.0;
};

void cmd_synth(const Common& common, const SynthArgs& a, std::ostream& out) {
  const auto cfg = common.config();
  smassay::SynthParams p;
  p.density = a.density;
  p.fov_area = a.fov;
  p.pixel_pitch = cfg.pixel_pitch_um;
  p.psf_sigma = cfg.psf_sigma_px;
  p.photons_per_spot = a.photons;
  p.bg_per_px = a.bg;
  p.exposure = a.exposure;
  p.seed = common.seed_for(cfg);
  const auto scene = smassay::synth_scene(p);
  if (a.out == "-") {
    std::ostringstream ss;
    write_image_csv(ss, scene.frame);
    out << ss.str();
  } else {
    write_image_file(a.out, scene.frame);
  }
  if (a.truth) {
    std::ostringstream ss;
    ss << "x_um,y_um\n";
    for (const auto& e : scene.emitters) ss << format_number(e.x) << ',' << format_number(e.y) << '\n';
    write_file(*a.truth, ss.str());
  }
}

struct TraceSynthArgs {
  std::string out;
  int spots = 10;
  int steps = 1;
  double height = 5.0;
  double noise = 1.0;
  double background = 10.0;
  int length = 100;
  int margin = 10;
};

void cmd_synth_trace(const Common& common, const TraceSynthArgs& a, std::ostream& out) {
  const auto cfg = common.config();
  const auto seed = common.seed_for(cfg);
  require(a.spots >= 1, "--spots must be at least 1");
  require(a.steps >= 0, "--steps must be non-negative");
  require(a.margin >= 1 && a.length > 2 * a.margin, "--length must exceed twice the margin");
  std::vector<smassay::TraceSeries> traces;
  for (int s = 0; s < a.spots; ++s) {
    auto rng = simkit::point_stream(seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(s));
    std::uniform_int_distribution<int> when(a.margin, a.length - a.margin);
    smassay::BleachSpec spec;
    spec.n_steps = a.steps;
    spec.step_height = a.height;
    spec.noise_sigma = a.noise;
    spec.background = a.background;
    spec.length = a.length;
    spec.seed = seed;
    spec.spot_id = s;
    for (int k = 0; k < a.steps; ++k) spec.bleach_times.push_back(when(rng));
    std::sort(spec.bleach_times.begin(), spec.bleach_times.end());
    traces.push_back(smassay::synth_bleach_trace(spec));
  }
  std::ostringstream ss;
  write_traces(ss, traces);
  emit(a.out, ss.str(), out);
}

void cmd_detect(const Common& common, const std::string& in, const std::string& out_path,
                const std::optional<std::string>& summary, smassay::DetectParams params, std::ostream& out) {
  const auto cfg = common.config();
  params.psf_sigma = cfg.psf_sigma_px;
  const auto frame = read_image_file(in);
  const auto spots = smassay::detect_spots(frame, params);
  std::ostringstream ss;
  write_spots(ss, spots);
  emit(out_path, ss.str(), out);
  if (summary) {
    const auto count = smassay::count_molecules(spots);
    const auto p = smassay::estimate_density(count.molecules, frame.area());
    json j;
    j["n_spots"] = count.molecules;
    j["n_aggregates"] = count.aggregates;
    j["area_um2"] = frame.area();
    j["density_um2"] = p.density;
    j["ci_low_um2"] = p.ci_low;
    j["ci_high_um2"] = p.ci_high;
    j["schema_version"] = kSchemaVersion;
    write_file(*summary, j.dump(2) + "\n");
  }
}

void cmd_titrate(const std::string& in, const std::string& out_path, std::ostream& out) {
  std::ifstream f(in);
  if (!f) throw ValidationError("cannot open '" + in + "'");
  const auto rows = read_titration(f, in);
  std::vector<smassay::TitrationPoint> pts;
  json table = json::array();
  for (const auto& r : rows) {
    auto p = smassay::estimate_density(r.n_spots, r.area_um2);
    p.biotin_fraction = r.fraction;
    pts.push_back(p);
    table.push_back({{"biotin_fraction", r.fraction},
                     {"density_um2", p.density},
                     {"ci_low_um2", p.ci_low},
                     {"ci_high_um2", p.ci_high}});
  }
  const auto fit = smassay::fit_titration(pts);
  json j;
  j["rho_ns_um2"] = fit.rho_ns;
  j["slope_um2_per_fraction"] = fit.slope;
  j["stderr_rho_ns_um2"] = fit.rho_ns_stderr;
  j["stderr_slope_um2_per_fraction"] = fit.slope_stderr;
  j["dynamic_range"] = std::isfinite(fit.dynamic_range) ? json(fit.dynamic_range) : json("inf");
  j["points"] = table;
  j["warnings"] = warnings_json(fit.warnings);
  emit_json(out_path, j, out);
}

void cmd_trace(const std::string& in, const std::string& out_path, smassay::StepParams params, std::ostream& out) {
  std::ifstream f(in);
  if (!f) throw ValidationError("cannot open '" + in + "'");
  const auto traces = read_traces(f, in);
  std::ostringstream ss;
  ss << "spot_id,n_steps,step_times_s\n";
  for (const auto& t : traces) {
    const auto r = smassay::classify_steps(t, params);
    std::vector<std::string> times;
    for (double x : r.step_times) times.push_back(format_number(x));
    ss << t.spot_id << ',' << r.n_steps << ',' << join(times, ";") << '\n';
  }
  emit(out_path, ss.str(), out);
}

void cmd_stability(const std::string& in, const std::string& out_path, const std::string& kind, std::ostream& out) {
  std::ifstream f(in);
  if (!f) throw ValidationError("cannot open '" + in + "'");
  const auto series = read_series(f, in);
  smassay::StabilitySeries s;
  require(kind == "counts" || kind == "thickness", "--kind must be counts or thickness");
  s.kind = kind == "counts" ? smassay::StabilityKind::Counts : smassay::StabilityKind::Thickness;
  s.days = series.x;
  s.values = series.y;
  const auto fit = smassay::stability_pipeline(s);
  json j;
  j["model_id"] = fit.model_id;
  if (s.kind == smassay::StabilityKind::Counts) {
    const double hl = fit.at("half_life");
    j["half_life_days"] = std::isfinite(hl) ? json(hl) : json("inf");
    j["stderr_half_life_days"] = std::isfinite(hl) ? json(fit.error("half_life")) : json("inf");
    j["V0"] = fit.at("V0");
    j["stderr_V0"] = fit.error("V0");
    j["decay_rate_per_day"] = fit.at("decay_rate");
  } else {
    j["rate_nm_per_day"] = fit.at("slope");
    j["stderr_rate_nm_per_day"] = fit.error("slope");
    j["intercept_nm"] = fit.at("intercept");
    j["stderr_intercept_nm"] = fit.error("intercept");
  }
  j["residual_norm"] = fit.residual_norm;
  j["n_points"] = fit.n_points;
  j["converged"] = fit.converged;
  j["warnings"] = warnings_json(fit.warnings);
  emit_json(out_path, j, out);
}

void cmd_roughness(const std::string& in, const std::string& out_path, std::ostream& out) {
  const auto map = read_heightmap_file(in);
  json j;
  j["Ra_pm"] = smassay::roughness_Ra(map);
  j["label"] = map.label;
  j["rows"] = map.rows;
  j["cols"] = map.cols;
  j["pitch_nm"] = map.pitch;
  emit_json(out_path, j, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"nvsense: NV-center sensing simulator and analysis toolkit"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "run configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "override master_seed");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "simulate a photon-count dataset");
  simulate->add_option("--out", sim.out, "output dataset CSV ('-' for stdout)")->required();
  simulate->add_option("--family", sim.family, "free|echo|cpmg|yy8");
  simulate->add_option("--pulses", sim.pulses, "pulse counts (N blocks for yy8)")->delimiter(',');
  simulate->add_option("--t-min-us", sim.t_min_us);
  simulate->add_option("--t-max-us", sim.t_max_us);
  simulate->add_option("--points", sim.points);
  simulate->add_option("--spacing", sim.spacing, "lin|log");
  simulate->add_option("--reps", sim.reps);
  simulate->add_option("--t1-us", sim.t1_us, "simulate a T1 relaxation curve instead");

  std::string in, out_path, mode = "auto";
  std::optional<int> pulse_sel;
  auto* fit_coh = app.add_subcommand("fit-coherence", "fit a stretched exponential to one pulse count");
  fit_coh->add_option("--in", in)->required();
  fit_coh->add_option("--out", out_path)->required();
  fit_coh->add_option("--pulses", pulse_sel, "pulse count to fit when the dataset holds several");

  auto* fit_t2n = app.add_subcommand("fit-t2n", "fit T2 against pulse count");
  fit_t2n->add_option("--in", in, "dataset CSV or n_pulses,T2_us[,sigma_us] table")->required();
  fit_t2n->add_option("--out", out_path)->required();
  fit_t2n->add_option("--mode", mode, "auto|sat|power");

  std::optional<double> amplitude;
  double c_min = 0.05, c_max = 0.95;
  auto* spectrum = app.add_subcommand("spectrum", "spectral decomposition of a directory of datasets");
  spectrum->add_option("--in-dir", in)->required();
  spectrum->add_option("--out", out_path)->required();
  spectrum->add_option("--amplitude", amplitude, "reference contrast C(t->0); fitted when omitted");
  spectrum->add_option("--min-coherence", c_min);
  spectrum->add_option("--max-coherence", c_max);

  std::optional<double> rho_h, b0_gauss;
  double window = 0.5;
  auto* depth = app.add_subcommand("depth", "NV depth from the proton line of a spectrum");
  depth->add_option("--in", in, "spectrum CSV")->required();
  depth->add_option("--out", out_path)->required();
  depth->add_option("--rho-h", rho_h, "proton density, m^-3");
  depth->add_option("--b0-gauss", b0_gauss);
  depth->add_option("--window", window, "fractional half-width around the proton Larmor frequency");
  std::optional<int> depth_pulses;
  depth->add_option("--pulses", depth_pulses, "filter pulse count, overrides the file's n_pulses");

  double target = 10080.0;
  auto* sense = app.add_subcommand("sense", "single 13C integration-time budget");
  sense->add_option("--out", out_path)->required();
  sense->add_option("--target-s", target, "calibration target for the single-readout time");

  auto* sm = app.add_subcommand("smassay", "single-molecule assay pipelines");
  sm->require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = sm->add_subcommand("synth", "synthetic fluorescence frame");
  synth->add_option("--out", synth_args.out, ".png or .csv")->required();
  synth->add_option("--truth", synth_args.truth, "write emitter positions");
  synth->add_option("--density", synth_args.density, "um^-2");
  synth->add_option("--fov-um2", synth_args.fov);
  synth->add_option("--photons", synth_args.photons, "photons per molecule");
  synth->add_option("--bg", synth_args.bg, "background photons per pixel");
  synth->add_option("--exposure", synth_args.exposure, "s");

  TraceSynthArgs trace_args;
  auto* synth_trace = sm->add_subcommand("synth-trace", "synthetic photobleach traces");
  synth_trace->add_option("--out", trace_args.out)->required();
  synth_trace->add_option("--spots", trace_args.spots);
  synth_trace->add_option("--steps", trace_args.steps, "fluorophores per spot");
  synth_trace->add_option("--height", trace_args.height);
  synth_trace->add_option("--noise", trace_args.noise);
  synth_trace->add_option("--background", trace_args.background);
  synth_trace->add_option("--length", trace_args.length);

  smassay::DetectParams detect_params;
  std::optional<std::string> summary;
  auto* detect = sm->add_subcommand("detect", "count molecules in a frame");
  detect->add_option("--in", in, ".png or .csv frame")->required();
  detect->add_option("--out", out_path, "spot list CSV")->required();
  detect->add_option("--summary", summary, "density summary JSON");
  detect->add_option("--threshold", detect_params.threshold, "robust sigma units");
  detect->add_option("--min-sep", detect_params.min_separation, "px");
  detect->add_option("--inner-sigma", detect_params.inner_sigma, "px");
  detect->add_option("--outer-sigma", detect_params.outer_sigma, "px");

  auto* titrate = sm->add_subcommand("titrate", "density versus functional-PEG fraction");
  titrate->add_option("--in", in, "biotin_fraction,n_spots,area_um2")->required();
  titrate->add_option("--out", out_path)->required();

  smassay::StepParams step_params;
  auto* trace = sm->add_subcommand("trace", "count photobleach steps");
  trace->add_option("--in", in, "spot_id,time_s,intensity")->required();
  trace->add_option("--out", out_path)->required();
  trace->add_option("--threshold", step_params.t_threshold);
  trace->add_option("--min-segment", step_params.min_segment);

  std::string kind = "counts";
  auto* stability = sm->add_subcommand("stability", "layer stability fit");
  stability->add_option("--in", in, "day,value")->required();
  stability->add_option("--out", out_path)->required();
  stability->add_option("--kind", kind, "counts (half-life) | thickness (nm/day)");

  auto* roughness = sm->add_subcommand("roughness", "Ra of a height map");
  roughness->add_option("--in", in)->required();
  roughness->add_option("--out", out_path)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*simulate) cmd_simulate(common, sim, out);
    else if (*fit_coh) cmd_fit_coherence(in, out_path, pulse_sel, out);
    else if (*fit_t2n) cmd_fit_t2n(in, out_path, mode, out, err);
    else if (*spectrum) cmd_spectrum(in, out_path, amplitude, c_min, c_max, out, err);
    else if (*depth) cmd_depth(common, in, out_path, rho_h, b0_gauss, window, depth_pulses, out, err);
    else if (*sense) cmd_sense(common, out_path, target, out);
    else if (*synth) cmd_synth(common, synth_args, out);
    else if (*synth_trace) cmd_synth_trace(common, trace_args, out);
    else if (*detect) cmd_detect(common, in, out_path, summary, detect_params, out);
    else if (*titrate) cmd_titrate(in, out_path, out);
    else if (*trace) cmd_trace(in, out_path, step_params, out);
    else if (*stability) cmd_stability(in, out_path, kind, out);
    else if (*roughness) cmd_roughness(in, out_path, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace nvsense::cli
