#include "cli/formats.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "cli/text.hpp"
#include "nvsense/errors.hpp"

namespace nvsense::cli {

const std::vector<std::string> kDatasetHeader{"sweep_time_us", "n_pulses", "F0_counts", "F1_counts", "reps"};
const std::vector<std::string> kSpectrumHeader{"omega_rad_s", "freq_MHz", "S_rad2_s"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw ValidationError("write failed for '" + path + "'");
}

namespace {

template <class F>
auto with_file(const std::string& path, F&& read) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read(in, path);
}

std::map<std::string, std::string> metadata(const CsvTable& t, const std::vector<std::string>& keys) {
  std::map<std::string, std::string> out;
  for (const auto& c : t.comments)
    for (auto& [k, v] : parse_metadata(c)) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        throw ValidationError(t.source + ": unknown metadata key '" + k + "'");
      out[k] = v;
    }
  for (const auto& k : keys)
    if (!out.count(k)) throw ValidationError(t.source + ": missing metadata key '" + k + "'");
  return out;
}

std::vector<double> numeric_grid(const CsvTable& t, int& rows, int& cols) {
  rows = static_cast<int>(t.rows.size());
  cols = rows ? static_cast<int>(t.rows.front().fields.size()) : 0;
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (const auto& r : t.rows)
    for (std::size_t c = 0; c < r.fields.size(); ++c) v.push_back(t.number(r, c));
  return v;
}

}  // namespace

// --- datasets ---------------------------------------------------------------

void write_dataset(std::ostream& out, const simkit::ExperimentDataset& data) {
  data.validate();
  out << join(kDatasetHeader, ",") << '\n';
  for (std::size_t i = 0; i < data.size(); ++i)
    out << format_scaled(data.sweep_time[i], kPerMicro) << ',' << data.n_pulses[i] << ','
        << data.f0_counts[i] << ',' << data.f1_counts[i] << ',' << data.reps[i] << '\n';
}

simkit::ExperimentDataset read_dataset(std::istream& in, const std::string& source) {
  const auto t = read_csv(in, source);
  require_header(t, kDatasetHeader);
  simkit::ExperimentDataset d;
  for (const auto& r : t.rows) {
    const double us = t.number(r, 0);
    if (!(std::isfinite(us) && us >= 0.0)) throw ValidationError(t.where(r, 0) + ": sweep time must be >= 0");
    const auto n = t.integer(r, 1);
    const auto f0 = t.integer(r, 2), f1 = t.integer(r, 3), reps = t.integer(r, 4);
    if (n < 0 || n > 1000000) throw ValidationError(t.where(r, 1) + ": pulse count out of range");
    if (f0 < 0) throw ValidationError(t.where(r, 2) + ": counts must be non-negative");
    if (f1 < 0) throw ValidationError(t.where(r, 3) + ": counts must be non-negative");
    if (reps < 1) throw ValidationError(t.where(r, 4) + ": repetitions must be at least 1");
    d.sweep_time.push_back(us / kPerMicro);
    d.n_pulses.push_back(static_cast<int>(n));
    d.f0_counts.push_back(f0);
    d.f1_counts.push_back(f1);
    d.reps.push_back(reps);
  }
  return d;
}

simkit::ExperimentDataset read_dataset_file(const std::string& path) {
  return with_file(path, [](std::istream& in, const std::string& p) { return read_dataset(in, p); });
}

// --- spectra ----------------------------------------------------------------

// A leading "# n_pulses=N" records the filter when every sample shares one
// pulse count; line-area corrections need it downstream.
void write_spectrum(std::ostream& out, const std::vector<fitcore::SpectrumSample>& samples) {
  const bool uniform = !samples.empty() && std::all_of(samples.begin(), samples.end(), [&](const auto& s) {
    return s.n_pulses == samples.front().n_pulses;
  });
  if (uniform) out << "# n_pulses=" << samples.front().n_pulses << '\n';
  out << join(kSpectrumHeader, ",") << '\n';
  for (const auto& s : samples)
    out << format_number(s.omega) << ',' << format_number(s.omega / constants::two_pi / kPerMicro) << ','
        << format_number(s.S) << '\n';
}

std::vector<fitcore::SpectrumSample> read_spectrum(std::istream& in, const std::string& source) {
  const auto t = read_csv(in, source);
  require_header(t, kSpectrumHeader);
  int n_pulses = 0;
  for (const auto& c : t.comments)
    for (const auto& [k, v] : parse_metadata(c)) {
      if (k != "n_pulses") throw ValidationError(source + ": unknown metadata key '" + k + "'");
      const double n = parse_double(v, source + ": n_pulses");
      if (!(n >= 0.0 && n == std::floor(n) && n < 1e9))
        throw ValidationError(source + ": n_pulses must be a non-negative integer");
      n_pulses = static_cast<int>(n);
    }
  std::vector<fitcore::SpectrumSample> out;
  for (const auto& r : t.rows) {
    fitcore::SpectrumSample s;
    s.n_pulses = n_pulses;
    s.omega = t.number(r, 0);
    t.number(r, 1);
    s.S = t.number(r, 2);
    if (!(s.omega > 0.0 && std::isfinite(s.omega)))
      throw ValidationError(t.where(r, 0) + ": angular frequency must be positive");
    if (!std::isfinite(s.S)) throw ValidationError(t.where(r, 2) + ": spectral density must be finite");
    out.push_back(s);
  }
  return out;
}

std::vector<fitcore::SpectrumSample> read_spectrum_file(const std::string& path) {
  return with_file(path, [](std::istream& in, const std::string& p) { return read_spectrum(in, p); });
}

// --- T2 tables --------------------------------------------------------------

void write_t2_table(std::ostream& out, const T2Table& table) {
  const bool sigma = !table.sigma.empty();
  out << "n_pulses,T2_us" << (sigma ? ",sigma_us" : "") << '\n';
  for (std::size_t i = 0; i < table.n_pulses.size(); ++i) {
    out << format_number(table.n_pulses[i]) << ',' << format_scaled(table.t2[i], kPerMicro);
    if (sigma) out << ',' << format_scaled(table.sigma[i], kPerMicro);
    out << '\n';
  }
}

T2Table read_t2_table(std::istream& in, const std::string& source) {
  const auto t = read_csv(in, source);
  const bool sigma = t.header.size() == 3;
  if (sigma)
    require_header(t, {"n_pulses", "T2_us", "sigma_us"});
  else
    require_header(t, {"n_pulses", "T2_us"});
  T2Table out;
  for (const auto& r : t.rows) {
    out.n_pulses.push_back(static_cast<double>(t.integer(r, 0)));
    out.t2.push_back(t.number(r, 1) / kPerMicro);
    if (sigma) out.sigma.push_back(t.number(r, 2) / kPerMicro);
  }
  return out;
}

// --- images -----------------------------------------------------------------

void write_image_csv(std::ostream& out, const smassay::ImageFrame& frame) {
  frame.validate();
  out << "# pixel_pitch_um=" << format_number(frame.pixel_pitch) << " exposure_s=" << format_number(frame.exposure)
      << '\n';
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) out << (x ? "," : "") << format_number(frame.at(x, y));
    out << '\n';
  }
}

smassay::ImageFrame read_image_csv(std::istream& in, const std::string& source) {
  const auto t = read_csv(in, source, false);
  const auto meta = metadata(t, {"pixel_pitch_um", "exposure_s"});
  smassay::ImageFrame f;
  f.pixel_pitch = parse_double(meta.at("pixel_pitch_um"), source + ": pixel_pitch_um");
  f.exposure = parse_double(meta.at("exposure_s"), source + ": exposure_s");
  f.pixels = numeric_grid(t, f.height, f.width);
  for (const auto& r : t.rows)
    for (std::size_t c = 0; c < r.fields.size(); ++c)
      if (!(t.number(r, c) >= 0.0)) throw ValidationError(t.where(r, c) + ": pixel values must be non-negative");
  f.validate();
  return f;
}

namespace {

struct PngWrite {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWrite() { png_destroy_write_struct(&png, &info); }
};

struct PngRead {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngRead() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

[[noreturn]] void png_fail(png_structp, png_const_charp message) {
  throw ValidationError(std::string("PNG error: ") + message);
}

void png_warn(png_structp, png_const_charp) {}

}  // namespace

void write_image_png(const std::string& path, const smassay::ImageFrame& frame) {
  frame.validate();
  require(frame.width > 0 && frame.height > 0, "cannot write an empty PNG");
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw ValidationError("cannot write '" + path + "'");
  PngWrite w;
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  w.info = png_create_info_struct(w.png);
  png_init_io(w.png, file.get());
  png_set_compression_level(w.png, 6);
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(frame.width), static_cast<png_uint_32>(frame.height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::string pitch = format_number(frame.pixel_pitch), exposure = format_number(frame.exposure);
  std::string k1 = "pixel_pitch_um", k2 = "exposure_s";
  png_text text[2]{};
  text[0].compression = PNG_TEXT_COMPRESSION_NONE;
  text[0].key = k1.data();
  text[0].text = pitch.data();
  text[1].compression = PNG_TEXT_COMPRESSION_NONE;
  text[1].key = k2.data();
  text[1].text = exposure.data();
  png_set_text(w.png, w.info, text, 2);
  png_write_info(w.png, w.info);
  std::vector<png_byte> row(2 * static_cast<std::size_t>(frame.width));
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const auto v = static_cast<std::uint16_t>(std::clamp(std::lround(frame.at(x, y)), 0L, 65535L));
      row[2 * static_cast<std::size_t>(x)] = static_cast<png_byte>(v >> 8);
      row[2 * static_cast<std::size_t>(x) + 1] = static_cast<png_byte>(v & 0xff);
    }
    png_write_row(w.png, row.data());
  }
  png_write_end(w.png, nullptr);
}

smassay::ImageFrame read_image_png(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw ValidationError("cannot open '" + path + "'");
  PngRead r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  r.info = png_create_info_struct(r.png);
  png_init_io(r.png, file.get());
  png_read_info(r.png, r.info);
  const auto color = png_get_color_type(r.png, r.info);
  const int depth = png_get_bit_depth(r.png, r.info);
  if (color != PNG_COLOR_TYPE_GRAY) throw ValidationError(path + ": expected a grayscale PNG");
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
  png_read_update_info(r.png, r.info);

  smassay::ImageFrame f;
  f.width = static_cast<int>(png_get_image_width(r.png, r.info));
  f.height = static_cast<int>(png_get_image_height(r.png, r.info));
  png_textp text = nullptr;
  int n_text = 0;
  png_get_text(r.png, r.info, &text, &n_text);
  bool pitch_set = false;
  for (int i = 0; i < n_text; ++i) {
    const std::string key = text[i].key;
    if (key == "pixel_pitch_um") {
      f.pixel_pitch = parse_double(text[i].text, path + ": pixel_pitch_um");
      pitch_set = true;
    } else if (key == "exposure_s") {
      f.exposure = parse_double(text[i].text, path + ": exposure_s");
    }
  }
  if (!pitch_set) throw ValidationError(path + ": missing pixel_pitch_um metadata");
  const int bytes = depth == 16 ? 2 : 1;
  std::vector<png_byte> row(static_cast<std::size_t>(bytes) * static_cast<std::size_t>(f.width));
  f.pixels.reserve(static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height));
  for (int y = 0; y < f.height; ++y) {
    png_read_row(r.png, row.data(), nullptr);
    for (int x = 0; x < f.width; ++x)
      f.pixels.push_back(bytes == 2 ? (row[2 * static_cast<std::size_t>(x)] << 8) | row[2 * static_cast<std::size_t>(x) + 1]
                                    : row[static_cast<std::size_t>(x)]);
  }
  png_read_end(r.png, nullptr);
  f.validate();
  return f;
}

namespace {
bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

smassay::ImageFrame read_image_file(const std::string& path) {
  if (has_suffix(path, ".png")) return read_image_png(path);
  return with_file(path, [](std::istream& in, const std::string& p) { return read_image_csv(in, p); });
}

void write_image_file(const std::string& path, const smassay::ImageFrame& frame) {
  if (has_suffix(path, ".png")) return write_image_png(path, frame);
  std::ostringstream ss;
  write_image_csv(ss, frame);
  write_file(path, ss.str());
}

// --- height maps -------------------------------------------------------------

void write_heightmap(std::ostream& out, const smassay::HeightMap& map) {
  map.validate();
  out << "# pitch_nm=" << format_number(map.pitch) << " label=" << (map.label.empty() ? "-" : map.label) << '\n';
  for (int r = 0; r < map.rows; ++r) {
    for (int c = 0; c < map.cols; ++c) out << (c ? "," : "") << format_number(map.at(r, c));
    out << '\n';
  }
}

smassay::HeightMap read_heightmap(std::istream& in, const std::string& source) {
  const auto t = read_csv(in, source, false);
  const auto meta = metadata(t, {"pitch_nm", "label"});
  smassay::HeightMap m;
  m.pitch = parse_double(meta.at("pitch_nm"), source + ": pitch_nm");
  m.label = meta.at("label") == "-" ? "" : meta.at("label");
  m.heights = numeric_grid(t, m.rows, m.cols);
  m.validate();
  return m;
}

smassay::HeightMap read_heightmap_file(const std::string& path) {
  return with_file(path, [](std::istream& in, const std::string& p) { return read_heightmap(in, p); });
}

// --- traces, spots, tables ----------------------------------------------------

void write_traces(std::ostream& out, const std::vector<smassay::TraceSeries>& traces) {
  out << "spot_id,time_s,intensity\n";
  for (const auto& t : traces)
    for (std::size_t i = 0; i < t.times.size(); ++i)
      out << t.spot_id << ',' << format_number(t.times[i]) << ',' << format_number(t.intensity[i]) << '\n';
}

std::vector<smassay::TraceSeries> read_traces(std::istream& in, const std::string& source) {
  const auto t = read_csv(in, source);
  require_header(t, {"spot_id", "time_s", "intensity"});
  std::vector<smassay::TraceSeries> out;
  std::map<std::int64_t, std::size_t> index;
  for (const auto& r : t.rows) {
    const auto id = t.integer(r, 0);
    auto it = index.find(id);
    if (it == index.end()) {
      it = index.emplace(id, out.size()).first;
      out.emplace_back();
      out.back().spot_id = static_cast<int>(id);
    }
    auto& trace = out[it->second];
    trace.times.push_back(t.number(r, 1));
    const double v = t.number(r, 2);
    if (!(v >= 0.0)) throw ValidationError(t.where(r, 2) + ": intensity must be non-negative");
    trace.intensity.push_back(v);
  }
  for (auto& trace : out) trace.validate();
  return out;
}

void write_spots(std::ostream& out, const std::vector<smassay::Spot>& spots) {
  out << "x_um,y_um,amplitude,area_px,aggregate\n";
  for (const auto& s : spots)
    out << format_number(s.x_um) << ',' << format_number(s.y_um) << ',' << format_number(s.amplitude) << ','
        << s.area_px << ',' << (s.aggregate ? 1 : 0) << '\n';
}

std::vector<TitrationRow> read_titration(std::istream& in, const std::string& source) {
  const auto t = read_csv(in, source);
  require_header(t, {"biotin_fraction", "n_spots", "area_um2"});
  std::vector<TitrationRow> out;
  for (const auto& r : t.rows) {
    TitrationRow row{t.number(r, 0), t.integer(r, 1), t.number(r, 2)};
    if (!(row.fraction >= 0.0 && row.fraction <= 1.0))
      throw ValidationError(t.where(r, 0) + ": fraction must lie in [0, 1]");
    if (row.n_spots < 0) throw ValidationError(t.where(r, 1) + ": spot count must be non-negative");
    if (!(row.area_um2 > 0.0)) throw ValidationError(t.where(r, 2) + ": area must be positive");
    out.push_back(row);
  }
  return out;
}

Series read_series(std::istream& in, const std::string& source) {
  const auto t = read_csv(in, source);
  require_header(t, {"day", "value"});
  Series s;
  for (const auto& r : t.rows) {
    s.x.push_back(t.number(r, 0));
    s.y.push_back(t.number(r, 1));
  }
  return s;
}

}  // namespace nvsense::cli
