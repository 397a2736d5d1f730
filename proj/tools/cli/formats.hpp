#pragma once

// File formats at the command-line boundary. Times are in us and
// frequencies in MHz on disk; everything is SI in memory.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nvsense/fitcore.hpp"
#include "nvsense/simkit.hpp"
#include "nvsense/smassay.hpp"

namespace nvsense::cli {

inline constexpr double kPerMicro = 1e6;  // s -> us, Hz -> MHz

// sweep_time_us,n_pulses,F0_counts,F1_counts,reps
void write_dataset(std::ostream& out, const simkit::ExperimentDataset& data);
simkit::ExperimentDataset read_dataset(std::istream& in, const std::string& source);
simkit::ExperimentDataset read_dataset_file(const std::string& path);
extern const std::vector<std::string> kDatasetHeader;

// omega_rad_s,freq_MHz,S_rad2_s
void write_spectrum(std::ostream& out, const std::vector<fitcore::SpectrumSample>& samples);
std::vector<fitcore::SpectrumSample> read_spectrum(std::istream& in, const std::string& source);
std::vector<fitcore::SpectrumSample> read_spectrum_file(const std::string& path);
extern const std::vector<std::string> kSpectrumHeader;

// n_pulses,T2_us[,sigma_us]
struct T2Table {
  std::vector<double> n_pulses;
  std::vector<double> t2;     // s
  std::vector<double> sigma;  // s, empty when absent
};
void write_t2_table(std::ostream& out, const T2Table& table);
T2Table read_t2_table(std::istream& in, const std::string& source);

// '# pixel_pitch_um=<> exposure_s=<>' then one comma-separated row per image row
void write_image_csv(std::ostream& out, const smassay::ImageFrame& frame);
smassay::ImageFrame read_image_csv(std::istream& in, const std::string& source);
// 16-bit grayscale with the same metadata as tEXt chunks; values clipped to 65535
void write_image_png(const std::string& path, const smassay::ImageFrame& frame);
smassay::ImageFrame read_image_png(const std::string& path);
smassay::ImageFrame read_image_file(const std::string& path);
void write_image_file(const std::string& path, const smassay::ImageFrame& frame);

// '# pitch_nm=<> label=<>' then rows of heights in pm
void write_heightmap(std::ostream& out, const smassay::HeightMap& map);
smassay::HeightMap read_heightmap(std::istream& in, const std::string& source);
smassay::HeightMap read_heightmap_file(const std::string& path);

// spot_id,time_s,intensity
void write_traces(std::ostream& out, const std::vector<smassay::TraceSeries>& traces);
std::vector<smassay::TraceSeries> read_traces(std::istream& in, const std::string& source);

// x_um,y_um,amplitude,area_px,aggregate
void write_spots(std::ostream& out, const std::vector<smassay::Spot>& spots);

// biotin_fraction,n_spots,area_um2
struct TitrationRow {
  double fraction = 0.0;
  std::int64_t n_spots = 0;
  double area_um2 = 0.0;
};
std::vector<TitrationRow> read_titration(std::istream& in, const std::string& source);

// day,value
struct Series {
  std::vector<double> x;
  std::vector<double> y;
};
Series read_series(std::istream& in, const std::string& source);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace nvsense::cli
