#pragma once

// Single-molecule surface assay statistics: synthetic TIRF frames, spot
// counting, density titration, photobleach steps, roughness and layer
// stability.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nvsense/errors.hpp"
#include "nvsense/fitcore.hpp"
#include "nvsense/simkit.hpp"

namespace nvsense::smassay {

inline constexpr double kDefaultPixelPitchUm = 0.22;  // 13 um camera pixel behind a 60x objective
inline constexpr double kDefaultPsfSigmaPx = 1.0;
inline constexpr double kEtchRateNmPerMin = 3.6;

// ---------------------------------------------------------------------------
// images
// ---------------------------------------------------------------------------

struct ImageFrame {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major, height x width
  double pixel_pitch = kDefaultPixelPitchUm;  // um
  double exposure = 1.0;                      // s

  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  double& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  double area() const { return width * height * pixel_pitch * pixel_pitch; }

  void validate() const {
    require(width >= 0 && height >= 0, "image dimensions must be non-negative");
    require(pixels.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
            "image must be rectangular");
    require(pixel_pitch > 0.0, "pixel pitch must be positive");
    require(exposure > 0.0, "exposure must be positive");
    for (double v : pixels) require(std::isfinite(v) && v >= 0.0, "pixel values must be non-negative");
  }
};

struct SynthParams {
  double density = 0.0;     // um^-2
  double fov_area = 2800.0;  // um^2, square field
  double pixel_pitch = kDefaultPixelPitchUm;
  double psf_sigma = kDefaultPsfSigmaPx;
  double photons_per_spot = 500.0;
  double bg_per_px = 10.0;
  double exposure = 1.0;
  std::uint64_t seed = 0;
};

struct Emitter {
  double x = 0.0;  // um from the frame corner
  double y = 0.0;
};

struct SyntheticFrame {
  ImageFrame frame;
  std::vector<Emitter> emitters;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Fraction of a unit Gaussian centred at c (pixels) landing in pixel [i, i + 1).
inline double pixel_fraction(int i, double c, double sigma) {
  return normal_cdf((i + 1 - c) / sigma) - normal_cdf((i - c) / sigma);
}

}  // namespace detail

/// Poisson-many emitters placed uniformly, each a pixel-integrated Gaussian
/// of `photons_per_spot`, plus Poisson shot noise over a flat background.
inline SyntheticFrame synth_scene(const SynthParams& p) {
  require(p.density >= 0.0 && std::isfinite(p.density), "density must be non-negative");
  require(p.fov_area > 0.0, "field of view must be positive");
  require(p.pixel_pitch > 0.0, "pixel pitch must be positive");
  require(p.psf_sigma > 0.0, "PSF width must be positive");
  require(p.photons_per_spot >= 0.0 && p.bg_per_px >= 0.0, "photon levels must be non-negative");

  const int side = std::max(1, static_cast<int>(std::lround(std::sqrt(p.fov_area) / p.pixel_pitch)));
  SyntheticFrame out;
  auto& f = out.frame;
  f.width = f.height = side;
  f.pixel_pitch = p.pixel_pitch;
  f.exposure = p.exposure;
  std::vector<double> mean(static_cast<std::size_t>(side) * side, p.bg_per_px);

  auto placement = simkit::point_stream(p.seed, 0);
  const double side_um = side * p.pixel_pitch;
  const auto count = std::poisson_distribution<std::int64_t>(p.density * side_um * side_um)(placement);
  std::uniform_real_distribution<double> uniform(0.0, side_um);
  const int reach = static_cast<int>(std::ceil(5.0 * p.psf_sigma));
  for (std::int64_t k = 0; k < count; ++k) {
    Emitter e{uniform(placement), uniform(placement)};
    out.emitters.push_back(e);
    const double cx = e.x / p.pixel_pitch, cy = e.y / p.pixel_pitch;
    const int x0 = std::max(0, static_cast<int>(cx) - reach), x1 = std::min(side - 1, static_cast<int>(cx) + reach);
    const int y0 = std::max(0, static_cast<int>(cy) - reach), y1 = std::min(side - 1, static_cast<int>(cy) + reach);
    std::vector<double> fx;
    for (int x = x0; x <= x1; ++x) fx.push_back(detail::pixel_fraction(x, cx, p.psf_sigma));
    for (int y = y0; y <= y1; ++y) {
      const double fy = p.photons_per_spot * detail::pixel_fraction(y, cy, p.psf_sigma);
      for (int x = x0; x <= x1; ++x)
        mean[static_cast<std::size_t>(y) * side + x] += fy * fx[static_cast<std::size_t>(x - x0)];
    }
  }

  auto shot = simkit::point_stream(p.seed, 1);
  f.pixels.resize(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i)
    f.pixels[i] = mean[i] > 0.0
                      ? static_cast<double>(std::poisson_distribution<std::int64_t>(mean[i])(shot))
                      : 0.0;
  return out;
}

inline ImageFrame synth_image(const SynthParams& p) { return synth_scene(p).frame; }

// ---------------------------------------------------------------------------
// spot detection
// ---------------------------------------------------------------------------

struct DetectParams {
  double inner_sigma = 1.0;     // px, DoG smoothing
  double outer_sigma = 3.0;     // px, DoG background estimate
  double threshold = 5.0;       // robust sigma units
  double min_separation = 2.0;  // px
  double psf_sigma = kDefaultPsfSigmaPx;
  double aggregate_factor = 3.0;  // area above this many PSF footprints counts as an aggregate
};

struct Spot {
  double x = 0.0;  // px, sub-pixel centroid
  double y = 0.0;
  double x_um = 0.0;
  double y_um = 0.0;
  double amplitude = 0.0;  // band-passed peak value
  int area_px = 0;         // half-maximum footprint
  bool aggregate = false;
};

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * static_cast<std::size_t>(r) + 1);
  for (int i = -r; i <= r; ++i) k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  const double s = std::accumulate(k.begin(), k.end(), 0.0);
  for (auto& v : k) v /= s;
  return k;
}

inline int reflect(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

inline std::vector<double> blur(const std::vector<double>& img, int w, int h, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(img.size()), out(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int j = -r; j <= r; ++j)
        s += k[static_cast<std::size_t>(j + r)] * img[static_cast<std::size_t>(y) * w + reflect(x + j, w)];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int j = -r; j <= r; ++j)
        s += k[static_cast<std::size_t>(j + r)] * tmp[static_cast<std::size_t>(reflect(y + j, h)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  return out;
}

inline double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace detail

/// Difference-of-Gaussians band-pass, 3x3 local maxima above
/// median + threshold * (1.4826 MAD), then greedy suppression of weaker
/// maxima closer than min_separation. Emitters closer than about one PSF
/// width merge into a single detection.
inline std::vector<Spot> detect_spots(const ImageFrame& frame, const DetectParams& params = {}) {
  frame.validate();
  require(params.inner_sigma > 0.0 && params.outer_sigma > params.inner_sigma,
          "band-pass radii must satisfy 0 < inner < outer");
  require(params.threshold >= 0.0 && params.min_separation >= 0.0, "detection parameters must be non-negative");
  const int w = frame.width, h = frame.height;
  if (w == 0 || h == 0) return {};

  const auto fine = detail::blur(frame.pixels, w, h, params.inner_sigma);
  const auto coarse = detail::blur(frame.pixels, w, h, params.outer_sigma);
  std::vector<double> band(fine.size());
  for (std::size_t i = 0; i < band.size(); ++i) band[i] = fine[i] - coarse[i];

  const double med = detail::median_of(band);
  std::vector<double> dev(band.size());
  for (std::size_t i = 0; i < band.size(); ++i) dev[i] = std::abs(band[i] - med);
  const double sigma = 1.4826 * detail::median_of(dev);
  const double level = med + params.threshold * sigma;

  auto B = [&](int x, int y) { return band[static_cast<std::size_t>(y) * w + x]; };
  struct Candidate {
    int x, y;
    double v;
  };
  std::vector<Candidate> candidates;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = B(x, y);
      if (!(v > level) || v <= 0.0) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1 && peak; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || x + dx < 0 || y + dy < 0 || x + dx >= w || y + dy >= h) continue;
          const double u = B(x + dx, y + dy);
          // ties resolved toward the lower raster index
          if (u > v || (u == v && (dy < 0 || (dy == 0 && dx < 0)))) {
            peak = false;
            break;
          }
        }
      if (peak) candidates.push_back({x, y, v});
    }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.v > b.v; });

  const double sep2 = params.min_separation * params.min_separation;
  const double footprint = constants::pi * 4.0 * params.psf_sigma * params.psf_sigma;
  std::vector<Spot> spots;
  std::vector<char> visited(band.size(), 0);
  for (const auto& c : candidates) {
    bool isolated = true;
    for (const auto& s : spots) {
      const double dx = s.x - c.x, dy = s.y - c.y;
      if (dx * dx + dy * dy < sep2) {
        isolated = false;
        break;
      }
    }
    if (!isolated) continue;
    // centroid of positive band-pass signal in the 3x3 neighbourhood
    double sw = 0, sx = 0, sy = 0;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (c.x + dx < 0 || c.y + dy < 0 || c.x + dx >= w || c.y + dy >= h) continue;
        const double v = std::max(B(c.x + dx, c.y + dy), 0.0);
        sw += v, sx += v * dx, sy += v * dy;
      }
    Spot s;
    s.x = c.x + 0.5 + sx / sw;
    s.y = c.y + 0.5 + sy / sw;
    s.x_um = s.x * frame.pixel_pitch;
    s.y_um = s.y * frame.pixel_pitch;
    s.amplitude = c.v;
    // half-maximum region connected to the peak
    std::vector<std::pair<int, int>> stack{{c.x, c.y}};
    std::vector<std::size_t> touched;
    const double half = 0.5 * c.v;
    while (!stack.empty()) {
      const auto [x, y] = stack.back();
      stack.pop_back();
      if (x < 0 || y < 0 || x >= w || y >= h) continue;
      const auto idx = static_cast<std::size_t>(y) * w + x;
      if (visited[idx] || band[idx] < half) continue;
      visited[idx] = 1;
      touched.push_back(idx);
      stack.push_back({x + 1, y});
      stack.push_back({x - 1, y});
      stack.push_back({x, y + 1});
      stack.push_back({x, y - 1});
    }
    for (auto idx : touched) visited[idx] = 0;
    s.area_px = static_cast<int>(touched.size());
    s.aggregate = s.area_px > params.aggregate_factor * footprint;
    spots.push_back(s);
  }
  std::sort(spots.begin(), spots.end(), [](const Spot& a, const Spot& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return spots;
}

struct SpotCount {
  std::int64_t molecules = 0;
  std::int64_t aggregates = 0;
};

inline SpotCount count_molecules(std::span<const Spot> spots) {
  SpotCount c;
  for (const auto& s : spots) (s.aggregate ? c.aggregates : c.molecules)++;
  return c;
}

// ---------------------------------------------------------------------------
// density and titration
// ---------------------------------------------------------------------------

struct TitrationPoint {
  double biotin_fraction = std::numeric_limits<double>::quiet_NaN();
  double density = 0.0;  // um^-2
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// n / area with the exact (Garwood) 95% Poisson interval.
inline TitrationPoint estimate_density(std::int64_t n_spots, double area) {
  require(n_spots >= 0, "spot count must be non-negative");
  require(area > 0.0 && std::isfinite(area), "area must be positive");
  const double n = static_cast<double>(n_spots);
  TitrationPoint p;
  p.density = n / area;
  p.ci_low = n_spots == 0 ? 0.0 : boost::math::gamma_p_inv(n, 0.025) / area;
  p.ci_high = boost::math::gamma_p_inv(n + 1.0, 0.975) / area;
  return p;
}

struct TitrationFit {
  double rho_ns = 0.0;  // non-specific floor, um^-2
  double slope = 0.0;   // um^-2 per unit fraction
  double rho_ns_stderr = std::numeric_limits<double>::quiet_NaN();
  double slope_stderr = std::numeric_limits<double>::quiet_NaN();
  double dynamic_range = 0.0;
  std::vector<std::string> warnings;
};

/// Weighted least squares density = rho_ns + slope * fraction, weights from
/// the CI half-widths (unit weights if any interval is empty). A negative
/// floor is clamped to zero and the slope refitted through the origin.
inline TitrationFit fit_titration(std::span<const TitrationPoint> points) {
  require(points.size() >= 2, "titration fit needs at least 2 points");
  std::vector<double> w;
  bool unit = false;
  for (const auto& p : points) {
    require(std::isfinite(p.biotin_fraction) && p.biotin_fraction >= 0.0 && p.biotin_fraction <= 1.0,
            "biotin fraction must lie in [0, 1]");
    require(p.density >= 0.0 && p.ci_low <= p.density && p.density <= p.ci_high,
            "titration point must satisfy ci_low <= density <= ci_high");
    const double sigma = (p.ci_high - p.ci_low) / (2.0 * 1.959964);
    if (!(sigma > 0.0)) unit = true;
    w.push_back(sigma > 0.0 ? 1.0 / (sigma * sigma) : 1.0);
  }
  if (unit) std::fill(w.begin(), w.end(), 1.0);

  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  double x_max = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = points[i].biotin_fraction, y = points[i].density;
    sw += w[i], sx += w[i] * x, sy += w[i] * y, sxx += w[i] * x * x, sxy += w[i] * x * y;
    x_max = std::max(x_max, x);
  }
  const double det = sw * sxx - sx * sx;
  require(det > 0.0, "titration needs at least two distinct fractions");
  TitrationFit fit;
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.rho_ns = (sxx * sy - sx * sxy) / det;
  if (!unit) {
    fit.rho_ns_stderr = std::sqrt(sxx / det);
    fit.slope_stderr = std::sqrt(sw / det);
  }
  if (fit.rho_ns < 0.0) {
    fit.warnings.push_back("negative non-specific density clamped to 0");
    fit.rho_ns = 0.0;
    fit.slope = sxy / sxx;
  }
  const double top = fit.rho_ns + fit.slope * x_max;
  if (fit.rho_ns > 0.0) {
    fit.dynamic_range = top / fit.rho_ns;
  } else {
    fit.dynamic_range = std::numeric_limits<double>::infinity();
    fit.warnings.push_back("zero non-specific floor: dynamic range unbounded");
  }
  return fit;
}

// ---------------------------------------------------------------------------
// photobleach traces
// ---------------------------------------------------------------------------

struct TraceSeries {
  std::vector<double> times;      // s
  std::vector<double> intensity;  // a.u.
  int spot_id = 0;

  void validate() const {
    require(times.size() == intensity.size(), "trace columns must have equal length");
    for (std::size_t i = 0; i < intensity.size(); ++i)
      require(std::isfinite(intensity[i]) && intensity[i] >= 0.0, "trace intensities must be non-negative");
    if (times.size() > 2) {
      const double dt = times[1] - times[0];
      require(dt > 0.0, "trace times must increase");
      for (std::size_t i = 2; i < times.size(); ++i)
        require(std::abs(times[i] - times[i - 1] - dt) <= 1e-6 * dt, "trace must be uniformly sampled");
    }
  }
};

struct BleachSpec {
  int n_steps = 1;             // fluorophores on at t = 0
  double step_height = 1.0;    // per fluorophore
  double noise_sigma = 0.2;
  std::vector<int> bleach_times;  // sample index at which each fluorophore goes dark
  int length = 100;
  std::uint64_t seed = 0;
  double background = 0.0;
  double dt = 1.0;  // s, one exposure per sample
  int spot_id = 0;
};

/// Staircase with Gaussian read noise; negative samples are clipped at zero.
inline TraceSeries synth_bleach_trace(const BleachSpec& spec) {
  require(spec.length >= 1, "trace length must be positive");
  require(spec.n_steps >= 0, "step count must be non-negative");
  require(static_cast<int>(spec.bleach_times.size()) == spec.n_steps,
          "need one bleach time per step");
  require(spec.noise_sigma >= 0.0 && spec.step_height >= 0.0 && spec.background >= 0.0,
          "trace levels must be non-negative");
  require(spec.dt > 0.0, "sampling interval must be positive");
  TraceSeries t;
  t.spot_id = spec.spot_id;
  auto rng = simkit::point_stream(spec.seed, static_cast<std::uint64_t>(spec.spot_id));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < spec.length; ++i) {
    int on = spec.n_steps;
    for (int b : spec.bleach_times)
      if (i >= b) --on;
    const double v = spec.background + spec.step_height * on + spec.noise_sigma * noise(rng);
    t.times.push_back(i * spec.dt);
    t.intensity.push_back(std::max(v, 0.0));
  }
  return t;
}

struct StepParams {
  double t_threshold = 5.0;
  int min_segment = 5;
};

struct StepResult {
  int n_steps = 0;
  std::vector<std::size_t> step_indices;  // first sample after each change
  std::vector<double> step_times;
};

namespace detail {

inline void split_segment(std::span<const double> x, std::size_t a, std::size_t b,
                          const StepParams& p, std::vector<std::size_t>& out) {
  const auto min_seg = static_cast<std::size_t>(p.min_segment);
  if (b - a < 2 * min_seg) return;
  // prefix sums over [a, b)
  std::vector<double> s1(b - a + 1, 0.0), s2(b - a + 1, 0.0);
  for (std::size_t i = a; i < b; ++i) {
    s1[i - a + 1] = s1[i - a] + x[i];
    s2[i - a + 1] = s2[i - a] + x[i] * x[i];
  }
  const double n = static_cast<double>(b - a);
  double best_t = 0.0;
  std::size_t best_k = 0;
  for (std::size_t k = a + min_seg; k + min_seg <= b; ++k) {
    const double n1 = static_cast<double>(k - a), n2 = n - n1;
    const double sum1 = s1[k - a], sum2 = s1[b - a] - sum1;
    const double sq1 = s2[k - a], sq2 = s2[b - a] - sq1;
    const double m1 = sum1 / n1, m2 = sum2 / n2;
    const double ss = std::max(sq1 - n1 * m1 * m1, 0.0) + std::max(sq2 - n2 * m2 * m2, 0.0);
    const double pooled = ss / (n - 2.0);
    const double diff = std::abs(m1 - m2);
    const double t = pooled > 0.0 ? diff / std::sqrt(pooled * (1.0 / n1 + 1.0 / n2))
                                  : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (t > best_t) best_t = t, best_k = k;
  }
  if (best_t < p.t_threshold) return;
  split_segment(x, a, best_k, p, out);
  out.push_back(best_k);
  split_segment(x, best_k, b, p, out);
}

}  // namespace detail

/// Recursive binary segmentation on the pooled two-sample t statistic.
inline StepResult classify_steps(const TraceSeries& trace, const StepParams& params = {}) {
  trace.validate();
  require(params.min_segment >= 2, "minimum segment must be at least 2 samples");
  require(params.t_threshold > 0.0, "t threshold must be positive");
  StepResult r;
  detail::split_segment(trace.intensity, 0, trace.intensity.size(), params, r.step_indices);
  r.n_steps = static_cast<int>(r.step_indices.size());
  for (auto k : r.step_indices) r.step_times.push_back(trace.times[k]);
  return r;
}

// ---------------------------------------------------------------------------
// roughness
// ---------------------------------------------------------------------------

struct HeightMap {
  int rows = 0;
  int cols = 0;
  std::vector<double> heights;  // pm, row-major
  double pitch = 1.0;           // nm
  std::string label;

  double at(int r, int c) const {
    return heights[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
  void validate() const {
    require(rows > 0 && cols > 0, "height map must be non-empty");
    require(heights.size() == static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
            "height map must be rectangular");
    require(pitch > 0.0, "lateral pitch must be positive");
    for (double v : heights) require(std::isfinite(v), "heights must be finite");
  }
};

/// Arithmetical mean deviation after removing the least-squares plane.
inline double roughness_Ra(const HeightMap& map) {
  map.validate();
  Eigen::MatrixXd design(map.rows * map.cols, 3);
  Eigen::VectorXd z(map.rows * map.cols);
  for (int r = 0; r < map.rows; ++r)
    for (int c = 0; c < map.cols; ++c) {
      const int i = r * map.cols + c;
      design(i, 0) = 1.0;
      design(i, 1) = c;
      design(i, 2) = r;
      z[i] = map.at(r, c);
    }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(z);
  const Eigen::VectorXd resid = z - design * coef;
  const double mean = resid.mean();
  return (resid.array() - mean).abs().mean();
}

// ---------------------------------------------------------------------------
// layer stability and small conversions
// ---------------------------------------------------------------------------

enum class StabilityKind { Counts, Thickness };

struct StabilitySeries {
  StabilityKind kind = StabilityKind::Counts;
  std::vector<double> days;
  std::vector<double> values;  // molecule counts or thickness (nm)
};

/// Counts decay exponentially (half-life in days); thickness is linear
/// (slope in nm/day).
inline fitcore::FitResult stability_pipeline(const StabilitySeries& s) {
  if (s.kind == StabilityKind::Counts) return fitcore::fit_exp_decay(s.days, s.values);
  return fitcore::fit_linear(s.days, s.values);
}

/// Minutes of etch to remove `thickness_nm` of alumina.
inline double etch_time(double thickness_nm) {
  require(thickness_nm >= 0.0 && std::isfinite(thickness_nm), "thickness must be non-negative");
  return thickness_nm / kEtchRateNmPerMin;
}

/// RMS end-to-end extent of an ideal chain, segment * sqrt(n).
inline double gaussian_chain_extent(double n_monomers, double segment_nm) {
  require(n_monomers >= 1.0, "chain needs at least one monomer");
  require(segment_nm > 0.0, "segment length must be positive");
  return segment_nm * std::sqrt(n_monomers);
}

}  // namespace nvsense::smassay
