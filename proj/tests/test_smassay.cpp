#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nvsense/smassay.hpp"

using namespace nvsense;

TEST(Synth, DeterministicAndSized) {
  smassay::SynthParams p;
  p.density = 0.01;
  p.seed = 9;
  const auto a = smassay::synth_scene(p), b = smassay::synth_scene(p);
  EXPECT_EQ(a.frame.pixels, b.frame.pixels);
  EXPECT_EQ(a.frame.width, static_cast<int>(std::lround(std::sqrt(2800.0) / 0.22)));
  EXPECT_NEAR(a.frame.area(), 2800.0, 15.0);  // whole pixels
  // roughly 28 emitters
  EXPECT_GT(a.emitters.size(), 10u);
  EXPECT_LT(a.emitters.size(), 50u);
}

TEST(Synth, PhotonBudget) {
  smassay::SynthParams p;
  p.density = 0.02;
  p.bg_per_px = 0.0;
  p.seed = 4;
  const auto s = smassay::synth_scene(p);
  double total = 0;
  for (double v : s.frame.pixels) total += v;
  // spots near the edge lose some light
  EXPECT_NEAR(total / (500.0 * s.emitters.size()), 1.0, 0.05);
}

TEST(Detect, FindsIsolatedSpots) {
  smassay::ImageFrame f;
  f.width = f.height = 64;
  f.pixels.assign(64 * 64, 10.0);
  auto put = [&](double cx, double cy, double amp) {
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        f.pixels[y * 64 + x] += amp * std::exp(-(dx * dx + dy * dy) / 2.0);
      }
  };
  put(16.3, 20.7, 80);
  put(45.5, 40.5, 80);
  // mild read noise so the robust noise estimate is non-zero
  std::mt19937 rng(5);
  std::normal_distribution<double> g(0.0, 0.5);
  for (auto& v : f.pixels) v += g(rng);
  const auto spots = smassay::detect_spots(f);
  ASSERT_EQ(spots.size(), 2u);
  EXPECT_NEAR(spots[0].x, 16.3, 0.3);
  EXPECT_NEAR(spots[0].y, 20.7, 0.3);
  EXPECT_NEAR(spots[1].x_um, 45.5 * 0.22, 0.1);
  EXPECT_FALSE(spots[0].aggregate);
  const auto c = smassay::count_molecules(spots);
  EXPECT_EQ(c.molecules, 2);
  EXPECT_EQ(c.aggregates, 0);
}

TEST(Detect, BroadBlobIsAggregate) {
  smassay::ImageFrame f;
  f.width = f.height = 64;
  f.pixels.assign(64 * 64, 10.0);
  std::mt19937 rng(6);
  std::normal_distribution<double> g(0.0, 0.5);
  // a cluster five PSF widths across
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const double dx = x + 0.5 - 32, dy = y + 0.5 - 32;
      f.pixels[y * 64 + x] += 60 * std::exp(-(dx * dx + dy * dy) / (2 * 5.0 * 5.0)) + g(rng);
    }
  const auto spots = smassay::detect_spots(f);
  ASSERT_GE(spots.size(), 1u);
  EXPECT_TRUE(spots[0].aggregate);
}

TEST(Density, PoissonInterval) {
  const auto z = smassay::estimate_density(0, 100.0);
  EXPECT_EQ(z.density, 0.0);
  EXPECT_EQ(z.ci_low, 0.0);
  EXPECT_NEAR(z.ci_high * 100.0, 3.688879, 1e-5);
  // Garwood interval for n = 10: [4.795389, 18.390356]
  const auto t = smassay::estimate_density(10, 1.0);
  EXPECT_NEAR(t.ci_low, 4.795389, 1e-5);
  EXPECT_NEAR(t.ci_high, 18.390356, 1e-5);
  EXPECT_THROW(smassay::estimate_density(-1, 1.0), ValidationError);
}

TEST(Titration, EndpointsAndClamp) {
  std::vector<smassay::TitrationPoint> pts;
  for (auto [f, n] : {std::pair{0.0, 10}, {0.5, 630}, {1.0, 1250}}) {
    auto p = smassay::estimate_density(n, 2800.0);
    p.biotin_fraction = f;
    pts.push_back(p);
  }
  const auto fit = smassay::fit_titration(pts);
  EXPECT_NEAR(fit.rho_ns, 10 / 2800.0, 1e-3);
  EXPECT_GT(fit.dynamic_range, 100.0);

  // unit weights (empty intervals) and a line through (0, -2/3)
  std::vector<smassay::TitrationPoint> neg{{0.0, 0.0, 0.0, 0.0}, {0.5, 0.0, 0.0, 0.0}, {1.0, 2.0, 2.0, 2.0}};
  const auto clamped = smassay::fit_titration(neg);
  EXPECT_EQ(clamped.rho_ns, 0.0);
  EXPECT_NEAR(clamped.slope, 1.6, 1e-12);  // through the origin
  EXPECT_TRUE(std::isinf(clamped.dynamic_range));
  EXPECT_FALSE(clamped.warnings.empty());
}

TEST(Steps, NoiselessStaircase) {
  smassay::BleachSpec spec;
  spec.n_steps = 2;
  spec.bleach_times = {30, 70};
  spec.noise_sigma = 0.0;
  spec.step_height = 5.0;
  spec.background = 1.0;
  const auto trace = smassay::synth_bleach_trace(spec);
  const auto r = smassay::classify_steps(trace);
  EXPECT_EQ(r.n_steps, 2);
  EXPECT_EQ(r.step_indices, (std::vector<std::size_t>{30, 70}));
}

TEST(Steps, ClassificationAtSnrFive) {
  int correct = 0;
  for (int s = 0; s < 100; ++s) {
    smassay::BleachSpec spec;
    spec.n_steps = 1 + s % 2;
    spec.bleach_times = spec.n_steps == 1 ? std::vector<int>{50} : std::vector<int>{35, 70};
    spec.step_height = 5.0;
    spec.noise_sigma = 1.0;
    spec.background = 10.0;
    spec.seed = 100 + s;
    correct += smassay::classify_steps(smassay::synth_bleach_trace(spec)).n_steps == spec.n_steps;
  }
  EXPECT_GE(correct, 90);
}

TEST(Steps, FlatTraceHasNoStep) {
  smassay::BleachSpec spec;
  spec.n_steps = 0;
  spec.background = 10.0;
  spec.noise_sigma = 1.0;
  EXPECT_EQ(smassay::classify_steps(smassay::synth_bleach_trace(spec)).n_steps, 0);
}

TEST(Roughness, PlaneAndSinusoid) {
  smassay::HeightMap m;
  m.rows = 20;
  m.cols = 40;
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) m.heights.push_back(100 + 3 * c - 7 * r);
  EXPECT_NEAR(smassay::roughness_Ra(m), 0.0, 1e-10);
  m.heights.clear();
  const double a = 500;
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) m.heights.push_back(a * std::cos(2 * constants::pi * (c + 0.5) / 20.0));
  EXPECT_NEAR(smassay::roughness_Ra(m) / (2 * a / constants::pi), 1.0, 0.02);
  m.heights.pop_back();
  EXPECT_THROW(smassay::roughness_Ra(m), ValidationError);
}

TEST(Stability, Dispatch) {
  smassay::StabilitySeries s;
  s.kind = smassay::StabilityKind::Thickness;
  s.days = {0, 1, 2, 3};
  s.values = {3.0, 2.81, 2.62, 2.43};
  EXPECT_NEAR(smassay::stability_pipeline(s).at("slope"), -0.19, 1e-12);
  s.kind = smassay::StabilityKind::Counts;
  s.values = {800, 400, 200, 100};
  EXPECT_NEAR(smassay::stability_pipeline(s).at("half_life"), 1.0, 1e-8);
}

TEST(Conversions, EtchAndChain) {
  EXPECT_NEAR(smassay::etch_time(2.0), 2.0 / 3.6, 1e-15);
  EXPECT_THROW(smassay::etch_time(-1.0), ValidationError);
  EXPECT_NEAR(smassay::gaussian_chain_extent(64, 0.35), 2.8, 1e-12);
}
