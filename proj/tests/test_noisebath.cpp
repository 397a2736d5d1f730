#include <gtest/gtest.h>

#include <cmath>

#include "nvsense/noisebath.hpp"
#include "nvsense/quadrature.hpp"

using namespace nvsense;
using pulses::Family;

namespace {

// OU closed forms with x = t / tau_c
double ou_free(double v, double tc, double t) {
  const double x = t / tc;
  return v * tc * tc * (x - 1.0 + std::exp(-x));
}
double ou_echo(double v, double tc, double t) {
  const double x = t / tc;
  return v * tc * tc * (x - 3.0 + 4.0 * std::exp(-x / 2.0) - std::exp(-x));
}

}  // namespace

TEST(NoiseBath, LorentzianNormalization) {
  const noisebath::Lorentzian l{2.5e11, 0.7e-6};
  quad::Options opt;
  opt.rel_tol = 1e-10;
  // int_0^inf S dw via w = tan(u) / tau_c
  const auto r = quad::integrate(
      [&](double u) {
        const double w = std::tan(u) / l.tau_c;
        return noisebath::spectral_density(l, w) / (l.tau_c * std::cos(u) * std::cos(u));
      },
      0.0, constants::pi / 2 - 1e-12, opt);
  EXPECT_NEAR(r.value / constants::pi / l.variance, 1.0, 1e-8);
}

TEST(NoiseBath, ProtonPeakArea) {
  const noisebath::ProtonBathPeak p{3e-14, 4.7e7, 1e-6};
  quad::Options opt;
  opt.rel_tol = 1e-10;
  const std::vector<double> pts{0.0, p.center - 20 / p.tau_h, p.center, p.center + 20 / p.tau_h, 1e12};
  const auto r = quad::integrate([&](double w) { return noisebath::spectral_density(p, w); },
                                 std::span<const double>(pts), opt);
  // the +/- pair integrates to pi gamma_e^2 b_rms_sq over the whole line
  const double expect = constants::pi * constants::gamma_e * constants::gamma_e * p.b_rms_sq;
  EXPECT_NEAR(r.value / expect, 1.0, 1e-5);
}

TEST(NoiseBath, FreeDecayMatchesOrnsteinUhlenbeck) {
  const noisebath::Lorentzian l{1e12, 1e-6};
  for (double t : {0.1e-6, 0.5e-6, 1e-6, 3e-6, 10e-6}) {
    const double c = noisebath::chi(pulses::build_sequence(Family::FreeEvolution, 0, t), l);
    EXPECT_NEAR(c / ou_free(l.variance, l.tau_c, t), 1.0, 2e-4) << t;
  }
}

TEST(NoiseBath, EchoMatchesOrnsteinUhlenbeck) {
  const noisebath::Lorentzian l{1e12, 1e-6};
  for (double t : {0.2e-6, 1e-6, 4e-6, 20e-6}) {
    const double c = noisebath::chi(pulses::build_sequence(Family::SpinEcho, 1, t), l);
    EXPECT_NEAR(c / ou_echo(l.variance, l.tau_c, t), 1.0, 2e-4) << t;
  }
}

TEST(NoiseBath, WhiteNoiseBandwidthIsHalfTheDuration) {
  // |y| = 1, so int_0^inf |Y|^2 dw = pi T and chi = S0 T / 2
  for (int n : {0, 1, 8, 64}) {
    const Family f = n == 0 ? Family::FreeEvolution : n == 1 ? Family::SpinEcho : Family::CPMG;
    const double t = 13e-6;
    const double c = noisebath::chi(pulses::build_sequence(f, n, t), noisebath::white(2e5));
    EXPECT_NEAR(c / (2e5 * t / 2), 1.0, 1e-4) << n;
  }
}

TEST(NoiseBath, SumAndScaleAreLinear) {
  const noisebath::Lorentzian a{1e12, 1e-6};
  const noisebath::PowerLaw b{1e-3, 0.5};
  const auto seq = pulses::build_sequence(Family::CPMG, 8, 20e-6);
  const double ca = noisebath::chi(seq, a), cb = noisebath::chi(seq, b);
  EXPECT_NEAR(noisebath::chi(seq, noisebath::sum({a, b})) / (ca + cb), 1.0, 3e-4);
  EXPECT_NEAR(noisebath::chi(seq, noisebath::scaled(noisebath::sum({a, b}), 3.0)) / (3 * (ca + cb)), 1.0,
              3e-4);
  EXPECT_DOUBLE_EQ(noisebath::spectral_density(b, noisebath::PowerLaw::reference_omega), 1e-3);
}

TEST(NoiseBath, ZeroSpectrumGivesUnitCoherence) {
  const auto seq = pulses::build_sequence(Family::CPMG, 8, 20e-6);
  EXPECT_EQ(noisebath::coherence(seq, noisebath::white(0.0)), 1.0);
}

TEST(NoiseBath, DecouplingExtendsCoherence) {
  const noisebath::Lorentzian l{1e11, 5e-6};
  double prev = 0;
  for (int n : {1, 2, 4, 8, 16}) {
    const double t2 = noisebath::t2_of_model(n == 1 ? Family::SpinEcho : Family::CPMG, n, l);
    EXPECT_GT(t2, prev) << n;
    prev = t2;
    EXPECT_NEAR(noisebath::chi(pulses::build_sequence(n == 1 ? Family::SpinEcho : Family::CPMG, n, t2), l),
                1.0, 1e-5);
  }
}

TEST(NoiseBath, Validation) {
  const auto seq = pulses::build_sequence(Family::CPMG, 8, 20e-6);
  EXPECT_THROW(noisebath::chi(seq, noisebath::Lorentzian{1e12, 0.0}), ValidationError);
  EXPECT_THROW(noisebath::chi(seq, noisebath::PowerLaw{1.0, 1.0}), ValidationError);
  EXPECT_THROW(noisebath::chi(seq, noisebath::PowerLaw{-1.0, 0.0}), ValidationError);
  EXPECT_THROW(noisebath::spectral_density(noisebath::white(1.0), -1.0), ValidationError);
  EXPECT_THROW(noisebath::proton_bath_spectrum(6e28, -1e-9, 0.175, 1e-6), ValidationError);
  EXPECT_THROW(noisebath::t2_of_model(Family::CPMG, 8, noisebath::white(0.0)), NumericalError);
}

TEST(NoiseBath, ProtonSpectrumFromDepth) {
  const auto s = noisebath::proton_bath_spectrum(6e28, 4.8e-9, 0.175, 1e-6);
  const auto& p = std::get<noisebath::ProtonBathPeak>(s.model);
  EXPECT_DOUBLE_EQ(p.center, constants::gamma_h * 0.175);
  EXPECT_DOUBLE_EQ(p.b_rms_sq, fieldcal::brms_from_depth(4.8e-9, 6e28));
}
