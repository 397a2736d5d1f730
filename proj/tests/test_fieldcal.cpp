#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nvsense/fieldcal.hpp"
#include "oracles.hpp"

using namespace nvsense;

TEST(Fieldcal, ProtonLarmor) {
  // 1750 G -> 7.45 MHz
  EXPECT_NEAR(fieldcal::proton_larmor(0.175) / constants::two_pi / 1e6, 7.4511, 1e-3);
  EXPECT_THROW(fieldcal::proton_larmor(-1.0), ValidationError);
}

TEST(Fieldcal, BrmsConstantClosedForm) {
  const double m = constants::mu0_over_4pi * constants::hbar * constants::gamma_h;
  EXPECT_NEAR(fieldcal::brms_constant() / (m * m * 5.0 * constants::pi / 96.0), 1.0, 1e-10);
}

TEST(Fieldcal, HalfSpaceSumByMonteCarlo) {
  // radial part int_{d/c}^inf r^-4 dr = c^3 / 3d^3; directions sampled
  // uniformly on the upper hemisphere (c uniform on [0, 1])
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int n = 1000000;
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    const double c = u01(rng), phi = constants::two_pi * u01(rng), s = std::sqrt(1 - c * c);
    acc += fieldcal::precessing_factor({s * std::cos(phi), s * std::sin(phi), c}) * c * c * c / 3.0;
  }
  const double integral = constants::two_pi * acc / n;
  EXPECT_NEAR(integral / (5.0 * constants::pi / 96.0), 1.0, 0.01);
}

TEST(Fieldcal, DepthRoundTrip) {
  for (double d : {2.3e-9, 4.8e-9, 11e-9}) {
    const double b2 = fieldcal::brms_from_depth(d, 6e28);
    EXPECT_NEAR(fieldcal::depth_from_brms(b2, 6e28) / d, 1.0, 1e-14);
  }
  // B_rms scales as d^-3/2
  EXPECT_NEAR(fieldcal::brms_from_depth(2e-9, 6e28) / fieldcal::brms_from_depth(4e-9, 6e28), 8.0, 1e-12);
  EXPECT_THROW(fieldcal::depth_from_brms(0.0, 6e28), ValidationError);
}

TEST(Fieldcal, CarbonCouplingOrientationAverage) {
  std::mt19937_64 rng(11);
  const double r = 5e-9;
  double acc = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const auto u = oracle::isotropic(rng);
    const double c = fieldcal::c13_dipolar_prefactor() * (3 * u[2] * u[2] - 1) / (r * r * r);
    acc += c * c;
  }
  EXPECT_NEAR(std::sqrt(acc / n) / fieldcal::c13_coupling(r), 1.0, 0.01);
}

TEST(Fieldcal, MoleculeCouplingFallsWithStandoff) {
  const auto near = fieldcal::c13_coupling_molecule(3e-9, 1e-9, 1e29, 20000, 1);
  const auto far = fieldcal::c13_coupling_molecule(9e-9, 1e-9, 1e29, 20000, 1);
  EXPECT_GT(near.rms_coupling, far.rms_coupling);
  EXPECT_NEAR(near.expected_spins, 4.0 / 3.0 * constants::pi * 1e-27 * 1e29 * 0.0107, 1e-12);
}

TEST(Fieldcal, IntegrationTimeScalings) {
  fieldcal::SensingBudget b;
  const auto base = fieldcal::integration_time(b);
  EXPECT_NEAR(base.tau_opt, 16.78e-6, 0.05e-6);
  EXPECT_NEAR(base.t_required, 10098.2, 0.5);
  b.n_logic = 100;
  EXPECT_DOUBLE_EQ(fieldcal::integration_time(b).t_required, base.t_required / 100);
  b.n_logic = 1;
  b.snr_target *= 2;
  EXPECT_NEAR(fieldcal::integration_time(b).t_required / base.t_required, 4.0, 1e-12);
}

TEST(Fieldcal, OptimumIsAMinimum) {
  fieldcal::SensingBudget b;
  const auto it = fieldcal::integration_time(b);
  EXPECT_LE(it.t_single, fieldcal::required_time_at(b, 0.98 * it.tau_opt));
  EXPECT_LE(it.t_single, fieldcal::required_time_at(b, 1.02 * it.tau_opt));
}

TEST(Fieldcal, InvisibleTarget) {
  fieldcal::SensingBudget b;
  b.coupling = 0.0;
  EXPECT_THROW(fieldcal::integration_time(b), NumericalError);
  b = {};
  b.n_logic = 0;
  EXPECT_THROW(fieldcal::integration_time(b), ValidationError);
}

TEST(Fieldcal, CalibrationLandsOnDefaults) {
  const auto cal = fieldcal::calibrate_budget({}, 10080.0);
  const fieldcal::SensingBudget d;
  EXPECT_EQ(cal.snr_target, d.snr_target);
  EXPECT_EQ(cal.t_read, d.t_read);
  EXPECT_EQ(cal.stretch, d.stretch);
  EXPECT_NEAR(cal.t_required, 10098.2, 0.5);
}
