#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mcfttd/waveguide.hpp"
#include "oracles/oracles.hpp"

using namespace mcfttd;

namespace {

const MaterialModel kSilica = MaterialModel::fused_silica();

RadialProfile smf() { return RadialProfile::step_index(units::um(4.1), 0.0036); }

}  // namespace

TEST(RefractiveIndex, SilicaAt1550) {
  const double n = refractive_index(kSilica, 0.0, units::um(1.55));
  EXPECT_NEAR(n, 1.4440, 5e-5);
  EXPECT_NEAR(n, oracle::silica_index(units::um(1.55)), 1e-14);
}

TEST(RefractiveIndex, SilicaAtSodiumD) {
  const double n = refractive_index(kSilica, 0.0, units::um(0.5876));
  EXPECT_NEAR(n, 1.4585, 5e-5);
  EXPECT_NEAR(n, oracle::silica_index(units::um(0.5876)), 1e-14);
}

TEST(RefractiveIndex, MultiplicativeOffsetIsExact) {
  for (double lambda : {units::um(1.2), units::um(1.31), units::um(1.55), units::um(1.7)}) {
    EXPECT_EQ(refractive_index(kSilica, 0.005, lambda), 1.005 * refractive_index(kSilica, 0.0, lambda));
  }
}

TEST(RefractiveIndex, BaseIndexBoundsOnBand) {
  for (double l = 1.2; l <= 1.7; l += 0.01) {
    const double n = kSilica.base_index(units::um(l));
    EXPECT_GT(n, 1.3);
    EXPECT_LT(n, 1.6);
  }
}

TEST(RefractiveIndex, RejectsOutOfRange) {
  try {
    refractive_index(kSilica, 0.0, units::um(2.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WavelengthOutOfRange);
  }
  EXPECT_THROW(refractive_index(kSilica, 0.0, units::um(0.3)), Error);
  EXPECT_THROW(refractive_index(kSilica, 0.06, units::um(1.55)), Error);
}

TEST(RefractiveIndex, AnalyticSlopeMatchesDifference) {
  const double l = units::um(1.55), h = units::nm(0.01);
  const double fd = (oracle::silica_index(l + h) - oracle::silica_index(l - h)) / (2 * h);
  EXPECT_NEAR(kSilica.base_index_slope(l), fd, 1e-6 * std::abs(fd));
}

TEST(RadialProfile, RejectsBadLayers) {
  EXPECT_THROW(RadialProfile({{units::um(4), 0.003}, {units::um(3), 0.0}}), Error);
  EXPECT_THROW(RadialProfile({}), Error);
  EXPECT_THROW(RadialProfile({{-1e-6, 0.003}}), Error);
  EXPECT_THROW(RadialProfile::trench_assisted(units::um(4), 0.005, {units::um(3), units::um(3), -0.01}), Error);
}

TEST(RadialProfile, TrenchLayout) {
  const auto p = RadialProfile::trench_assisted(units::um(4), 0.005, {units::um(6), units::um(3), 0.01});
  ASSERT_EQ(p.size(), 3u);
  EXPECT_DOUBLE_EQ(p.layers()[1].outer_radius, units::um(10));
  EXPECT_DOUBLE_EQ(p.layers()[2].outer_radius, units::um(13));
  EXPECT_DOUBLE_EQ(p.layers()[2].delta, -0.01);
  EXPECT_TRUE(p.fits_in_cladding(units::um(62.5)));
  EXPECT_FALSE(p.fits_in_cladding(units::um(12)));
}

TEST(SolveLp01, NoContrastHasNoMode) {
  try {
    solve_lp01(RadialProfile::step_index(units::um(4), 0.0), kSilica, units::nm(1550));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoGuidedMode);
  }
}

TEST(SolveLp01, MatchesTwoLayerOracle) {
  const double lambda = units::nm(1550);
  const auto sol = solve_lp01(smf(), kSilica, lambda);
  EXPECT_NEAR(sol.n_eff, oracle::two_layer_neff(units::um(4.1), 0.0036, lambda), 1e-8);
}

TEST(SolveLp01, OracleEquivalenceRandomProfiles) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> radius(2.5, 6.0), delta(0.002, 0.008), lambda(1500, 1600);
  for (int i = 0; i < 25; ++i) {
    const double a = units::um(radius(rng)), d = delta(rng), l = units::nm(lambda(rng));
    const auto sol = solve_lp01(RadialProfile::step_index(a, d), kSilica, l);
    EXPECT_NEAR(sol.n_eff, oracle::two_layer_neff(a, d, l), 1e-8) << "a=" << a << " d=" << d << " l=" << l;
  }
}

TEST(SolveLp01, ZeroDepthTrenchIsTwoLayer) {
  const double lambda = units::nm(1550);
  const double two = solve_lp01(smf(), kSilica, lambda).n_eff;
  const auto flat = RadialProfile::trench_assisted(units::um(4.1), 0.0036, {units::um(5), units::um(3), 0.0});
  EXPECT_NEAR(solve_lp01(flat, kSilica, lambda).n_eff, two, 1e-12);
  double previous = 1.0;
  for (double scale : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto thin = RadialProfile::trench_assisted(units::um(4.1), 0.0036,
                                                     {units::um(5), units::um(3) * scale, 0.01 * scale});
    const double gap = std::abs(solve_lp01(thin, kSilica, lambda).n_eff - two);
    EXPECT_LT(gap, previous);
    previous = gap;
  }
  EXPECT_LT(previous, 1e-10);
}

TEST(SolveLp01, TrenchRaisesIndex) {
  const double lambda = units::nm(1550);
  const auto trench = RadialProfile::trench_assisted(units::um(4.1), 0.0036, {units::um(3), units::um(4), 0.01});
  // A depressed ring lowers the field outside the core; n_eff drops less
  // than the cladding and stays inside the guided bracket.
  const auto sol = solve_lp01(trench, kSilica, lambda);
  EXPECT_GT(sol.n_eff, sol.cladding_index);
  EXPECT_LT(sol.n_eff, refractive_index(kSilica, 0.0036, lambda));
}

TEST(SolveLp01, ResidualAndContinuity) {
  const double lambda = units::nm(1550);
  for (const auto& p : {smf(), RadialProfile::trench_assisted(units::um(3.8), 0.005, {units::um(6), units::um(3), 0.01}),
                        RadialProfile::trench_assisted(units::um(5), 0.004, {0.0, units::um(4), 0.007})}) {
    const auto sol = solve_lp01(p, kSilica, lambda);
    EXPECT_LT(std::abs(sol.residual), 1e-10);
    EXPECT_LT(interface_mismatch(p, sol), 1e-10);
    EXPECT_EQ(sol.layer_coefficients.size(), p.size() + 1);
  }
}

TEST(SolveLp01, GuidedBracketProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(2.5, 6.0), delta(0.002, 0.008), gap(0.0, 8.0), width(1.0, 5.0),
      depth(0.0, 0.012), lambda(1200, 1700);
  for (int i = 0; i < 30; ++i) {
    const auto p = RadialProfile::trench_assisted(units::um(radius(rng)), delta(rng),
                                                  {units::um(gap(rng)), units::um(width(rng)), depth(rng)});
    const double l = units::nm(lambda(rng));
    const auto sol = solve_lp01(p, kSilica, l);
    EXPECT_GT(sol.n_eff, refractive_index(kSilica, 0.0, l));
    EXPECT_LT(sol.n_eff, refractive_index(kSilica, p.core_delta(), l));
  }
}

TEST(SolveLp01, NeffDecreasesWithWavelength) {
  const auto p = RadialProfile::trench_assisted(units::um(4), 0.005, {units::um(6), units::um(3), 0.01});
  double previous = 10.0;
  for (double nm = 1530; nm <= 1570; nm += 1.0) {
    const double n = solve_lp01(p, kSilica, units::nm(nm)).n_eff;
    EXPECT_LT(n, previous) << nm;
    previous = n;
  }
}

TEST(GroupDelay, FlatIndexGivesPhaseDelay) {
  EXPECT_DOUBLE_EQ(group_delay_ps_per_km(1.45, 0.0, units::nm(1550)), 1.45 / oracle::c0 * 1e15);
}

TEST(GroupDelay, SmfGroupIndexInRange) {
  const double lambda = units::nm(1550);
  const double tau = group_delay_per_km(smf(), kSilica, lambda);
  const double ng = tau * oracle::c0 * 1e-15;
  EXPECT_GT(ng, 1.46);
  EXPECT_LT(ng, 1.48);
}

TEST(GroupDelay, MatchesFivePointOracle) {
  const double lambda = units::nm(1550), h = units::nm(0.1);
  std::vector<double> n;
  for (int k = -2; k <= 2; ++k) n.push_back(solve_lp01(smf(), kSilica, lambda + k * h).n_eff);
  const double dn = (n[0] - 8 * n[1] + 8 * n[3] - n[4]) / (12 * h);
  const double expected = (n[2] - lambda * dn) / oracle::c0 * 1e15;
  EXPECT_NEAR(group_delay_per_km(smf(), kSilica, lambda), expected, 1e-3);
}

TEST(GroupDelay, StepHalvingConverges) {
  const double lambda = units::nm(1550);
  const double full = group_delay_per_km(smf(), kSilica, lambda, {units::nm(0.1)});
  const double half = group_delay_per_km(smf(), kSilica, lambda, {units::nm(0.05)});
  EXPECT_LT(std::abs(full - half), 1e-3);
}

TEST(Dispersion, SmfNearSeventeen) {
  const auto dp = dispersion_params(smf(), kSilica, units::nm(1550));
  EXPECT_NEAR(dp.dispersion, 17.0, 1.5);
  EXPECT_GT(dp.slope, 0.0);
}

TEST(Dispersion, MatchesDenseCurveFit) {
  // Degree-6 fit of n_eff over 1500..1600 nm; D = -(lambda/c) n''.
  const double center = units::nm(1550), half = units::nm(50);
  std::vector<double> x, y;
  for (double nm = 1500; nm <= 1600.0 + 1e-9; nm += 2.0) {
    x.push_back((units::nm(nm) - center) / half);
    y.push_back(solve_lp01(smf(), kSilica, units::nm(nm)).n_eff - 1.44);
  }
  const auto c = oracle::polyfit(x, y, 6);
  const double n2 = 2.0 * c[2] / (half * half);
  const double d_fit = -center / oracle::c0 * n2 * 1e6;
  EXPECT_NEAR(dispersion_params(smf(), kSilica, center).dispersion, d_fit, 0.05);
}

TEST(Dispersion, StepHalvingStable) {
  for (const auto& p : {smf(), RadialProfile::trench_assisted(units::um(4), 0.005, {units::um(6), units::um(3), 0.01})}) {
    const double full = dispersion_params(p, kSilica, units::nm(1550), {units::nm(0.1)}).dispersion;
    const double half = dispersion_params(p, kSilica, units::nm(1550), {units::nm(0.05)}).dispersion;
    EXPECT_LT(std::abs(full - half), 0.02);
  }
}

TEST(Dispersion, MaterialMatchesOracle) {
  for (double l : {1.2, 1.3, 1.55, 1.65}) {
    EXPECT_NEAR(kSilica.material_dispersion(units::um(l)), oracle::silica_material_dispersion(units::um(l)), 0.05);
  }
}

TEST(Dispersion, MaterialZeroNear1270) {
  const double zero = oracle::bisect([](double l) { return kSilica.material_dispersion(l); }, units::um(1.2),
                                     units::um(1.35), 1e-13);
  EXPECT_NEAR(units::to_um(zero), 1.27, 0.01);
}

TEST(Dispersion, StencilOutOfRange) {
  try {
    dispersion_params(smf(), kSilica, units::um(2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StencilOutOfRange);
  }
  EXPECT_THROW(dispersion_params(smf(), kSilica, units::nm(1550), {0.0}), Error);
}
