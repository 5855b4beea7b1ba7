#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mcfttd/mwp_filter.hpp"

using namespace mcfttd;

namespace {

std::size_t index_of(const FilterResponse& r, double f) {
  std::size_t best = 0;
  for (std::size_t k = 0; k < r.frequencies.size(); ++k) {
    if (std::abs(r.frequencies[k] - f) < std::abs(r.frequencies[best] - f)) best = k;
  }
  return best;
}

struct RandomTaps {
  std::size_t n;
  double spacing_ps;
  std::vector<double> amps;
};

std::vector<RandomTaps> random_uniform_sets(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n(2, 9);
  std::uniform_real_distribution<double> spacing(20.0, 400.0), amp(0.05, 1.0);
  std::vector<RandomTaps> out;
  for (int i = 0; i < count; ++i) {
    RandomTaps t{static_cast<std::size_t>(n(rng)), spacing(rng), {}};
    for (std::size_t k = 0; k < t.n; ++k) t.amps.push_back(amp(rng));
    out.push_back(t);
  }
  return out;
}

TapSet build(const RandomTaps& t, double scale = 1.0) {
  std::vector<double> d, a;
  for (std::size_t k = 0; k < t.n; ++k) {
    d.push_back(static_cast<double>(k) * t.spacing_ps);
    a.push_back(t.amps[k] * scale);
  }
  return TapSet(d, a);
}

}  // namespace

TEST(TapSet, Validation) {
  try {
    TapSet({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyTapSet);
  }
  EXPECT_THROW(TapSet({0, 1}, {1}), Error);
  EXPECT_THROW(TapSet({0, 0}, {1, 1}), Error);
  EXPECT_THROW(TapSet({0, 10}, {1, -1}), Error);
  EXPECT_THROW(TapSet({0, NAN}, {1, 1}), Error);
}

TEST(TapSet, RebasesToFirstTap) {
  const TapSet t({50, 150, 250}, {1, 1, 1});
  EXPECT_EQ(t.delays(), (std::vector<double>{0, 100, 200}));
}

TEST(TapSet, FromUnsorted) {
  const auto t = TapSet::from_unsorted({200, 0, 100}, {0.3, 0.1, 0.2});
  EXPECT_EQ(t.delays(), (std::vector<double>{0, 100, 200}));
  EXPECT_EQ(t.amplitudes(), (std::vector<double>{0.1, 0.2, 0.3}));
}

TEST(TransferFunction, SingleTapIsFlat) {
  const auto r = transfer_function(TapSet({0.0}, {1.0}), 0, units::ghz(40), 401);
  for (double m : r.magnitude_db) EXPECT_EQ(m, 0.0);
}

TEST(TransferFunction, TwoTapsNullAndPeak) {
  const auto r = transfer_function(TapSet::uniform(2, 100.0), 0, units::ghz(20), 2001);
  EXPECT_EQ(r.magnitude_db[index_of(r, units::ghz(5))], kMagnitudeFloorDb);
  EXPECT_NEAR(r.magnitude_db[index_of(r, units::ghz(10))], 0.0, 1e-12);
}

TEST(TransferFunction, ThreeTapPassbands) {
  const auto r = transfer_function(TapSet::uniform(3, 100.0), 0, units::ghz(25), 2501);
  for (double f : {0.0, 10.0, 20.0}) EXPECT_NEAR(r.magnitude_db[index_of(r, units::ghz(f))], 0.0, 1e-12);
  for (double m : r.magnitude_db) EXPECT_LE(m, 0.0);
}

TEST(TransferFunction, GridAndArguments) {
  const auto r = transfer_function(TapSet::uniform(3, 100.0), units::ghz(1), units::ghz(2), 11);
  EXPECT_EQ(r.frequencies.front(), units::ghz(1));
  EXPECT_EQ(r.frequencies.back(), units::ghz(2));
  for (std::size_t k = 1; k < r.frequencies.size(); ++k) EXPECT_GT(r.frequencies[k], r.frequencies[k - 1]);
  EXPECT_THROW(transfer_function(TapSet::uniform(3, 100.0), 0, units::ghz(1), 1), Error);
  EXPECT_THROW(transfer_function(TapSet::uniform(3, 100.0), units::ghz(2), units::ghz(1), 10), Error);
}

TEST(Fsr, Examples) {
  EXPECT_DOUBLE_EQ(fsr(TapSet::uniform(3, 100.0)), 10.0);
  EXPECT_DOUBLE_EQ(fsr(TapSet::uniform(3, 200.0)), 5.0);
  try {
    fsr(TapSet({0, 100, 250}, {1, 1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonUniformSpacing);
  }
  try {
    fsr(TapSet({0}, {1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyOrSingleTap);
  }
  EXPECT_NO_THROW(fsr(TapSet({0, 100, 200.9}, {1, 1, 1})));
}

TEST(Metrics, ThreeTapSidelobe) {
  const auto m = filter_metrics(transfer_function(TapSet::uniform(3, 100.0), 0, units::ghz(40), 4001));
  EXPECT_NEAR(m.mslr_db, 20 * std::log10(3.0), 1e-6);
  EXPECT_NEAR(m.fsr_ghz, 10.0, 0.01);
  EXPECT_GT(m.bw3db_ghz, 0.0);
  EXPECT_LT(m.bw3db_ghz, 10.0);
}

TEST(Metrics, TwoTapsHaveNoSidelobe) {
  try {
    filter_metrics(transfer_function(TapSet::uniform(2, 100.0), 0, units::ghz(40), 4001));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientPeaks);
  }
}

TEST(Metrics, NeedsTwoPassbands) {
  EXPECT_THROW(filter_metrics(transfer_function(TapSet::uniform(3, 100.0), 0, units::ghz(5), 501)), Error);
}

TEST(Metrics, TwoTapBandwidthIsHalfFsr) {
  // cos^2 response: -3 dB points at fsr/4 either side of each passband.
  const auto two = transfer_function(TapSet::uniform(2, 100.0), 0, units::ghz(40), 40001);
  const auto peaks = detail::local_maxima(two);
  ASSERT_GE(peaks.size(), 2u);
  const auto hi = detail::half_power_crossing(two, peaks[1], +1);
  const auto lo = detail::half_power_crossing(two, peaks[1], -1);
  ASSERT_TRUE(hi && lo);
  EXPECT_NEAR(units::to_ghz(*hi - *lo), 5.0, 0.01);
}

TEST(Metrics, FsrAgreesWithMeasured) {
  for (const auto& t : random_uniform_sets(3, 30)) {
    TapSet taps = TapSet::uniform(std::max<std::size_t>(t.n, 3), t.spacing_ps);
    const double predicted = fsr(taps);
    const double f_stop = 3.2 * predicted;
    const std::size_t points = 6401;
    const double step = f_stop / (points - 1);
    const auto m = filter_metrics(transfer_function(taps, 0, units::ghz(f_stop), points));
    EXPECT_LE(std::abs(m.fsr_ghz - predicted), step);
  }
}

TEST(Properties, Periodicity) {
  for (const auto& t : random_uniform_sets(11, 100)) {
    const TapSet taps = build(t);
    const double period = 1.0 / units::ps(t.spacing_ps);
    for (double f : {0.0, 1.3e9, 7.7e9, 21.1e9}) {
      EXPECT_NEAR(std::abs(frequency_response(taps, f + period)), std::abs(frequency_response(taps, f)), 1e-9);
    }
  }
}

TEST(Properties, DcMaximum) {
  for (const auto& t : random_uniform_sets(12, 100)) {
    const TapSet taps = build(t);
    const double dc = std::abs(frequency_response(taps, 0.0));
    const auto r = transfer_function(taps, 0, units::ghz(3 * 1000 / t.spacing_ps), 997);
    EXPECT_EQ(r.magnitude_db.front(), 0.0);
    for (double f : r.frequencies) EXPECT_LE(std::abs(frequency_response(taps, f)), dc * (1 + 1e-12));
  }
}

TEST(Properties, NullPlacement) {
  for (const auto& t : random_uniform_sets(13, 100)) {
    const TapSet taps = TapSet::uniform(t.n, t.spacing_ps);
    const double n = static_cast<double>(t.n);
    for (std::size_t k = 1; k < 3 * t.n; ++k) {
      if (k % t.n == 0) continue;
      const double f = static_cast<double>(k) / (n * units::ps(t.spacing_ps));
      const double rel = std::abs(frequency_response(taps, f)) / n;
      EXPECT_LT(20 * std::log10(std::max(rel, 1e-300)), -100.0) << "n=" << t.n << " k=" << k;
    }
  }
}

TEST(Properties, ScalingByPowerOfTwoIsBitExact) {
  for (const auto& t : random_uniform_sets(14, 100)) {
    const auto a = transfer_function(build(t), 0, units::ghz(30), 301);
    for (double scale : {0.25, 8.0, 1024.0}) {
      const auto b = transfer_function(build(t, scale), 0, units::ghz(30), 301);
      EXPECT_EQ(a.magnitude_db, b.magnitude_db);
      EXPECT_EQ(a.frequencies, b.frequencies);
    }
  }
}

TEST(Properties, ScalingByAnyConstant) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (const auto& t : random_uniform_sets(15, 100)) {
    const auto a = transfer_function(build(t), 0, units::ghz(30), 301);
    const auto b = transfer_function(build(t, scale(rng)), 0, units::ghz(30), 301);
    for (std::size_t k = 0; k < a.magnitude_db.size(); ++k) {
      const double tol = a.magnitude_db[k] < -100 ? 1e-3 : 1e-9;
      EXPECT_NEAR(a.magnitude_db[k], b.magnitude_db[k], tol);
    }
  }
}

TEST(Csv, Format) {
  const auto r = transfer_function(TapSet::uniform(3, 100.0), 0, units::ghz(10), 3);
  std::ostringstream os;
  write_response_csv(os, r);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "frequency_ghz,magnitude_db");
  EXPECT_NE(os.str().find("\n5,"), std::string::npos);
  EXPECT_NE(os.str().find("\n10,0\n"), std::string::npos);
}
