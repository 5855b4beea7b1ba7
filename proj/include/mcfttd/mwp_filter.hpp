#pragma once

// Incoherent microwave-photonic FIR filter: H(f) = sum_k a_k exp(-j 2 pi f tau_k)
// with non-negative tap weights.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "mcfttd/error.hpp"
#include "mcfttd/units.hpp"

namespace mcfttd {

class TapSet {
 public:
  /// Delays in ps, strictly increasing; stored relative to the first tap.
  TapSet(std::vector<double> delays_ps, std::vector<double> amplitudes)
      : delays_(std::move(delays_ps)), amplitudes_(std::move(amplitudes)) {
    if (delays_.empty()) throw Error(ErrorKind::EmptyTapSet, "tap set has no taps");
    if (delays_.size() != amplitudes_.size()) {
      throw Error(ErrorKind::InvalidTapSet, "delay and amplitude counts differ");
    }
    for (std::size_t k = 0; k < delays_.size(); ++k) {
      if (!std::isfinite(delays_[k])) throw Error(ErrorKind::InvalidTapSet, "non-finite delay");
      if (!(amplitudes_[k] >= 0.0) || !std::isfinite(amplitudes_[k])) {
        throw Error(ErrorKind::InvalidTapSet, "tap amplitudes must be finite and non-negative");
      }
      if (k > 0 && !(delays_[k] > delays_[k - 1])) {
        throw Error(ErrorKind::InvalidTapSet, "tap delays must be strictly increasing");
      }
    }
    const double origin = delays_.front();
    for (auto& d : delays_) d -= origin;
  }

  /// Equal-weight taps at 0, spacing, 2 spacing, ...
  static TapSet uniform(std::size_t count, double spacing_ps, double amplitude = 1.0) {
    std::vector<double> d(count), a(count, amplitude);
    for (std::size_t k = 0; k < count; ++k) d[k] = static_cast<double>(k) * spacing_ps;
    return TapSet(std::move(d), std::move(a));
  }

  /// Sorts (delay, amplitude) pairs by delay before building the set.
  static TapSet from_unsorted(const std::vector<double>& delays_ps, const std::vector<double>& amplitudes) {
    if (delays_ps.size() != amplitudes.size()) {
      throw Error(ErrorKind::InvalidTapSet, "delay and amplitude counts differ");
    }
    std::vector<std::size_t> order(delays_ps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return delays_ps[a] < delays_ps[b]; });
    std::vector<double> d, a;
    for (auto i : order) {
      d.push_back(delays_ps[i]);
      a.push_back(amplitudes[i]);
    }
    return TapSet(std::move(d), std::move(a));
  }

  const std::vector<double>& delays() const noexcept { return delays_; }
  const std::vector<double>& amplitudes() const noexcept { return amplitudes_; }
  std::size_t size() const noexcept { return delays_.size(); }

 private:
  std::vector<double> delays_;
  std::vector<double> amplitudes_;
};

inline constexpr double kMagnitudeFloorDb = -120.0;

/// Complex response at one frequency (Hz). Amplitudes are scaled by the
/// largest one first, so a power-of-two rescaling of the taps is exact.
inline std::complex<double> frequency_response(const TapSet& taps, double frequency) {
  const auto& a = taps.amplitudes();
  const double top = *std::max_element(a.begin(), a.end());
  const double norm = top > 0.0 ? top : 1.0;
  std::complex<double> h{0.0, 0.0};
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const double phase = -2.0 * kPi * frequency * units::ps(taps.delays()[k]);
    h += (a[k] / norm) * std::polar(1.0, phase);
  }
  return h;
}

struct FilterResponse {
  std::vector<double> frequencies;   // Hz
  std::vector<double> magnitude_db;  // peak-normalized, floored at -120 dB
};

inline FilterResponse transfer_function(const TapSet& taps, double f_start, double f_stop, std::size_t points) {
  if (!(f_start >= 0.0 && f_stop > f_start)) throw Error(ErrorKind::InvalidArgument, "need 0 <= f_start < f_stop");
  if (points < 2) throw Error(ErrorKind::InvalidArgument, "need at least two frequency points");
  FilterResponse r;
  r.frequencies.resize(points);
  std::vector<double> mag(points);
  const double step = (f_stop - f_start) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    r.frequencies[k] = k + 1 == points ? f_stop : f_start + static_cast<double>(k) * step;
    mag[k] = std::abs(frequency_response(taps, r.frequencies[k]));
  }
  const double peak = *std::max_element(mag.begin(), mag.end());
  r.magnitude_db.resize(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double db = (peak > 0.0 && mag[k] > 0.0) ? 20.0 * std::log10(mag[k] / peak) : kMagnitudeFloorDb;
    r.magnitude_db[k] = std::max(db, kMagnitudeFloorDb);
  }
  return r;
}

inline constexpr double kUniformSpacingTolerance = 0.01;

/// 1 / mean(adjacent delay difference), in GHz.
inline double fsr(const TapSet& taps) {
  if (taps.size() < 2) throw Error(ErrorKind::EmptyOrSingleTap, "FSR needs at least two taps");
  const auto& d = taps.delays();
  const double mean = (d.back() - d.front()) / static_cast<double>(d.size() - 1);
  for (std::size_t k = 1; k < d.size(); ++k) {
    if (std::abs(d[k] - d[k - 1] - mean) > kUniformSpacingTolerance * mean) {
      throw Error(ErrorKind::NonUniformSpacing, "adjacent tap spacings deviate by more than 1%");
    }
  }
  return 1e3 / mean;  // 1/ps -> GHz
}

struct FilterMetrics {
  double fsr_ghz;   // mean spacing of main-lobe peaks
  double mslr_db;   // main lobe to highest secondary lobe
  double bw3db_ghz; // -3 dB width of the first passband
};

// Main lobes are local maxima above this level.
inline constexpr double kMainLobeThresholdDb = -3.0;

namespace detail {

inline std::vector<std::size_t> local_maxima(const FilterResponse& r) {
  const auto& m = r.magnitude_db;
  std::vector<std::size_t> peaks;
  const std::size_t n = m.size();
  // The response is even in f, so a grid starting at DC has a genuine peak
  // at its first point when the magnitude falls away from it.
  if (r.frequencies.front() == 0.0 && n > 1 && m[0] > m[1]) peaks.push_back(0);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (m[k] > m[k - 1] && m[k] >= m[k + 1]) peaks.push_back(k);
  }
  return peaks;
}

// Linear interpolation of the -3 dB crossing walking from `peak` in `dir`.
inline std::optional<double> half_power_crossing(const FilterResponse& r, std::size_t peak, int dir) {
  const auto& m = r.magnitude_db;
  const double level = m[peak] - 3.0;
  std::ptrdiff_t k = static_cast<std::ptrdiff_t>(peak);
  const auto n = static_cast<std::ptrdiff_t>(m.size());
  while (k + dir >= 0 && k + dir < n) {
    const auto j = k + dir;
    if (m[static_cast<std::size_t>(j)] <= level) {
      const double f0 = r.frequencies[static_cast<std::size_t>(k)], f1 = r.frequencies[static_cast<std::size_t>(j)];
      const double m0 = m[static_cast<std::size_t>(k)], m1 = m[static_cast<std::size_t>(j)];
      return f0 + (level - m0) / (m1 - m0) * (f1 - f0);
    }
    k = j;
  }
  return std::nullopt;
}

}  // namespace detail

inline FilterMetrics filter_metrics(const FilterResponse& resp) {
  if (resp.frequencies.size() < 3) throw Error(ErrorKind::InsufficientPeaks, "response too short");
  const auto peaks = detail::local_maxima(resp);
  std::vector<std::size_t> main, side;
  for (auto p : peaks) (resp.magnitude_db[p] >= kMainLobeThresholdDb ? main : side).push_back(p);
  if (main.size() < 2) throw Error(ErrorKind::InsufficientPeaks, "fewer than two passbands in range");
  if (side.empty()) throw Error(ErrorKind::InsufficientPeaks, "no secondary lobe in range");

  FilterMetrics out{};
  out.fsr_ghz = units::to_ghz((resp.frequencies[main.back()] - resp.frequencies[main.front()]) /
                              static_cast<double>(main.size() - 1));
  double main_level = resp.magnitude_db[main.front()];
  for (auto p : main) main_level = std::max(main_level, resp.magnitude_db[p]);
  double side_level = resp.magnitude_db[side.front()];
  for (auto p : side) side_level = std::max(side_level, resp.magnitude_db[p]);
  out.mslr_db = main_level - side_level;

  std::optional<double> width;
  for (auto p : main) {
    const auto hi = detail::half_power_crossing(resp, p, +1);
    if (!hi) continue;
    if (resp.frequencies[p] == 0.0) {
      width = 2.0 * *hi;
      break;
    }
    const auto lo = detail::half_power_crossing(resp, p, -1);
    if (lo) {
      width = *hi - *lo;
      break;
    }
  }
  if (!width) throw Error(ErrorKind::InsufficientPeaks, "no passband with both -3 dB edges in range");
  out.bw3db_ghz = units::to_ghz(*width);
  return out;
}

/// CSV with header `frequency_ghz,magnitude_db`, 9 significant digits.
inline void write_response_csv(std::ostream& os, const FilterResponse& r) {
  os << "frequency_ghz,magnitude_db\n";
  char buf[64];
  for (std::size_t k = 0; k < r.frequencies.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", units::to_ghz(r.frequencies[k]), r.magnitude_db[k]);
    os << buf;
  }
}

}  // namespace mcfttd
