#pragma once

// Multicavity device in a homogeneous multicore fiber: uniform Bragg gratings
// at selected longitudinal positions in selected cores. Taps are single-bounce
// reflections; the delay of a grating is the round trip to its center.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "mcfttd/error.hpp"
#include "mcfttd/units.hpp"

namespace mcfttd {

struct GratingSpec {
  int core_id = 1;
  double z_start = 0.0;  // m, leading edge
  double length = units::mm(5);
  double bragg_wavelength = units::nm(1550);
  double delta_n = 1e-4;
  double reflectivity_weight = 1.0;

  double center() const noexcept { return z_start + 0.5 * length; }
  double end() const noexcept { return z_start + length; }
};

struct DeviceFiber {
  double n_eff = 1.447;
  double group_index = 1.468;
  double length = units::mm(80);
};

inline constexpr double kMaxDeviceLength = 0.2;  // m
// A grating belongs to a channel when its Bragg wavelength is this close.
inline constexpr double kChannelMatchTolerance = units::nm(0.5);

struct MulticavityLayout {
  DeviceFiber fiber;
  std::vector<GratingSpec> gratings;
  std::vector<double> wavelength_channels;  // m; channel i is entry i-1

  std::vector<int> cores() const {
    std::vector<int> ids;
    for (const auto& g : gratings) ids.push_back(g.core_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

  void validate() const {
    if (!(fiber.length > 0.0 && fiber.length <= kMaxDeviceLength)) {
      throw Error(ErrorKind::InvalidLayout, "device length must lie in (0, 0.2] m");
    }
    if (!(fiber.group_index > 1.0 && fiber.n_eff > 1.0)) {
      throw Error(ErrorKind::InvalidLayout, "fiber indices must exceed 1");
    }
    for (const auto& g : gratings) {
      if (!(g.length > 0.0)) throw Error(ErrorKind::InvalidLayout, "grating length must be positive");
      if (!(g.z_start >= 0.0) || g.end() > fiber.length) {
        throw Error(ErrorKind::InvalidLayout, "grating lies outside the device");
      }
      if (!(g.bragg_wavelength >= units::um(1.5) && g.bragg_wavelength <= units::um(1.6))) {
        throw Error(ErrorKind::InvalidLayout, "Bragg wavelength outside [1.5, 1.6] um");
      }
      if (!(g.delta_n >= 0.0)) throw Error(ErrorKind::InvalidLayout, "index modulation must be >= 0");
      if (!(g.reflectivity_weight > 0.0 && g.reflectivity_weight <= 1.0)) {
        throw Error(ErrorKind::InvalidLayout, "reflectivity weight must lie in (0, 1]");
      }
    }
    for (int core : cores()) {
      std::vector<const GratingSpec*> in_core;
      for (const auto& g : gratings) {
        if (g.core_id == core) in_core.push_back(&g);
      }
      std::sort(in_core.begin(), in_core.end(),
                [](const GratingSpec* a, const GratingSpec* b) { return a->z_start < b->z_start; });
      for (std::size_t i = 1; i < in_core.size(); ++i) {
        if (in_core[i]->z_start < in_core[i - 1]->end()) {
          throw Error(ErrorKind::InvalidLayout, "overlapping gratings in core " + std::to_string(core));
        }
      }
    }
  }
};

/// Three-core, three-channel device: cores 6, 5, 4 hold gratings spaced 20,
/// 21 and 22 mm; at channels 1, 2, 3 (1537.07, 1541.51, 1546.26 nm) the
/// grating shifts by 6, 7 and 8 mm from one core to the next. Distances are
/// center to center.
inline MulticavityLayout canonical_paper_layout() {
  MulticavityLayout layout;
  layout.wavelength_channels = {units::nm(1537.07), units::nm(1541.51), units::nm(1546.26)};
  constexpr int kCores[] = {6, 5, 4};
  constexpr double kFirstCenterMm = 12.5;
  constexpr double kBaseSpacingMm = 20.0;
  constexpr double kBaseDisplacementMm = 6.0;
  const GratingSpec defaults{};
  for (int k = 0; k < 3; ++k) {
    const double spacing = kBaseSpacingMm + k;
    for (int i = 0; i < 3; ++i) {
      const double center_mm = kFirstCenterMm + kBaseDisplacementMm * k + spacing * i;
      GratingSpec g;
      g.core_id = kCores[k];
      g.length = defaults.length;
      g.z_start = units::mm(center_mm) - 0.5 * g.length;
      g.bragg_wavelength = layout.wavelength_channels[static_cast<std::size_t>(i)];
      layout.gratings.push_back(g);
    }
  }
  return layout;
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

struct ReflectionSpectrum {
  std::vector<double> wavelengths;  // m
  std::vector<std::complex<double>> reflection;
  std::vector<double> reflectivity;
  std::vector<double> transmissivity;
};

namespace detail {

struct CoupledModeSection {
  std::complex<double> cosh_term;  // cosh(gamma L)
  std::complex<double> sinhc;      // sinh(gamma L) / gamma, -> L as gamma -> 0
};

inline CoupledModeSection coupled_mode_section(double kappa, double detuning, double length) {
  const std::complex<double> gamma = std::sqrt(std::complex<double>(kappa * kappa - detuning * detuning, 0.0));
  const std::complex<double> gl = gamma * length;
  std::complex<double> sinhc;
  if (std::abs(gl) < 1e-4) {
    sinhc = length * (1.0 + gl * gl / 6.0);
  } else {
    sinhc = std::sinh(gl) / gamma;
  }
  return {std::cosh(gl), sinhc};
}

inline double grating_coupling(const GratingSpec& spec, double wavelength) {
  return kPi * spec.delta_n / wavelength;
}

inline double grating_detuning(const GratingSpec& spec, double n_eff, double wavelength) {
  return 2.0 * kPi * n_eff * (1.0 / wavelength - 1.0 / spec.bragg_wavelength);
}

}  // namespace detail

/// Closed-form coupled-mode response of a uniform grating.
inline ReflectionSpectrum uniform_grating_response(const GratingSpec& spec, double n_eff,
                                                   const std::vector<double>& wavelengths) {
  if (!(spec.delta_n >= 0.0)) throw Error(ErrorKind::InvalidArgument, "index modulation must be >= 0");
  ReflectionSpectrum out;
  out.wavelengths = wavelengths;
  for (double lambda : wavelengths) {
    const double kappa = detail::grating_coupling(spec, lambda);
    const double delta = detail::grating_detuning(spec, n_eff, lambda);
    const auto sec = detail::coupled_mode_section(kappa, delta, spec.length);
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> den = sec.cosh_term - i * delta * sec.sinhc;
    const std::complex<double> r = i * kappa * sec.sinhc / den;
    const std::complex<double> t = 1.0 / den;
    out.reflection.push_back(r);
    out.reflectivity.push_back(std::norm(r));
    out.transmissivity.push_back(std::norm(t));
  }
  return out;
}

/// Same grating evaluated as a product of `sections` uniform transfer
/// matrices. Agrees with the closed form for uniform gratings; the split is
/// what a chirped or apodized grating would need.
inline ReflectionSpectrum piecewise_grating_response(const GratingSpec& spec, double n_eff,
                                                     const std::vector<double>& wavelengths,
                                                     int sections = 100) {
  if (sections < 1) throw Error(ErrorKind::InvalidArgument, "need at least one section");
  ReflectionSpectrum out;
  out.wavelengths = wavelengths;
  const double dz = spec.length / sections;
  const std::complex<double> i(0.0, 1.0);
  for (double lambda : wavelengths) {
    const double kappa = detail::grating_coupling(spec, lambda);
    const double delta = detail::grating_detuning(spec, n_eff, lambda);
    const auto sec = detail::coupled_mode_section(kappa, delta, dz);
    const std::complex<double> f11 = sec.cosh_term - i * delta * sec.sinhc;
    const std::complex<double> f12 = -i * kappa * sec.sinhc;
    const std::complex<double> f21 = i * kappa * sec.sinhc;
    const std::complex<double> f22 = sec.cosh_term + i * delta * sec.sinhc;
    std::complex<double> m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
    for (int s = 0; s < sections; ++s) {
      const auto n11 = f11 * m11 + f12 * m21;
      const auto n12 = f11 * m12 + f12 * m22;
      const auto n21 = f21 * m11 + f22 * m21;
      const auto n22 = f21 * m12 + f22 * m22;
      m11 = n11; m12 = n12; m21 = n21; m22 = n22;
    }
    const std::complex<double> r = m21 / m11;
    out.reflection.push_back(r);
    out.reflectivity.push_back(std::norm(r));
    out.transmissivity.push_back(std::norm(1.0 / m11));
  }
  return out;
}

/// Peak reflectivity tanh^2(kappa L) at the Bragg wavelength.
inline double peak_reflectivity(const GratingSpec& spec) {
  const double kl = detail::grating_coupling(spec, spec.bragg_wavelength) * spec.length;
  return std::pow(std::tanh(kl), 2);
}

/// Reflection of every grating in one core, summed in power (single-bounce,
/// non-overlapping bands), capped at 1.
inline ReflectionSpectrum core_reflection_spectrum(const MulticavityLayout& layout, int core_id,
                                                   const std::vector<double>& wavelengths) {
  ReflectionSpectrum out;
  out.wavelengths = wavelengths;
  out.reflection.assign(wavelengths.size(), {0.0, 0.0});
  out.reflectivity.assign(wavelengths.size(), 0.0);
  bool found = false;
  for (const auto& g : layout.gratings) {
    if (g.core_id != core_id) continue;
    found = true;
    const auto s = uniform_grating_response(g, layout.fiber.n_eff, wavelengths);
    const double phase = 4.0 * kPi * layout.fiber.n_eff * g.center();
    for (std::size_t k = 0; k < wavelengths.size(); ++k) {
      out.reflection[k] += s.reflection[k] * std::polar(1.0, -phase / wavelengths[k]);
      out.reflectivity[k] += s.reflectivity[k];
    }
  }
  if (!found) throw Error(ErrorKind::CoreNotFound, "no gratings in core " + std::to_string(core_id));
  for (auto& r : out.reflectivity) r = std::min(r, 1.0);
  for (double r : out.reflectivity) out.transmissivity.push_back(1.0 - r);
  return out;
}

/// CSV with header `wavelength_nm,reflectivity_db`; dB floored at -120.
inline void write_spectrum_csv(std::ostream& os, const ReflectionSpectrum& s) {
  os << "wavelength_nm,reflectivity_db\n";
  char buf[64];
  for (std::size_t k = 0; k < s.wavelengths.size(); ++k) {
    const double db = s.reflectivity[k] > 0.0 ? std::max(10.0 * std::log10(s.reflectivity[k]), -120.0) : -120.0;
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", units::to_nm(s.wavelengths[k]), db);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Tap selection
// ---------------------------------------------------------------------------

/// Taps from the matching grating of every core at channel `channel` (1-based).
struct SpatialDiversity {
  int channel;
};

/// Taps from every grating of core `core`.
struct WavelengthDiversity {
  int core;
};

using Diversity = std::variant<SpatialDiversity, WavelengthDiversity>;

enum class AmplitudeSource {
  ReflectivityWeight,  // GratingSpec::reflectivity_weight
  PeakReflectivity,    // sqrt(R_peak), normalized to the strongest tap
};

namespace detail {

inline const GratingSpec* channel_grating(const MulticavityLayout& layout, int core, double channel) {
  const GratingSpec* match = nullptr;
  for (const auto& g : layout.gratings) {
    if (g.core_id != core || std::abs(g.bragg_wavelength - channel) > kChannelMatchTolerance) continue;
    if (match) {
      throw Error(ErrorKind::InvalidLayout,
                  "core " + std::to_string(core) + " has more than one grating at one channel");
    }
    match = &g;
  }
  return match;
}

}  // namespace detail

/// Selected gratings ordered by round-trip delay.
inline std::vector<const GratingSpec*> select_gratings(const MulticavityLayout& layout, const Diversity& mode) {
  std::vector<const GratingSpec*> picked;
  if (const auto* sp = std::get_if<SpatialDiversity>(&mode)) {
    if (sp->channel < 1 || static_cast<std::size_t>(sp->channel) > layout.wavelength_channels.size()) {
      throw Error(ErrorKind::ChannelNotFound, "channel " + std::to_string(sp->channel) + " not in layout");
    }
    const double lambda = layout.wavelength_channels[static_cast<std::size_t>(sp->channel - 1)];
    for (int core : layout.cores()) {
      if (const auto* g = detail::channel_grating(layout, core, lambda)) picked.push_back(g);
    }
    if (picked.empty()) {
      throw Error(ErrorKind::ChannelNotFound, "no grating at channel " + std::to_string(sp->channel));
    }
  } else {
    const int core = std::get<WavelengthDiversity>(mode).core;
    for (const auto& g : layout.gratings) {
      if (g.core_id == core) picked.push_back(&g);
    }
    if (picked.empty()) throw Error(ErrorKind::CoreNotFound, "no gratings in core " + std::to_string(core));
  }
  std::stable_sort(picked.begin(), picked.end(),
                   [](const GratingSpec* a, const GratingSpec* b) { return a->center() < b->center(); });
  return picked;
}

/// Round-trip delay 2 n_g z_center / c of one grating, in ps from the device input.
inline double grating_delay(const MulticavityLayout& layout, const GratingSpec& g) {
  return units::to_ps(2.0 * layout.fiber.group_index * g.center() / kSpeedOfLight);
}

inline std::vector<double> absolute_tap_delays(const MulticavityLayout& layout, const Diversity& mode) {
  std::vector<double> delays;
  for (const auto* g : select_gratings(layout, mode)) delays.push_back(grating_delay(layout, *g));
  return delays;
}

/// Tap delays in ps, ascending, first tap at 0.
inline std::vector<double> tap_delays(const MulticavityLayout& layout, const Diversity& mode) {
  const auto picked = select_gratings(layout, mode);
  std::vector<double> delays;
  const double origin = picked.front()->center();
  for (const auto* g : picked) {
    delays.push_back(units::to_ps(2.0 * layout.fiber.group_index * (g->center() - origin) / kSpeedOfLight));
  }
  return delays;
}

/// Linear tap amplitudes in the same order as tap_delays.
inline std::vector<double> tap_amplitudes(const MulticavityLayout& layout, const Diversity& mode,
                                          AmplitudeSource source = AmplitudeSource::ReflectivityWeight) {
  const auto picked = select_gratings(layout, mode);
  std::vector<double> amps;
  for (const auto* g : picked) {
    amps.push_back(source == AmplitudeSource::ReflectivityWeight ? g->reflectivity_weight
                                                                 : std::sqrt(peak_reflectivity(*g)));
  }
  if (source == AmplitudeSource::PeakReflectivity) {
    const double top = *std::max_element(amps.begin(), amps.end());
    if (top > 0.0) {
      for (auto& a : amps) a /= top;
    }
  }
  return amps;
}

}  // namespace mcfttd
