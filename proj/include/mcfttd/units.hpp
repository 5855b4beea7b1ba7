#pragma once

// Internal quantities are SI (m, s, Hz). Reported quantities follow fiber
// conventions: ps/km for group delay, ps/(km nm) for dispersion, ps/(km nm^2)
// for slope, GHz for RF frequency.

namespace mcfttd {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

namespace units {

constexpr double nm(double v) { return v * 1e-9; }
constexpr double um(double v) { return v * 1e-6; }
constexpr double mm(double v) { return v * 1e-3; }
constexpr double to_nm(double metres) { return metres * 1e9; }
constexpr double to_um(double metres) { return metres * 1e6; }
constexpr double to_mm(double metres) { return metres * 1e3; }

// s/m -> ps/km
inline constexpr double kSecPerMetreToPsPerKm = 1e12 * 1e3;
// s/m^2 -> ps/(km nm)
inline constexpr double kSecPerMetre2ToDispersion = 1e12 * 1e3 * 1e-9;
// s/m^3 -> ps/(km nm^2)
inline constexpr double kSecPerMetre3ToSlope = 1e12 * 1e3 * 1e-18;

constexpr double ps(double v) { return v * 1e-12; }
constexpr double to_ps(double seconds) { return seconds * 1e12; }
constexpr double ghz(double v) { return v * 1e9; }
constexpr double to_ghz(double hertz) { return hertz * 1e-9; }

}  // namespace units
}  // namespace mcfttd
