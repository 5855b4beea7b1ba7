#pragma once

// Scalar LP01 mode solver for radially layered step-index fibers.
//
// The characteristic equation is built by radial transfer matching of the
// state (F, r dF/dr) across layer interfaces. Oscillatory layers use J0/Y0,
// evanescent layers use I0/K0, and the outer cladding keeps only the decaying
// K0 solution. The unknown is the index excess n_eff - n_clad rather than
// n_eff itself: it is resolved to ~1e-18 absolute, which keeps the
// finite-difference dispersion and slope free of root-finder noise.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcfttd/error.hpp"
#include "mcfttd/units.hpp"

namespace mcfttd {

// ---------------------------------------------------------------------------
// Material
// ---------------------------------------------------------------------------

enum class OffsetRule {
  Multiplicative,  // n = n_base * (1 + delta)
  Additive,        // n = n_base + delta
};

/// Three-term Sellmeier base glass with a relative-index offset rule for
/// doped layers. Coefficients C are in um^2.
struct MaterialModel {
  std::array<double, 3> sellmeier_b{};
  std::array<double, 3> sellmeier_c{};
  OffsetRule offset_rule = OffsetRule::Multiplicative;
  double min_wavelength = units::um(0.5);
  double max_wavelength = units::um(2.0);

  /// Malitson fused silica.
  static MaterialModel fused_silica() {
    return MaterialModel{{0.6961663, 0.4079426, 0.8974794},
                         {0.0684043 * 0.0684043, 0.1162414 * 0.1162414, 9.896161 * 9.896161}};
  }

  void check_wavelength(double wavelength) const {
    if (!(wavelength >= min_wavelength && wavelength <= max_wavelength)) {
      throw Error(ErrorKind::WavelengthOutOfRange,
                  "wavelength " + std::to_string(units::to_nm(wavelength)) + " nm outside [" +
                      std::to_string(units::to_nm(min_wavelength)) + ", " +
                      std::to_string(units::to_nm(max_wavelength)) + "] nm");
    }
  }

  double base_index(double wavelength) const {
    check_wavelength(wavelength);
    const double l2 = std::pow(units::to_um(wavelength), 2);
    double n2 = 1.0;
    for (std::size_t i = 0; i < 3; ++i) n2 += sellmeier_b[i] * l2 / (l2 - sellmeier_c[i]);
    return std::sqrt(n2);
  }

  /// Analytic dn_base/dlambda, per metre.
  double base_index_slope(double wavelength) const {
    const double n = base_index(wavelength);
    const double l = units::to_um(wavelength);
    const double l2 = l * l;
    double dn2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const double den = l2 - sellmeier_c[i];
      dn2 += -2.0 * sellmeier_b[i] * sellmeier_c[i] * l / (den * den);
    }
    return dn2 / (2.0 * n) * 1e6;
  }

  /// n(delta) - n_base, exact for either offset rule.
  double index_offset(double delta, double base) const {
    return offset_rule == OffsetRule::Multiplicative ? base * delta : delta;
  }

  /// Bulk group index n - lambda dn/dlambda of the undoped base.
  double group_index(double wavelength) const {
    return base_index(wavelength) - wavelength * base_index_slope(wavelength);
  }

  /// Bulk material dispersion -(lambda/c) d2n/dlambda2 in ps/(km nm). The
  /// second derivative is a central difference of the analytic slope.
  double material_dispersion(double wavelength, double step = units::nm(0.1)) const {
    const double d2n =
        (base_index_slope(wavelength + step) - base_index_slope(wavelength - step)) / (2.0 * step);
    return -wavelength / kSpeedOfLight * d2n * units::kSecPerMetre2ToDispersion;
  }
};

inline constexpr double kMaxAbsDelta = 0.05;

inline double refractive_index(const MaterialModel& material, double delta, double wavelength) {
  if (!(std::abs(delta) < kMaxAbsDelta)) {
    throw Error(ErrorKind::InvalidArgument, "|delta| must be below 0.05");
  }
  const double base = material.base_index(wavelength);
  return material.offset_rule == OffsetRule::Multiplicative ? base * (1.0 + delta) : base + delta;
}

// ---------------------------------------------------------------------------
// Radial profile
// ---------------------------------------------------------------------------

struct Layer {
  double outer_radius;  // m
  double delta;         // relative index offset against the outer cladding
};

/// Trench geometry around a step core: inner-cladding gap a2, trench width w,
/// trench depth delta2 (applied as -delta2).
struct TrenchSpec {
  double gap;     // m, core edge to trench
  double width;   // m
  double depth;   // dimensionless, >= 0

  friend bool operator==(const TrenchSpec&, const TrenchSpec&) = default;
};

class RadialProfile {
 public:
  /// Layers from the axis outwards. Everything beyond the last outer radius
  /// is outer cladding with delta 0.
  explicit RadialProfile(std::vector<Layer> layers) : layers_(std::move(layers)) { validate(); }

  static RadialProfile step_index(double core_radius, double core_delta) {
    return RadialProfile({{core_radius, core_delta}});
  }

  static RadialProfile trench_assisted(double core_radius, double core_delta,
                                       const TrenchSpec& trench) {
    if (!(trench.depth >= 0.0)) throw Error(ErrorKind::InvalidProfile, "trench depth must be >= 0");
    if (!(trench.gap >= 0.0)) throw Error(ErrorKind::InvalidProfile, "trench gap must be >= 0");
    if (!(trench.width > 0.0)) throw Error(ErrorKind::InvalidProfile, "trench width must be > 0");
    std::vector<Layer> layers{{core_radius, core_delta}};
    if (trench.gap > 0.0) layers.push_back({core_radius + trench.gap, 0.0});
    layers.push_back({core_radius + trench.gap + trench.width, -trench.depth});
    return RadialProfile(std::move(layers));
  }

  std::span<const Layer> layers() const noexcept { return layers_; }
  std::size_t size() const noexcept { return layers_.size(); }
  double core_radius() const noexcept { return layers_.front().outer_radius; }
  double core_delta() const noexcept { return layers_.front().delta; }
  double outer_radius() const noexcept { return layers_.back().outer_radius; }

  double max_delta() const noexcept {
    double m = 0.0;
    for (const auto& l : layers_) m = std::max(m, l.delta);
    return m;
  }

  bool fits_in_cladding(double cladding_radius) const noexcept {
    return outer_radius() < cladding_radius;
  }

 private:
  void validate() const {
    if (layers_.empty()) throw Error(ErrorKind::InvalidProfile, "profile has no layers");
    double prev = 0.0;
    for (const auto& l : layers_) {
      if (!(l.outer_radius > prev)) {
        throw Error(ErrorKind::InvalidProfile, "layer radii must be positive and strictly increasing");
      }
      if (!(std::abs(l.delta) < kMaxAbsDelta)) {
        throw Error(ErrorKind::InvalidProfile, "layer |delta| must be below 0.05");
      }
      prev = l.outer_radius;
    }
  }

  std::vector<Layer> layers_;
};

// ---------------------------------------------------------------------------
// Mode solution
// ---------------------------------------------------------------------------

enum class FieldKind { Oscillatory, Evanescent, Logarithmic };

/// Field in one layer: F(r) = first * P(kr) + second * Q(kr) with (P, Q) =
/// (J0, Y0), (I0, K0) or (1, ln r) depending on kind. The outer cladding
/// entry has first == 0 (K0 only).
struct LayerField {
  FieldKind kind;
  double wavenumber;  // transverse, 1/m
  double first;
  double second;
};

struct ModeSolution {
  double n_eff;
  double wavelength;
  double cladding_index;
  double index_excess;  // n_eff - cladding_index
  std::vector<LayerField> layer_coefficients;  // one per layer plus the outer cladding
  double residual;
};

struct SolverOptions {
  double scan_step = 1e-5;
  double edge_margin = 1e-7;
  int max_iterations = 200;
};

namespace detail {

struct State {
  double value;       // F
  double log_slope;   // r dF/dr
};

// Basis functions and their r d/dr at radius r.
struct Basis {
  double p, rp, q, rq;
};

inline Basis basis_at(FieldKind kind, double k, double r) {
  switch (kind) {
    case FieldKind::Oscillatory: {
      const double x = k * r;
      return {std::cyl_bessel_j(0.0, x), -x * std::cyl_bessel_j(1.0, x),
              std::cyl_neumann(0.0, x), -x * std::cyl_neumann(1.0, x)};
    }
    case FieldKind::Evanescent: {
      const double x = k * r;
      return {std::cyl_bessel_i(0.0, x), x * std::cyl_bessel_i(1.0, x),
              std::cyl_bessel_k(0.0, x), -x * std::cyl_bessel_k(1.0, x)};
    }
    case FieldKind::Logarithmic:
      return {1.0, 0.0, std::log(r), 1.0};
  }
  return {};
}

inline State evaluate(const LayerField& f, double r) {
  const Basis b = basis_at(f.kind, f.wavenumber, r);
  return {f.first * b.p + f.second * b.q, f.first * b.rp + f.second * b.rq};
}

/// Layer field kind and transverse wavenumber for k0^2 (n_i^2 - n_eff^2),
/// expressed through offsets from the cladding index to avoid cancellation.
inline std::pair<FieldKind, double> layer_wave(double k0, double clad, double layer_offset,
                                               double excess, double radius) {
  const double q = k0 * k0 * (layer_offset - excess) * (2.0 * clad + layer_offset + excess);
  if (std::abs(q) * radius * radius < 1e-24) return {FieldKind::Logarithmic, 0.0};
  if (q > 0.0) return {FieldKind::Oscillatory, std::sqrt(q)};
  return {FieldKind::Evanescent, std::sqrt(-q)};
}

class CharacteristicFunction {
 public:
  CharacteristicFunction(const RadialProfile& profile, const MaterialModel& material,
                         double wavelength)
      : profile_(profile),
        k0_(2.0 * kPi / wavelength),
        clad_(material.base_index(wavelength)) {
    offsets_.reserve(profile.size());
    for (const auto& l : profile.layers()) offsets_.push_back(material.index_offset(l.delta, clad_));
  }

  double cladding_index() const noexcept { return clad_; }
  double max_offset() const noexcept { return *std::max_element(offsets_.begin(), offsets_.end()); }

  /// Propagates the regular core solution to the last interface and returns
  /// the per-layer fields (without the outer cladding entry).
  std::vector<LayerField> propagate(double excess) const {
    const auto layers = profile_.layers();
    std::vector<LayerField> fields;
    fields.reserve(layers.size() + 1);
    {
      const double a = layers[0].outer_radius;
      const auto [kind, k] = layer_wave(k0_, clad_, offsets_[0], excess, a);
      fields.push_back({kind, k, 1.0, 0.0});
    }
    for (std::size_t i = 1; i < layers.size(); ++i) {
      const double r_in = layers[i - 1].outer_radius;
      const State s = evaluate(fields.back(), r_in);
      const auto [kind, k] = layer_wave(k0_, clad_, offsets_[i], excess, layers[i].outer_radius);
      const Basis b = basis_at(kind, k, r_in);
      const double det = b.p * b.rq - b.q * b.rp;
      const double first = (s.value * b.rq - b.q * s.log_slope) / det;
      const double second = (b.p * s.log_slope - b.rp * s.value) / det;
      fields.push_back({kind, k, first, second});
    }
    return fields;
  }

  LayerField cladding_field(double excess) const {
    const double q = k0_ * k0_ * excess * (2.0 * clad_ + excess);
    return {FieldKind::Evanescent, std::sqrt(q), 0.0, 1.0};
  }

  /// Sine of the angle between the propagated state and the decaying
  /// cladding state at the outermost interface. Zero at a guided mode.
  double operator()(double excess) const {
    const auto fields = propagate(excess);
    const double b = profile_.outer_radius();
    const State s = evaluate(fields.back(), b);
    const Basis c = basis_at(FieldKind::Evanescent, cladding_field(excess).wavenumber, b);
    const double cross = s.value * c.rq - s.log_slope * c.q;
    return cross / (std::hypot(s.value, s.log_slope) * std::hypot(c.q, c.rq));
  }

 private:
  const RadialProfile& profile_;
  double k0_;
  double clad_;
  std::vector<double> offsets_;
};

/// Brent's method on a sign-changing bracket, iterated to machine precision.
template <class F>
double brent_root(F&& f, double a, double b, double fa, double fb, int max_iterations) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < max_iterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 1e-300;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  throw Error(ErrorKind::ConvergenceFailure, "bracket refinement did not converge");
}

}  // namespace detail

/// Fundamental (largest n_eff) LP01 root of the layered characteristic
/// equation.
inline ModeSolution solve_lp01(const RadialProfile& profile, const MaterialModel& material,
                               double wavelength, const SolverOptions& options = {}) {
  const detail::CharacteristicFunction chi(profile, material, wavelength);
  const double top = chi.max_offset() - options.edge_margin;
  const double bottom = options.edge_margin;
  if (!(top > bottom)) {
    throw Error(ErrorKind::NoGuidedMode, "no index contrast above the cladding");
  }

  // Scan downwards from the highest admissible index: the first sign change
  // brackets the fundamental mode.
  double hi = top;
  double f_hi = chi(hi);
  std::optional<std::pair<double, double>> bracket;
  double f_lo = 0.0;
  for (long k = 1;; ++k) {
    const double lo = std::max(top - static_cast<double>(k) * options.scan_step, bottom);
    f_lo = chi(lo);
    if (f_hi == 0.0 || (f_lo > 0.0) != (f_hi > 0.0) || f_lo == 0.0) {
      bracket = {lo, hi};
      break;
    }
    if (lo <= bottom) break;
    hi = lo;
    f_hi = f_lo;
  }
  if (!bracket) throw Error(ErrorKind::NoGuidedMode, "no characteristic root in the guided bracket");

  const double excess = detail::brent_root(chi, bracket->first, bracket->second, f_lo, f_hi,
                                           options.max_iterations);

  ModeSolution sol;
  sol.wavelength = wavelength;
  sol.cladding_index = chi.cladding_index();
  sol.index_excess = excess;
  sol.n_eff = sol.cladding_index + excess;
  sol.residual = chi(excess);

  // Outer cladding amplitude matches F at the last interface.
  sol.layer_coefficients = chi.propagate(excess);
  auto clad = chi.cladding_field(excess);
  const double b = profile.outer_radius();
  clad.second = detail::evaluate(sol.layer_coefficients.back(), b).value /
                detail::basis_at(FieldKind::Evanescent, clad.wavenumber, b).q;
  sol.layer_coefficients.push_back(clad);
  return sol;
}

/// Largest relative mismatch of (F, r dF/dr) across all interfaces, including
/// the outer-cladding interface.
inline double interface_mismatch(const RadialProfile& profile, const ModeSolution& sol) {
  const auto layers = profile.layers();
  double worst = 0.0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const double r = layers[i].outer_radius;
    const auto inner = detail::evaluate(sol.layer_coefficients[i], r);
    const auto outer = detail::evaluate(sol.layer_coefficients[i + 1], r);
    const double scale = std::hypot(inner.value, inner.log_slope);
    worst = std::max(worst, std::hypot(inner.value - outer.value, inner.log_slope - outer.log_slope) /
                                scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Group delay and dispersion
// ---------------------------------------------------------------------------

struct StencilOptions {
  double step = units::nm(0.1);
};

namespace stencil {

inline double first_derivative(double minus, double plus, double h) { return (plus - minus) / (2.0 * h); }

inline double second_derivative(double m2, double m1, double c, double p1, double p2, double h) {
  return (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
}

}  // namespace stencil

/// tau_g = (n_eff - lambda dn_eff/dlambda) / c, reported per km.
inline double group_delay_ps_per_km(double n_eff, double dn_dlambda, double wavelength) {
  return (n_eff - wavelength * dn_dlambda) / kSpeedOfLight * units::kSecPerMetreToPsPerKm;
}

struct DispersionParams {
  double dispersion;  // ps/(km nm)
  double slope;       // ps/(km nm^2)
};

/// Everything derived from one 7-point stencil of mode solves around lambda.
struct ModeAnalysis {
  double wavelength;
  double n_eff;
  double group_index;
  double group_delay;  // ps/km
  double dispersion;   // ps/(km nm)
  double slope;        // ps/(km nm^2)
};

namespace detail {

inline void check_stencil(const MaterialModel& material, double wavelength, double step, int reach) {
  if (!(step > 0.0)) throw Error(ErrorKind::StencilOutOfRange, "stencil step must be positive");
  const double lo = wavelength - reach * step;
  const double hi = wavelength + reach * step;
  if (lo < material.min_wavelength || hi > material.max_wavelength) {
    throw Error(ErrorKind::StencilOutOfRange, "stencil leaves the material wavelength range");
  }
}

// n_eff slope at sample i from excess samples at i-1, i+1 plus the analytic
// cladding slope.
struct ExcessSamples {
  const RadialProfile& profile;
  const MaterialModel& material;
  double center;
  double step;
  std::vector<double> excess;  // indices -reach..reach
  int reach;

  ExcessSamples(const RadialProfile& p, const MaterialModel& m, double lambda, double h, int r,
                const SolverOptions& opts)
      : profile(p), material(m), center(lambda), step(h), reach(r) {
    excess.reserve(2 * r + 1);
    for (int k = -r; k <= r; ++k) excess.push_back(solve_lp01(p, m, lambda + k * h, opts).index_excess);
  }

  double at(int k) const { return excess[static_cast<std::size_t>(k + reach)]; }

  double group_delay(int k) const {
    const double lambda = center + k * step;
    const double n = material.base_index(lambda) + at(k);
    const double dn = material.base_index_slope(lambda) + stencil::first_derivative(at(k - 1), at(k + 1), step);
    return group_delay_ps_per_km(n, dn, lambda);
  }
};

}  // namespace detail

inline double group_delay_per_km(const RadialProfile& profile, const MaterialModel& material,
                                 double wavelength, const StencilOptions& st = {},
                                 const SolverOptions& opts = {}) {
  detail::check_stencil(material, wavelength, st.step, 1);
  const detail::ExcessSamples s(profile, material, wavelength, st.step, 1, opts);
  return s.group_delay(0);
}

inline ModeAnalysis analyze_mode(const RadialProfile& profile, const MaterialModel& material,
                                 double wavelength, const StencilOptions& st = {},
                                 const SolverOptions& opts = {}) {
  detail::check_stencil(material, wavelength, st.step, 3);
  const detail::ExcessSamples s(profile, material, wavelength, st.step, 3, opts);
  std::array<double, 5> tau{};
  for (int k = -2; k <= 2; ++k) tau[static_cast<std::size_t>(k + 2)] = s.group_delay(k);
  // tau is ps/km; dividing by a step in nm gives ps/(km nm).
  const double h_nm = units::to_nm(st.step);
  ModeAnalysis a;
  a.wavelength = wavelength;
  a.n_eff = material.base_index(wavelength) + s.at(0);
  a.group_delay = tau[2];
  a.group_index = tau[2] / units::kSecPerMetreToPsPerKm * kSpeedOfLight;
  a.dispersion = stencil::first_derivative(tau[1], tau[3], h_nm);
  a.slope = stencil::second_derivative(tau[0], tau[1], tau[2], tau[3], tau[4], h_nm);
  return a;
}

inline DispersionParams dispersion_params(const RadialProfile& profile, const MaterialModel& material,
                                          double wavelength, const StencilOptions& st = {},
                                          const SolverOptions& opts = {}) {
  const auto a = analyze_mode(profile, material, wavelength, st, opts);
  return {a.dispersion, a.slope};
}

}  // namespace mcfttd
