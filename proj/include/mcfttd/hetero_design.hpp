#pragma once

// Heterogeneous multicore fiber as a group-index-variable true time delay
// line: per-core dispersion targets D_n = D_1 + (n-1) dD sharing one group
// delay at the anchor wavelength, quadratic Taylor delay model, and the
// phase-matching bend threshold between adjacent cores.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mcfttd/error.hpp"
#include "mcfttd/units.hpp"
#include "mcfttd/waveguide.hpp"

namespace mcfttd {

struct CoreDesign {
  int index = 1;  // 1-based core number
  RadialProfile profile;
  std::optional<TrenchSpec> trench;
  double lambda0 = units::nm(1550);
  double n_eff0 = 0.0;
  double tau_g0 = 0.0;      // ps/km
  double dispersion = 0.0;  // ps/(km nm)
  double slope = 0.0;       // ps/(km nm^2)

  double core_radius() const noexcept { return profile.core_radius(); }
  double core_delta() const noexcept { return profile.core_delta(); }
};

/// Builds a CoreDesign by analyzing a profile at lambda0.
inline CoreDesign analyze_core(int index, RadialProfile profile, std::optional<TrenchSpec> trench,
                               double lambda0, const MaterialModel& material,
                               const StencilOptions& st = {}, const SolverOptions& so = {}) {
  const auto a = analyze_mode(profile, material, lambda0, st, so);
  return CoreDesign{index, std::move(profile), trench, lambda0, a.n_eff, a.group_delay, a.dispersion, a.slope};
}

inline RadialProfile make_profile(double core_radius, double core_delta,
                                  const std::optional<TrenchSpec>& trench) {
  return trench ? RadialProfile::trench_assisted(core_radius, core_delta, *trench)
                : RadialProfile::step_index(core_radius, core_delta);
}

// ---------------------------------------------------------------------------
// Taylor delay model
// ---------------------------------------------------------------------------

struct TaylorOptions {
  double validity_band = units::nm(30);
};

namespace detail {

inline double detuning_nm(double lambda0, double wavelength, const TaylorOptions& opt) {
  const double dl = wavelength - lambda0;
  if (std::abs(dl) > opt.validity_band * (1.0 + 1e-12)) {
    throw Error(ErrorKind::OutsideValidityBand,
                "|lambda - lambda0| = " + std::to_string(units::to_nm(std::abs(dl))) +
                    " nm exceeds the Taylor validity band");
  }
  return units::to_nm(dl);
}

}  // namespace detail

/// L [tau_g(lambda0) + D (lambda - lambda0) + S/2 (lambda - lambda0)^2], in ps.
inline double taylor_group_delay(const CoreDesign& core, double wavelength, double length_km,
                                 const TaylorOptions& opt = {}) {
  const double x = detail::detuning_nm(core.lambda0, wavelength, opt);
  return length_km * (core.tau_g0 + core.dispersion * x + 0.5 * core.slope * x * x);
}

/// L [dD (lambda_m - lambda0) + dS/2 (lambda_m - lambda0)^2], in ps, for
/// adjacent cores n and n+1.
inline double differential_delay(const CoreDesign& core_n, const CoreDesign& core_n1, double wavelength,
                                 double length_km, const TaylorOptions& opt = {}) {
  if (core_n1.index != core_n.index + 1) {
    throw Error(ErrorKind::InvalidArgument, "differential delay needs adjacent cores n, n+1");
  }
  if (core_n.lambda0 != core_n1.lambda0) {
    throw Error(ErrorKind::InvalidArgument, "cores anchored at different wavelengths");
  }
  const double x = detail::detuning_nm(core_n.lambda0, wavelength, opt);
  const double dd = core_n1.dispersion - core_n.dispersion;
  const double ds = core_n1.slope - core_n.slope;
  return length_km * (dd * x + 0.5 * ds * x * x);
}

// ---------------------------------------------------------------------------
// Fiber
// ---------------------------------------------------------------------------

struct HeteroMCF {
  std::vector<CoreDesign> cores;
  double pitch = units::um(35);
  double cladding_diameter = units::um(125);
  double lambda0 = units::nm(1550);
  double delta_d_target = 1.0;  // ps/(km nm)

  /// |n_eff,n+1 - n_eff,n| for every adjacent pair.
  std::vector<double> adjacent_delta_neff() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < cores.size(); ++i) out.push_back(std::abs(cores[i].n_eff0 - cores[i - 1].n_eff0));
    return out;
  }

  /// max_n |tau_g,n - tau_g,1| in ps/km.
  double tau_spread() const {
    double worst = 0.0;
    for (const auto& c : cores) worst = std::max(worst, std::abs(c.tau_g0 - cores.front().tau_g0));
    return worst;
  }

  /// max_n |D_n+1 - D_n - dD|.
  double dispersion_step_error() const {
    double worst = 0.0;
    for (std::size_t i = 1; i < cores.size(); ++i) {
      worst = std::max(worst, std::abs(cores[i].dispersion - cores[i - 1].dispersion - delta_d_target));
    }
    return worst;
  }
};

struct LinkDelayProfile {
  double length_km = 0.0;
  double wavelength = 0.0;
  std::vector<double> delays;        // ps, per core
  std::vector<double> differential;  // ps, adjacent pairs
  double uniformity = 0.0;           // max |differential - mean| in ps
};

inline LinkDelayProfile link_delays(const HeteroMCF& mcf, double wavelength, double length_km,
                                    const TaylorOptions& opt = {}) {
  LinkDelayProfile out{length_km, wavelength, {}, {}, 0.0};
  for (const auto& c : mcf.cores) out.delays.push_back(taylor_group_delay(c, wavelength, length_km, opt));
  for (std::size_t i = 1; i < mcf.cores.size(); ++i) {
    out.differential.push_back(differential_delay(mcf.cores[i - 1], mcf.cores[i], wavelength, length_km, opt));
  }
  if (!out.differential.empty()) {
    double mean = 0.0;
    for (double d : out.differential) mean += d;
    mean /= static_cast<double>(out.differential.size());
    for (double d : out.differential) out.uniformity = std::max(out.uniformity, std::abs(d - mean));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Core design
// ---------------------------------------------------------------------------

struct DesignOptions {
  MaterialModel material = MaterialModel::fused_silica();
  StencilOptions stencil{};
  SolverOptions solver{};
  double min_core_radius = units::um(2.5);
  double max_core_radius = units::um(6.0);
  double min_core_delta = 0.002;
  double max_core_delta = 0.008;
  // Core delta used when only the dispersion is targeted.
  double fixed_core_delta = 0.0036;
  // Acceptance tolerances on the closed-loop result.
  double dispersion_tolerance = 0.05;  // ps/(km nm)
  double delay_tolerance = 0.1;        // ps/km
  // Newton stops once both residuals are below these.
  double dispersion_convergence = 1e-4;
  double delay_convergence = 1e-3;
  int max_iterations = 40;
  std::optional<double> initial_core_radius;
  std::optional<double> initial_core_delta;
};

namespace detail {

struct DesignPoint {
  double radius;
  double delta;
  ModeAnalysis analysis;
};

inline std::optional<ModeAnalysis> try_analyze(double radius, double delta,
                                               const std::optional<TrenchSpec>& trench,
                                               double lambda0, const DesignOptions& opt) {
  try {
    return analyze_mode(make_profile(radius, delta, trench), opt.material, lambda0, opt.stencil, opt.solver);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NoGuidedMode || e.kind() == ErrorKind::ConvergenceFailure ||
        e.kind() == ErrorKind::InvalidProfile) {
      return std::nullopt;
    }
    throw;
  }
}

}  // namespace detail

/// Finds (a1, delta1) so the core reaches d_target and, when given,
/// tau_g_target. Without a delay target only a1 moves, at
/// options.fixed_core_delta. Damped Newton with finite-difference Jacobian in
/// (um, %) coordinates.
inline CoreDesign design_core(double d_target, std::optional<double> tau_g_target,
                              const std::optional<TrenchSpec>& trench, double lambda0,
                              const DesignOptions& opt = {}, int index = 1) {
  if (!(d_target >= 10.0 && d_target <= 25.0)) {
    throw Error(ErrorKind::InvalidArgument, "dispersion target must lie in [10, 25] ps/(km nm)");
  }
  const bool two_d = tau_g_target.has_value();
  const double a_lo = units::to_um(opt.min_core_radius), a_hi = units::to_um(opt.max_core_radius);
  const double d_lo = opt.min_core_delta * 100.0, d_hi = opt.max_core_delta * 100.0;

  double a = units::to_um(opt.initial_core_radius.value_or(units::um(4.0)));
  double d = 100.0 * (two_d ? opt.initial_core_delta.value_or(0.005) : opt.fixed_core_delta);
  a = std::clamp(a, a_lo, a_hi);
  if (!two_d && (d < d_lo || d > d_hi)) {
    throw Error(ErrorKind::NoSolutionInBox, "fixed core delta outside the search box");
  }
  d = std::clamp(d, d_lo, d_hi);

  auto eval = [&](double au, double dp) {
    return detail::try_analyze(units::um(au), dp / 100.0, trench, lambda0, opt);
  };
  // Residuals scaled by their tolerances so both axes weigh alike.
  auto residual = [&](const ModeAnalysis& m) {
    const double rd = (m.dispersion - d_target) / opt.dispersion_tolerance;
    const double rt = two_d ? (m.group_delay - *tau_g_target) / opt.delay_tolerance : 0.0;
    return std::pair{rd, rt};
  };
  auto merit = [&](const ModeAnalysis& m) {
    const auto [rd, rt] = residual(m);
    return rd * rd + rt * rt;
  };

  auto current = eval(a, d);
  if (!current) {
    // Start from the strongest guiding corner of the box.
    a = a_hi;
    if (two_d) d = d_hi;
    current = eval(a, d);
    if (!current) throw Error(ErrorKind::NoSolutionInBox, "no guided mode at the initial design point");
  }

  constexpr double kRadiusStep = 0.005;  // um
  constexpr double kDeltaStep = 0.001;   // %
  bool pinned = false;
  bool stalled = false;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    const ModeAnalysis& m = *current;
    const double rd = m.dispersion - d_target;
    const double rt = two_d ? m.group_delay - *tau_g_target : 0.0;
    if (std::abs(rd) < opt.dispersion_convergence && std::abs(rt) < opt.delay_convergence) break;

    const auto ma = eval(a + kRadiusStep, d);
    if (!ma) throw Error(ErrorKind::SolverDivergence, "lost the guided mode while building the Jacobian");
    const double dD_da = (ma->dispersion - m.dispersion) / kRadiusStep;
    double step_a = 0.0, step_d = 0.0;
    if (two_d) {
      const auto md = eval(a, d + kDeltaStep);
      if (!md) throw Error(ErrorKind::SolverDivergence, "lost the guided mode while building the Jacobian");
      const double dD_dd = (md->dispersion - m.dispersion) / kDeltaStep;
      const double dT_da = (ma->group_delay - m.group_delay) / kRadiusStep;
      const double dT_dd = (md->group_delay - m.group_delay) / kDeltaStep;
      const double det = dD_da * dT_dd - dD_dd * dT_da;
      if (det == 0.0 || !std::isfinite(det)) throw Error(ErrorKind::SolverDivergence, "singular design Jacobian");
      step_a = -(rd * dT_dd - dD_dd * rt) / det;
      step_d = -(dD_da * rt - dT_da * rd) / det;
    } else {
      if (dD_da == 0.0) throw Error(ErrorKind::SolverDivergence, "dispersion insensitive to core radius");
      step_a = -rd / dD_da;
    }
    // Trust region: at most 0.5 um in radius and 0.1 % in delta per step.
    const double scale = std::min({1.0, 0.5 / std::max(std::abs(step_a), 1e-300),
                                   0.1 / std::max(std::abs(step_d), 1e-300)});
    step_a *= scale;
    step_d *= scale;

    const double m0 = merit(m);
    bool accepted = false;
    for (int halving = 0; halving < 12; ++halving) {
      const double ta = std::clamp(a + step_a, a_lo, a_hi);
      const double td = std::clamp(d + step_d, d_lo, d_hi);
      auto trial = eval(ta, td);
      if (trial && merit(*trial) < m0) {
        pinned = (ta == a_lo || ta == a_hi || (two_d && (td == d_lo || td == d_hi)));
        a = ta;
        d = td;
        current = std::move(trial);
        accepted = true;
        break;
      }
      step_a *= 0.5;
      step_d *= 0.5;
    }
    if (!accepted) {
      stalled = true;  // no descent direction; judged against the tolerances below
      break;
    }
  }

  const auto [rd, rt] = residual(*current);
  if (std::abs(rd) >= 1.0 || std::abs(rt) >= 1.0) {
    if (pinned || stalled) {
      throw Error(ErrorKind::NoSolutionInBox, "design targets not reachable inside the search box");
    }
    throw Error(ErrorKind::SolverDivergence, "design iteration did not reach the target tolerances");
  }
  return CoreDesign{index,           make_profile(units::um(a), d / 100.0, trench),
                    trench,          lambda0,
                    current->n_eff,  current->group_delay,
                    current->dispersion, current->slope};
}

// ---------------------------------------------------------------------------
// Fiber design
// ---------------------------------------------------------------------------

struct HeteroDesignOptions {
  int n_cores = 7;
  double d_start = 14.75;  // ps/(km nm)
  double delta_d = 1.0;    // ps/(km nm)
  double lambda0 = units::nm(1550);
  double pitch = units::um(35);
  double cladding_diameter = units::um(125);
  // Trench candidates, tried in order for every core.
  std::vector<TrenchSpec> trench_menu{{units::um(6), units::um(3), 0.01},
                                      {units::um(8), units::um(4), 0.01},
                                      {units::um(4), units::um(4), 0.01}};
  double anchor_core_delta = 0.005;  // core 1 delta; fixes the common group delay
  double delta_neff_floor = 1e-4;    // waived when delta_d == 0
  DesignOptions design{};
};

inline HeteroMCF design_hetero_mcf(const HeteroDesignOptions& opt = {}) {
  if (opt.n_cores < 1) throw Error(ErrorKind::InvalidArgument, "n_cores must be >= 1");
  if (opt.trench_menu.empty()) throw Error(ErrorKind::InvalidArgument, "trench menu is empty");

  HeteroMCF mcf;
  mcf.pitch = opt.pitch;
  mcf.cladding_diameter = opt.cladding_diameter;
  mcf.lambda0 = opt.lambda0;
  mcf.delta_d_target = opt.delta_d;
  const double clad_radius = 0.5 * opt.cladding_diameter;

  std::string last_failure;
  auto fits = [&](const CoreDesign& c) { return c.profile.fits_in_cladding(clad_radius); };

  {
    DesignOptions first = opt.design;
    first.fixed_core_delta = opt.anchor_core_delta;
    for (const auto& trench : opt.trench_menu) {
      try {
        auto c = design_core(opt.d_start, std::nullopt, trench, opt.lambda0, first, 1);
        if (!fits(c)) {
          last_failure = "profile exceeds the cladding radius";
          continue;
        }
        mcf.cores.push_back(std::move(c));
        break;
      } catch (const Error& e) {
        last_failure = e.what();
      }
    }
    if (mcf.cores.empty()) throw Error(ErrorKind::DesignInfeasible, "core 1: " + last_failure);
  }

  const double tau_anchor = mcf.cores.front().tau_g0;
  for (int n = 2; n <= opt.n_cores; ++n) {
    const CoreDesign& prev = mcf.cores.back();
    const double target = opt.d_start + (n - 1) * opt.delta_d;
    DesignOptions o = opt.design;
    o.initial_core_radius = prev.core_radius();
    o.initial_core_delta = prev.core_delta();
    bool placed = false;
    for (const auto& trench : opt.trench_menu) {
      try {
        auto c = design_core(target, tau_anchor, trench, opt.lambda0, o, n);
        if (!fits(c)) {
          last_failure = "profile exceeds the cladding radius";
          continue;
        }
        const double dn = std::abs(c.n_eff0 - prev.n_eff0);
        if (opt.delta_d != 0.0 && dn < opt.delta_neff_floor) {
          last_failure = "adjacent delta n_eff " + std::to_string(dn) + " below floor";
          continue;
        }
        mcf.cores.push_back(std::move(c));
        placed = true;
        break;
      } catch (const Error& e) {
        last_failure = e.what();
      }
    }
    if (!placed) throw Error(ErrorKind::DesignInfeasible, "core " + std::to_string(n) + ": " + last_failure);
  }
  return mcf;
}

// ---------------------------------------------------------------------------
// Bend threshold
// ---------------------------------------------------------------------------

/// Phase-matching threshold radius R_pk = pitch n_eff / delta_n_eff.
inline double bend_threshold_radius(double n_eff_ref, double delta_n_eff, double pitch) {
  if (!(delta_n_eff > 0.0)) {
    throw Error(ErrorKind::DegenerateCores, "identical adjacent cores have no finite phase-matching radius");
  }
  if (!(pitch > 0.0) || !(n_eff_ref > 0.0)) throw Error(ErrorKind::InvalidArgument, "pitch and n_eff must be positive");
  return pitch * n_eff_ref / delta_n_eff;
}

}  // namespace mcfttd
