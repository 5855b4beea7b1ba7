#pragma once

// DesignReport: JSON document written by `analyze` and `design`, readable
// back by `analyze` (re-analysis) and by hetero tap sources.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "mcfttd/cli/config.hpp"
#include "mcfttd/hetero_design.hpp"
#include "mcfttd/version.hpp"

namespace mcfttd::cli {

inline constexpr double kReportDispersionTolerance = 0.05;  // ps/(km nm)
inline constexpr double kReportDelaySpreadTolerance = 0.2;  // ps/km

inline Json design_options_json(const HeteroDesignOptions& o) {
  Json j;
  j["n_cores"] = o.n_cores;
  j["d_start_ps_per_km_nm"] = o.d_start;
  j["delta_d_ps_per_km_nm"] = o.delta_d;
  j["lambda0_nm"] = units::to_nm(o.lambda0);
  j["pitch_um"] = units::to_um(o.pitch);
  j["cladding_diameter_um"] = units::to_um(o.cladding_diameter);
  j["anchor_delta1_percent"] = o.anchor_core_delta * 100.0;
  j["delta_neff_floor"] = o.delta_neff_floor;
  j["stencil_step_nm"] = units::to_nm(o.design.stencil.step);
  j["trench_menu"] = Json::array();
  for (const auto& t : o.trench_menu) {
    j["trench_menu"].push_back(
        {{"a2_um", units::to_um(t.gap)}, {"w_um", units::to_um(t.width)}, {"delta2_percent", t.depth * 100.0}});
  }
  return j;
}

struct ReportContext {
  std::string command;
  double lambda0 = 0.0;
  double stencil_step = 0.0;
  double pitch = units::um(35);
  double cladding_diameter = units::um(125);
  std::optional<double> delta_d_target;  // design only
  std::optional<double> d_start;         // design only
  Json config_echo;
  std::vector<std::string> warnings;
};

/// Returns the report; `all_checks_pass` is false when a design tolerance
/// flag failed.
inline Json build_report(const std::vector<CoreDesign>& cores, const ReportContext& ctx, bool& all_checks_pass) {
  Json rep;
  rep["schema_version"] = kSchemaVersion;
  rep["kind"] = "report";
  rep["command"] = ctx.command;
  rep["toolkit_version"] = std::string(kVersion);
  rep["lambda0_nm"] = units::to_nm(ctx.lambda0);
  rep["stencil_step_nm"] = units::to_nm(ctx.stencil_step);
  rep["pitch_um"] = units::to_um(ctx.pitch);
  rep["cladding_diameter_um"] = units::to_um(ctx.cladding_diameter);
  if (ctx.delta_d_target) rep["delta_d_target_ps_per_km_nm"] = *ctx.delta_d_target;

  all_checks_pass = true;
  bool d_ok = true;
  rep["cores"] = Json::array();
  for (std::size_t i = 0; i < cores.size(); ++i) {
    const auto& c = cores[i];
    Json e;
    e["index"] = c.index;
    e["profile"] = profile_json(c);
    e["n_eff"] = c.n_eff0;
    e["tau_g0_ps_per_km"] = c.tau_g0;
    e["d_ps_per_km_nm"] = c.dispersion;
    e["s_ps_per_km_nm2"] = c.slope;
    if (ctx.d_start && ctx.delta_d_target) {
      const double target = *ctx.d_start + static_cast<double>(i) * *ctx.delta_d_target;
      const bool ok = std::abs(c.dispersion - target) < kReportDispersionTolerance;
      e["d_target_ps_per_km_nm"] = target;
      e["d_within_tolerance"] = ok;
      d_ok = d_ok && ok;
    }
    rep["cores"].push_back(e);
  }

  double spread = 0.0, max_ds = 0.0;
  Json dn = Json::array(), rpk = Json::array();
  std::optional<double> worst_rpk;
  for (std::size_t i = 0; i < cores.size(); ++i) {
    spread = std::max(spread, std::abs(cores[i].tau_g0 - cores.front().tau_g0));
    if (i == 0) continue;
    const double d = std::abs(cores[i].n_eff0 - cores[i - 1].n_eff0);
    max_ds = std::max(max_ds, std::abs(cores[i].slope - cores[i - 1].slope));
    dn.push_back(d);
    try {
      const double r = bend_threshold_radius(cores[i - 1].n_eff0, d, ctx.pitch);
      rpk.push_back(units::to_mm(r));
      worst_rpk = std::max(worst_rpk.value_or(0.0), r);
    } catch (const Error&) {
      rpk.push_back(nullptr);
    }
  }
  rep["adjacent_delta_neff"] = dn;
  rep["bend_threshold_radius_mm"] = rpk;
  rep["r_pk_mm"] = worst_rpk ? Json(units::to_mm(*worst_rpk)) : Json(nullptr);
  rep["tau_g0_spread_ps_per_km"] = spread;
  rep["delta_s_max_ps_per_km_nm2"] = max_ds;

  Json checks = Json::object();
  if (ctx.delta_d_target) {
    const bool tau_ok = spread < kReportDelaySpreadTolerance;
    checks["dispersion_targets"] = d_ok;
    checks["common_group_delay"] = tau_ok;
    all_checks_pass = d_ok && tau_ok;
  }
  rep["checks"] = checks;
  rep["warnings"] = ctx.warnings;
  rep["config"] = ctx.config_echo;
  return rep;
}

/// Rebuilds the fiber stored in a design report without re-solving.
inline HeteroMCF hetero_from_report(const Json& rep) {
  try {
    HeteroMCF mcf;
    require(rep.is_object() && rep.value("kind", "") == "report", "design report: not a report document");
    mcf.lambda0 = units::nm(rep.at("lambda0_nm").get<double>());
    mcf.pitch = units::um(rep.at("pitch_um").get<double>());
    mcf.cladding_diameter = units::um(rep.at("cladding_diameter_um").get<double>());
    mcf.delta_d_target = rep.value("delta_d_target_ps_per_km_nm", 0.0);
    for (const auto& c : rep.at("cores")) {
      const auto p = parse_profile(c.at("profile"), "design report profile");
      mcf.cores.push_back(CoreDesign{c.at("index").get<int>(), p.profile(), p.trench, mcf.lambda0,
                                     c.at("n_eff").get<double>(), c.at("tau_g0_ps_per_km").get<double>(),
                                     c.at("d_ps_per_km_nm").get<double>(), c.at("s_ps_per_km_nm2").get<double>()});
    }
    require(!mcf.cores.empty(), "design report: no cores");
    return mcf;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("design report: ") + e.what());
  }
}

}  // namespace mcfttd::cli
