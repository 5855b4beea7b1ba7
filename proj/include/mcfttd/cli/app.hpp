#pragma once

// Command-line front end. run() is the whole program; tools/mcfttd.cpp only
// forwards argv. Exit codes: 0 success, 1 computation or constraint failure,
// 2 usage/config/schema error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcfttd/cli/config.hpp"
#include "mcfttd/cli/report.hpp"
#include "mcfttd/fbg_device.hpp"
#include "mcfttd/hetero_design.hpp"
#include "mcfttd/mwp_filter.hpp"
#include "mcfttd/version.hpp"
#include "mcfttd/waveguide.hpp"

namespace mcfttd::cli {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct CommonFlags {
  std::string config;
  std::string output;
  std::string format;
  bool paper_layout = false;
  std::optional<double> lambda_nm;
  std::optional<double> length_km;
  std::optional<std::string> diversity;
  std::optional<int> core;
  std::optional<int> channel;
};

/// Where a command's primary output goes, plus the stream for the
/// human-readable side channel.
struct Sinks {
  std::ostream& out;
  std::ostream& err;
  const CommonFlags& flags;

  void emit(const std::string& payload) const {
    if (flags.output.empty()) {
      out << payload;
      return;
    }
    std::ofstream f(flags.output, std::ios::binary);
    if (!f) throw ConfigError("cannot write output '" + flags.output + "'");
    f << payload;
  }

  // Side messages share stdout only when the payload went to a file.
  std::ostream& info() const { return flags.output.empty() ? err : out; }
};

namespace detail {

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline Json config_or_empty(const CommonFlags& f) {
  if (f.config.empty() == !f.paper_layout) {
    throw ConfigError("exactly one of --config or --paper-layout is required");
  }
  return f.config.empty() ? Json() : load_json_file(f.config);
}

inline void reject_fbg_flags(const CommonFlags& f) {
  if (f.diversity || f.core || f.channel) throw ConfigError("--diversity/--core/--channel apply to fbg sources only");
}

inline void reject_hetero_flags(const CommonFlags& f) {
  if (f.lambda_nm || f.length_km) throw ConfigError("--lambda-nm/--length-km apply to hetero sources only");
}

inline void apply_fbg_flags(FbgSource& s, const CommonFlags& f) {
  if (f.diversity) {
    if (*f.diversity == "wavelength") {
      s.diversity = WavelengthDiversity{f.core.value_or(6)};
    } else if (*f.diversity == "spatial") {
      s.diversity = SpatialDiversity{f.channel.value_or(1)};
    } else {
      throw ConfigError("--diversity must be 'spatial' or 'wavelength'");
    }
  }
  if (f.core) {
    auto* w = std::get_if<WavelengthDiversity>(&s.diversity);
    if (!w) throw ConfigError("--core needs wavelength diversity");
    w->core = *f.core;
  }
  if (f.channel) {
    auto* sp = std::get_if<SpatialDiversity>(&s.diversity);
    if (!sp) throw ConfigError("--channel needs spatial diversity");
    sp->channel = *f.channel;
  }
}

inline void apply_flags(TapSource& src, const CommonFlags& f) {
  if (auto* h = std::get_if<HeteroSource>(&src)) {
    reject_fbg_flags(f);
    if (f.lambda_nm) h->lambda_nm = *f.lambda_nm;
    if (f.length_km) h->length_km = *f.length_km;
  } else if (auto* b = std::get_if<FbgSource>(&src)) {
    reject_hetero_flags(f);
    apply_fbg_flags(*b, f);
  } else {
    reject_fbg_flags(f);
    reject_hetero_flags(f);
  }
}

/// --paper-layout source: the canonical FBG device when a diversity flag is
/// present, otherwise the default heterogeneous fiber.
inline TapSource paper_source(const CommonFlags& f) {
  if (f.diversity || f.core || f.channel) {
    FbgSource s;
    if (!f.diversity) s.diversity = f.channel ? Diversity{SpatialDiversity{1}} : Diversity{WavelengthDiversity{6}};
    apply_fbg_flags(s, f);
    reject_hetero_flags(f);
    return s;
  }
  HeteroSource h;
  if (f.lambda_nm) h.lambda_nm = *f.lambda_nm;
  if (f.length_km) h.length_km = *f.length_km;
  return h;
}

inline HeteroMCF resolve_fiber(const HeteroSource& s, std::ostream& info) {
  if (s.design_report) return hetero_from_report(load_json_file(*s.design_report));
  info << "designing heterogeneous fiber (" << s.design.n_cores << " cores)\n";
  return design_hetero_mcf(s.design);
}

inline TapSet hetero_taps(const HeteroMCF& mcf, double lambda_nm, double length_km) {
  const auto link = link_delays(mcf, units::nm(lambda_nm), length_km);
  return TapSet::from_unsorted(link.delays, std::vector<double>(link.delays.size(), 1.0));
}

inline TapSet fbg_taps(const FbgSource& s) {
  const auto amps = tap_amplitudes(s.layout, s.diversity,
                                   s.amplitudes == AmplitudeMode::Weights ? AmplitudeSource::ReflectivityWeight
                                                                          : AmplitudeSource::PeakReflectivity);
  return TapSet(tap_delays(s.layout, s.diversity), amps);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

inline int cmd_analyze(const Sinks& io) {
  const auto& f = io.flags;
  detail::reject_fbg_flags(f);
  if (f.length_km) throw ConfigError("--length-km does not apply to analyze");
  const std::string format = f.format.empty() ? "json" : f.format;
  if (format != "json" && format != "csv") throw ConfigError("analyze supports --format json|csv");

  AnalyzeConfig cfg;
  std::vector<std::string> warnings;
  if (f.paper_layout) {
    if (!f.config.empty()) throw ConfigError("exactly one of --config or --paper-layout is required");
    io.info() << "designing the default heterogeneous fiber\n";
    const auto mcf = design_hetero_mcf();
    for (const auto& c : mcf.cores) {
      cfg.profiles.push_back({"core " + std::to_string(c.index), units::to_um(c.core_radius()),
                              c.core_delta() * 100.0, c.trench});
    }
  } else {
    cfg = parse_analyze(detail::config_or_empty(f));
  }
  if (f.lambda_nm) cfg.lambda_nm = *f.lambda_nm;

  const auto material = MaterialModel::fused_silica();
  const StencilOptions st{units::nm(cfg.stencil_step_nm)};
  const double lambda = units::nm(cfg.lambda_nm);

  if (format == "csv") {
    if (cfg.profiles.size() != 1) throw ConfigError("--format csv needs exactly one profile");
    const auto grid = grid_values(cfg.wavelength_grid_nm.value_or(GridConfig{1530.0, 1570.0, 9}));
    const auto profile = cfg.profiles.front().profile();
    std::ostringstream csv;
    csv << "wavelength_nm,n_eff,group_delay_ps_per_km,dispersion_ps_km_nm\n";
    for (double nm : grid) {
      const auto a = analyze_mode(profile, material, units::nm(nm), st);
      csv << detail::format_value(nm) << ',' << detail::format_value(a.n_eff) << ','
          << detail::format_value(a.group_delay) << ',' << detail::format_value(a.dispersion) << '\n';
    }
    io.emit(csv.str());
    return kExitOk;
  }

  std::vector<CoreDesign> cores;
  Json echo;
  echo["lambda_nm"] = cfg.lambda_nm;
  echo["stencil_step_nm"] = cfg.stencil_step_nm;
  echo["profiles"] = Json::array();
  for (std::size_t i = 0; i < cfg.profiles.size(); ++i) {
    const auto& p = cfg.profiles[i];
    cores.push_back(analyze_core(static_cast<int>(i) + 1, p.profile(), p.trench, lambda, material, st));
    Json pj = profile_json(cores.back());
    if (!p.name.empty()) pj["name"] = p.name;
    echo["profiles"].push_back(pj);
  }
  ReportContext ctx;
  ctx.command = "analyze";
  ctx.lambda0 = lambda;
  ctx.stencil_step = st.step;
  ctx.config_echo = echo;
  bool ok = true;
  io.emit(build_report(cores, ctx, ok).dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

inline int cmd_design(const Sinks& io) {
  const auto& f = io.flags;
  detail::reject_fbg_flags(f);
  if (f.length_km) throw ConfigError("--length-km does not apply to design");
  if (!f.format.empty() && f.format != "json") throw ConfigError("design writes json reports only");

  const Json j = detail::config_or_empty(f);
  HeteroDesignOptions opt = f.paper_layout ? HeteroDesignOptions{} : parse_design(j);
  if (f.lambda_nm) opt.lambda0 = units::nm(*f.lambda_nm);

  ReportContext ctx{"design", opt.lambda0, opt.design.stencil.step, opt.pitch, opt.cladding_diameter,
                    opt.delta_d, opt.d_start, design_options_json(opt), {}};
  if (opt.delta_d == 0.0) {
    ctx.warnings.push_back("homogeneous design (delta_d = 0): adjacent cores are phase matched, R_pk undefined");
    io.err << "warning: " << ctx.warnings.back() << "\n";
  }

  HeteroMCF mcf;
  try {
    mcf = design_hetero_mcf(opt);
  } catch (const Error& e) {
    io.err << "error: design infeasible: " << e.what() << "\n";
    return kExitFailure;
  }
  bool ok = true;
  const Json rep = build_report(mcf.cores, ctx, ok);
  io.emit(rep.dump(2) + "\n");
  if (!ok) {
    io.err << "error: design tolerance check failed: " << rep["checks"].dump() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// filter
// ---------------------------------------------------------------------------

inline TapSet resolve_taps(const TapSource& src, std::ostream& info) {
  if (const auto* e = std::get_if<ExplicitSource>(&src)) return TapSet::from_unsorted(e->delays_ps, e->amplitudes);
  if (const auto* h = std::get_if<HeteroSource>(&src)) {
    return detail::hetero_taps(detail::resolve_fiber(*h, info), h->lambda_nm, h->length_km);
  }
  return detail::fbg_taps(std::get<FbgSource>(src));
}

inline int cmd_filter(const Sinks& io) {
  const auto& f = io.flags;
  if (!f.format.empty() && f.format != "csv") throw ConfigError("filter writes csv only");

  FilterConfig cfg;
  if (f.paper_layout) {
    if (!f.config.empty()) throw ConfigError("exactly one of --config or --paper-layout is required");
    cfg.source = detail::paper_source(f);
  } else {
    cfg = parse_filter(detail::config_or_empty(f));
    detail::apply_flags(cfg.source, f);
  }

  const TapSet taps = resolve_taps(cfg.source, io.info());
  std::optional<double> fsr_ghz;
  if (cfg.compute_fsr && taps.size() >= 2) {
    try {
      fsr_ghz = fsr(taps);
    } catch (const Error& e) {
      io.err << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }

  const auto resp = transfer_function(taps, units::ghz(cfg.frequency_ghz.start), units::ghz(cfg.frequency_ghz.stop),
                                      static_cast<std::size_t>(cfg.frequency_ghz.points));
  std::ostringstream csv;
  write_response_csv(csv, resp);
  io.emit(csv.str());

  std::ostringstream line;
  line << "taps=" << taps.size() << " fsr_ghz=" << (fsr_ghz ? detail::format_value(*fsr_ghz) : "n/a");
  try {
    const auto m = filter_metrics(resp);
    line << " measured_fsr_ghz=" << detail::format_value(m.fsr_ghz) << " mslr_db=" << detail::format_value(m.mslr_db)
         << " bw3db_ghz=" << detail::format_value(m.bw3db_ghz);
  } catch (const Error& e) {
    line << " metrics=n/a (" << e.what() << ")";
  }
  io.info() << line.str() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

inline int cmd_sweep(const Sinks& io) {
  const auto& f = io.flags;
  if (!f.format.empty() && f.format != "csv") throw ConfigError("sweep writes csv only");

  SweepConfig cfg;
  if (f.paper_layout) {
    if (!f.config.empty()) throw ConfigError("exactly one of --config or --paper-layout is required");
    cfg.source = detail::paper_source(f);
    if (std::holds_alternative<FbgSource>(cfg.source)) {
      cfg.parameter = SweepParameter::GroupIndex;
      cfg.range = {1.44, 1.50, 7};
    } else {
      if (f.lambda_nm) throw ConfigError("--lambda-nm is the swept parameter here");
    }
  } else {
    cfg = parse_sweep(detail::config_or_empty(f));
    detail::apply_flags(cfg.source, f);
  }

  std::ostringstream csv;
  csv << sweep_column(cfg.parameter) << ",fsr_ghz\n";
  const auto values = grid_values(cfg.range);
  try {
    if (auto* h = std::get_if<HeteroSource>(&cfg.source)) {
      const HeteroMCF mcf = detail::resolve_fiber(*h, io.info());
      for (double v : values) {
        const double lambda = cfg.parameter == SweepParameter::Wavelength ? v : h->lambda_nm;
        const double length = cfg.parameter == SweepParameter::Length ? v : h->length_km;
        csv << detail::format_value(v) << ',' << detail::format_value(fsr(detail::hetero_taps(mcf, lambda, length)))
            << '\n';
      }
    } else {
      auto s = std::get<FbgSource>(cfg.source);
      for (double v : values) {
        s.layout.fiber.group_index = v;
        csv << detail::format_value(v) << ',' << detail::format_value(fsr(detail::fbg_taps(s))) << '\n';
      }
    }
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  io.emit(csv.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Multicore-fiber true-time-delay line design and microwave-photonic filter toolkit", "mcfttd"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run configuration");
    sub->add_option("--output", flags.output, "output file (default: stdout)");
    sub->add_option("--format", flags.format, "output format: json or csv");
    sub->add_flag("--paper-layout", flags.paper_layout, "use the built-in reference fiber and FBG device");
    sub->add_option("--lambda-nm", flags.lambda_nm, "optical wavelength, nm");
    sub->add_option("--length-km", flags.length_km, "link length, km");
    sub->add_option("--diversity", flags.diversity, "FBG tap selection: spatial or wavelength");
    sub->add_option("--core", flags.core, "core for wavelength diversity");
    sub->add_option("--channel", flags.channel, "1-based channel for spatial diversity");
  };
  auto* analyze = app.add_subcommand("analyze", "mode analysis of radial profiles");
  auto* design = app.add_subcommand("design", "design a heterogeneous multicore fiber");
  auto* filter = app.add_subcommand("filter", "RF filter response of a tap source");
  auto* sweep = app.add_subcommand("sweep", "tabulate FSR over a swept parameter");
  for (auto* s : {analyze, design, filter, sweep}) add_common(s);

  std::vector<const char*> argv{"mcfttd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const Sinks io{out, err, flags};
  try {
    if (analyze->parsed()) return cmd_analyze(io);
    if (design->parsed()) return cmd_design(io);
    if (filter->parsed()) return cmd_filter(io);
    return cmd_sweep(io);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace mcfttd::cli
