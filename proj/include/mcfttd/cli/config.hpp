#pragma once

// JSON run configurations. Every object is read through ObjectReader, which
// rejects keys the schema does not know about. Units live in key names.

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mcfttd/fbg_device.hpp"
#include "mcfttd/hetero_design.hpp"
#include "mcfttd/units.hpp"
#include "mcfttd/waveguide.hpp"

namespace mcfttd::cli {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or schema-violating input; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where(key) + ": not finite");
    return d;
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  long integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return v.get<long>();
  }

  long integer(const std::string& key, long fallback) { return has(key) ? integer(key) : mark(key, fallback); }

  std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : mark(key, fallback);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true/false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const Json& array(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array");
    return v;
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }
  const std::string& path() const { return path_; }

  /// Call once all known keys were read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  template <class T>
  T mark(const std::string& key, T v) {
    seen_.insert(key);
    return v;
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

inline void check_schema_version(ObjectReader& r) {
  if (!r.has("schema_version")) throw ConfigError("config: missing key 'schema_version'");
  const long v = r.integer("schema_version");
  if (v != kSchemaVersion) throw ConfigError("config: unsupported schema_version " + std::to_string(v));
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// ---------------------------------------------------------------------------
// Profiles and trenches
// ---------------------------------------------------------------------------

struct ProfileConfig {
  std::string name;
  double a1_um;
  double delta1_percent;
  std::optional<TrenchSpec> trench;

  RadialProfile profile() const { return make_profile(units::um(a1_um), delta1_percent / 100.0, trench); }
};

inline TrenchSpec parse_trench(ObjectReader& r) {
  TrenchSpec t{units::um(r.number("a2_um")), units::um(r.number("w_um")), r.number("delta2_percent") / 100.0};
  require(t.gap >= 0.0, r.where("a2_um") + ": must be >= 0");
  require(t.width > 0.0, r.where("w_um") + ": must be > 0");
  require(t.depth >= 0.0 && t.depth < kMaxAbsDelta, r.where("delta2_percent") + ": must lie in [0, 5)");
  return t;
}

inline ProfileConfig parse_profile(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  ProfileConfig p;
  p.name = r.string("name", "");
  p.a1_um = r.number("a1_um");
  p.delta1_percent = r.number("delta1_percent");
  require(p.a1_um > 0.0, r.where("a1_um") + ": must be > 0");
  require(std::abs(p.delta1_percent) < 100.0 * kMaxAbsDelta, r.where("delta1_percent") + ": |value| must be < 5");
  const int trench_keys = r.has("a2_um") + r.has("w_um") + r.has("delta2_percent");
  if (trench_keys == 3) {
    p.trench = parse_trench(r);
  } else if (trench_keys != 0) {
    throw ConfigError(path + ": trench needs all of a2_um, w_um, delta2_percent");
  }
  r.finish();
  return p;
}

inline Json profile_json(const CoreDesign& c) {
  Json j;
  j["a1_um"] = units::to_um(c.core_radius());
  j["delta1_percent"] = c.core_delta() * 100.0;
  if (c.trench) {
    j["a2_um"] = units::to_um(c.trench->gap);
    j["w_um"] = units::to_um(c.trench->width);
    j["delta2_percent"] = c.trench->depth * 100.0;
  }
  return j;
}

struct GridConfig {
  double start;
  double stop;
  long points;
};

inline GridConfig parse_grid(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  GridConfig g{r.number("start"), r.number("stop"), r.integer("points")};
  r.finish();
  require(g.points >= 1, path + ".points: empty range");
  require(g.stop >= g.start, path + ": stop must not precede start");
  return g;
}

inline std::vector<double> grid_values(const GridConfig& g) {
  std::vector<double> v;
  for (long k = 0; k < g.points; ++k) {
    v.push_back(g.points == 1 ? g.start
                              : (k + 1 == g.points ? g.stop
                                                   : g.start + (g.stop - g.start) * static_cast<double>(k) /
                                                                   static_cast<double>(g.points - 1)));
  }
  return v;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeConfig {
  std::vector<ProfileConfig> profiles;
  double lambda_nm = 1550.0;
  double stencil_step_nm = 0.1;
  std::optional<GridConfig> wavelength_grid_nm;
};

inline AnalyzeConfig parse_analyze_report(ObjectReader& r) {
  AnalyzeConfig c;
  c.lambda_nm = r.number("lambda0_nm");
  c.stencil_step_nm = r.number("stencil_step_nm", 0.1);
  const Json& cores = r.array("cores");
  for (std::size_t i = 0; i < cores.size(); ++i) {
    const Json& core = cores[i];
    require(core.is_object() && core.contains("profile"), "report.cores[" + std::to_string(i) + "]: missing profile");
    c.profiles.push_back(parse_profile(core.at("profile"), "report.cores[" + std::to_string(i) + "].profile"));
  }
  require(!c.profiles.empty(), "report: no cores to analyze");
  return c;
}

/// Accepts either an analyze config or a report emitted by analyze/design.
inline AnalyzeConfig parse_analyze(const Json& j) {
  ObjectReader r(j, "config");
  check_schema_version(r);
  if (r.has("kind")) {
    require(r.string("kind") == "report", "config.kind: only 'report' is accepted here");
    return parse_analyze_report(r);  // reports carry extra keys; only the profiles matter
  }
  AnalyzeConfig c;
  const Json& arr = r.array("profiles");
  require(!arr.empty(), "config.profiles: at least one profile is required");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    c.profiles.push_back(parse_profile(arr[i], "config.profiles[" + std::to_string(i) + "]"));
  }
  c.lambda_nm = r.number("lambda_nm", 1550.0);
  c.stencil_step_nm = r.number("stencil_step_nm", 0.1);
  require(c.stencil_step_nm > 0.0, "config.stencil_step_nm: must be > 0");
  if (r.has("wavelength_grid_nm")) c.wavelength_grid_nm = parse_grid(r.raw("wavelength_grid_nm"), "config.wavelength_grid_nm");
  r.finish();
  return c;
}

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

inline HeteroDesignOptions parse_design_body(ObjectReader& r) {
  HeteroDesignOptions o;
  o.n_cores = static_cast<int>(r.integer("n_cores", o.n_cores));
  require(o.n_cores >= 1 && o.n_cores <= 64, r.where("n_cores") + ": must lie in [1, 64]");
  o.d_start = r.number("d_start_ps_per_km_nm", o.d_start);
  o.delta_d = r.number("delta_d_ps_per_km_nm", o.delta_d);
  o.lambda0 = units::nm(r.number("lambda0_nm", units::to_nm(o.lambda0)));
  o.pitch = units::um(r.number("pitch_um", units::to_um(o.pitch)));
  o.cladding_diameter = units::um(r.number("cladding_diameter_um", units::to_um(o.cladding_diameter)));
  o.anchor_core_delta = r.number("anchor_delta1_percent", o.anchor_core_delta * 100.0) / 100.0;
  o.delta_neff_floor = r.number("delta_neff_floor", o.delta_neff_floor);
  o.design.stencil.step = units::nm(r.number("stencil_step_nm", units::to_nm(o.design.stencil.step)));
  require(o.pitch > 0.0 && o.cladding_diameter > 0.0, r.path() + ": pitch and cladding must be positive");
  require(o.design.stencil.step > 0.0, r.where("stencil_step_nm") + ": must be > 0");
  if (r.has("trench_menu")) {
    const Json& menu = r.array("trench_menu");
    require(!menu.empty(), r.where("trench_menu") + ": must not be empty");
    o.trench_menu.clear();
    for (std::size_t i = 0; i < menu.size(); ++i) {
      ObjectReader t(menu[i], r.where("trench_menu") + "[" + std::to_string(i) + "]");
      o.trench_menu.push_back(parse_trench(t));
      t.finish();
    }
  }
  return o;
}

inline HeteroDesignOptions parse_design(const Json& j) {
  ObjectReader r(j, "config");
  check_schema_version(r);
  auto o = parse_design_body(r);
  r.finish();
  return o;
}

// ---------------------------------------------------------------------------
// Tap sources (filter and sweep)
// ---------------------------------------------------------------------------

struct ExplicitSource {
  std::vector<double> delays_ps;
  std::vector<double> amplitudes;
};

struct HeteroSource {
  double lambda_nm = 1560.0;
  double length_km = 10.0;
  HeteroDesignOptions design{};
  std::optional<std::string> design_report;
};

enum class AmplitudeMode { Weights, PeakReflectivity };

struct FbgSource {
  MulticavityLayout layout = canonical_paper_layout();
  Diversity diversity = WavelengthDiversity{6};
  AmplitudeMode amplitudes = AmplitudeMode::Weights;
};

using TapSource = std::variant<ExplicitSource, HeteroSource, FbgSource>;

inline MulticavityLayout parse_layout(const Json& j, const std::string& path) {
  if (j.is_string()) {
    require(j.get<std::string>() == "canonical", path + ": the only named layout is 'canonical'");
    return canonical_paper_layout();
  }
  ObjectReader r(j, path);
  MulticavityLayout l;
  l.fiber.n_eff = r.number("n_eff", l.fiber.n_eff);
  l.fiber.group_index = r.number("group_index", l.fiber.group_index);
  l.fiber.length = units::mm(r.number("length_mm", units::to_mm(l.fiber.length)));
  for (double nm : r.numbers("channels_nm")) l.wavelength_channels.push_back(units::nm(nm));
  const Json& gratings = r.array("gratings");
  for (std::size_t i = 0; i < gratings.size(); ++i) {
    ObjectReader g(gratings[i], path + ".gratings[" + std::to_string(i) + "]");
    GratingSpec s;
    s.core_id = static_cast<int>(g.integer("core"));
    s.z_start = units::mm(g.number("z_start_mm"));
    s.length = units::mm(g.number("length_mm", units::to_mm(s.length)));
    s.bragg_wavelength = units::nm(g.number("bragg_nm"));
    s.delta_n = g.number("delta_n", s.delta_n);
    s.reflectivity_weight = g.number("weight", s.reflectivity_weight);
    g.finish();
    l.gratings.push_back(s);
  }
  r.finish();
  try {
    l.validate();
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return l;
}

inline TapSource parse_source(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string type = r.string("type");
  if (type == "explicit") {
    ExplicitSource s;
    s.delays_ps = r.numbers("delays_ps");
    s.amplitudes = r.has("amplitudes") ? r.numbers("amplitudes") : std::vector<double>(s.delays_ps.size(), 1.0);
    require(s.amplitudes.size() == s.delays_ps.size(), path + ": amplitudes and delays_ps differ in length");
    r.finish();
    return s;
  }
  if (type == "hetero") {
    HeteroSource s;
    s.lambda_nm = r.number("lambda_nm", s.lambda_nm);
    s.length_km = r.number("length_km", s.length_km);
    require(s.length_km >= 0.0, r.where("length_km") + ": must be >= 0");
    if (r.has("design")) {
      ObjectReader d(r.raw("design"), r.where("design"));
      s.design = parse_design_body(d);
      d.finish();
    }
    if (r.has("design_report")) s.design_report = r.string("design_report");
    r.finish();
    return s;
  }
  if (type == "fbg") {
    FbgSource s;
    if (r.has("layout")) s.layout = parse_layout(r.raw("layout"), r.where("layout"));
    if (r.has("group_index")) {
      s.layout.fiber.group_index = r.number("group_index");
      require(s.layout.fiber.group_index > 1.0, r.where("group_index") + ": must exceed 1");
    }
    const std::string div = r.string("diversity", "wavelength");
    if (div == "wavelength") {
      s.diversity = WavelengthDiversity{static_cast<int>(r.integer("core", 6))};
    } else if (div == "spatial") {
      s.diversity = SpatialDiversity{static_cast<int>(r.integer("channel", 1))};
    } else {
      throw ConfigError(r.where("diversity") + ": expected 'spatial' or 'wavelength'");
    }
    const std::string amps = r.string("amplitudes", "weights");
    if (amps == "weights") {
      s.amplitudes = AmplitudeMode::Weights;
    } else if (amps == "peak_reflectivity") {
      s.amplitudes = AmplitudeMode::PeakReflectivity;
    } else {
      throw ConfigError(r.where("amplitudes") + ": expected 'weights' or 'peak_reflectivity'");
    }
    r.finish();
    return s;
  }
  throw ConfigError(r.where("type") + ": expected 'explicit', 'hetero' or 'fbg'");
}

// ---------------------------------------------------------------------------
// filter and sweep
// ---------------------------------------------------------------------------

struct FilterConfig {
  TapSource source = HeteroSource{};
  GridConfig frequency_ghz{0.0, 40.0, 4001};
  bool compute_fsr = true;
};

inline FilterConfig parse_filter(const Json& j) {
  ObjectReader r(j, "config");
  check_schema_version(r);
  FilterConfig c;
  c.source = parse_source(r.raw("source"), "config.source");
  if (r.has("frequency_ghz")) c.frequency_ghz = parse_grid(r.raw("frequency_ghz"), "config.frequency_ghz");
  c.compute_fsr = r.boolean("compute_fsr", true);
  r.finish();
  require(c.frequency_ghz.points >= 2 && c.frequency_ghz.stop > c.frequency_ghz.start && c.frequency_ghz.start >= 0.0,
          "config.frequency_ghz: need start >= 0, stop > start and at least two points");
  return c;
}

enum class SweepParameter { Wavelength, Length, GroupIndex };

inline const char* sweep_column(SweepParameter p) {
  switch (p) {
    case SweepParameter::Wavelength: return "lambda_nm";
    case SweepParameter::Length: return "length_km";
    case SweepParameter::GroupIndex: return "group_index";
  }
  return "";
}

struct SweepConfig {
  TapSource source = HeteroSource{};
  SweepParameter parameter = SweepParameter::Wavelength;
  GridConfig range{1555.0, 1570.0, 16};
};

inline SweepConfig parse_sweep(const Json& j) {
  ObjectReader r(j, "config");
  check_schema_version(r);
  SweepConfig c;
  c.source = parse_source(r.raw("source"), "config.source");
  const std::string p = r.string("parameter");
  if (p == "lambda_nm") {
    c.parameter = SweepParameter::Wavelength;
  } else if (p == "length_km") {
    c.parameter = SweepParameter::Length;
  } else if (p == "group_index") {
    c.parameter = SweepParameter::GroupIndex;
  } else {
    throw ConfigError("config.parameter: expected 'lambda_nm', 'length_km' or 'group_index'");
  }
  c.range = GridConfig{r.number("start"), r.number("stop"), r.integer("points")};
  r.finish();
  require(c.range.points >= 1, "config.points: empty sweep range");
  require(c.range.stop >= c.range.start, "config: stop must not precede start");
  const bool hetero = std::holds_alternative<HeteroSource>(c.source);
  const bool fbg = std::holds_alternative<FbgSource>(c.source);
  require(c.parameter == SweepParameter::GroupIndex ? fbg : hetero,
          "config.parameter: lambda_nm/length_km sweep a hetero source, group_index sweeps an fbg source");
  return c;
}

}  // namespace mcfttd::cli
