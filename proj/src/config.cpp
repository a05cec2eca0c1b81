#include "qratio/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qratio/constants.hpp"
#include "qratio/embedded.hpp"
#include "qratio/error.hpp"
#include "qratio/keyvalue.hpp"

namespace qratio::io {

namespace {

using D = Dimension;
using T = ParamType;

constexpr std::string_view kKindNames[] = {"ratio", "diffuse", "spin-dist", "sg", "tunnel", "talbot", "decohere"};

ParamDef quantity(std::string_view key, D dim, Bound bound = Bound::Positive, std::string_view help = {}) {
  return {key, T::Quantity, dim, Need::Required, {}, bound, {}, help};
}

ParamDef quantity_or(std::string_view key, D dim, std::string_view fallback, Bound bound = Bound::Any,
                     std::string_view help = {}) {
  return {key, T::Quantity, dim, Need::Defaulted, fallback, bound, {}, help};
}

ParamDef number_or(std::string_view key, std::string_view fallback, Bound bound, std::string_view help = {}) {
  return {key, T::Number, D::Dimensionless, Need::Defaulted, fallback, bound, {}, help};
}

ParamDef integer(std::string_view key, std::string_view help = {}) {
  return {key, T::Integer, D::Dimensionless, Need::Required, {}, Bound::Positive, {}, help};
}

ParamDef integer_or(std::string_view key, std::string_view fallback, Bound bound = Bound::Positive,
                    std::string_view help = {}) {
  return {key, T::Integer, D::Dimensionless, Need::Defaulted, fallback, bound, {}, help};
}

ParamDef choice(std::string_view key, std::vector<std::string_view> options, std::string_view fallback = {},
                std::string_view help = {}) {
  return {key, T::Choice, D::Dimensionless, fallback.empty() ? Need::Required : Need::Defaulted,
          fallback, Bound::Any, std::move(options), help};
}

std::vector<ParamDef> concat(std::vector<ParamDef> a, const std::vector<ParamDef>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<ParamDef> barrier_params() {
  return {
      choice("barrier", {"rectangular", "gaussian"}, {}, "barrier shape"),
      quantity("height", D::Energy, Bound::Positive, "barrier maximum V0"),
      {"width", T::Quantity, D::Length, Need::Optional, {}, Bound::Positive, {}, "rectangular: full width"},
      {"sigma", T::Quantity, D::Length, Need::Optional, {}, Bound::Positive, {}, "gaussian: standard deviation"},
  };
}

std::vector<ParamDef> tunnel_scenario_params() {
  return concat(barrier_params(),
                {
                    quantity("mass", D::Mass),
                    quantity("energy", D::Energy, Bound::Positive, "central longitudinal energy"),
                    quantity("longitudinal_width", D::Length),
                    quantity("start", D::Length, Bound::Any, "initial longitudinal centre"),
                    quantity("separation", D::Length, Bound::Positive, "distance between transverse packets"),
                    quantity("transverse_width", D::Length),
                    number_or("c1_weight", "0.5", Bound::OpenUnit, "|c1|^2"),
                    quantity("extent_x", D::Length),
                    integer("points_x"),
                    quantity("extent_z", D::Length),
                    integer("points_z"),
                    quantity("dt", D::Time),
                    integer("max_steps"),
                    integer_or("check_every", "50"),
                });
}

std::vector<ParamDef> sg_grid_params(bool field_required) {
  return {
      quantity("mass", D::Mass),
      quantity("width", D::Length, Bound::Positive, "packet amplitude width"),
      quantity("gradient", D::FieldGradient, Bound::Any),
      field_required ? quantity("field", D::MagneticField, Bound::Any, "uniform B0")
                     : quantity_or("field", D::MagneticField, "0 T", Bound::Any, "uniform B0"),
      number_or("up_weight", "0.5", Bound::ClosedUnit, "|c_up|^2"),
      quantity("duration", D::Time),
      integer("steps"),
      quantity("extent_y", D::Length),
      integer("points_y"),
      quantity("extent_z", D::Length),
      integer("points_z"),
      integer_or("record_every", "0", Bound::NonNegative),
  };
}

std::vector<ParamDef> grating_params() {
  return {
      quantity("period", D::Length),
      quantity("wavelength", D::Length),
      number_or("open_fraction", "0.3", Bound::OpenUnit),
      integer_or("slits", "64"),
  };
}

std::vector<ParamDef> environment_params() {
  return {
      quantity("env_wavelength", D::Length),
      quantity("env_rate", D::Rate, Bound::Positive, "saturated localization rate Lambda"),
  };
}

std::vector<ModeSchema> build_schemas() {
  using K = ScenarioKind;
  const ParamDef spin_j{"j", T::Number, D::Dimensionless, Need::Required, {}, Bound::Positive, {},
                        "spin, 2j integer"};
  std::vector<ModeSchema> s;
  s.push_back({K::Ratio,
               "table",
               {{"experiments", T::TextList, D::Dimensionless, Need::Optional, {}, Bound::Any, {},
                 "catalog experiment names"}},
               {{"mass", T::Quantity, D::Mass, Need::Optional, {}, Bound::Positive, {}, {}},
                quantity("size", D::Length, Bound::NonNegative, "body size L0"),
                quantity("quantum_range", D::Length, Bound::Positive, "R_q")}});
  s.push_back({K::Diffuse,
               "table",
               {quantity("width", D::Length, Bound::Positive, "initial amplitude width"),
                {"particles", T::TextList, D::Dimensionless, Need::Optional, {}, Bound::Any, {},
                 "catalog particle or experiment names"}},
               {quantity("mass", D::Mass),
                {"width", T::Quantity, D::Length, Need::Optional, {}, Bound::Positive, {}, {}}}});
  const std::vector<ParamDef> spin{
      spin_j,
      {"theta", T::QuantityList, D::Angle, Need::Required, {}, Bound::Any, {}, "polar angles"},
      quantity_or("phi", D::Angle, "0 rad"),
      number_or("min_weight", "0", Bound::NonNegative, "rows below this weight are omitted"),
  };
  s.push_back({K::SpinDist, "exact", spin, {}});
  s.push_back({K::SpinDist, "stirling", spin, {}});
  s.push_back({K::SG, "decoupled", sg_grid_params(false), {}});
  s.push_back({K::SG, "coupled", sg_grid_params(true), {}});
  s.push_back({K::SG,
               "bands",
               {spin_j, quantity("theta", D::Angle, Bound::Any), quantity_or("phi", D::Angle, "0 rad"),
                quantity("gradient", D::FieldGradient, Bound::Any), quantity("region_length", D::Length),
                quantity("transit_speed", D::Speed), quantity_or("drift_time", D::Time, "0 s", Bound::NonNegative),
                quantity("mass", D::Mass),
                number_or("moment", "1", Bound::Positive, "top-band moment in Bohr magnetons")},
               {}});
  s.push_back({K::Tunnel, "sweep",
               concat(barrier_params(), {quantity("mass", D::Mass), quantity("energy_min", D::Energy),
                                         quantity("energy_max", D::Energy), integer_or("energy_points", "50")}),
               {}});
  s.push_back({K::Tunnel, "pure", tunnel_scenario_params(), {}});
  s.push_back({K::Tunnel, "decohered", concat(tunnel_scenario_params(), environment_params()), {}});
  s.push_back({K::Talbot, "carpet",
               concat(grating_params(),
                      {choice("grating", {"absorptive", "phase"}, "absorptive"),
                       quantity_or("phase", D::Angle, "0 rad"), quantity("z_max", D::Length),
                       integer_or("planes", "256"), integer_or("points_per_period", "64"),
                       choice("render", {"none", "pgm", "svg"}, "pgm")}),
               {}});
  s.push_back({K::Talbot, "lau",
               concat(grating_params(),
                      {quantity("L1", D::Length), quantity("L2", D::Length), integer_or("sources_per_slit", "8"),
                       integer_or("points_per_period", "256"), integer_or("scan_points", "33")}),
               {}});
  const std::vector<ParamDef> line_grid{quantity("extent", D::Length), integer("points"),
                                        quantity("duration", D::Time), integer("steps")};
  s.push_back({K::Decohere, "packets",
               concat(concat({quantity("mass", D::Mass), quantity("width", D::Length),
                              quantity("separation", D::Length)},
                             environment_params()),
                      concat(line_grid, {choice("hamiltonian", {"free", "none"}, "free"),
                                         integer_or("record_every", "1")})),
               {}});
  s.push_back({K::Decohere, "sg",
               concat(concat({quantity("mass", D::Mass), quantity("width", D::Length),
                              number_or("up_weight", "0.5", Bound::ClosedUnit),
                              quantity("gradient", D::FieldGradient, Bound::Any)},
                             environment_params()),
                      concat(line_grid, {integer_or("record_every", "0", Bound::NonNegative)})),
               {}});
  s.push_back({K::Decohere, "timescales",
               concat(concat({quantity("mass", D::Mass), quantity("width", D::Length),
                              quantity("separation", D::Length)},
                             environment_params()),
                      {quantity("transit_length", D::Length), quantity("transit_speed", D::Speed),
                       quantity("tau_diss", D::Time)}),
               {}});
  return s;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

const ParamDef* find_def(const std::vector<ParamDef>& defs, std::string_view key) {
  for (const auto& d : defs) {
    if (d.key == key) return &d;
  }
  return nullptr;
}

void check_bound(const ParamDef& def, double v) {
  const std::string key(def.key);
  if (!std::isfinite(v)) throw DomainError("'" + key + "' must be finite");
  switch (def.bound) {
    case Bound::Any: return;
    case Bound::Positive:
      if (!(v > 0.0)) throw DomainError("'" + key + "' must be positive");
      return;
    case Bound::NonNegative:
      if (!(v >= 0.0)) throw DomainError("'" + key + "' must be non-negative");
      return;
    case Bound::OpenUnit:
      if (!(v > 0.0 && v < 1.0)) throw DomainError("'" + key + "' must lie strictly between 0 and 1");
      return;
    case Bound::ClosedUnit:
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("'" + key + "' must lie in [0, 1]");
      return;
  }
}

std::int64_t parse_integer(std::string_view text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DomainError("expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

// Throws DomainError; the caller adds key and line.
ParamValue parse_value(const ParamDef& def, std::string_view text) {
  switch (def.type) {
    case T::Quantity:
    case T::Number: {
      const double v = parse_quantity_as(text, def.type == T::Number ? D::Dimensionless : def.dimension);
      check_bound(def, v);
      return v;
    }
    case T::Integer: {
      const auto v = parse_integer(text);
      check_bound(def, static_cast<double>(v));
      return v;
    }
    case T::Text:
      if (text.empty()) throw DomainError("empty value");
      return std::string(text);
    case T::Choice: {
      for (const auto c : def.choices) {
        if (c == text) return std::string(text);
      }
      std::string msg = "'" + std::string(text) + "' is not one of:";
      for (const auto c : def.choices) msg += " " + std::string(c);
      throw DomainError(msg);
    }
    case T::QuantityList: {
      std::vector<double> out;
      for (const auto& item : split_list(text)) {
        out.push_back(parse_quantity_as(item, def.dimension));
        check_bound(def, out.back());
      }
      if (out.empty()) throw DomainError("empty list");
      return out;
    }
    case T::TextList: {
      auto items = split_list(text);
      if (items.empty()) throw DomainError("empty list");
      return items;
    }
  }
  throw DomainError("unsupported parameter type");
}

std::string format_value(const ParamDef& def, const ParamValue& value) {
  switch (def.type) {
    case T::Quantity: return format_quantity(std::get<double>(value), def.dimension);
    case T::Number: return format_real(std::get<double>(value));
    case T::Integer: return std::to_string(std::get<std::int64_t>(value));
    case T::Text:
    case T::Choice: return std::get<std::string>(value);
    case T::QuantityList: {
      std::vector<std::string> items;
      for (double v : std::get<std::vector<double>>(value)) items.push_back(format_quantity(v, def.dimension));
      return join(items);
    }
    case T::TextList: return join(std::get<std::vector<std::string>>(value));
  }
  return {};
}

using LineMap = std::map<std::string, int, std::less<>>;

// Fills `out` from the entries of one section against `defs`.
void read_params(const std::vector<KvEntry>& entries, const std::vector<ParamDef>& defs, int section_line,
                 std::string_view where, ParamMap& out, LineMap& lines) {
  for (const auto& e : entries) {
    const auto* def = find_def(defs, e.key);
    if (def == nullptr) {
      std::vector<std::string> valid;
      for (const auto& d : defs) valid.emplace_back(d.key);
      throw ConfigError("unknown key '" + e.key + "' in " + std::string(where) + " (valid: " + join(valid) + ")",
                        e.line);
    }
    try {
      out[e.key] = parse_value(*def, e.value);
    } catch (const DomainError& err) {
      throw ConfigError("key '" + e.key + "': " + err.what(), e.line);
    }
    lines[e.key] = e.line;
  }
  for (const auto& d : defs) {
    if (out.contains(d.key)) continue;
    if (d.need == Need::Required) {
      throw ConfigError("missing required key '" + std::string(d.key) + "' in " + std::string(where), section_line);
    }
    if (d.need == Need::Defaulted) out[std::string(d.key)] = parse_value(d, d.fallback);
  }
}

int line_of(const LineMap& lines, std::string_view key, int fallback) {
  const auto it = lines.find(key);
  return it == lines.end() ? fallback : it->second;
}

// Cross-key checks that a single schema entry cannot express.
void check_consistency(const ScenarioConfig& c, const LineMap& lines, int top_line) {
  using K = ScenarioKind;
  if (c.kind == K::Ratio && c.bodies.empty() && !c.has("experiments")) {
    throw ConfigError("ratio needs 'experiments' or at least one [body] section", top_line);
  }
  if (c.kind == K::Diffuse && c.bodies.empty() && !c.has("particles")) {
    throw ConfigError("diffuse needs 'particles' or at least one [body] section", top_line);
  }
  if (c.kind == K::SpinDist || (c.kind == K::SG && c.mode == "bands")) {
    const double two_j = 2.0 * c.real("j");
    if (two_j != std::floor(two_j) || two_j > 2e9) {
      throw ConfigError("key 'j': 2j must be a positive integer", line_of(lines, "j", top_line));
    }
    const std::vector<double> thetas =
        c.kind == K::SpinDist ? c.reals("theta") : std::vector<double>{c.real("theta")};
    for (double t : thetas) {
      if (t < 0.0 || t > kPi) throw ConfigError("key 'theta': must lie in [0, pi]", line_of(lines, "theta", top_line));
    }
  }
  if (c.kind == K::Tunnel) {
    const bool rect = c.text("barrier") == "rectangular";
    const std::string_view need = rect ? "width" : "sigma";
    const std::string_view other = rect ? "sigma" : "width";
    if (!c.has(need)) {
      throw ConfigError("a " + c.text("barrier") + " barrier needs '" + std::string(need) + "'",
                        line_of(lines, "barrier", top_line));
    }
    if (c.has(other)) {
      throw ConfigError("'" + std::string(other) + "' does not apply to a " + c.text("barrier") + " barrier",
                        line_of(lines, other, top_line));
    }
    if (c.mode == "sweep" && !(c.real("energy_max") > c.real("energy_min"))) {
      throw ConfigError("energy_max must exceed energy_min", line_of(lines, "energy_max", top_line));
    }
  }
}

const ParamValue& get(const ParamMap& m, std::string_view key) {
  const auto it = m.find(key);
  if (it == m.end()) throw LookupError("parameter '" + std::string(key) + "' not set");
  return it->second;
}

template <class V>
const V& get_as(const ParamMap& m, std::string_view key) {
  const auto* v = std::get_if<V>(&get(m, key));
  if (v == nullptr) throw LookupError("parameter '" + std::string(key) + "' has a different type");
  return *v;
}

bool valid_name(std::string_view s) {
  return !s.empty() && s.find_first_of("#[]=\n\r") == std::string_view::npos;
}

ScenarioConfig from_sections(const std::vector<KvSection>& sections) {
  const auto& top = sections.front();
  const auto* kind_entry = top.find("kind");
  if (kind_entry == nullptr) {
    // an empty file has no line to point at
    const int line = !top.entries.empty() ? top.entries.front().line : sections.size() > 1 ? sections[1].line : 0;
    throw ConfigError("scenario kind required", line);
  }
  ScenarioConfig c;
  try {
    c.kind = kind_from_name(kind_entry->value);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), kind_entry->line);
  }
  const auto* mode_entry = top.find("mode");
  const ModeSchema* schema = nullptr;
  if (mode_entry == nullptr) {
    schema = &schema_for(c.kind, {});
  } else {
    try {
      schema = &schema_for(c.kind, mode_entry->value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), mode_entry->line);
    }
  }
  c.mode = std::string(schema->mode);

  std::vector<KvEntry> rest;
  for (const auto& e : top.entries) {
    if (e.key == "kind" || e.key == "mode") continue;
    if (e.key == "seed") {
      try {
        const auto s = parse_integer(e.value);
        if (s < 0) throw DomainError("must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
      } catch (const DomainError& err) {
        throw ConfigError(std::string("key 'seed': ") + err.what(), e.line);
      }
    } else if (e.key == "output") {
      if (!valid_name(e.value)) throw ConfigError("key 'output': empty or malformed directory", e.line);
      c.output_dir = e.value;
    } else {
      rest.push_back(e);
    }
  }
  const std::string where = std::string(kind_name(c.kind)) + "/" + c.mode;
  LineMap lines;
  read_params(rest, schema->params, kind_entry->line, where, c.params, lines);

  for (std::size_t i = 1; i < sections.size(); ++i) {
    const auto& sec = sections[i];
    if (sec.name != "body" || schema->body_params.empty()) {
      throw ConfigError("unexpected section [" + sec.name + "] in " + where, sec.line);
    }
    if (!valid_name(sec.argument)) throw ConfigError("[body] needs a name", sec.line);
    for (const auto& b : c.bodies) {
      if (b.name == sec.argument) throw ConfigError("duplicate body '" + sec.argument + "'", sec.line);
    }
    Body body{sec.argument, {}};
    LineMap body_lines;
    read_params(sec.entries, schema->body_params, sec.line, "[body " + sec.argument + "]", body.params, body_lines);
    c.bodies.push_back(std::move(body));
  }
  check_consistency(c, lines, kind_entry->line);
  return c;
}

void append_params(std::string& out, const std::vector<ParamDef>& defs, const ParamMap& params) {
  for (const auto& d : defs) {
    const auto it = params.find(d.key);
    if (it == params.end()) continue;
    out += std::string(d.key) + " = " + format_value(d, it->second) + "\n";
  }
}

}  // namespace

std::string_view kind_name(ScenarioKind kind) { return kKindNames[static_cast<int>(kind)]; }

ScenarioKind kind_from_name(std::string_view name) {
  for (int i = 0; i < 7; ++i) {
    if (kKindNames[i] == name) return static_cast<ScenarioKind>(i);
  }
  std::string msg = "unknown scenario kind '" + std::string(name) + "'; valid:";
  for (const auto k : kKindNames) msg += " " + std::string(k);
  throw ConfigError(msg);
}

bool ScenarioConfig::has(std::string_view key) const { return params.contains(key); }
double ScenarioConfig::real(std::string_view key) const { return get_as<double>(params, key); }
std::int64_t ScenarioConfig::integer(std::string_view key) const { return get_as<std::int64_t>(params, key); }
const std::string& ScenarioConfig::text(std::string_view key) const { return get_as<std::string>(params, key); }
const std::vector<double>& ScenarioConfig::reals(std::string_view key) const {
  return get_as<std::vector<double>>(params, key);
}
const std::vector<std::string>& ScenarioConfig::texts(std::string_view key) const {
  return get_as<std::vector<std::string>>(params, key);
}

double body_real(const Body& body, std::string_view key) { return get_as<double>(body.params, key); }
bool body_has(const Body& body, std::string_view key) { return body.params.contains(key); }

const std::vector<ModeSchema>& schemas() {
  static const std::vector<ModeSchema> s = build_schemas();
  return s;
}

const ModeSchema& schema_for(ScenarioKind kind, std::string_view mode) {
  std::vector<std::string> modes;
  for (const auto& s : schemas()) {
    if (s.kind != kind) continue;
    if (mode.empty() || s.mode == mode) return s;
    modes.emplace_back(s.mode);
  }
  throw ConfigError("unknown mode '" + std::string(mode) + "' for " + std::string(kind_name(kind)) +
                    " (valid: " + join(modes) + ")");
}

ScenarioConfig parse_config(std::string_view text) { return from_sections(parse_keyvalue(text)); }

std::string serialize_config(const ScenarioConfig& c) {
  const auto& schema = schema_for(c.kind, c.mode);
  std::string out = "kind = " + std::string(kind_name(c.kind)) + "\nmode = " + c.mode + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  if (!c.output_dir.empty()) out += "output = " + c.output_dir + "\n";
  append_params(out, schema.params, c.params);
  for (const auto& b : c.bodies) {
    out += "\n[body " + b.name + "]\n";
    append_params(out, schema.body_params, b.params);
  }
  return out;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ScenarioConfig with_overrides(const ScenarioConfig& config,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  auto sections = parse_keyvalue(serialize_config(config));
  auto& top = sections.front().entries;
  for (const auto& [key, value] : overrides) {
    auto it = std::find_if(top.begin(), top.end(), [&](const KvEntry& e) { return e.key == key; });
    if (it != top.end()) {
      it->value = value;
    } else {
      top.push_back({key, value, 0});
    }
  }
  return from_sections(sections);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  if (const char* env = std::getenv(kPresetPathVariable)) {
    std::stringstream dirs(env);
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
      std::error_code ec;
      if (dir.empty() || !std::filesystem::is_directory(dir, ec)) continue;
      for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
        if (e.path().extension() == ".qcfg") names.push_back(e.path().stem().string());
      }
    }
  }
  for (const auto& [name, text] : embedded_presets()) names.emplace_back(name);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

std::string preset_text(std::string_view name) {
  if (const char* env = std::getenv(kPresetPathVariable)) {
    std::stringstream dirs(env);
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
      if (dir.empty()) continue;
      const auto path = std::filesystem::path(dir) / (std::string(name) + ".qcfg");
      std::ifstream in(path, std::ios::binary);
      if (!in) continue;
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
  }
  for (const auto& [n, text] : embedded_presets()) {
    if (n == name) return std::string(text);
  }
  throw LookupError("unknown preset '" + std::string(name) + "'; available: " + join(preset_names()));
}

}  // namespace qratio::io
