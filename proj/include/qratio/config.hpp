#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qratio/units.hpp"

namespace qratio::io {

enum class ScenarioKind { Ratio, Diffuse, SpinDist, SG, Tunnel, Talbot, Decohere };

std::string_view kind_name(ScenarioKind kind);
// Throws ConfigError listing the valid kinds.
ScenarioKind kind_from_name(std::string_view name);

// Quantities and numbers are doubles in SI, integers are int64, text and
// choices are strings, lists are vectors.
using ParamValue =
    std::variant<double, std::int64_t, std::string, std::vector<double>, std::vector<std::string>>;
using ParamMap = std::map<std::string, ParamValue, std::less<>>;

// A [body <name>] section (ratio and diffuse tables).
struct Body {
  std::string name;
  ParamMap params;
  bool operator==(const Body&) const = default;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Ratio;
  std::string mode;
  std::uint64_t seed = 0;  // recorded; every scenario is deterministic
  std::string output_dir;  // empty: chosen on the command line
  ParamMap params;         // every schema key, defaults filled in
  std::vector<Body> bodies;

  bool has(std::string_view key) const;
  double real(std::string_view key) const;  // quantity or number, SI
  std::int64_t integer(std::string_view key) const;
  const std::string& text(std::string_view key) const;
  const std::vector<double>& reals(std::string_view key) const;
  const std::vector<std::string>& texts(std::string_view key) const;

  bool operator==(const ScenarioConfig&) const = default;
};

double body_real(const Body& body, std::string_view key);
bool body_has(const Body& body, std::string_view key);

enum class ParamType { Quantity, Number, Integer, Text, Choice, QuantityList, TextList };
enum class Bound { Any, Positive, NonNegative, OpenUnit, ClosedUnit };
enum class Need { Required, Defaulted, Optional };

struct ParamDef {
  std::string_view key;
  ParamType type;
  Dimension dimension = Dimension::Dimensionless;
  Need need = Need::Required;
  std::string_view fallback;  // default value text for Need::Defaulted
  Bound bound = Bound::Any;
  std::vector<std::string_view> choices;
  std::string_view help;
};

struct ModeSchema {
  ScenarioKind kind;
  std::string_view mode;
  std::vector<ParamDef> params;
  std::vector<ParamDef> body_params;  // empty: no [body] sections allowed
};

// Every (kind, mode) schema; the first mode of a kind is its default.
const std::vector<ModeSchema>& schemas();
const ModeSchema& schema_for(ScenarioKind kind, std::string_view mode);

// Parses and validates a scenario file. Errors are ConfigError with the line
// of the offending entry; an empty file fails with "scenario kind required".
ScenarioConfig parse_config(std::string_view text);

// Canonical text: SI units, %.17g numbers, schema key order.
std::string serialize_config(const ScenarioConfig& config);

ScenarioConfig load_config_file(const std::filesystem::path& path);

// Replaces or adds top-level entries ("key", "value text") and revalidates.
ScenarioConfig with_overrides(const ScenarioConfig& config,
                              const std::vector<std::pair<std::string, std::string>>& overrides);

inline constexpr const char* kPresetPathVariable = "QRATIO_PRESET_PATH";

// Preset text by name: <dir>/<name>.qcfg for each directory of the
// colon-separated QRATIO_PRESET_PATH first, then the presets compiled in.
// Throws LookupError listing the available names.
std::string preset_text(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace qratio::io
