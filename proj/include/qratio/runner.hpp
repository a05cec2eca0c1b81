#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qratio/config.hpp"
#include "qratio/formats.hpp"

namespace qratio::io {

struct Artifact {
  std::string name;
  std::string bytes;
};

struct RunOutput {
  std::vector<Artifact> files;
  std::string primary;                       // main table, printed when no output directory is given
  std::map<std::string, double> diagnostics; // drift summaries and checks, copied into the manifest
  std::map<std::string, std::string> notes;  // model choices flagged in the manifest
};

struct RunOptions {
  std::optional<TableFormat> format;  // default: JSON for ratio, CSV otherwise
};

TableFormat default_format(ScenarioKind kind);

// Runs the scenario in memory. Module errors propagate unchanged.
RunOutput execute(const ScenarioConfig& config, const RunOptions& options = {});

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kConfigCopyName = "config.qcfg";

struct ManifestEntry {
  std::string name;
  std::uint64_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string tool_version;
  std::string kind;
  std::string mode;
  std::uint64_t seed = 0;
  std::string config_hash;  // SHA-256 of the canonical config text
  double wall_time = 0.0;   // s
  std::map<std::string, double> diagnostics;
  std::map<std::string, std::string> notes;
  std::vector<ManifestEntry> files;

  std::string to_json() const;
};

// Writes every artifact plus the canonical config, then the manifest, each
// through a temporary file and a rename.
RunManifest write_run(const std::filesystem::path& dir, const ScenarioConfig& config, const RunOutput& output,
                      double wall_time);

// execute() followed by write_run(), timed.
RunManifest run(const ScenarioConfig& config, const std::filesystem::path& dir, const RunOptions& options = {});

// Names of listed files whose size or checksum no longer match; empty when
// the directory verifies.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

struct BatchItem {
  std::filesystem::path dir;
  std::optional<RunManifest> manifest;
  std::string error_kind;  // empty on success
  std::string error;
};

// Runs independent configs on `threads` workers, each into
// <root>/<index>-<kind>-<mode>.
std::vector<BatchItem> run_batch(const std::vector<ScenarioConfig>& configs, const std::filesystem::path& root,
                                 unsigned threads, const RunOptions& options = {});

}  // namespace qratio::io
