#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qratio {

struct ParticleSpec {
  std::string name;
  double mass = 0.0;     // kg
  double size_L0 = 0.0;  // m, 0 for elementary particles
  std::string source;
};

struct ExperimentRecord {
  std::string name;
  double mass_amu = 0.0;
  double mass = 0.0;             // kg
  double size_L0 = 0.0;          // m
  double quantum_range_Rq = 0.0; // m
  std::string source;
  std::string note;
};

using CatalogEntry = std::variant<ParticleSpec, ExperimentRecord>;

class Catalog {
 public:
  // Parses the catalog text format (see data/catalog.qcat). Throws ConfigError.
  static Catalog parse(std::string_view text);

  // The catalog compiled into the binary.
  static const Catalog& builtin();

  // Adds the entries of another catalog text, replacing entries of the same name.
  void merge(std::string_view text);

  // Throws LookupError listing the available names.
  const CatalogEntry& lookup(std::string_view name) const;
  const ParticleSpec& particle(std::string_view name) const;
  const ExperimentRecord& experiment(std::string_view name) const;

  std::vector<std::string> names() const;
  std::vector<ExperimentRecord> experiments() const;  // file order

  int version() const { return version_; }

 private:
  std::vector<CatalogEntry> entries_;
  int version_ = 1;
};

const std::string& entry_name(const CatalogEntry& e);

}  // namespace qratio
