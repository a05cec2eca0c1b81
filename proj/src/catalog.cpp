#include "qratio/catalog.hpp"

#include <algorithm>

#include "qratio/constants.hpp"
#include "qratio/embedded.hpp"
#include "qratio/error.hpp"
#include "qratio/keyvalue.hpp"
#include "qratio/units.hpp"

namespace qratio {

namespace {

double quantity(const KvSection& s, std::string_view key, Dimension d) {
  const KvEntry* e = s.find(key);
  if (e == nullptr) {
    throw ConfigError("catalog entry '" + s.argument + "' lacks '" + std::string(key) + "'", s.line);
  }
  try {
    return parse_quantity_as(e->value, d);
  } catch (const DomainError& err) {
    throw ConfigError(std::string(key) + ": " + err.what(), e->line);
  }
}

std::string text(const KvSection& s, std::string_view key) {
  const KvEntry* e = s.find(key);
  return e == nullptr ? std::string() : e->value;
}

void check_keys(const KvSection& s, std::initializer_list<std::string_view> allowed) {
  for (const auto& e : s.entries) {
    if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) {
      throw ConfigError("unknown catalog key '" + e.key + "'", e.line);
    }
  }
}

}  // namespace

const std::string& entry_name(const CatalogEntry& e) {
  return std::visit([](const auto& v) -> const std::string& { return v.name; }, e);
}

Catalog Catalog::parse(std::string_view text_in) {
  Catalog c;
  c.merge(text_in);
  return c;
}

void Catalog::merge(std::string_view text_in) {
  const auto sections = parse_keyvalue(text_in);
  const auto& top = sections.front();
  if (const KvEntry* f = top.find("format"); f != nullptr && f->value != "qratio-catalog") {
    throw ConfigError("not a catalog file (format = " + f->value + ")", f->line);
  }
  if (const KvEntry* v = top.find("version"); v != nullptr) {
    if (v->value != "1") throw ConfigError("unsupported catalog version " + v->value, v->line);
    version_ = 1;
  }

  for (std::size_t i = 1; i < sections.size(); ++i) {
    const auto& s = sections[i];
    if (s.argument.empty()) throw ConfigError("catalog section needs a name", s.line);
    CatalogEntry entry;
    if (s.name == "particle") {
      check_keys(s, {"mass", "size", "source"});
      ParticleSpec p{s.argument, quantity(s, "mass", Dimension::Mass),
                     quantity(s, "size", Dimension::Length), text(s, "source")};
      if (!(p.mass > 0.0)) throw ConfigError("particle mass must be > 0", s.line);
      if (!(p.size_L0 >= 0.0)) throw ConfigError("particle size must be >= 0", s.line);
      entry = std::move(p);
    } else if (s.name == "experiment") {
      check_keys(s, {"mass", "size", "quantum_range", "source", "note"});
      ExperimentRecord r;
      r.name = s.argument;
      r.mass = quantity(s, "mass", Dimension::Mass);
      r.mass_amu = r.mass / kAmu;
      r.size_L0 = quantity(s, "size", Dimension::Length);
      r.quantum_range_Rq = quantity(s, "quantum_range", Dimension::Length);
      r.source = text(s, "source");
      r.note = text(s, "note");
      if (!(r.mass > 0.0)) throw ConfigError("experiment mass must be > 0", s.line);
      if (!(r.size_L0 >= 0.0)) throw ConfigError("experiment size must be >= 0", s.line);
      if (!(r.quantum_range_Rq > 0.0)) throw ConfigError("quantum_range must be > 0", s.line);
      entry = std::move(r);
    } else {
      throw ConfigError("unknown catalog section '" + s.name + "'", s.line);
    }
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const CatalogEntry& e) {
      return entry_name(e) == s.argument;
    });
    if (it != entries_.end()) {
      *it = std::move(entry);
    } else {
      entries_.push_back(std::move(entry));
    }
  }
}

const Catalog& Catalog::builtin() {
  static const Catalog c = parse(embedded_catalog_text());
  return c;
}

const CatalogEntry& Catalog::lookup(std::string_view name) const {
  for (const auto& e : entries_) {
    if (entry_name(e) == name) return e;
  }
  std::string msg = "unknown catalog entry '" + std::string(name) + "'; available:";
  for (const auto& n : names()) msg += " " + n;
  throw LookupError(msg);
}

const ParticleSpec& Catalog::particle(std::string_view name) const {
  const auto& e = lookup(name);
  if (const auto* p = std::get_if<ParticleSpec>(&e)) return *p;
  throw LookupError("catalog entry '" + std::string(name) + "' is an experiment, not a particle");
}

const ExperimentRecord& Catalog::experiment(std::string_view name) const {
  const auto& e = lookup(name);
  if (const auto* r = std::get_if<ExperimentRecord>(&e)) return *r;
  throw LookupError("catalog entry '" + std::string(name) + "' is a particle, not an experiment");
}

std::vector<std::string> Catalog::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(entry_name(e));
  return out;
}

std::vector<ExperimentRecord> Catalog::experiments() const {
  std::vector<ExperimentRecord> out;
  for (const auto& e : entries_) {
    if (const auto* r = std::get_if<ExperimentRecord>(&e)) out.push_back(*r);
  }
  return out;
}

}  // namespace qratio
