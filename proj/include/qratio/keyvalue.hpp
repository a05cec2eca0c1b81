#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qratio {

// Line-oriented structured text shared by config, preset and catalog files:
//
//   # comment
//   key = value
//   [section argument]
//   key = value
//
// Entries before the first header belong to an unnamed top-level section.
struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct KvSection {
  std::string name;      // empty for the top-level section
  std::string argument;  // text after the name inside the brackets
  int line = 0;
  std::vector<KvEntry> entries;

  const KvEntry* find(std::string_view key) const;
};

// Throws ConfigError (with line number) on malformed lines.
std::vector<KvSection> parse_keyvalue(std::string_view text);

// Splits a comma-separated list and trims each item.
std::vector<std::string> split_list(std::string_view value);

}  // namespace qratio
