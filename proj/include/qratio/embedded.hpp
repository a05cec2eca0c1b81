#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace qratio {

// Text of data/catalog.qcat, compiled in.
std::string_view embedded_catalog_text();

// (name, text) of every presets/*.qcfg file, compiled in, sorted by name.
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_presets();

}  // namespace qratio
