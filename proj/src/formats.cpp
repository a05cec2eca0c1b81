#include "qratio/formats.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qratio/error.hpp"

static_assert(std::endian::native == std::endian::little, "QRGRID writer assumes a little-endian host");

namespace qratio::io {

namespace {

template <class V>
void put(std::string& out, V v) {
  char buf[sizeof(V)];
  std::memcpy(buf, &v, sizeof(V));
  out.append(buf, sizeof(V));
}

template <class V>
V take(std::string_view bytes, std::size_t offset) {
  V v;
  std::memcpy(&v, bytes.data() + offset, sizeof(V));
  return v;
}

std::string csv_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw DomainError("table row has the wrong number of cells");
  rows.push_back(std::move(row));
}

std::string_view format_extension(TableFormat f) { return f == TableFormat::Csv ? "csv" : "json"; }

TableFormat format_from_name(std::string_view name) {
  if (name == "csv") return TableFormat::Csv;
  if (name == "json") return TableFormat::Json;
  throw ConfigError("unknown format '" + std::string(name) + "' (valid: csv, json)");
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_cell(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& table) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { obj[table.columns[i]] = v; }, row[i]);
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string render_table(const Table& table, TableFormat format) {
  return format == TableFormat::Csv ? to_csv(table) : to_json(table);
}

std::string encode_qrgrid(const Heatmap& map) {
  if (map.values.size() != map.rows * map.cols) throw DomainError("heatmap size does not match its shape");
  std::string out(kQrgridMagic, sizeof kQrgridMagic);
  put<std::uint32_t>(out, kQrgridVersion);
  put<std::uint32_t>(out, 2);
  put<std::uint64_t>(out, map.rows);
  put<std::uint64_t>(out, map.cols);
  put(out, map.row_origin);
  put(out, map.row_step);
  put(out, map.col_origin);
  put(out, map.col_step);
  out.append(reinterpret_cast<const char*>(map.values.data()), map.values.size() * sizeof(double));
  return out;
}

Heatmap decode_qrgrid(std::string_view bytes) {
  if (bytes.size() < kQrgridHeaderBytes || std::memcmp(bytes.data(), kQrgridMagic, 8) != 0) {
    throw ConfigError("not a QRGRID file");
  }
  if (take<std::uint32_t>(bytes, 8) != kQrgridVersion || take<std::uint32_t>(bytes, 12) != 2) {
    throw ConfigError("unsupported QRGRID version or dimension count");
  }
  Heatmap m;
  m.rows = take<std::uint64_t>(bytes, 16);
  m.cols = take<std::uint64_t>(bytes, 24);
  m.row_origin = take<double>(bytes, 32);
  m.row_step = take<double>(bytes, 40);
  m.col_origin = take<double>(bytes, 48);
  m.col_step = take<double>(bytes, 56);
  if (m.cols != 0 && m.rows > (bytes.size() - kQrgridHeaderBytes) / sizeof(double) / m.cols) {
    throw ConfigError("QRGRID payload is truncated");
  }
  if (bytes.size() != kQrgridHeaderBytes + m.rows * m.cols * sizeof(double)) {
    throw ConfigError("QRGRID payload size does not match the header");
  }
  m.values.resize(m.rows * m.cols);
  std::memcpy(m.values.data(), bytes.data() + kQrgridHeaderBytes, m.values.size() * sizeof(double));
  return m;
}

std::string render_pgm(const Heatmap& map) {
  double peak = 0.0;
  for (double v : map.values) peak = std::max(peak, v);
  std::string out = "P5\n" + std::to_string(map.cols) + " " + std::to_string(map.rows) + "\n255\n";
  out.reserve(out.size() + map.values.size());
  for (double v : map.values) {
    const double s = peak > 0.0 ? std::clamp(v / peak, 0.0, 1.0) : 0.0;
    out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * s)));
  }
  return out;
}

std::string render_svg_heatmap(const Heatmap& map, std::size_t max_cells) {
  const std::size_t br = std::max<std::size_t>(1, (map.rows + max_cells - 1) / max_cells);
  const std::size_t bc = std::max<std::size_t>(1, (map.cols + max_cells - 1) / max_cells);
  const std::size_t nr = (map.rows + br - 1) / br;
  const std::size_t nc = (map.cols + bc - 1) / bc;
  std::vector<double> cells(nr * nc, 0.0);
  double peak = 0.0;
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = r * br; i < std::min(map.rows, (r + 1) * br); ++i) {
        for (std::size_t j = c * bc; j < std::min(map.cols, (c + 1) * bc); ++j) {
          sum += map.at(i, j);
          ++count;
        }
      }
      cells[r * nc + c] = sum / static_cast<double>(count);
      peak = std::max(peak, cells[r * nc + c]);
    }
  }
  const double cell = 4.0;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_number(cell * nc) +
                    "\" height=\"" + svg_number(cell * nr) + "\" shape-rendering=\"crispEdges\">\n";
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      const int g = peak > 0.0 ? static_cast<int>(std::lround(255.0 * cells[r * nc + c] / peak)) : 0;
      out += "<rect x=\"" + svg_number(cell * c) + "\" y=\"" + svg_number(cell * r) + "\" width=\"" +
             svg_number(cell) + "\" height=\"" + svg_number(cell) + "\" fill=\"rgb(" + std::to_string(g) + "," +
             std::to_string(g) + "," + std::to_string(g) + ")\"/>\n";
    }
  }
  return out + "</svg>\n";
}

std::string render_svg_bars(const std::vector<double>& positions, const std::vector<double>& heights,
                            std::string_view x_label) {
  if (positions.size() != heights.size() || positions.empty()) throw DomainError("bar chart needs matching data");
  const auto [lo, hi] = std::minmax_element(positions.begin(), positions.end());
  const double peak = *std::max_element(heights.begin(), heights.end());
  const double width = 640.0, height = 320.0, margin = 40.0;
  const double span = *hi > *lo ? *hi - *lo : 1.0;
  const double bar = std::max(1.0, (width - 2 * margin) / static_cast<double>(positions.size()) * 0.8);
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_number(width) + "\" height=\"" +
                    svg_number(height) + "\">\n";
  out += "<line x1=\"" + svg_number(margin) + "\" y1=\"" + svg_number(height - margin) + "\" x2=\"" +
         svg_number(width - margin) + "\" y2=\"" + svg_number(height - margin) + "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double x = margin + (positions[i] - *lo) / span * (width - 2 * margin - bar);
    const double h = peak > 0.0 ? heights[i] / peak * (height - 2 * margin) : 0.0;
    out += "<rect x=\"" + svg_number(x) + "\" y=\"" + svg_number(height - margin - h) + "\" width=\"" +
           svg_number(bar) + "\" height=\"" + svg_number(h) + "\" fill=\"steelblue\"/>\n";
  }
  out += "<text x=\"" + svg_number(width / 2) + "\" y=\"" + svg_number(height - 10) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + std::string(x_label) + "</text>\n";
  return out + "</svg>\n";
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qratio::io
