#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qratio::io {

// Shortest text that reads back to the same double (std::to_chars).
std::string format_double(double v);

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

enum class TableFormat { Csv, Json };

std::string_view format_extension(TableFormat f);  // "csv" or "json"
TableFormat format_from_name(std::string_view name);

// Header line plus one line per row; strings with ',' or '"' are quoted.
std::string to_csv(const Table& table);
// Array of row objects keyed by column name.
std::string to_json(const Table& table);
std::string render_table(const Table& table, TableFormat format);

// A 2D array of float64 samples on a uniform (rows, cols) lattice.
struct Heatmap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double row_origin = 0.0;
  double row_step = 1.0;
  double col_origin = 0.0;
  double col_step = 1.0;
  std::vector<double> values;  // row-major, rows * cols

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

inline constexpr char kQrgridMagic[8] = {'Q', 'R', 'G', 'R', 'I', 'D', '\0', '\0'};
inline constexpr std::uint32_t kQrgridVersion = 1;
inline constexpr std::size_t kQrgridHeaderBytes = 64;

// QRGRID layout, all little-endian:
//   0  magic "QRGRID\0\0"        8 bytes
//   8  version (1)              uint32
//  12  dimensions (2)           uint32
//  16  rows                     uint64
//  24  cols                     uint64
//  32  row origin, row step     2 x float64
//  48  col origin, col step     2 x float64
//  64  samples                  rows * cols float64, row-major
std::string encode_qrgrid(const Heatmap& map);
// Throws ConfigError on a bad magic, version or size.
Heatmap decode_qrgrid(std::string_view bytes);

// Binary 8-bit greyscale (P5), rows top to bottom, scaled to the maximum.
std::string render_pgm(const Heatmap& map);
// Block-averaged to at most max_cells per side, one rect per block.
std::string render_svg_heatmap(const Heatmap& map, std::size_t max_cells = 160);
// One bar per (position, height) pair.
std::string render_svg_bars(const std::vector<double>& positions, const std::vector<double>& heights,
                            std::string_view x_label);

std::string sha256_hex(std::string_view bytes);

// Writes to <path>.tmp and renames over <path>.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace qratio::io
