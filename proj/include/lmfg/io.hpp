#pragma once

#include "lmfg/core.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <iosfwd>
#include <string>

namespace lmfg::io {

inline constexpr std::uint32_t kFormatVersion = 1;

/// Header of the binary grid format: magic "LMFG", version, dim, per-axis N,
/// per-axis L, time tag (NaN when absent). All little-endian.
struct GridFileHeader {
  std::uint32_t version = kFormatVersion;
  Grid grid;
  double time_tag = std::numeric_limits<double>::quiet_NaN();
};

/// A decoded file: header plus the raw f64 payload (complex data interleaved).
struct GridFile {
  GridFileHeader header;
  std::vector<double> payload;

  bool is_complex() const { return payload.size() == 2 * static_cast<std::size_t>(header.grid.size()); }
  Field as_field() const;
  ComplexArray as_complex() const;
};

void write_header(std::ostream& os, const GridFileHeader& header);
GridFileHeader read_header(std::istream& is);

void write_field(const std::filesystem::path& path, const Field& field);
void write_complex(const std::filesystem::path& path, const Grid& grid, const ComplexArray& values,
                   std::optional<double> time_tag = std::nullopt);
/// Writes `header` followed by an arbitrary f64 block.
void write_block(const std::filesystem::path& path, const GridFileHeader& header, const std::vector<double>& payload);
GridFile read_grid_file(const std::filesystem::path& path);

/// One line per cell: "x1,...,xd,value".
void write_csv(std::ostream& os, const Field& field);
void write_csv(const std::filesystem::path& path, const Field& field);

}  // namespace lmfg::io
