#include "lmfg/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

namespace lmfg::io {
namespace {

static_assert(std::endian::native == std::endian::little, "binary grid format assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("grid file: truncated header");
  return v;
}

}  // namespace

void write_header(std::ostream& os, const GridFileHeader& header) {
  os.write("LMFG", 4);
  put<std::uint32_t>(os, header.version);
  const int d = header.grid.dim();
  put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  for (int a = 0; a < d; ++a) put<std::uint32_t>(os, static_cast<std::uint32_t>(header.grid.points(a)));
  for (int a = 0; a < d; ++a) put<double>(os, header.grid.half_extent(a));
  put<double>(os, header.time_tag);
}

GridFileHeader read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "LMFG", 4) != 0) throw std::runtime_error("grid file: bad magic");
  GridFileHeader h;
  h.version = get<std::uint32_t>(is);
  if (h.version != kFormatVersion) throw std::runtime_error("grid file: unsupported version");
  const auto d = get<std::uint32_t>(is);
  if (d == 0 || d > 16) throw std::runtime_error("grid file: bad dimension");
  std::vector<int> n(d);
  std::vector<double> l(d);
  for (auto& v : n) v = static_cast<int>(get<std::uint32_t>(is));
  for (auto& v : l) v = get<double>(is);
  h.grid = Grid(l, n);
  h.time_tag = get<double>(is);
  return h;
}

void write_block(const std::filesystem::path& path, const GridFileHeader& header, const std::vector<double>& payload) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_header(os, header);
  os.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(double)));
}

void write_field(const std::filesystem::path& path, const Field& field) {
  GridFileHeader h;
  h.grid = field.grid;
  if (field.time) h.time_tag = *field.time;
  write_block(path, h, std::vector<double>(field.values.data(), field.values.data() + field.values.size()));
}

void write_complex(const std::filesystem::path& path, const Grid& grid, const ComplexArray& values,
                   std::optional<double> time_tag) {
  GridFileHeader h;
  h.grid = grid;
  if (time_tag) h.time_tag = *time_tag;
  std::vector<double> payload(2 * values.size());
  for (Index i = 0; i < values.size(); ++i) {
    payload[2 * i] = values[i].real();
    payload[2 * i + 1] = values[i].imag();
  }
  write_block(path, h, payload);
}

GridFile read_grid_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  GridFile f;
  f.header = read_header(is);
  std::vector<char> rest((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (rest.size() % sizeof(double) != 0) throw std::runtime_error("grid file: payload not a whole number of f64");
  f.payload.resize(rest.size() / sizeof(double));
  std::memcpy(f.payload.data(), rest.data(), rest.size());
  return f;
}

Field GridFile::as_field() const {
  if (payload.size() != static_cast<std::size_t>(header.grid.size()))
    throw std::runtime_error("grid file: payload is not a real field on the header grid");
  RealArray v = Eigen::Map<const RealArray>(payload.data(), header.grid.size());
  std::optional<double> t;
  if (!std::isnan(header.time_tag)) t = header.time_tag;
  return Field(header.grid, std::move(v), t);
}

ComplexArray GridFile::as_complex() const {
  if (!is_complex()) throw std::runtime_error("grid file: payload is not complex");
  ComplexArray v(header.grid.size());
  for (Index i = 0; i < v.size(); ++i) v[i] = Complex(payload[2 * i], payload[2 * i + 1]);
  return v;
}

void write_csv(std::ostream& os, const Field& field) {
  os << std::setprecision(17);
  for (Index i = 0; i < field.grid.size(); ++i) {
    for (double x : field.grid.point(i)) os << x << ',';
    os << field.values[i] << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Field& field) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(os, field);
}

}  // namespace lmfg::io
