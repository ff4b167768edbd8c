#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace omps {

// One saved state. For continuum runs each grid point is its own element:
// mirrors == n_points, points_per_mirror == 1, z == Z and v == dZ/dtau.
struct Snapshot {
  double tau = 0.0;
  std::uint32_t mirrors = 0;
  std::uint32_t points_per_mirror = 0;
  std::vector<double> x;
  std::vector<std::complex<double>> field;
  std::vector<double> Z;
  std::vector<double> z;
  std::vector<double> v;

  std::size_t n_points() const { return x.size(); }
  std::vector<double> intensity() const;
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

// Binary layout, little-endian:
//   "OMPS" | u32 version | f64 tau | u32 N | u32 M | u32 n
//   | f64 x[n] | f64 ReF[n] | f64 ImF[n] | f64 Z[n] | f64 z[N] | f64 v[N]
std::vector<std::uint8_t> encode_snapshot(const Snapshot& s);
// Throws std::runtime_error on a bad magic, version or length.
Snapshot decode_snapshot(std::span<const std::uint8_t> bytes);

void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot read_snapshot(const std::filesystem::path& path);

// "xbar,intensity,Z" table with 17 significant digits.
std::string export_csv(const Snapshot& s);

struct CsvProfile {
  std::vector<double> x, intensity, Z;
};
CsvProfile parse_csv(const std::string& text);

}  // namespace omps
