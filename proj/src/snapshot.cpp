#include "omps/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace omps {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace {

constexpr char kMagic[4] = {'O', 'M', 'P', 'S'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  out.insert(out.end(), raw.begin(), raw.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw std::runtime_error("snapshot truncated");
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
  }

  std::vector<double> doubles(std::size_t n) {
    if (pos_ + n * 8 > bytes_.size()) throw std::runtime_error("snapshot truncated");
    std::vector<double> v(n);
    for (auto& x : v) x = get<double>();
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<double> Snapshot::intensity() const {
  std::vector<double> out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = std::norm(field[i]);
  return out;
}

std::vector<std::uint8_t> encode_snapshot(const Snapshot& s) {
  const std::size_t n = s.x.size();
  if (s.field.size() != n || s.Z.size() != n)
    throw std::invalid_argument("snapshot grid arrays have inconsistent lengths");
  if (s.z.size() != s.mirrors || s.v.size() != s.mirrors)
    throw std::invalid_argument("snapshot lattice arrays have inconsistent lengths");
  std::vector<std::uint8_t> out;
  out.reserve(28 + 8 * (4 * n + 2 * s.mirrors));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put(out, kSnapshotVersion);
  put(out, s.tau);
  put(out, s.mirrors);
  put(out, s.points_per_mirror);
  put(out, static_cast<std::uint32_t>(n));
  for (double x : s.x) put(out, x);
  for (const auto& f : s.field) put(out, f.real());
  for (const auto& f : s.field) put(out, f.imag());
  for (double x : s.Z) put(out, x);
  for (double x : s.z) put(out, x);
  for (double x : s.v) put(out, x);
  return out;
}

Snapshot decode_snapshot(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("not an OMPS snapshot (bad magic)");
  Reader r(bytes.subspan(4));
  const auto version = r.get<std::uint32_t>();
  if (version != kSnapshotVersion)
    throw std::runtime_error("unsupported snapshot version " + std::to_string(version));
  Snapshot s;
  s.tau = r.get<double>();
  s.mirrors = r.get<std::uint32_t>();
  s.points_per_mirror = r.get<std::uint32_t>();
  const auto n = r.get<std::uint32_t>();
  if (static_cast<std::uint64_t>(s.mirrors) * s.points_per_mirror != n)
    throw std::runtime_error("snapshot header: N*M does not match n_points");
  s.x = r.doubles(n);
  const auto re = r.doubles(n);
  const auto im = r.doubles(n);
  s.field.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.field[i] = {re[i], im[i]};
  s.Z = r.doubles(n);
  s.z = r.doubles(s.mirrors);
  s.v = r.doubles(s.mirrors);
  if (!r.done()) throw std::runtime_error("snapshot has trailing bytes");
  return s;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  const auto bytes = encode_snapshot(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

std::string export_csv(const Snapshot& s) {
  std::string out = "xbar,intensity,Z\n";
  char line[96];
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", s.x[i], std::norm(s.field[i]),
                  s.Z[i]);
    out += line;
  }
  return out;
}

CsvProfile parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "xbar,intensity,Z")
    throw std::runtime_error("unexpected CSV header");
  CsvProfile p;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double a, b, c;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
      throw std::runtime_error("malformed CSV line " + std::to_string(lineno));
    p.x.push_back(a);
    p.intensity.push_back(b);
    p.Z.push_back(c);
  }
  return p;
}

}  // namespace omps
