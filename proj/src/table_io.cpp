#include "dpmd/table_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "dpmd/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "table files are little-endian and this code writes raw values");

namespace dpmd {

namespace {

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InputError("table file truncated");
  return v;
}

} // namespace

void write_tables(const std::string& path, const std::vector<CompressionTable>& tabs) {
  if (tabs.empty()) throw InputError("no tables to write");
  const CompressionTable& t0 = tabs[0];
  for (const auto& t : tabs) {
    if (t.m != t0.m || t.n != t0.n || t.x0 != t0.x0 || t.h != t0.h || t.block != t0.block) {
      throw InputError("tables in one file must share shape and domain");
    }
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open table file for writing: " + path);
  os.write("DPTB", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(tabs.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(t0.m));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(t0.block));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(t0.n));
  put<double>(os, t0.x0);
  put<double>(os, t0.h);
  for (const auto& t : tabs) {
    os.write(reinterpret_cast<const char*>(t.coeffs.data()),
             static_cast<std::streamsize>(t.coeffs.size() * sizeof(double)));
  }
  if (!os) throw InputError("short write to table file: " + path);
}

std::vector<CompressionTable> read_tables(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open table file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "DPTB", 4) != 0) {
    throw InputError("not a table file (bad magic): " + path);
  }
  auto version = get<std::uint32_t>(is);
  if (version != 1) throw InputError("unsupported table file version");
  auto count = get<std::uint32_t>(is);
  auto m = get<std::uint32_t>(is);
  auto block = get<std::uint32_t>(is);
  auto n = get<std::uint64_t>(is);
  auto x0 = get<double>(is);
  auto h = get<double>(is);
  if (count == 0 || m == 0 || block == 0 || n == 0 || !(h > 0.0)) {
    throw InputError("table file header is inconsistent");
  }
  std::vector<CompressionTable> tabs(count);
  for (auto& t : tabs) {
    t.x0 = x0;
    t.h = h;
    t.n = n;
    t.m = static_cast<int>(m);
    t.block = static_cast<int>(block);
    t.coeffs.resize(t.n * t.interval_stride());
    is.read(reinterpret_cast<char*>(t.coeffs.data()),
            static_cast<std::streamsize>(t.coeffs.size() * sizeof(double)));
    if (!is) throw InputError("table file truncated: " + path);
  }
  return tabs;
}

} // namespace dpmd
