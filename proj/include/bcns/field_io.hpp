#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "bcns/field.hpp"

namespace bcns {

// Flat binary container: "BCNS", u32 version, u32 d, u32 N, f64 L, then
// little-endian f64 samples (component-major, row-major). The component
// count follows from the payload size.

inline constexpr std::uint32_t kFieldFormatVersion = 1;

namespace detail {
template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InvalidArgument("truncated field file");
  return v;
}
}  // namespace detail

inline void write_field(const std::string& path, const RealField& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  os.write("BCNS", 4);
  detail::put_le<std::uint32_t>(os, kFieldFormatVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid().dim));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid().points));
  detail::put_le<double>(os, f.grid().half_length);
  os.write(reinterpret_cast<const char*>(f.samples().data()), static_cast<std::streamsize>(f.samples().size_bytes()));
  if (!os) throw InvalidArgument("write failed for " + path);
}

inline RealField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "BCNS", 4) != 0) throw InvalidArgument(path + " is not a field container");
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != kFieldFormatVersion) throw InvalidArgument("unsupported field format version");
  GridSpec g;
  g.dim = static_cast<int>(detail::get_le<std::uint32_t>(is));
  g.points = static_cast<int>(detail::get_le<std::uint32_t>(is));
  g.half_length = detail::get_le<double>(is);
  validate(g);
  std::vector<double> data;
  double v;
  data.reserve(g.size());
  while (is.read(reinterpret_cast<char*>(&v), sizeof v)) data.push_back(v);
  if (data.size() % g.size() != 0) throw InvalidArgument("field payload is not a whole number of components");
  const int comps = static_cast<int>(data.size() / g.size());
  return RealField(g, comps, std::move(data));
}

}  // namespace bcns
