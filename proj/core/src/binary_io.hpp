#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "carol/error.hpp"

namespace carol::bin {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(buf, 8);
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int k = 0; k < 4; ++k) buf[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(buf, 4);
}

inline void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void read_exact(std::istream& in, char* buf, std::size_t n) {
  if (!in.read(buf, static_cast<std::streamsize>(n))) throw DataError("truncated binary data");
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  read_exact(in, reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | buf[k];
  return v;
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  read_exact(in, reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | buf[k];
  return v;
}

inline std::uint8_t get_u8(std::istream& in) {
  char c;
  read_exact(in, &c, 1);
  return static_cast<std::uint8_t>(c);
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline void put_magic(std::ostream& out, const char (&magic)[9]) { out.write(magic, 8); }

inline void expect_magic(std::istream& in, const char (&magic)[9]) {
  char buf[8];
  read_exact(in, buf, 8);
  if (std::memcmp(buf, magic, 8) != 0) throw DataError(std::string("bad magic, expected ") + magic);
}

}  // namespace carol::bin
