#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitprob/bitstring.hpp"

namespace bitprob {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Codeword file format: 8-byte little-endian bit count, then the bits packed
// MSB-first into bytes, zero-padded.

inline std::vector<std::uint8_t> pack_codeword(const BitString& p) {
  std::vector<std::uint8_t> out;
  std::uint64_t n = p.size();
  for (int i = 0; i < 8; ++i) out.push_back((std::uint8_t)((n >> (8 * i)) & 0xFF));
  std::uint8_t cur = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cur = (std::uint8_t)(cur | (p[i] << (7 - (i % 8))));
    if (i % 8 == 7) {
      out.push_back(cur);
      cur = 0;
    }
  }
  if (p.size() % 8 != 0) out.push_back(cur);
  return out;
}

inline BitString unpack_codeword(const std::vector<std::uint8_t>& data) {
  if (data.size() < 8) throw IoError("bitstream: truncated header");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= (std::uint64_t)data[(std::size_t)i] << (8 * i);
  if (data.size() != 8 + (n + 7) / 8) throw IoError("bitstream: length mismatch");
  BitString p;
  for (std::uint64_t i = 0; i < n; ++i)
    p.push_back((data[8 + i / 8] >> (7 - (i % 8))) & 1);
  return p;
}

inline void write_codeword_file(const std::string& path, const BitString& p) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path);
  auto data = pack_codeword(p);
  os.write(reinterpret_cast<const char*>(data.data()), (std::streamsize)data.size());
  if (!os) throw IoError("short write to " + path);
}

inline BitString read_codeword_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
  return unpack_codeword(data);
}

}  // namespace bitprob
