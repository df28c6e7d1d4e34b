#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bitprob/int.hpp"

namespace bitprob {

// Finite binary string. The empty string is the unique length-0 value; the
// prefix order and cylinder structure of the library live on this type.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::string_view s) {
    bits_.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("BitString: expected only 0/1");
      bits_.push_back(static_cast<std::uint8_t>(c - '0'));
    }
  }

  static BitString zeros(std::size_t n) {
    BitString b;
    b.bits_.assign(n, 0);
    return b;
  }

  // Binary expansion of value, MSB first, exactly width bits (value < 2^width).
  static BitString from_index(const Int& value, std::size_t width) {
    BitString b;
    b.bits_.resize(width);
    for (std::size_t i = 0; i < width; ++i)
      b.bits_[width - 1 - i] = mpz_tstbit(value.get_mpz_t(), i) ? 1 : 0;
    return b;
  }

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  int operator[](std::size_t i) const { return bits_[i]; }

  void push_back(int bit) { bits_.push_back(static_cast<std::uint8_t>(bit & 1)); }
  void append(const BitString& o) { bits_.insert(bits_.end(), o.bits_.begin(), o.bits_.end()); }

  BitString prefix(std::size_t n) const {
    BitString b;
    n = n < size() ? n : size();
    b.bits_.assign(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(n));
    return b;
  }

  bool is_prefix_of(const BitString& o) const {
    if (size() > o.size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (bits_[i] != o.bits_[i]) return false;
    return true;
  }

  std::size_t count_ones() const {
    std::size_t k = 0;
    for (auto b : bits_) k += b;
    return k;
  }

  // Value as an integer, MSB first; the string read as the binary numeral.
  Int to_index() const {
    Int v = 0;
    for (auto b : bits_) {
      v <<= 1;
      if (b) v += 1;
    }
    return v;
  }

  std::string str() const {
    std::string s;
    s.reserve(size());
    for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  friend bool operator==(const BitString& a, const BitString& b) { return a.bits_ == b.bits_; }
  friend bool operator!=(const BitString& a, const BitString& b) { return a.bits_ != b.bits_; }
  friend bool operator<(const BitString& a, const BitString& b) { return a.bits_ < b.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace bitprob
