#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bitprob/int.hpp"

namespace bitprob {

// Exact rational in canonical form: gcd(|num|, den) = 1, den > 0.
// All probability masses, interval endpoints and likelihood ratios are
// values of this type; nothing decision-relevant is ever rounded.
class Rational {
 public:
  Rational() : q_(0) {}
  Rational(long v) : q_(v) {}  // NOLINT: implicit by design
  Rational(const Int& v) : q_(v) {}
  Rational(const Int& num, const Int& den) : q_(num, den) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    q_.canonicalize();
  }

  static Rational parse(std::string_view s);

  // Serialized as "num/den", denominator always present ("3/8", "1/1").
  std::string str() const {
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
  }

  Int num() const { return q_.get_num(); }
  Int den() const { return q_.get_den(); }
  int sign() const { return mpq_sgn(q_.get_mpq_t()); }
  bool is_zero() const { return sign() == 0; }
  bool is_one() const { return q_ == 1; }

  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(a.q_ + b.q_); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(a.q_ - b.q_); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(a.q_ * b.q_); }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw std::domain_error("Rational: division by zero");
    return Rational(a.q_ / b.q_);
  }
  Rational operator-() const { return Rational(Int(0)) - *this; }
  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.q_ != b.q_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.q_ < b.q_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.q_ <= b.q_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.q_ > b.q_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.q_ >= b.q_; }

  // Sign of (*this - 2^e); exact.
  int cmp_pow2(long e) const {
    Int lhs = num(), rhs = den();
    if (e >= 0) rhs = shl(rhs, static_cast<std::size_t>(e));
    else lhs = shl(lhs, static_cast<std::size_t>(-e));
    return cmp(lhs, rhs);
  }

  // Largest e with 2^e <= *this; requires a positive value.
  long floor_log2() const {
    if (sign() <= 0) throw std::domain_error("floor_log2: nonpositive value");
    long e = static_cast<long>(bit_length(num())) - static_cast<long>(bit_length(den()));
    if (cmp_pow2(e) < 0) --e;
    return e;
  }

  // floor(2^frac_bits * log2(*this)), exact. Reporting-only in callers;
  // verdicts never consult it.
  std::int64_t log2_fixed(unsigned frac_bits = 10) const;

  const mpq_class& raw() const { return q_; }

 private:
  explicit Rational(mpq_class q) : q_(std::move(q)) {}
  mpq_class q_;
};

inline Rational Rational::parse(std::string_view s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string_view::npos) return Rational(Int(std::string(s)));
    Int n{std::string(s.substr(0, slash))};
    Int d{std::string(s.substr(slash + 1))};
    return Rational(n, d);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("Rational: cannot parse \"" + std::string(s) + "\"");
  }
}

// Mantissa bits are extracted by exact squaring: maintain integer lower and
// upper bounds of m * 2^W for m in [1,2), square, compare against 2 * 2^W.
// If the bracket straddles the comparison the working precision W is doubled
// and the whole extraction restarts, so every emitted bit is exact.
inline std::int64_t Rational::log2_fixed(unsigned frac_bits) const {
  if (sign() <= 0) throw std::domain_error("log2_fixed: nonpositive value");
  const long e = floor_log2();
  // m = value / 2^e in [1,2); exact power of two => all fractional bits 0
  Int mnum = num(), mden = den();
  if (e >= 0) mden = shl(mden, static_cast<std::size_t>(e));
  else mnum = shl(mnum, static_cast<std::size_t>(-e));
  if (mnum == mden) return static_cast<std::int64_t>(e) << frac_bits;

  for (std::size_t w = 64;; w *= 2) {
    Int lo, rem;
    mpz_fdiv_qr(lo.get_mpz_t(), rem.get_mpz_t(), shl(mnum, w).get_mpz_t(), mden.get_mpz_t());
    Int hi = lo;
    if (rem != 0) hi += 1;
    std::int64_t frac = 0;
    bool ambiguous = false;
    const Int two_w1 = pow2(w + 1);
    for (unsigned i = 0; i < frac_bits; ++i) {
      lo = shr(lo * lo, w);
      Int h2 = hi * hi;
      hi = shr(h2, w);
      if ((hi << w) != h2) hi += 1;  // ceil
      frac <<= 1;
      if (lo >= two_w1) {
        frac |= 1;
        lo = shr(lo, 1);
        hi = ceil_div(hi, Int(2));
      } else if (hi <= two_w1) {
        // a mantissa power never lands exactly on 2, so hi == 2*2^w still means "< 2"
      } else {
        ambiguous = true;
        break;
      }
    }
    if (!ambiguous) return (static_cast<std::int64_t>(e) << frac_bits) + frac;
  }
}

}  // namespace bitprob
