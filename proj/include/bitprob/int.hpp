#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace bitprob {

// Arbitrary-precision integer. All measure arithmetic is exact; hot loops
// work on raw integers over implicit common denominators and only convert
// to Rational at the edges.
using Int = mpz_class;

inline std::size_t bit_length(const Int& v) {
  return v == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2);
}

inline Int pow2(std::size_t e) {
  Int r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), e);
  return r;
}

// v * 2^e
inline Int shl(const Int& v, std::size_t e) {
  Int r;
  mpz_mul_2exp(r.get_mpz_t(), v.get_mpz_t(), e);
  return r;
}

// floor(v / 2^e)
inline Int shr(const Int& v, std::size_t e) {
  Int r;
  mpz_fdiv_q_2exp(r.get_mpz_t(), v.get_mpz_t(), e);
  return r;
}

// ceil(a / b), b > 0
inline Int ceil_div(const Int& a, const Int& b) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

// index of lowest set bit; v must be nonzero
inline std::size_t trailing_zeros(const Int& v) {
  return mpz_scan1(v.get_mpz_t(), 0);
}

inline Int ipow(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Int factorial(unsigned long n) {
  Int r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

inline Int binomial(unsigned long n, unsigned long k) {
  Int r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

inline Int lcm(const Int& a, const Int& b) {
  Int r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline Int gcd(const Int& a, const Int& b) {
  Int r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline void divexact_inplace(Int& v, const Int& d) {
  mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), d.get_mpz_t());
}

inline Int from_u64(std::uint64_t v) {
  static_assert(sizeof(unsigned long) == 8, "64-bit platform expected");
  return Int(static_cast<unsigned long>(v));
}

}  // namespace bitprob
