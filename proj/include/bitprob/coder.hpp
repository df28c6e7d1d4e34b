#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "bitprob/measure.hpp"
#include "bitprob/product.hpp"

namespace bitprob {

struct UnencodableError : std::runtime_error {
  UnencodableError() : std::runtime_error("unencodable: zero-mass string") {}
};
struct NotAGridCellError : std::invalid_argument {
  NotAGridCellError() : std::invalid_argument("not a grid cell") {}
};
struct InsufficientConditionError : std::invalid_argument {
  InsufficientConditionError() : std::invalid_argument("insufficient condition bits") {}
};

// Program p read as the dyadic interval [0.p, 0.p + 2^-|p|).
struct CodeWord {
  BitString bits;

  std::size_t length() const { return bits.size(); }
  Rational lo() const { return Rational(bits.to_index(), pow2(bits.size())); }
  Rational hi() const { return Rational(Int(bits.to_index() + 1), pow2(bits.size())); }
};

struct RatInterval {
  Rational lo;
  Rational hi;  // half-open [lo, hi)
};

namespace detail {

// Half-open subinterval of [0,1) as integers: [lo/den, (lo+width)/den).
// Children split the parent left-to-right, 0 before 1, widths equal to the
// child masses; this is the lazily refined interval family of the codec.
struct IntervalState {
  Int lo = 0;
  Int width = 1;
  Int den = 1;
  unsigned steps = 0;

  bool dead() const { return width == 0; }

  void step(const StepRatio& one, int bit) {
    Int w1 = width * one.num;
    if (bit) {
      lo = lo * one.den + (width * one.den - w1);
      width = std::move(w1);
    } else {
      lo = lo * one.den;
      width = width * one.den - w1;
    }
    den *= one.den;
    if ((++steps & 63) == 0) reduce();
  }

  // per-step ratios can overcount the true denominator; periodically strip
  // the common factor so the state stays near its reduced size
  void reduce() {
    if (width == 0) return;
    Int g = gcd(gcd(lo, width), den);
    if (g > 1) {
      divexact_inplace(lo, g);
      divexact_inplace(width, g);
      divexact_inplace(den, g);
    }
  }

  // Does this interval contain [k/2^L, (k+1)/2^L)?
  bool contains_dyadic(const Int& k, std::size_t levels) const {
    if (width == 0) return false;
    if (k * den < shl(lo, levels)) return false;
    return (k + 1) * den <= shl(lo + width, levels);
  }

  // floor(-log2(width/den)); width > 0
  std::size_t floor_neg_log2() const {
    long e = static_cast<long>(bit_length(den)) - static_cast<long>(bit_length(width));
    if (e > 0 && shl(width, static_cast<std::size_t>(e)) > den) --e;  // now 2^e <= den/width < 2^(e+1)
    return static_cast<std::size_t>(e < 0 ? 0 : e);
  }

  // Shortest dyadic interval inside, leftmost among the shortest. An interval
  // of mass P always admits |p| <= floor(-log2 P) + 2.
  BitString codeword() const {
    if (width == 0) throw UnencodableError();
    std::size_t e = floor_neg_log2();
    std::size_t lmin = (shl(width, e) == den) ? e : e + 1;
    for (std::size_t levels = lmin; levels <= e + 2; ++levels) {
      Int k = ceil_div(shl(lo, levels), den);
      if ((k + 1) * den <= shl(lo + width, levels)) return BitString::from_index(k, levels);
    }
    throw std::logic_error("codeword: +2 slack exhausted");
  }

  RatInterval to_interval() const {
    return {Rational(lo, den), Rational(Int(lo + width), den)};
  }
};

}  // namespace detail

// The half-open interval V_x assigned to x by the measure's interval family.
inline RatInterval interval_of(const Measure& m, const BitString& x) {
  detail::IntervalState st;
  auto cur = m.cursor();
  for (std::size_t i = 0; i < x.size(); ++i) {
    st.step(cur->one_probability(), x[i]);
    cur->advance(x[i]);
  }
  return st.to_interval();
}

inline CodeWord encode(const Measure& m, const BitString& x) {
  detail::IntervalState st;
  auto cur = m.cursor();
  for (std::size_t i = 0; i < x.size(); ++i) {
    st.step(cur->one_probability(), x[i]);
    if (st.dead()) throw UnencodableError();
    cur->advance(x[i]);
  }
  return {st.codeword()};
}

// Longest x with I_p inside V_x, monotone in p. Output is truncated at
// max_len bits (the machine is run for finitely many steps); deterministic
// measures have unbounded decodes otherwise.
inline BitString decode(const Measure& m, const CodeWord& p, std::size_t max_len = 4096) {
  const std::size_t levels = p.bits.size();
  const Int k = p.bits.to_index();
  detail::IntervalState st;
  auto cur = m.cursor();
  BitString x;
  while (x.size() < max_len) {
    StepRatio r = cur->one_probability();
    int chosen = -1;
    for (int bit = 0; bit < 2; ++bit) {
      detail::IntervalState child = st;
      child.step(r, bit);
      if (child.contains_dyadic(k, levels)) {
        st = std::move(child);
        chosen = bit;
        break;
      }
    }
    if (chosen < 0) break;
    cur->advance(chosen);
    x.push_back(chosen);
  }
  return x;
}

// Interval codec over the grid of cells (x, y) with |y| = g(|x|). Children of
// a cell extend x by one bit and y up to the next grid depth, allocated
// left-to-right in lexicographic (x-bit, y-extension) order.
class GridCoder {
 public:
  GridCoder(const ProductMeasure& pm, RateFunction g) : pm_(&pm), g_(g) {}

  bool on_grid(const BitString& x, const BitString& y) const { return y.size() == g_(x.size()); }
  const RateFunction& rate() const { return g_; }

  // Interval assigned to an on-grid cell; |V| = mass2(x, y) exactly.
  RatInterval cell_interval(const BitString& x, const BitString& y) const {
    if (!on_grid(x, y)) throw NotAGridCellError();
    detail::IntervalState st;
    auto cur = pm_->cursor();
    std::size_t ylen = 0;
    auto refine_y_to = [&](std::size_t target) {
      for (; ylen < target; ++ylen) {
        st.step(cur->y_one_probability(), y[ylen]);
        cur->advance_y(y[ylen]);
      }
    };
    refine_y_to(g_(0));
    for (std::size_t i = 0; i < x.size(); ++i) {
      st.step(cur->x_one_probability(), x[i]);
      cur->advance_x(x[i]);
      refine_y_to(g_(i + 1));
    }
    return st.to_interval();
  }

  CodeWord encode_pair(const BitString& x, const BitString& y) const {
    if (!on_grid(x, y)) throw NotAGridCellError();
    detail::IntervalState st;
    auto cur = pm_->cursor();
    std::size_t ylen = 0;
    auto refine_y_to = [&](std::size_t target) {
      for (; ylen < target; ++ylen) {
        st.step(cur->y_one_probability(), y[ylen]);
        if (st.dead()) throw UnencodableError();
        cur->advance_y(y[ylen]);
      }
    };
    refine_y_to(g_(0));
    for (std::size_t i = 0; i < x.size(); ++i) {
      st.step(cur->x_one_probability(), x[i]);
      if (st.dead()) throw UnencodableError();
      cur->advance_x(x[i]);
      refine_y_to(g_(i + 1));
    }
    return {st.codeword()};
  }

  // Deepest grid cell whose interval contains I_p; monotone in p.
  std::pair<BitString, BitString> decode_pair(const CodeWord& p, std::size_t max_bits = 4096) const {
    const std::size_t levels = p.bits.size();
    const Int k = p.bits.to_index();
    detail::IntervalState st;
    auto cur = pm_->cursor();
    BitString x, y, gx, gy;
    auto descend = [&](bool ydim) -> bool {
      StepRatio r = ydim ? cur->y_one_probability() : cur->x_one_probability();
      for (int bit = 0; bit < 2; ++bit) {
        detail::IntervalState child = st;
        child.step(r, bit);
        if (child.contains_dyadic(k, levels)) {
          st = std::move(child);
          if (ydim) {
            cur->advance_y(bit);
            y.push_back(bit);
          } else {
            cur->advance_x(bit);
            x.push_back(bit);
          }
          return true;
        }
      }
      return false;
    };
    while (x.size() + y.size() < max_bits) {
      bool ystep = y.size() < g_(x.size());
      if (!descend(ystep)) break;
      if (y.size() == g_(x.size())) {
        gx = x;
        gy = y;
      }
    }
    return {gx, gy};
  }

 private:
  const ProductMeasure* pm_;
  RateFunction g_;
};

// One step of the chained conditional distribution: probability that the next
// sample bit is 0 given x and the first g(|x|+1) condition bits. Depends only
// on that prefix of y.
inline Rational cond_next(const ProductMeasure& pm, const RateFunction& g, const BitString& x,
                          const BitString& y) {
  const std::size_t need = g(x.size() + 1);
  if (y.size() < need) throw InsufficientConditionError();
  auto cur = pm.cursor();
  for (std::size_t j = 0; j < need; ++j) {
    StepRatio r = cur->y_one_probability();
    if ((y[j] ? r.num : Int(r.den - r.num)) == 0)
      throw std::domain_error("cond_next: zero-mass condition");
    cur->advance_y(y[j]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    StepRatio r = cur->x_one_probability();
    Int chosen = x[i] ? r.num : Int(r.den - r.num);
    if (chosen == 0) throw std::domain_error("cond_next: zero conditional mass");
    cur->advance_x(x[i]);
  }
  StepRatio r = cur->x_one_probability();
  return Rational(Int(r.den - r.num), r.den);
}

// Arithmetic code of x under the sequential conditional chain: the step for
// bit i+1 conditions on exactly the first g(i+1) bits of y.
inline CodeWord encode_cond(const ProductMeasure& pm, const RateFunction& g, const BitString& x,
                            const BitString& y) {
  if (y.size() < g(x.size())) throw InsufficientConditionError();
  detail::IntervalState st;
  auto cur = pm.cursor();
  std::size_t ylen = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t need = g(i + 1);
    for (; ylen < need && ylen < y.size(); ++ylen) {
      StepRatio r = cur->y_one_probability();
      if ((y[ylen] ? r.num : Int(r.den - r.num)) == 0) throw UnencodableError();
      cur->advance_y(y[ylen]);
    }
    st.step(cur->x_one_probability(), x[i]);
    if (st.dead()) throw UnencodableError();
    cur->advance_x(x[i]);
  }
  return {st.codeword()};
}

// Monotone in p and in y: consumes condition bits lazily and returns the
// longest x decodable with the bits available.
inline BitString decode_cond(const ProductMeasure& pm, const RateFunction& g, const CodeWord& p,
                             const BitString& y, std::size_t max_len = 4096) {
  const std::size_t levels = p.bits.size();
  const Int k = p.bits.to_index();
  detail::IntervalState st;
  auto cur = pm.cursor();
  std::size_t ylen = 0;
  BitString x;
  while (x.size() < max_len) {
    const std::size_t need = g(x.size() + 1);
    if (need > y.size()) break;
    for (; ylen < need; ++ylen) cur->advance_y(y[ylen]);
    StepRatio r = cur->x_one_probability();
    int chosen = -1;
    for (int bit = 0; bit < 2; ++bit) {
      detail::IntervalState child = st;
      child.step(r, bit);
      if (child.contains_dyadic(k, levels)) {
        st = std::move(child);
        chosen = bit;
        break;
      }
    }
    if (chosen < 0) break;
    cur->advance_x(chosen);
    x.push_back(chosen);
  }
  return x;
}

}  // namespace bitprob
