#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "bitprob/coder.hpp"
#include "bitprob/measure.hpp"
#include "bitprob/product.hpp"

namespace bitprob {

// Likelihood ratio r(x) = Q(x)/P(x), with r = 0 when P(x) = 0.
inline Rational ratio(const Measure& p, const Measure& q, const BitString& x) {
  Rational px = p.mass(x);
  if (px.is_zero()) return Rational(0);
  return q.mass(x) / px;
}

enum class Verdict {
  ConsistentBoth,  // 2^-t < r < 2^t at this depth
  PNotQ,           // r <= 2^-t: consistent with P, rejected for Q
  QNotP,           // r >= 2^t
  Undecided,       // P(x) = Q(x) = 0
};

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::ConsistentBoth: return "CONSISTENT_BOTH";
    case Verdict::PNotQ: return "P_NOT_Q";
    case Verdict::QNotP: return "Q_NOT_P";
    case Verdict::Undecided: return "UNDECIDED";
  }
  return "?";
}

// Threshold rule on the exact ratio. Under P the chance that r ever reaches
// 2^t is at most 2^-t (Ville's inequality); that bound is documentation, not
// something asserted per run.
inline Verdict classify(const Measure& p, const Measure& q, const BitString& x, unsigned t) {
  if (t < 1) throw std::invalid_argument("classify: threshold must be >= 1 bit");
  Rational px = p.mass(x);
  Rational qx = q.mass(x);
  if (px.is_zero() && qx.is_zero()) return Verdict::Undecided;
  if (px.is_zero()) return Verdict::PNotQ;  // r = 0 by convention
  Rational r = qx / px;
  if (r.cmp_pow2(-static_cast<long>(t)) <= 0) return Verdict::PNotQ;
  if (r.cmp_pow2(static_cast<long>(t)) >= 0) return Verdict::QNotP;
  return Verdict::ConsistentBoth;
}

// Sentinel for log2(0) in fixed-point trace columns.
inline constexpr std::int64_t kLog2Zero = std::numeric_limits<std::int64_t>::min();

struct TracePoint {
  std::size_t n;
  std::int64_t log2r_fixed;  // floor(1024 * log2 r); kLog2Zero when r = 0
  int sign_vs_one;           // exact sign of r - 1
  Rational r;
};

struct MartingaleTrace {
  std::vector<TracePoint> points;

  // running minimum of the exact ratio over all recorded prefixes
  Rational running_min() const {
    Rational m = points.empty() ? Rational(1) : points.front().r;
    for (const auto& p : points)
      if (p.r < m) m = p.r;
    return m;
  }
};

// Exact ratio at every prefix of xs, including the empty one.
inline MartingaleTrace martingale_trace(const Measure& p, const Measure& q, const BitString& xs) {
  MartingaleTrace tr;
  Int pnum = 1, pden = 1, qnum = 1, qden = 1;
  auto pc = p.cursor();
  auto qc = q.cursor();
  bool pzero = false;
  for (std::size_t n = 0; n <= xs.size(); ++n) {
    Rational r = pzero ? Rational(0) : Rational(Int(qnum * pden), Int(qden * pnum));
    std::int64_t l2 = r.is_zero() ? kLog2Zero : r.log2_fixed();
    int sgn = r < Rational(1) ? -1 : (r == Rational(1) ? 0 : 1);
    tr.points.push_back({n, l2, sgn, std::move(r)});
    if (n == xs.size()) break;
    StepRatio rp = pc->one_probability();
    StepRatio rq = qc->one_probability();
    Int cp = xs[n] ? rp.num : Int(rp.den - rp.num);
    Int cq = xs[n] ? rq.num : Int(rq.den - rq.num);
    if (cp == 0) pzero = true;
    pnum *= cp;
    pden *= rp.den;
    qnum *= cq;
    qden *= rq.den;
    pc->advance(xs[n]);
    qc->advance(xs[n]);
  }
  return tr;
}

// Codelength surrogate statistics. Both take an on-grid cell (x, y).

inline long independence_stat(const ProductMeasure& pm, const RateFunction& g, const BitString& x,
                              const BitString& y) {
  GridCoder gc(pm, g);
  long pair_len = static_cast<long>(gc.encode_pair(x, y).length());
  long x_len = static_cast<long>(encode(*pm.marginal_x(), x).length());
  long y_len = static_cast<long>(encode(*pm.marginal_y(), y).length());
  return pair_len - x_len - y_len;
}

inline long decomposition_stat(const ProductMeasure& pm, const RateFunction& g, const BitString& x,
                               const BitString& y) {
  GridCoder gc(pm, g);
  long pair_len = static_cast<long>(gc.encode_pair(x, y).length());
  long cond_len = static_cast<long>(encode_cond(pm, g, x, y).length());
  long y_len = static_cast<long>(encode(*pm.marginal_y(), y).length());
  return pair_len - cond_len - y_len;
}

}  // namespace bitprob
