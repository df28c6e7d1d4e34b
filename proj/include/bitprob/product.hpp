#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bitprob/measure.hpp"

namespace bitprob {

// Sequential evaluator of a product measure along paths that may extend the
// two coordinates in any order. Ratios are exact conditionals of the joint
// mass; dead (zero-mass) prefixes report {0, 1}.
class PairCursor {
 public:
  virtual ~PairCursor() = default;
  virtual StepRatio x_one_probability() const = 0;  // mass2(x1, y) / mass2(x, y)
  virtual StepRatio y_one_probability() const = 0;  // mass2(x, y1) / mass2(x, y)
  virtual void advance_x(int bit) = 0;
  virtual void advance_y(int bit) = 0;
  virtual std::unique_ptr<PairCursor> clone() const = 0;
};

// Probability measure on pairs of binary strings with additivity in each
// coordinate and marginal measures on both axes.
class ProductMeasure {
 public:
  virtual ~ProductMeasure() = default;
  virtual std::unique_ptr<PairCursor> cursor() const = 0;
  virtual MeasurePtr marginal_x() const = 0;
  virtual MeasurePtr marginal_y() const = 0;

  virtual Rational mass2(const BitString& x, const BitString& y) const {
    Int num = 1, den = 1;
    std::size_t steps = 0;
    auto shrink = [&] {
      if ((++steps & 63) != 0) return;
      Int g = gcd(num, den);
      if (g > 1) {
        divexact_inplace(num, g);
        divexact_inplace(den, g);
      }
    };
    auto cur = cursor();
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
      if (i < x.size()) {
        StepRatio r = cur->x_one_probability();
        Int chosen = x[i] ? r.num : Int(r.den - r.num);
        if (chosen == 0) return Rational(0);
        num *= chosen;
        den *= r.den;
        shrink();
        cur->advance_x(x[i]);
        ++i;
      }
      if (j < y.size()) {
        StepRatio r = cur->y_one_probability();
        Int chosen = y[j] ? r.num : Int(r.den - r.num);
        if (chosen == 0) return Rational(0);
        num *= chosen;
        den *= r.den;
        shrink();
        cur->advance_y(y[j]);
        ++j;
      }
    }
    return Rational(num, den);
  }

  // mass2(x, y) / mass2(x, empty); throws on zero evidence.
  virtual Rational posterior_mass(const BitString& y, const BitString& x) const {
    Rational ev = mass2(x, BitString());
    if (ev.is_zero()) throw std::domain_error("posterior_mass: zero-evidence sample");
    return mass2(x, y) / ev;
  }
};

using ProductMeasurePtr = std::shared_ptr<const ProductMeasure>;

// P(x|y) with the convention that it is 0 whenever the condition has no mass.
inline Rational conditional(const ProductMeasure& pm, const BitString& x, const BitString& y) {
  Rational py = pm.marginal_y()->mass(y);
  if (py.is_zero()) return Rational(0);
  return pm.mass2(x, y) / py;
}

// ---------------------------------------------------------------------------
// Independent product

class IndependentProductMeasure final : public ProductMeasure {
 public:
  IndependentProductMeasure(MeasurePtr px, MeasurePtr py)
      : px_(std::move(px)), py_(std::move(py)) {}

  std::unique_ptr<PairCursor> cursor() const override { return std::make_unique<Cursor>(*px_, *py_); }
  MeasurePtr marginal_x() const override { return px_; }
  MeasurePtr marginal_y() const override { return py_; }

 private:
  class Cursor final : public PairCursor {
   public:
    Cursor(const Measure& px, const Measure& py) : cx_(px.cursor()), cy_(py.cursor()) {}
    Cursor(const Cursor& o) : cx_(o.cx_->clone()), cy_(o.cy_->clone()) {}
    StepRatio x_one_probability() const override { return cx_->one_probability(); }
    StepRatio y_one_probability() const override { return cy_->one_probability(); }
    void advance_x(int bit) override { cx_->advance(bit); }
    void advance_y(int bit) override { cy_->advance(bit); }
    std::unique_ptr<PairCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    std::unique_ptr<MassCursor> cx_, cy_;
  };

  MeasurePtr px_, py_;
};

inline ProductMeasurePtr independent_product(MeasurePtr px, MeasurePtr py) {
  return std::make_shared<IndependentProductMeasure>(std::move(px), std::move(py));
}

// ---------------------------------------------------------------------------
// Interleaving: X carries the odd coordinates of a base process, Y the even
// ones. The joint mass of (x, y) is the base mass of the pinned pattern,
// summed over any interior positions that neither coordinate pins yet.

class InterleaveCursor final : public PairCursor {
 public:
  InterleaveCursor(const Measure& base, std::size_t cap) : cap_(cap) {
    br_.push_back(Branch{base.cursor(), Int(1), 0});
  }
  InterleaveCursor(const InterleaveCursor& o)
      : cap_(o.cap_), nx_(o.nx_), ny_(o.ny_), len_(o.len_), holes_(o.holes_) {
    br_.reserve(o.br_.size());
    for (const auto& b : o.br_) br_.push_back(Branch{b.cur->clone(), b.w, b.mask});
  }

  StepRatio x_one_probability() const override { return probability_of(2 * nx_ + 1); }
  StepRatio y_one_probability() const override { return probability_of(2 * (ny_ + 1)); }
  void advance_x(int bit) override {
    pin(2 * nx_ + 1, bit);
    ++nx_;
  }
  void advance_y(int bit) override {
    pin(2 * (ny_ + 1), bit);
    ++ny_;
  }
  std::unique_ptr<PairCursor> clone() const override { return std::make_unique<InterleaveCursor>(*this); }

 private:
  struct Branch {
    std::unique_ptr<MassCursor> cur;
    Int w;                   // relative mass of this hole assignment
    std::uint64_t mask;      // bit i = value assigned to holes_[i]
  };

  void check_cap(std::size_t want) const {
    if (want > cap_ || holes_.size() >= 63)
      throw std::length_error("interleave: too many free interior coordinates; use the marginal measures");
  }

  // Turn position len_+1 into a free coordinate: every branch splits.
  void extend_hole() {
    check_cap(br_.size() * 2);
    std::vector<StepRatio> r;
    r.reserve(br_.size());
    Int b = 1;
    for (const auto& br : br_) {
      r.push_back(br.cur->one_probability());
      b = lcm(b, r.back().den);
    }
    const std::uint64_t hbit = std::uint64_t{1} << holes_.size();
    std::vector<Branch> nb;
    nb.reserve(br_.size() * 2);
    for (std::size_t i = 0; i < br_.size(); ++i) {
      Int scale = b / r[i].den;
      Int w0 = br_[i].w * (r[i].den - r[i].num) * scale;
      Int w1 = br_[i].w * r[i].num * scale;
      if (w0 != 0) {
        auto c = br_[i].cur->clone();
        c->advance(0);
        nb.push_back(Branch{std::move(c), std::move(w0), br_[i].mask});
      }
      if (w1 != 0) {
        br_[i].cur->advance(1);
        nb.push_back(Branch{std::move(br_[i].cur), std::move(w1), br_[i].mask | hbit});
      }
    }
    holes_.push_back(len_ + 1);
    ++len_;
    br_ = std::move(nb);
    normalize_branches();
  }

  void normalize_branches() {
    Int g = 0;
    for (const auto& b : br_) {
      g = gcd(g, b.w);
      if (g == 1) return;
    }
    if (g > 1)
      for (auto& b : br_) divexact_inplace(b.w, g);
  }

  void pin(std::size_t q, int v) {
    while (len_ + 1 < q) extend_hole();
    if (q == len_ + 1) {
      std::vector<StepRatio> r;
      r.reserve(br_.size());
      Int b = 1;
      for (const auto& br : br_) {
        r.push_back(br.cur->one_probability());
        b = lcm(b, r.back().den);
      }
      std::vector<Branch> kept;
      kept.reserve(br_.size());
      for (std::size_t i = 0; i < br_.size(); ++i) {
        Int s = v ? r[i].num : Int(r[i].den - r[i].num);
        Int w = br_[i].w * s * (b / r[i].den);
        if (w == 0) continue;
        br_[i].cur->advance(v);
        br_[i].w = std::move(w);
        kept.push_back(std::move(br_[i]));
      }
      br_ = std::move(kept);
      ++len_;
      normalize_branches();
    } else {
      std::size_t h = hole_index(q);
      const std::uint64_t low = (std::uint64_t{1} << h) - 1;
      std::vector<Branch> kept;
      kept.reserve(br_.size());
      for (auto& b : br_) {
        if (((b.mask >> h) & 1ULL) != static_cast<std::uint64_t>(v)) continue;
        b.mask = (b.mask & low) | ((b.mask >> (h + 1)) << h);
        kept.push_back(std::move(b));
      }
      br_ = std::move(kept);
      holes_.erase(holes_.begin() + static_cast<std::ptrdiff_t>(h));
    }
  }

  std::size_t hole_index(std::size_t q) const {
    for (std::size_t i = 0; i < holes_.size(); ++i)
      if (holes_[i] == q) return i;
    throw std::logic_error("interleave: position already pinned");
  }

  StepRatio probability_of(std::size_t q) const {
    if (br_.empty()) return {Int(0), Int(1)};
    if (q <= len_) {
      std::size_t h = hole_index(q);
      Int num = 0, den = 0;
      for (const auto& b : br_) {
        den += b.w;
        if ((b.mask >> h) & 1ULL) num += b.w;
      }
      StepRatio out{std::move(num), std::move(den)};
      out.reduce();
      return out;
    }
    // marginalize the gap len_+1 .. q-1 on a scratch frontier
    struct Node {
      std::unique_ptr<MassCursor> cur;
      Int w;
    };
    std::vector<Node> fr;
    fr.reserve(br_.size());
    for (const auto& b : br_) fr.push_back(Node{b.cur->clone(), b.w});
    for (std::size_t pos = len_ + 1; pos < q; ++pos) {
      check_cap(fr.size() * 2);
      std::vector<StepRatio> r;
      r.reserve(fr.size());
      Int b = 1;
      for (const auto& n : fr) {
        r.push_back(n.cur->one_probability());
        b = lcm(b, r.back().den);
      }
      std::vector<Node> nf;
      nf.reserve(fr.size() * 2);
      for (std::size_t i = 0; i < fr.size(); ++i) {
        Int scale = b / r[i].den;
        Int w0 = fr[i].w * (r[i].den - r[i].num) * scale;
        Int w1 = fr[i].w * r[i].num * scale;
        if (w0 != 0) {
          auto c = fr[i].cur->clone();
          c->advance(0);
          nf.push_back(Node{std::move(c), std::move(w0)});
        }
        if (w1 != 0) {
          fr[i].cur->advance(1);
          nf.push_back(Node{std::move(fr[i].cur), std::move(w1)});
        }
      }
      fr = std::move(nf);
      if (fr.empty()) return {Int(0), Int(1)};
    }
    Int b = 1;
    std::vector<StepRatio> r;
    r.reserve(fr.size());
    for (const auto& n : fr) {
      r.push_back(n.cur->one_probability());
      b = lcm(b, r.back().den);
    }
    Int num = 0, den = 0;
    for (std::size_t i = 0; i < fr.size(); ++i) {
      num += fr[i].w * r[i].num * (b / r[i].den);
      den += fr[i].w;
    }
    StepRatio out{std::move(num), Int(den * b)};
    out.reduce();
    return out;
  }

  std::size_t cap_;
  std::size_t nx_ = 0, ny_ = 0;
  std::size_t len_ = 0;                // pattern positions 1..len_ are pinned or holes
  std::vector<std::size_t> holes_;     // ascending free positions
  std::vector<Branch> br_;
};

class InterleaveMeasure final : public ProductMeasure {
 public:
  explicit InterleaveMeasure(MeasurePtr base, std::size_t branch_cap = (std::size_t{1} << 16))
      : base_(std::move(base)), cap_(branch_cap) {
    if (const auto* f = dynamic_cast<const FiniteStateMeasure*>(base_.get())) {
      margx_ = derive_marginal(*f, /*odd=*/true);
      margy_ = derive_marginal(*f, /*odd=*/false);
    }
  }

  std::unique_ptr<PairCursor> cursor() const override {
    return std::make_unique<InterleaveCursor>(*base_, cap_);
  }
  MeasurePtr marginal_x() const override {
    return margx_ ? margx_ : std::make_shared<Marginal>(base_, cap_, /*x=*/true);
  }
  MeasurePtr marginal_y() const override {
    return margy_ ? margy_ : std::make_shared<Marginal>(base_, cap_, /*x=*/false);
  }
  const MeasurePtr& base() const { return base_; }

 private:
  // Two base steps per emitted bit; the uncontrolled coordinate is summed out.
  static MeasurePtr derive_marginal(const FiniteStateMeasure& f, bool odd) {
    const auto& es = f.edges();
    std::vector<std::vector<FiniteStateMeasure::Edge>> out(es.size());
    for (std::size_t s = 0; s < es.size(); ++s) {
      std::map<std::pair<int, int>, Int> acc;
      for (const auto& e1 : es[s])
        for (const auto& e2 : es[static_cast<std::size_t>(e1.next)]) {
          int bit = odd ? e1.bit : e2.bit;
          acc[{bit, e2.next}] += e1.weight * e2.weight;
        }
      for (auto& [key, w] : acc)
        out[s].push_back({key.first, key.second, std::move(w)});
    }
    return std::make_shared<FiniteStateMeasure>(f.init_weights(), f.init_den(), std::move(out),
                                                Int(f.step_den() * f.step_den()));
  }

  // Exact but exponential in the number of summed-out coordinates; only the
  // finite-state fast path above is suitable for long prefixes.
  class Marginal final : public Measure {
   public:
    Marginal(MeasurePtr base, std::size_t cap, bool x) : base_(std::move(base)), cap_(cap), x_(x) {}
    std::unique_ptr<MassCursor> cursor() const override {
      return std::make_unique<Cursor>(*base_, cap_, x_);
    }

   private:
    class Cursor final : public MassCursor {
     public:
      Cursor(const Measure& base, std::size_t cap, bool x) : ic_(base, cap), x_(x) {}
      Cursor(const Cursor& o) : ic_(o.ic_), x_(o.x_) {}
      StepRatio one_probability() const override {
        return x_ ? ic_.x_one_probability() : ic_.y_one_probability();
      }
      void advance(int bit) override {
        if (x_) ic_.advance_x(bit);
        else ic_.advance_y(bit);
      }
      std::unique_ptr<MassCursor> clone() const override { return std::make_unique<Cursor>(*this); }

     private:
      InterleaveCursor ic_;
      bool x_;
    };

    MeasurePtr base_;
    std::size_t cap_;
    bool x_;
  };

  MeasurePtr base_;
  std::size_t cap_;
  MeasurePtr margx_, margy_;
};

inline ProductMeasurePtr interleave(MeasurePtr base) {
  return std::make_shared<InterleaveMeasure>(std::move(base));
}

// ---------------------------------------------------------------------------
// i.i.d. pair process: positions are independent draws of a joint law on
// {0,1}^2; coordinates beyond the shorter string follow the marginals.

class PairwiseIidMeasure final : public ProductMeasure {
 public:
  PairwiseIidMeasure(const Rational& q00, const Rational& q01, const Rational& q10,
                     const Rational& q11) {
    const Rational* qs[4] = {&q00, &q01, &q10, &q11};
    if (q00 + q01 + q10 + q11 != Rational(1))
      throw std::invalid_argument("pairwise iid: joint law must sum to 1");
    Int den = 1;
    for (auto* q : qs) {
      if (q->sign() < 0) throw std::invalid_argument("pairwise iid: negative probability");
      den = lcm(den, q->den());
    }
    den_ = den;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const Rational& q = *qs[a * 2 + b];
        u_[a][b] = q.num() * (den / q.den());
      }
  }

  std::unique_ptr<PairCursor> cursor() const override { return std::make_unique<Cursor>(this); }
  MeasurePtr marginal_x() const override { return bernoulli(Rational(Int(u_[1][0] + u_[1][1]), den_)); }
  MeasurePtr marginal_y() const override { return bernoulli(Rational(Int(u_[0][1] + u_[1][1]), den_)); }

 private:
  class Cursor final : public PairCursor {
   public:
    explicit Cursor(const PairwiseIidMeasure* m) : m_(m) {}
    StepRatio x_one_probability() const override {
      std::size_t i = x_.size();
      if (i < y_.size()) {
        int b = y_[i];
        Int den = m_->u_[0][b] + m_->u_[1][b];
        if (den == 0) return {Int(0), Int(1)};
        return {Int(m_->u_[1][b]), std::move(den)};
      }
      return {Int(m_->u_[1][0] + m_->u_[1][1]), m_->den_};
    }
    StepRatio y_one_probability() const override {
      std::size_t j = y_.size();
      if (j < x_.size()) {
        int a = x_[j];
        Int den = m_->u_[a][0] + m_->u_[a][1];
        if (den == 0) return {Int(0), Int(1)};
        return {Int(m_->u_[a][1]), std::move(den)};
      }
      return {Int(m_->u_[0][1] + m_->u_[1][1]), m_->den_};
    }
    void advance_x(int bit) override { x_.push_back(bit); }
    void advance_y(int bit) override { y_.push_back(bit); }
    std::unique_ptr<PairCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    const PairwiseIidMeasure* m_;
    BitString x_, y_;
  };

  Int u_[2][2];
  Int den_;
};

// X uniform i.i.d., Y a copy of X with each bit flipped independently with
// the given probability.
inline ProductMeasurePtr noisy_copy(const Rational& flip) {
  if (flip.sign() < 0 || flip > Rational(1)) throw std::invalid_argument("noisy_copy: flip outside [0,1]");
  Rational half(Int(1), Int(2));
  Rational same = (Rational(1) - flip) * half;
  Rational diff = flip * half;
  return std::make_shared<PairwiseIidMeasure>(same, diff, diff, same);
}

// ---------------------------------------------------------------------------
// Bernoulli models integrated over a prior on the parameter bits.

namespace detail {

// 2^(kappa*(n+1)) * I_{a/2^kappa}(k+1, m+1) with n = k+m: the exact binomial
// tail sum_{j>k} C(n+1, j) a^j (2^kappa - a)^(n+1-j), evaluated from
// whichever side has fewer terms.
inline Int reg_beta_scaled(const Int& a, std::size_t kappa, std::uint64_t k, std::uint64_t m) {
  const unsigned long big_n = static_cast<unsigned long>(k + m + 1);
  if (a < 0) throw std::invalid_argument("reg_beta_scaled: negative endpoint");
  if (a == 0) return Int(0);
  Int b = pow2(kappa) - a;
  if (b < 0) throw std::invalid_argument("reg_beta_scaled: endpoint above 1");
  if (b == 0) return pow2(kappa * big_n);
  auto run = [&](unsigned long j_begin, unsigned long j_end, Int t) {
    // t = term at j_begin; adds terms j_begin..j_end
    Int s = t;
    for (unsigned long j = j_begin; j < j_end; ++j) {
      t *= a;
      t *= (big_n - j);
      mpz_divexact_ui(t.get_mpz_t(), t.get_mpz_t(), j + 1);
      mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), b.get_mpz_t());
      s += t;
    }
    return s;
  };
  if (m <= k) {
    Int t = binomial(big_n, static_cast<unsigned long>(k + 1)) * ipow(a, static_cast<unsigned long>(k + 1)) *
            ipow(b, static_cast<unsigned long>(m));
    return run(static_cast<unsigned long>(k + 1), big_n, std::move(t));
  }
  Int low = run(0, static_cast<unsigned long>(k), ipow(b, big_n));
  return pow2(kappa * big_n) - low;
}

}  // namespace detail

// Predictive measure of the uniform-prior Bernoulli model: the rule of
// succession P(next = 1 | k ones in n) = (k+1)/(n+2).
class LaplaceRuleMeasure final : public Measure {
 public:
  std::unique_ptr<MassCursor> cursor() const override { return std::make_unique<Cursor>(); }

 private:
  class Cursor final : public MassCursor {
   public:
    StepRatio one_probability() const override { return {Int(k_ + 1), Int(n_ + 2)}; }
    void advance(int bit) override {
      ++n_;
      k_ += static_cast<unsigned long>(bit);
    }
    std::unique_ptr<MassCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    unsigned long k_ = 0, n_ = 0;
  };
};

// Joint law of (sample bits, parameter bits) for the Bernoulli model with the
// uniform prior on [0,1): mass2(x, y) integrates theta^k (1-theta)^m over the
// dyadic cylinder of y. Everything reduces to regularized incomplete beta
// values with dyadic arguments, kept as exact integers.
class BetaBernoulliMeasure final : public ProductMeasure {
 public:
  Rational mass2(const BitString& x, const BitString& y) const override {
    std::uint64_t k = x.count_ones(), m = x.size() - k;
    Int delta = delta_reg(y, k, m);
    // 1 / ((n+1) C(n,k)) is the full-interval integral of theta^k (1-theta)^m
    Int den = shl(Int(binomial(static_cast<unsigned long>(k + m), static_cast<unsigned long>(k)) *
                      Int(static_cast<unsigned long>(k + m + 1))),
                  y.size() * (k + m + 1));
    return Rational(delta, den);
  }

  Rational posterior_mass(const BitString& y, const BitString& x) const override {
    std::uint64_t k = x.count_ones(), m = x.size() - k;
    return Rational(delta_reg(y, k, m), pow2(y.size() * (k + m + 1)));
  }

  std::unique_ptr<PairCursor> cursor() const override { return std::make_unique<Cursor>(); }
  MeasurePtr marginal_x() const override { return std::make_shared<LaplaceRuleMeasure>(); }
  MeasurePtr marginal_y() const override { return bernoulli(Rational(Int(1), Int(2))); }

  // Posterior-maximal depth-k cylinder. The posterior density is unimodal, so
  // cylinder masses rise toward the one containing the mode and fall after
  // it; only the mode cylinder and its two neighbours can win. Ties go to the
  // smaller index.
  BitString map_cylinder_fast(std::size_t depth, const BitString& x) const {
    if (depth == 0) return BitString();
    std::uint64_t k = x.count_ones(), n = x.size(), m = n - k;
    Int cells = pow2(depth);
    Int a0 = 0;
    if (n > 0) {
      a0 = (Int(static_cast<unsigned long>(k)) * cells) / Int(static_cast<unsigned long>(n));
      if (a0 >= cells) a0 = cells - 1;
    }
    Int best_a = -1, best_v = -1;
    for (int d = -1; d <= 1; ++d) {
      Int a = a0 + d;
      if (a < 0 || a >= cells) continue;
      Int v = detail::reg_beta_scaled(Int(a + 1), depth, k, m) -
              detail::reg_beta_scaled(a, depth, k, m);
      if (v > best_v) {
        best_v = v;
        best_a = a;
      }
    }
    return BitString::from_index(best_a, depth);
  }

 private:
  static Int delta_reg(const BitString& y, std::uint64_t k, std::uint64_t m) {
    Int a = y.to_index();
    return detail::reg_beta_scaled(Int(a + 1), y.size(), k, m) -
           detail::reg_beta_scaled(a, y.size(), k, m);
  }

  class Cursor final : public PairCursor {
   public:
    StepRatio x_one_probability() const override {
      // (k+1)/(n+2) * delta_I(k+1, m) / delta_I(k, m), denominators aligned
      Int cur = delta(kappa_, a_, k_, m_);
      Int ext = delta(kappa_, a_, k_ + 1, m_);
      Int num = ext * Int(static_cast<unsigned long>(k_ + 1));
      Int den = shl(Int(cur * Int(static_cast<unsigned long>(k_ + m_ + 2))), kappa_);
      return {std::move(num), std::move(den)};
    }
    StepRatio y_one_probability() const override {
      Int cur = shl(delta(kappa_, a_, k_, m_), k_ + m_ + 1);
      Int hi = delta(kappa_ + 1, Int(2 * a_ + 1), k_, m_);
      return {std::move(hi), std::move(cur)};
    }
    void advance_x(int bit) override {
      if (bit) ++k_;
      else ++m_;
    }
    void advance_y(int bit) override {
      a_ = 2 * a_ + bit;
      ++kappa_;
    }
    std::unique_ptr<PairCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    static Int delta(std::size_t kappa, const Int& a, std::uint64_t k, std::uint64_t m) {
      return detail::reg_beta_scaled(Int(a + 1), kappa, k, m) -
             detail::reg_beta_scaled(a, kappa, k, m);
    }
    std::uint64_t k_ = 0, m_ = 0;
    std::size_t kappa_ = 0;
    Int a_ = 0;
  };
};

// Same model class over a finitely atomic prior on dyadic parameter values.
class AtomBernoulliMeasure final : public ProductMeasure {
 public:
  explicit AtomBernoulliMeasure(std::shared_ptr<const DyadicAtomMeasure> prior)
      : prior_(std::move(prior)) {}

  Rational mass2(const BitString& x, const BitString& y) const override {
    std::uint64_t k = x.count_ones(), m = x.size() - k;
    Rational s(0);
    const auto& pts = prior_->points();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (!consistent(pts[j], y)) continue;
      Rational th = prior_->theta(j);
      Rational lik = Rational(ipow(th.num(), static_cast<unsigned long>(k)) *
                                  ipow(Int(th.den() - th.num()), static_cast<unsigned long>(m)),
                              ipow(th.den(), static_cast<unsigned long>(k + m)));
      s += prior_->weights()[j] * lik;
    }
    return s;
  }

  std::unique_ptr<PairCursor> cursor() const override { return std::make_unique<Cursor>(this); }
  MeasurePtr marginal_x() const override {
    const auto& w = prior_->weights();
    if (w.size() == 1) return bernoulli(prior_->theta(0));
    std::vector<MeasurePtr> members;
    for (std::size_t j = 0; j < w.size(); ++j) members.push_back(bernoulli(prior_->theta(j)));
    return mixture(ModelFamily(std::move(members), w));
  }
  MeasurePtr marginal_y() const override { return prior_; }

 private:
  // y is consistent with atom point p iff y is a prefix of p·000...
  static bool consistent(const BitString& p, const BitString& y) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      int pb = i < p.size() ? p[i] : 0;
      if (pb != y[i]) return false;
    }
    return true;
  }

  class Cursor final : public PairCursor {
   public:
    explicit Cursor(const AtomBernoulliMeasure* m) : m_(m) {
      const auto& pts = m_->prior_->points();
      std::size_t dmax = 0;
      for (const auto& p : pts) dmax = std::max(dmax, p.size());
      d_ = dmax;
      lik_.assign(pts.size(), Int(1));
      alive_.assign(pts.size(), true);
      for (std::size_t j = 0; j < pts.size(); ++j) {
        c_.push_back(pts[j].to_index() << (d_ - pts[j].size()));  // theta_j = c_j / 2^d_
      }
      Int den = 1;
      // reuse the prior's canonical integer weights via its Rational weights
      for (const auto& w : m_->prior_->weights()) den = lcm(den, w.den());
      for (const auto& w : m_->prior_->weights()) u_.push_back(Int(w.num() * (den / w.den())));
    }

    StepRatio x_one_probability() const override {
      Int num = 0, den = 0;
      for (std::size_t j = 0; j < alive_.size(); ++j) {
        if (!alive_[j]) continue;
        Int base = u_[j] * lik_[j];
        num += base * c_[j];
        den += base;
      }
      if (den == 0) return {Int(0), Int(1)};
      return {std::move(num), Int(shl(den, d_))};
    }
    StepRatio y_one_probability() const override {
      Int num = 0, den = 0;
      const auto& pts = m_->prior_->points();
      for (std::size_t j = 0; j < alive_.size(); ++j) {
        if (!alive_[j]) continue;
        Int base = u_[j] * lik_[j];
        den += base;
        int pb = depth_ < pts[j].size() ? pts[j][depth_] : 0;
        if (pb) num += base;
      }
      if (den == 0) return {Int(0), Int(1)};
      return {std::move(num), std::move(den)};
    }
    void advance_x(int bit) override {
      Int full = pow2(d_);
      for (std::size_t j = 0; j < alive_.size(); ++j) {
        if (!alive_[j]) continue;
        lik_[j] *= bit ? c_[j] : Int(full - c_[j]);
      }
    }
    void advance_y(int bit) override {
      const auto& pts = m_->prior_->points();
      for (std::size_t j = 0; j < alive_.size(); ++j) {
        if (!alive_[j]) continue;
        int pb = depth_ < pts[j].size() ? pts[j][depth_] : 0;
        if (pb != bit) alive_[j] = false;
      }
      ++depth_;
    }
    std::unique_ptr<PairCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    const AtomBernoulliMeasure* m_;
    std::size_t d_ = 0;       // common dyadic depth
    std::size_t depth_ = 0;   // consumed y bits
    std::vector<Int> c_;      // theta numerators over 2^d_
    std::vector<Int> u_;      // prior weights over a common denominator
    std::vector<Int> lik_;    // per-atom x-likelihood over 2^(d_ * |x|)
    std::vector<bool> alive_;
  };

  std::shared_ptr<const DyadicAtomMeasure> prior_;
};

// Bayes joint for the Bernoulli model. The prior must be either the uniform
// measure on parameter bits (fair coin) or finitely atomic at dyadic points;
// anything else cannot be integrated exactly and is rejected.
inline ProductMeasurePtr bernoulli_bayes(const MeasurePtr& prior) {
  if (const auto* b = dynamic_cast<const BernoulliMeasure*>(prior.get())) {
    if (b->theta() == Rational(Int(1), Int(2))) return std::make_shared<BetaBernoulliMeasure>();
    throw std::invalid_argument("bernoulli_bayes: bernoulli prior must be the fair coin (uniform)");
  }
  if (auto d = std::dynamic_pointer_cast<const DyadicAtomMeasure>(prior))
    return std::make_shared<AtomBernoulliMeasure>(std::move(d));
  throw std::invalid_argument(
      "bernoulli_bayes: prior must be uniform on cylinders or finitely atomic at dyadic points");
}

inline ProductMeasurePtr bernoulli_bayes_uniform() { return std::make_shared<BetaBernoulliMeasure>(); }

// Exact joint sampling by alternating coordinate refinements.
inline std::pair<BitString, BitString> sample_pair(const ProductMeasure& pm, std::size_t nx,
                                                   std::size_t ny, std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto cur = pm.cursor();
  BitString x, y;
  while (x.size() < nx || y.size() < ny) {
    if (x.size() < nx) {
      int b = draw_bit(rng, cur->x_one_probability());
      x.push_back(b);
      cur->advance_x(b);
    }
    if (y.size() < ny) {
      int b = draw_bit(rng, cur->y_one_probability());
      y.push_back(b);
      cur->advance_y(b);
    }
  }
  return {std::move(x), std::move(y)};
}

}  // namespace bitprob
