#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bitprob/bitstring.hpp"
#include "bitprob/int.hpp"
#include "bitprob/rational.hpp"
#include "bitprob/rng.hpp"

namespace bitprob {

// Conditional probability of the next bit being 1 given the current prefix,
// as an exact (not necessarily reduced) ratio: 0 <= num <= den, den > 0.
struct StepRatio {
  Int num;
  Int den;

  // Ratios multiply into interval states and mass products; dropping common
  // factors here keeps those accumulators near their reduced size.
  void reduce() {
    Int g = gcd(num, den);
    if (g > 1) {
      divexact_inplace(num, g);
      divexact_inplace(den, g);
    }
  }
};

namespace detail {

// strip the common gcd of a weight vector; relative weights are all that matter
inline void normalize_weights(std::vector<Int>& w) {
  Int g = 0;
  for (const Int& v : w) {
    if (v == 0) continue;
    g = gcd(g, v);
    if (g == 1) return;
  }
  if (g > 1)
    for (Int& v : w)
      if (v != 0) divexact_inplace(v, g);
}

}  // namespace detail

// Sequential evaluator of a measure along one path from the empty string.
// Contract: one_probability() is mass(x1)/mass(x) whenever mass(x) > 0; once
// the prefix has zero mass the cursor reports {0, 1} and stays dead.
class MassCursor {
 public:
  virtual ~MassCursor() = default;
  virtual StepRatio one_probability() const = 0;
  virtual void advance(int bit) = 0;
  virtual std::unique_ptr<MassCursor> clone() const = 0;
};

// Probability measure on binary strings: mass(empty) = 1 and
// mass(x) = mass(x0) + mass(x1) exactly, for every x.
class Measure {
 public:
  virtual ~Measure() = default;
  virtual std::unique_ptr<MassCursor> cursor() const = 0;

  Rational mass(const BitString& x) const {
    Int num = 1, den = 1;
    auto cur = cursor();
    for (std::size_t i = 0; i < x.size(); ++i) {
      StepRatio r = cur->one_probability();
      Int chosen = x[i] ? r.num : Int(r.den - r.num);
      if (chosen == 0) return Rational(0);
      num *= chosen;
      den *= r.den;
      if ((i & 63) == 63) {
        Int g = gcd(num, den);
        if (g > 1) {
          divexact_inplace(num, g);
          divexact_inplace(den, g);
        }
      }
      cur->advance(x[i]);
    }
    return Rational(num, den);
  }
};

using MeasurePtr = std::shared_ptr<const Measure>;

// Weighted-automaton measure: states with per-state outgoing (bit, next,
// weight) edges over a global step denominator. Covers i.i.d. and Markov
// sources and every marginal the library derives from them.
class FiniteStateMeasure : public Measure {
 public:
  struct Edge {
    int bit;
    int next;
    Int weight;
  };

  FiniteStateMeasure(std::vector<Int> init_weights, Int init_den,
                     std::vector<std::vector<Edge>> edges, Int step_den)
      : init_(std::move(init_weights)),
        init_den_(std::move(init_den)),
        edges_(std::move(edges)),
        step_den_(std::move(step_den)) {
    if (init_.size() != edges_.size() || init_.empty())
      throw std::invalid_argument("FiniteStateMeasure: state count mismatch");
    if (init_den_ <= 0 || step_den_ <= 0)
      throw std::invalid_argument("FiniteStateMeasure: nonpositive denominator");
    Int s = 0;
    for (const Int& w : init_) {
      if (w < 0) throw std::invalid_argument("FiniteStateMeasure: negative weight");
      s += w;
    }
    if (s != init_den_) throw std::invalid_argument("FiniteStateMeasure: init weights must sum to init_den");
    for (const auto& es : edges_) {
      Int t = 0;
      for (const Edge& e : es) {
        if (e.weight < 0 || e.next < 0 || static_cast<std::size_t>(e.next) >= edges_.size() ||
            (e.bit != 0 && e.bit != 1))
          throw std::invalid_argument("FiniteStateMeasure: bad edge");
        t += e.weight;
      }
      if (t != step_den_) throw std::invalid_argument("FiniteStateMeasure: edge weights must sum to step_den");
    }
  }

  std::unique_ptr<MassCursor> cursor() const override;

  std::size_t state_count() const { return edges_.size(); }
  const std::vector<std::vector<Edge>>& edges() const { return edges_; }
  const std::vector<Int>& init_weights() const { return init_; }
  const Int& init_den() const { return init_den_; }
  const Int& step_den() const { return step_den_; }

 private:
  class Cursor final : public MassCursor {
   public:
    Cursor(const FiniteStateMeasure* m) : m_(m), w_(m->init_) {}
    StepRatio one_probability() const override {
      Int total = 0, ones = 0;
      for (std::size_t s = 0; s < w_.size(); ++s) {
        if (w_[s] == 0) continue;
        total += w_[s];
        for (const Edge& e : m_->edges_[s])
          if (e.bit == 1) ones += w_[s] * e.weight;
      }
      if (total == 0) return {Int(0), Int(1)};
      StepRatio r{std::move(ones), Int(total * m_->step_den_)};
      r.reduce();
      return r;
    }
    void advance(int bit) override {
      std::vector<Int> nw(w_.size(), Int(0));
      for (std::size_t s = 0; s < w_.size(); ++s) {
        if (w_[s] == 0) continue;
        for (const Edge& e : m_->edges_[s])
          if (e.bit == bit) nw[static_cast<std::size_t>(e.next)] += w_[s] * e.weight;
      }
      w_ = std::move(nw);
      detail::normalize_weights(w_);
    }
    std::unique_ptr<MassCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    const FiniteStateMeasure* m_;
    std::vector<Int> w_;
  };

  std::vector<Int> init_;
  Int init_den_;
  std::vector<std::vector<Edge>> edges_;
  Int step_den_;
};

inline std::unique_ptr<MassCursor> FiniteStateMeasure::cursor() const {
  return std::make_unique<Cursor>(this);
}

// i.i.d. coin with exact success probability theta.
class BernoulliMeasure final : public FiniteStateMeasure {
 public:
  explicit BernoulliMeasure(const Rational& theta)
      : FiniteStateMeasure({theta.den()}, theta.den(),
                           {{{1, 0, theta.num()}, {0, 0, Int(theta.den() - theta.num())}}},
                           theta.den()),
        theta_(theta) {}
  const Rational& theta() const { return theta_; }

 private:
  Rational theta_;
};

inline MeasurePtr bernoulli(const Rational& theta) {
  if (theta.sign() < 0 || theta > Rational(1)) throw std::invalid_argument("bernoulli: theta outside [0,1]");
  return std::make_shared<BernoulliMeasure>(theta);
}

// First-order Markov chain: initial law (1-p1, p1), transition row p[i] from
// last symbol i. States: 0 = start, 1 = last bit 0, 2 = last bit 1.
inline MeasurePtr markov1(const Rational& p1, const Rational& p00, const Rational& p01,
                          const Rational& p10, const Rational& p11) {
  for (const Rational* r : {&p1, &p00, &p01, &p10, &p11})
    if (r->sign() < 0 || *r > Rational(1)) throw std::invalid_argument("markov1: probability outside [0,1]");
  if (p00 + p01 != Rational(1) || p10 + p11 != Rational(1))
    throw std::invalid_argument("markov1: rows must be stochastic");
  Int den = lcm(lcm(p1.den(), p00.den()), lcm(p01.den(), lcm(p10.den(), p11.den())));
  auto scaled = [&](const Rational& r) { return Int(r.num() * (den / r.den())); };
  std::vector<std::vector<FiniteStateMeasure::Edge>> edges(3);
  edges[0] = {{1, 2, scaled(p1)}, {0, 1, Int(den - scaled(p1))}};
  edges[1] = {{0, 1, scaled(p00)}, {1, 2, scaled(p01)}};
  edges[2] = {{0, 1, scaled(p10)}, {1, 2, scaled(p11)}};
  return std::make_shared<FiniteStateMeasure>(std::vector<Int>{Int(1), Int(0), Int(0)}, Int(1),
                                              std::move(edges), den);
}

// Finite indexed model class with positive prior weights summing to 1.
struct ModelFamily {
  std::vector<MeasurePtr> members;
  std::vector<Rational> alpha;

  ModelFamily(std::vector<MeasurePtr> m, std::vector<Rational> a)
      : members(std::move(m)), alpha(std::move(a)) {
    if (members.size() != alpha.size() || members.size() < 2)
      throw std::invalid_argument("ModelFamily: need >= 2 members with matching weights");
    Rational s(0);
    for (const auto& w : alpha) {
      if (w.sign() <= 0) throw std::invalid_argument("ModelFamily: weights must be positive");
      s += w;
    }
    if (!s.is_one()) throw std::invalid_argument("ModelFamily: weights must sum to 1");
  }
};

class MixtureMeasure final : public Measure {
 public:
  explicit MixtureMeasure(ModelFamily fam) : fam_(std::move(fam)) {}
  std::unique_ptr<MassCursor> cursor() const override { return std::make_unique<Cursor>(&fam_); }
  const ModelFamily& family() const { return fam_; }

 private:
  class Cursor final : public MassCursor {
   public:
    explicit Cursor(const ModelFamily* fam) {
      Int a = 1;
      for (const auto& w : fam->alpha) a = lcm(a, w.den());
      for (std::size_t i = 0; i < fam->members.size(); ++i) {
        cur_.push_back(fam->members[i]->cursor());
        w_.push_back(Int(fam->alpha[i].num() * (a / fam->alpha[i].den())));
      }
    }
    Cursor(const Cursor& o) {
      for (const auto& c : o.cur_) cur_.push_back(c->clone());
      w_ = o.w_;
    }
    StepRatio one_probability() const override {
      std::vector<StepRatio> r = ratios();
      Int b = 1;
      for (const auto& x : r) b = lcm(b, x.den);
      Int num = 0, total = 0;
      for (std::size_t i = 0; i < w_.size(); ++i) {
        if (w_[i] == 0) continue;
        num += w_[i] * r[i].num * (b / r[i].den);
        total += w_[i];
      }
      if (total == 0) return {Int(0), Int(1)};
      StepRatio out{std::move(num), Int(total * b)};
      out.reduce();
      return out;
    }
    void advance(int bit) override {
      std::vector<StepRatio> r = ratios();
      Int b = 1;
      for (const auto& x : r) b = lcm(b, x.den);
      for (std::size_t i = 0; i < w_.size(); ++i) {
        Int s = bit ? r[i].num : Int(r[i].den - r[i].num);
        w_[i] *= s * (b / r[i].den);
        cur_[i]->advance(bit);
      }
      detail::normalize_weights(w_);
    }
    std::unique_ptr<MassCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    std::vector<StepRatio> ratios() const {
      std::vector<StepRatio> r;
      r.reserve(cur_.size());
      for (const auto& c : cur_) r.push_back(c->one_probability());
      return r;
    }
    std::vector<std::unique_ptr<MassCursor>> cur_;
    std::vector<Int> w_;
  };

  ModelFamily fam_;
};

inline MeasurePtr mixture(ModelFamily fam) { return std::make_shared<MixtureMeasure>(std::move(fam)); }

// Finitely many point masses at dyadic sequences y·000... ; the atom pattern
// is canonicalized by stripping trailing zeros, duplicates merge.
class DyadicAtomMeasure final : public Measure {
 public:
  struct Atom {
    BitString point;
    Rational weight;
  };

  explicit DyadicAtomMeasure(const std::vector<Atom>& atoms) {
    std::map<BitString, Rational> canon;
    Rational s(0);
    for (const auto& a : atoms) {
      if (a.weight.sign() <= 0) throw std::invalid_argument("DyadicAtomMeasure: weights must be positive");
      std::size_t n = a.point.size();
      while (n > 0 && a.point[n - 1] == 0) --n;
      auto [it, fresh] = canon.emplace(a.point.prefix(n), a.weight);
      if (!fresh) it->second += a.weight;
      s += a.weight;
    }
    if (!s.is_one()) throw std::invalid_argument("DyadicAtomMeasure: weights must sum to 1");
    Int den = 1;
    for (const auto& [p, w] : canon) den = lcm(den, w.den());
    for (const auto& [p, w] : canon) {
      points_.push_back(p);
      u_.push_back(Int(w.num() * (den / w.den())));
      weights_.push_back(w);
    }
  }

  std::unique_ptr<MassCursor> cursor() const override { return std::make_unique<Cursor>(this); }

  const std::vector<BitString>& points() const { return points_; }
  const std::vector<Rational>& weights() const { return weights_; }

  // Parameter value of atom j read as 0.point ∈ [0,1).
  Rational theta(std::size_t j) const {
    const BitString& p = points_[j];
    return Rational(p.to_index(), pow2(p.size()));
  }

 private:
  int bit_at(std::size_t j, std::size_t pos) const {
    return pos < points_[j].size() ? points_[j][pos] : 0;
  }

  class Cursor final : public MassCursor {
   public:
    explicit Cursor(const DyadicAtomMeasure* m) : m_(m), alive_(m->points_.size(), true) {}
    StepRatio one_probability() const override {
      Int num = 0, den = 0;
      for (std::size_t j = 0; j < alive_.size(); ++j) {
        if (!alive_[j]) continue;
        den += m_->u_[j];
        if (m_->bit_at(j, depth_)) num += m_->u_[j];
      }
      if (den == 0) return {Int(0), Int(1)};
      return {std::move(num), std::move(den)};
    }
    void advance(int bit) override {
      for (std::size_t j = 0; j < alive_.size(); ++j)
        if (alive_[j] && m_->bit_at(j, depth_) != bit) alive_[j] = false;
      ++depth_;
    }
    std::unique_ptr<MassCursor> clone() const override { return std::make_unique<Cursor>(*this); }

   private:
    const DyadicAtomMeasure* m_;
    std::vector<bool> alive_;
    std::size_t depth_ = 0;
  };

  std::vector<BitString> points_;
  std::vector<Int> u_;
  std::vector<Rational> weights_;
};

// Total monotone map N -> N of the form n -> slope*n + offset.
class RateFunction {
 public:
  RateFunction(std::uint64_t slope, std::uint64_t offset) : slope_(slope), offset_(offset) {}
  static RateFunction identity() { return {1, 0}; }
  static RateFunction zero() { return {0, 0}; }
  static RateFunction constant(std::uint64_t k) { return {0, k}; }

  std::uint64_t operator()(std::uint64_t n) const { return slope_ * n + offset_; }
  std::uint64_t slope() const { return slope_; }
  std::uint64_t offset() const { return offset_; }

  std::string str() const {
    if (slope_ == 1 && offset_ == 0) return "identity";
    if (slope_ == 0) return "const:" + std::to_string(offset_);
    return "linear:" + std::to_string(slope_) + "," + std::to_string(offset_);
  }

 private:
  std::uint64_t slope_;
  std::uint64_t offset_;
};

// Draw one bit: u/2^64 < p, compared exactly. The generator's output is read
// as a dyadic rational with 64 fractional bits.
inline int draw_bit(SplitMix64& rng, const StepRatio& p) {
  Int u = from_u64(rng.next());
  return (u * p.den < shl(p.num, 64)) ? 1 : 0;
}

// Length-n prefix sampled bit by bit with exact conditional probabilities;
// deterministic given the seed.
inline BitString sample_prefix(const Measure& m, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto cur = m.cursor();
  BitString x;
  for (std::size_t i = 0; i < n; ++i) {
    int b = draw_bit(rng, cur->one_probability());
    x.push_back(b);
    cur->advance(b);
  }
  return x;
}

}  // namespace bitprob
