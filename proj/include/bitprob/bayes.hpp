#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bitprob/measure.hpp"
#include "bitprob/product.hpp"
#include "bitprob/rng.hpp"
#include "bitprob/selection.hpp"

namespace bitprob {

// Posterior mass of the parameter cylinder of y given sample x.
inline Rational posterior_mass(const ProductMeasure& pm, const BitString& y, const BitString& x) {
  return pm.posterior_mass(y, x);
}

// Full posterior over the 2^k depth-k parameter cylinders at sample length n.
// Masses are exact and sum to 1.
struct PosteriorSnapshot {
  std::uint64_t n;
  std::vector<std::pair<BitString, Rational>> cylinder_masses;
};

inline PosteriorSnapshot posterior_snapshot(const ProductMeasure& pm, std::size_t k,
                                            const BitString& x) {
  if (k > 24) throw std::invalid_argument("posterior_snapshot: depth too large to enumerate");
  PosteriorSnapshot snap{x.size(), {}};
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << k); ++a) {
    BitString y = BitString::from_index(from_u64(a), k);
    Rational mass = pm.posterior_mass(y, x);
    snap.cylinder_masses.emplace_back(std::move(y), std::move(mass));
  }
  return snap;
}

// Posterior mass of the depth-k cylinder of ytrue at each checkpoint prefix
// of x_full, starting from the prior at n = 0.
inline std::vector<std::pair<std::uint64_t, Rational>> concentration_trace(
    const ProductMeasure& pm, const BitString& ytrue, const BitString& x_full, std::size_t k,
    const std::vector<std::uint64_t>& checkpoints) {
  if (ytrue.size() < k) throw std::invalid_argument("concentration_trace: ytrue shorter than k");
  BitString cyl = ytrue.prefix(k);
  std::vector<std::pair<std::uint64_t, Rational>> out;
  out.emplace_back(0, pm.posterior_mass(cyl, BitString()));
  for (std::uint64_t n : checkpoints) {
    if (n == 0 || n > x_full.size()) continue;
    out.emplace_back(n, pm.posterior_mass(cyl, x_full.prefix(n)));
  }
  return out;
}

// Depth-k cylinder of maximal posterior mass; ties resolved to the
// lexicographically smallest, which for fixed length is the smallest index.
inline BitString map_cylinder(const ProductMeasure& pm, std::size_t k, const BitString& x) {
  if (k == 0) return BitString();
  if (const auto* bb = dynamic_cast<const BetaBernoulliMeasure*>(&pm))
    return bb->map_cylinder_fast(k, x);
  if (k > 22) throw std::invalid_argument("map_cylinder: depth too large for enumeration");
  Rational ev = pm.mass2(x, BitString());
  if (ev.is_zero()) throw std::domain_error("map_cylinder: zero-evidence sample");
  BitString best;
  Rational best_v(-1);
  const std::uint64_t cells = std::uint64_t{1} << k;
  for (std::uint64_t a = 0; a < cells; ++a) {
    BitString y = BitString::from_index(from_u64(a), k);
    Rational v = pm.mass2(x, y);  // argmax is evidence-scale invariant
    if (v > best_v) {
      best_v = std::move(v);
      best = std::move(y);
    }
  }
  return best;
}

// k(n) = floor(log2(n) / 2), 0 for n <= 1.
inline std::size_t estimator_schedule(std::uint64_t n) {
  if (n <= 1) return 0;
  std::size_t l = 0;
  while ((std::uint64_t{1} << (l + 1)) <= n) ++l;  // l = floor(log2 n)
  return l / 2;
}

// Negative-control schedule k(n) = ceil(log2 n), 0 for n <= 1.
inline std::size_t fast_schedule(std::uint64_t n) {
  if (n <= 1) return 0;
  std::size_t l = 0;
  while ((std::uint64_t{1} << l) < n) ++l;
  return l;
}

enum class Schedule { HalfLog2, CeilLog2 };

inline std::size_t schedule_depth(Schedule s, std::uint64_t n) {
  return s == Schedule::HalfLog2 ? estimator_schedule(n) : fast_schedule(n);
}

struct EstimateRow {
  std::uint64_t seed;
  std::uint64_t n;
  std::size_t k;
  BitString map;
  BitString truth;
  bool hit;
  Rational map_mass;  // posterior mass of the reported cylinder
};

// Per seed: sample x ~ bernoulli(0.theta_bits) and record at each checkpoint
// whether the MAP cylinder at the scheduled depth matches the true prefix of
// theta_bits·000...
inline std::vector<EstimateRow> estimate_experiment(const ProductMeasure& pm,
                                                    const BitString& theta_bits,
                                                    std::uint64_t length,
                                                    const std::vector<std::uint64_t>& seeds,
                                                    const std::vector<std::uint64_t>& checkpoints,
                                                    Schedule schedule = Schedule::HalfLog2) {
  Rational theta(theta_bits.to_index(), pow2(theta_bits.size()));
  MeasurePtr sampler = bernoulli(theta);
  std::vector<EstimateRow> rows;
  for (std::uint64_t seed : seeds) {
    BitString x = sample_prefix(*sampler, length, seed);
    for (std::uint64_t n : checkpoints) {
      if (n == 0 || n > length) continue;
      std::size_t k = schedule_depth(schedule, n);
      BitString xs = x.prefix(n);
      BitString map = map_cylinder(pm, k, xs);
      BitString truth;
      for (std::size_t i = 0; i < k; ++i) truth.push_back(i < theta_bits.size() ? theta_bits[i] : 0);
      rows.push_back({seed, n, k, map, truth, map == truth, pm.posterior_mass(map, xs)});
    }
  }
  return rows;
}

}  // namespace bitprob
