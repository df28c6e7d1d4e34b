#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bitprob/measure.hpp"
#include "bitprob/rng.hpp"

namespace bitprob {

// Model indices are 1-based throughout this module.

// argmax_n alpha(n) P_n(x), ties broken by the smallest index.
inline std::size_t mdl_select(const ModelFamily& fam, const BitString& x) {
  std::size_t best = 1;
  Rational best_w = fam.alpha[0] * fam.members[0]->mass(x);
  for (std::size_t i = 1; i < fam.members.size(); ++i) {
    Rational w = fam.alpha[i] * fam.members[i]->mass(x);
    if (w > best_w) {
      best_w = w;
      best = i + 1;
    }
  }
  return best;
}

// Leave-one-out mixture ratio P^-(x) / P_nstar(x), where the held-out prior
// is beta(n) = alpha(n) / (1 - alpha(nstar)) for n != nstar.
inline Rational loo_ratio(const ModelFamily& fam, std::size_t nstar, const BitString& x) {
  if (nstar < 1 || nstar > fam.members.size()) throw std::invalid_argument("loo_ratio: bad index");
  Rational pstar = fam.members[nstar - 1]->mass(x);
  if (pstar.is_zero()) throw std::domain_error("loo_ratio: reference model has zero mass");
  Rational rest(0);
  for (std::size_t i = 0; i < fam.members.size(); ++i) {
    if (i + 1 == nstar) continue;
    rest += fam.alpha[i] * fam.members[i]->mass(x);
  }
  Rational denom = (Rational(1) - fam.alpha[nstar - 1]) * pstar;
  return rest / denom;
}

struct SelectionPoint {
  std::uint64_t n;
  std::size_t selected;  // 1-based
  Rational loo;
};

struct SelectionTrace {
  std::uint64_t seed;
  std::vector<SelectionPoint> points;
};

// Sample from member nstar and record the selector and leave-one-out ratio at
// the checkpoints. Member masses are maintained incrementally along the path.
inline SelectionTrace selection_trial(const ModelFamily& fam, std::size_t nstar,
                                      std::uint64_t length, std::uint64_t seed,
                                      const std::vector<std::uint64_t>& checkpoints) {
  if (nstar < 1 || nstar > fam.members.size()) throw std::invalid_argument("selection: bad index");
  const std::size_t count = fam.members.size();
  Int alpha_den = 1;
  for (const auto& a : fam.alpha) alpha_den = lcm(alpha_den, a.den());
  std::vector<Int> aw;  // alpha over the common denominator
  for (const auto& a : fam.alpha) aw.push_back(Int(a.num() * (alpha_den / a.den())));

  std::vector<std::unique_ptr<MassCursor>> cur;
  std::vector<Int> num(count, Int(1));  // member masses over a common denominator
  for (const auto& m : fam.members) cur.push_back(m->cursor());
  auto truth = fam.members[nstar - 1]->cursor();

  SplitMix64 rng(seed);
  SelectionTrace tr{seed, {}};
  std::size_t ci = 0;
  for (std::uint64_t n = 1; n <= length; ++n) {
    int b = draw_bit(rng, truth->one_probability());
    truth->advance(b);
    Int step_den = 1;
    std::vector<StepRatio> r(count);
    for (std::size_t i = 0; i < count; ++i) {
      r[i] = cur[i]->one_probability();
      step_den = lcm(step_den, r[i].den);
    }
    for (std::size_t i = 0; i < count; ++i) {
      Int s = b ? r[i].num : Int(r[i].den - r[i].num);
      num[i] *= s * (step_den / r[i].den);
      cur[i]->advance(b);
    }
    while (ci < checkpoints.size() && checkpoints[ci] < n) ++ci;
    if (ci < checkpoints.size() && checkpoints[ci] == n) {
      std::size_t sel = 1;
      Int best = aw[0] * num[0];
      for (std::size_t i = 1; i < count; ++i) {
        Int w = aw[i] * num[i];
        if (w > best) {
          best = w;
          sel = i + 1;
        }
      }
      Int rest = 0;
      for (std::size_t i = 0; i < count; ++i)
        if (i + 1 != nstar) rest += aw[i] * num[i];
      Rational loo(rest, Int((alpha_den - aw[nstar - 1]) * num[nstar - 1]));
      tr.points.push_back({n, sel, std::move(loo)});
      ++ci;
    }
  }
  return tr;
}

inline std::vector<SelectionTrace> consistency_run(const ModelFamily& fam, std::size_t nstar,
                                                   std::uint64_t length,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   const std::vector<std::uint64_t>& checkpoints) {
  std::vector<SelectionTrace> out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(selection_trial(fam, nstar, length, s, checkpoints));
  return out;
}

// Geometric reporting grid: 1-2-5 decades clipped to [lo, length], plus the
// final length.
inline std::vector<std::uint64_t> default_checkpoints(std::uint64_t length, std::uint64_t lo = 10) {
  std::vector<std::uint64_t> cps;
  for (std::uint64_t decade = 1; decade <= length;) {
    for (std::uint64_t mult : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{5}}) {
      std::uint64_t v = decade * mult;
      if (v >= lo && v <= length) cps.push_back(v);
    }
    if (decade > length / 10) break;
    decade *= 10;
  }
  if (cps.empty() || cps.back() != length) cps.push_back(length);
  return cps;
}

}  // namespace bitprob
