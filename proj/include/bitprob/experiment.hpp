#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bitprob/bayes.hpp"
#include "bitprob/bitstream.hpp"
#include "bitprob/coder.hpp"
#include "bitprob/measure_spec.hpp"
#include "bitprob/randomness.hpp"
#include "bitprob/selection.hpp"

namespace bitprob {

// JSON syntax problem, reported with line/column.
struct ConfigError : std::invalid_argument {
  ConfigError(const std::string& what, int line_, int col_)
      : std::invalid_argument(what), line(line_), col(col_) {}
  int line;
  int col;
};

// Semantically invalid configuration (bad specs, seeds, lengths, ...).
struct ValidationError : std::invalid_argument {
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

struct ExperimentConfig {
  std::string kind;

  std::string measure;    // measure spec (P)
  std::string measure_q;  // second measure spec (Q)
  std::string sampler;    // measure spec used to draw sample paths
  std::string product;    // product-measure spec
  std::string g = "identity";

  std::string x, y;          // explicit inputs, "0"/"1" strings
  std::string theta_bits;    // dyadic parameter bits
  std::string ytrue;         // tracked parameter prefix (defaults to theta_bits)
  std::vector<std::string> family;
  std::vector<std::string> alpha;

  std::uint64_t length = 0;
  std::vector<std::uint64_t> checkpoints;  // empty: geometric default grid
  std::vector<std::uint64_t> seeds;
  unsigned threshold_t = 20;
  std::size_t k = 0;
  std::size_t nstar = 0;  // 1-based
  std::string schedule = "half_log2";
  std::size_t max_len = 4096;

  std::string out = "-";  // "-" is stdout
  std::string in;         // input bitstream path for decode
  bool deterministic = false;
};

namespace detail {

inline std::uint64_t to_u64_checked(const nlohmann::json& v, const char* what) {
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw ValidationError(std::string(what) + ": expected an integer");
  if (v.is_number_integer() && v.get<long long>() < 0)
    throw ValidationError(std::string(what) + ": must be nonnegative");
  return v.get<std::uint64_t>();
}

}  // namespace detail

// Merge JSON fields into cfg. Unknown keys are rejected.
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") cfg.kind = value.get<std::string>();
    else if (key == "measure") cfg.measure = value.get<std::string>();
    else if (key == "measure_q") cfg.measure_q = value.get<std::string>();
    else if (key == "sampler") cfg.sampler = value.get<std::string>();
    else if (key == "product") cfg.product = value.get<std::string>();
    else if (key == "g") cfg.g = value.get<std::string>();
    else if (key == "x") cfg.x = value.get<std::string>();
    else if (key == "y") cfg.y = value.get<std::string>();
    else if (key == "theta_bits") cfg.theta_bits = value.get<std::string>();
    else if (key == "ytrue") cfg.ytrue = value.get<std::string>();
    else if (key == "family") cfg.family = value.get<std::vector<std::string>>();
    else if (key == "alpha") cfg.alpha = value.get<std::vector<std::string>>();
    else if (key == "length") cfg.length = detail::to_u64_checked(value, "length");
    else if (key == "checkpoints") {
      cfg.checkpoints.clear();
      for (const auto& v : value) cfg.checkpoints.push_back(detail::to_u64_checked(v, "checkpoint"));
    } else if (key == "seeds") {
      cfg.seeds.clear();
      if (value.is_array()) {
        for (const auto& v : value) cfg.seeds.push_back(detail::to_u64_checked(v, "seed"));
      } else if (value.is_object()) {
        std::uint64_t base = detail::to_u64_checked(value.at("base"), "seeds.base");
        std::uint64_t count = detail::to_u64_checked(value.at("count"), "seeds.count");
        for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(trial_seed(base, i));
      } else {
        throw ValidationError("seeds: expected a list or {base, count}");
      }
    } else if (key == "t") cfg.threshold_t = (unsigned)detail::to_u64_checked(value, "t");
    else if (key == "k") cfg.k = (std::size_t)detail::to_u64_checked(value, "k");
    else if (key == "nstar") cfg.nstar = (std::size_t)detail::to_u64_checked(value, "nstar");
    else if (key == "schedule") cfg.schedule = value.get<std::string>();
    else if (key == "max_len") cfg.max_len = (std::size_t)detail::to_u64_checked(value, "max_len");
    else if (key == "out") cfg.out = value.get<std::string>();
    else if (key == "in") cfg.in = value.get<std::string>();
    else if (key == "deterministic") cfg.deterministic = value.get<bool>();
    else throw ValidationError("config: unknown key \"" + key + "\"");
  }
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config " + path + ": " + e.what(), line, col);
  }
  ExperimentConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

namespace detail {

class CsvWriter {
 public:
  CsvWriter(const std::string& path, bool deterministic, const std::string& header) {
    if (path != "-") {
      file_.open(path, std::ios::trunc);
      if (!file_) throw IoError("cannot write " + path);
      os_ = &file_;
    } else {
      os_ = &std::cout;
    }
    if (!deterministic) {
      std::time_t now = std::time(nullptr);
      char buf[32];
      std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&now));
      *os_ << "# generated " << buf << "\n";
    }
    *os_ << header << "\n";
  }

  template <typename... Parts>
  void row(const Parts&... parts) {
    bool first = true;
    ((*os_ << (first ? "" : ","), first = false, *os_ << parts), ...);
    *os_ << "\n";
  }

  void line(const std::string& s) { *os_ << s << "\n"; }

  ~CsvWriter() {
    if (file_.is_open()) file_.close();
  }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

inline std::string log2_cell(const Rational& r) {
  return r.is_zero() ? std::string("-inf") : std::to_string(r.log2_fixed());
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

inline MeasurePtr need_measure(const std::string& spec, const char* what) {
  require(!spec.empty(), std::string(what) + ": missing measure spec");
  try {
    return parse_measure_spec(spec);
  } catch (const SpecParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

inline ProductMeasurePtr need_product(const std::string& spec, const char* what) {
  require(!spec.empty(), std::string(what) + ": missing product spec");
  try {
    return parse_product_spec(spec);
  } catch (const SpecParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

inline void check_seeds(const std::vector<std::uint64_t>& seeds) {
  require(!seeds.empty(), "seeds: at least one seed required");
  std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
  require(uniq.size() == seeds.size(), "seeds: must be distinct");
}

inline std::vector<std::uint64_t> checkpoints_or_default(const ExperimentConfig& cfg) {
  if (!cfg.checkpoints.empty()) {
    for (auto c : cfg.checkpoints)
      require(c >= 1 && c <= cfg.length, "checkpoints: outside [1, length]");
    return cfg.checkpoints;
  }
  return default_checkpoints(cfg.length);
}

inline ModelFamily need_family(const ExperimentConfig& cfg) {
  require(cfg.family.size() >= 2, "family: need at least two member specs");
  require(cfg.family.size() == cfg.alpha.size(), "family/alpha: size mismatch");
  std::vector<MeasurePtr> members;
  std::vector<Rational> alpha;
  for (const auto& s : cfg.family) members.push_back(need_measure(s, "family"));
  for (const auto& s : cfg.alpha) {
    try {
      alpha.push_back(Rational::parse(s));
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string("alpha: ") + e.what());
    }
  }
  try {
    return ModelFamily(std::move(members), std::move(alpha));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

// --- runners ---------------------------------------------------------------

inline void run_sample(const ExperimentConfig& cfg) {
  require(cfg.length >= 1, "sample: length must be >= 1");
  check_seeds(cfg.seeds);
  CsvWriter w(cfg.out, cfg.deterministic, cfg.product.empty() ? "seed,x" : "seed,x,y");
  if (!cfg.product.empty()) {
    auto pm = need_product(cfg.product, "sample");
    RateFunction g = parse_rate_spec(cfg.g);
    for (auto seed : cfg.seeds) {
      auto [x, y] = sample_pair(*pm, cfg.length, g(cfg.length), seed);
      w.row(seed, x.str(), y.str());
    }
  } else {
    auto m = need_measure(cfg.measure, "sample");
    for (auto seed : cfg.seeds) w.row(seed, sample_prefix(*m, cfg.length, seed).str());
  }
}

inline void run_encode(const ExperimentConfig& cfg) {
  require(cfg.out != "-", "encode: --out file required for the bitstream");
  auto m = need_measure(cfg.measure, "encode");
  CodeWord p = encode(*m, BitString(cfg.x));
  write_codeword_file(cfg.out, p.bits);
}

inline void run_encode_pair(const ExperimentConfig& cfg) {
  require(cfg.out != "-", "encode-pair: --out file required for the bitstream");
  auto pm = need_product(cfg.product, "encode-pair");
  GridCoder gc(*pm, parse_rate_spec(cfg.g));
  CodeWord p = gc.encode_pair(BitString(cfg.x), BitString(cfg.y));
  write_codeword_file(cfg.out, p.bits);
}

inline void run_encode_cond(const ExperimentConfig& cfg) {
  require(cfg.out != "-", "encode-cond: --out file required for the bitstream");
  auto pm = need_product(cfg.product, "encode-cond");
  CodeWord p = encode_cond(*pm, parse_rate_spec(cfg.g), BitString(cfg.x), BitString(cfg.y));
  write_codeword_file(cfg.out, p.bits);
}

inline void run_decode(const ExperimentConfig& cfg) {
  require(!cfg.in.empty(), "decode: --in bitstream required");
  BitString p = read_codeword_file(cfg.in);
  CsvWriter w(cfg.out, cfg.deterministic, cfg.product.empty() ? "x" : (cfg.y.empty() ? "x,y" : "x"));
  if (cfg.product.empty()) {
    auto m = need_measure(cfg.measure, "decode");
    w.line(decode(*m, {p}, cfg.max_len).str());
  } else {
    auto pm = need_product(cfg.product, "decode");
    RateFunction g = parse_rate_spec(cfg.g);
    if (cfg.y.empty()) {
      auto [x, y] = GridCoder(*pm, g).decode_pair({p}, cfg.max_len);
      w.row(x.str(), y.str());
    } else {
      w.line(decode_cond(*pm, g, {p}, BitString(cfg.y), cfg.max_len).str());
    }
  }
}

inline void run_martingale(const ExperimentConfig& cfg) {
  auto p = need_measure(cfg.measure, "martingale");
  auto q = need_measure(cfg.measure_q, "martingale (Q)");
  BitString xs;
  if (!cfg.x.empty()) {
    xs = BitString(cfg.x);
  } else {
    require(cfg.length >= 1, "martingale: length must be >= 1 when sampling");
    check_seeds(cfg.seeds);
    auto sampler = cfg.sampler.empty() ? p : need_measure(cfg.sampler, "sampler");
    xs = sample_prefix(*sampler, cfg.length, cfg.seeds.front());
  }
  MartingaleTrace tr = martingale_trace(*p, *q, xs);
  CsvWriter w(cfg.out, cfg.deterministic, "n,log2r_fixed,ratio_num,ratio_den");
  for (const auto& pt : tr.points)
    w.row(pt.n, log2_cell(pt.r), pt.r.num().get_str(), pt.r.den().get_str());
}

inline void run_classify(const ExperimentConfig& cfg) {
  auto p = need_measure(cfg.measure, "classify");
  auto q = need_measure(cfg.measure_q, "classify (Q)");
  require(cfg.threshold_t >= 1, "classify: t must be >= 1");
  require(cfg.length >= 1, "classify: length must be >= 1");
  check_seeds(cfg.seeds);
  auto sampler = cfg.sampler.empty() ? p : need_measure(cfg.sampler, "sampler");
  CsvWriter w(cfg.out, cfg.deterministic, "seed,n,t,verdict,log2r_fixed");
  for (auto seed : cfg.seeds) {
    BitString xs = sample_prefix(*sampler, cfg.length, seed);
    Verdict v = classify(*p, *q, xs, cfg.threshold_t);
    w.row(seed, cfg.length, cfg.threshold_t, to_string(v), log2_cell(ratio(*p, *q, xs)));
  }
}

inline void run_mdl(const ExperimentConfig& cfg) {
  ModelFamily fam = need_family(cfg);
  require(cfg.nstar >= 1 && cfg.nstar <= fam.members.size(), "mdl: nstar out of range");
  require(cfg.length >= 1, "mdl: length must be >= 1");
  check_seeds(cfg.seeds);
  auto cps = checkpoints_or_default(cfg);
  CsvWriter w(cfg.out, cfg.deterministic, "seed,n,selected,loo_ratio_num,loo_ratio_den");
  for (const auto& tr : consistency_run(fam, cfg.nstar, cfg.length, cfg.seeds, cps))
    for (const auto& pt : tr.points)
      w.row(tr.seed, pt.n, pt.selected, pt.loo.num().get_str(), pt.loo.den().get_str());
}

inline void run_posterior(const ExperimentConfig& cfg) {
  auto pm = need_product(cfg.product, "posterior");
  require(cfg.length >= 1, "posterior: length must be >= 1");
  check_seeds(cfg.seeds);
  auto sampler = need_measure(cfg.sampler, "posterior sampler");
  std::string ytrue_bits = cfg.ytrue.empty() ? cfg.theta_bits : cfg.ytrue;
  BitString ytrue(ytrue_bits);
  require(ytrue.size() >= cfg.k, "posterior: ytrue shorter than k");
  auto cps = checkpoints_or_default(cfg);
  CsvWriter w(cfg.out, cfg.deterministic, "seed,n,k,cylinder,mass_num,mass_den");
  for (auto seed : cfg.seeds) {
    BitString x = sample_prefix(*sampler, cfg.length, seed);
    for (const auto& [n, mass] : concentration_trace(*pm, ytrue, x, cfg.k, cps))
      w.row(seed, n, cfg.k, ytrue.prefix(cfg.k).str(), mass.num().get_str(),
            mass.den().get_str());
  }
}

inline void run_estimate(const ExperimentConfig& cfg) {
  auto pm = need_product(cfg.product, "estimate");
  require(!cfg.theta_bits.empty(), "estimate: theta_bits required");
  require(cfg.length >= 1, "estimate: length must be >= 1");
  check_seeds(cfg.seeds);
  Schedule sched;
  if (cfg.schedule == "half_log2") sched = Schedule::HalfLog2;
  else if (cfg.schedule == "ceil_log2") sched = Schedule::CeilLog2;
  else throw ValidationError("estimate: schedule must be half_log2 or ceil_log2");
  auto cps = checkpoints_or_default(cfg);
  CsvWriter w(cfg.out, cfg.deterministic,
              "seed,n,k,map_cylinder,true_prefix,hit,posterior_mass_num,posterior_mass_den");
  for (const auto& r :
       estimate_experiment(*pm, BitString(cfg.theta_bits), cfg.length, cfg.seeds, cps, sched))
    w.row(r.seed, r.n, r.k, r.map.str(), r.truth.str(), (int)r.hit, r.map_mass.num().get_str(),
          r.map_mass.den().get_str());
}

inline void run_codelength_stats(const ExperimentConfig& cfg, bool decomposition) {
  auto pm = need_product(cfg.product, decomposition ? "decompose" : "independence");
  RateFunction g = parse_rate_spec(cfg.g);
  require(cfg.length >= 1, "length must be >= 1");
  check_seeds(cfg.seeds);
  auto cps = checkpoints_or_default(cfg);
  GridCoder gc(*pm, g);
  auto mx = pm->marginal_x();
  auto my = pm->marginal_y();
  CsvWriter w(cfg.out, cfg.deterministic,
              decomposition ? "seed,n,stat_bits,len_pair,len_cond,len_marg_y"
                            : "seed,n,stat_bits,len_pair,len_marg_x,len_marg_y");
  for (auto seed : cfg.seeds) {
    auto [x, y] = sample_pair(*pm, cfg.length, g(cfg.length), seed);
    for (auto n : cps) {
      BitString xs = x.prefix(n);
      BitString ys = y.prefix(g(n));
      long pair_len = (long)gc.encode_pair(xs, ys).length();
      long ylen = (long)encode(*my, ys).length();
      if (decomposition) {
        long cond_len = (long)encode_cond(*pm, g, xs, ys).length();
        w.row(seed, n, pair_len - cond_len - ylen, pair_len, cond_len, ylen);
      } else {
        long xlen = (long)encode(*mx, xs).length();
        w.row(seed, n, pair_len - xlen - ylen, pair_len, xlen, ylen);
      }
    }
  }
}

}  // namespace detail

// Dispatch a validated configuration. Throws ConfigError / ValidationError /
// SpecParseError / IoError; domain errors from the library pass through.
inline void run_experiment(const ExperimentConfig& cfg) {
  using namespace detail;
  if (cfg.kind == "sample") run_sample(cfg);
  else if (cfg.kind == "encode") run_encode(cfg);
  else if (cfg.kind == "encode-pair") run_encode_pair(cfg);
  else if (cfg.kind == "encode-cond") run_encode_cond(cfg);
  else if (cfg.kind == "decode") run_decode(cfg);
  else if (cfg.kind == "martingale") run_martingale(cfg);
  else if (cfg.kind == "classify") run_classify(cfg);
  else if (cfg.kind == "mdl") run_mdl(cfg);
  else if (cfg.kind == "posterior") run_posterior(cfg);
  else if (cfg.kind == "estimate") run_estimate(cfg);
  else if (cfg.kind == "decompose") run_codelength_stats(cfg, true);
  else if (cfg.kind == "independence") run_codelength_stats(cfg, false);
  else throw ValidationError("unknown experiment kind \"" + cfg.kind + "\"");
}

}  // namespace bitprob
