#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "bitprob/experiment.hpp"

using namespace bitprob;

namespace {

// split "a(b,c),d(e)" on top-level commas only
std::vector<std::string> split_specs(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Shadow {
  std::string config;
  std::string out;
  std::string in;
  std::string measure, measure_q, sampler, product, g;
  std::string x, y, theta_bits, ytrue, schedule;
  std::string family_csv, alpha_csv;
  std::uint64_t length = 0, base_seed = 0, seed_count = 0;
  std::vector<std::uint64_t> seeds, checkpoints;
  unsigned t = 20;
  std::uint64_t k = 0, nstar = 0, max_len = 4096;
  bool deterministic = false;
};

bool given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "bitprob: exact probability measures on binary strings, monotone interval codecs, "
      "likelihood-ratio tests, MDL selection and Bayesian posterior experiments"};
  app.require_subcommand(1);
  Shadow sh;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", sh.config, "JSON config file (flags override its values)");
    s->add_option("--out", sh.out, "output path, '-' for stdout");
    s->add_flag("--deterministic", sh.deterministic, "suppress the timestamp header line");
  };
  auto seeds = [&](CLI::App* s) {
    s->add_option("--seed", sh.seeds, "explicit seed list");
    s->add_option("--base-seed", sh.base_seed, "base seed for derived trials");
    s->add_option("--seed-count", sh.seed_count, "number of derived trial seeds");
  };
  auto measure_opt = [&](CLI::App* s, const char* help) {
    s->add_option("--measure", sh.measure, help);
  };
  auto product_opt = [&](CLI::App* s) {
    s->add_option("--product", sh.product, "product-measure spec, e.g. interleave(markov1(...))");
    s->add_option("--g", sh.g, "rate function: identity | zero | const:<k> | linear:<a>,<b>");
  };
  auto length_opt = [&](CLI::App* s) { s->add_option("--length", sh.length, "sample length"); };
  auto checkpoints_opt = [&](CLI::App* s) {
    s->add_option("--checkpoints", sh.checkpoints, "reporting lengths (default: 1-2-5 grid)");
  };

  CLI::App* sample = app.add_subcommand("sample", "draw exact sample paths");
  common(sample);
  seeds(sample);
  measure_opt(sample, "measure spec, e.g. bernoulli(1/3)");
  product_opt(sample);
  length_opt(sample);

  CLI::App* enc = app.add_subcommand("encode", "encode a string against a measure");
  common(enc);
  measure_opt(enc, "measure spec");
  enc->add_option("--x", sh.x, "input bits");

  CLI::App* dec = app.add_subcommand("decode", "decode a bitstream (1-D, pair, or conditional)");
  common(dec);
  measure_opt(dec, "measure spec (1-D decode)");
  product_opt(dec);
  dec->add_option("--y", sh.y, "condition bits (conditional decode)");
  dec->add_option("--in", sh.in, "input bitstream path");
  dec->add_option("--max-len", sh.max_len, "output truncation bound");

  CLI::App* encp = app.add_subcommand("encode-pair", "encode an on-grid cell (x, y)");
  common(encp);
  product_opt(encp);
  encp->add_option("--x", sh.x, "x bits");
  encp->add_option("--y", sh.y, "y bits, |y| = g(|x|)");

  CLI::App* encc = app.add_subcommand("encode-cond", "encode x given condition bits y");
  common(encc);
  product_opt(encc);
  encc->add_option("--x", sh.x, "x bits");
  encc->add_option("--y", sh.y, "condition bits, |y| >= g(|x|)");

  CLI::App* mart = app.add_subcommand("martingale", "likelihood-ratio trace along prefixes");
  common(mart);
  seeds(mart);
  measure_opt(mart, "measure spec for P");
  mart->add_option("--measure-q", sh.measure_q, "measure spec for Q");
  mart->add_option("--sampler", sh.sampler, "sampling measure (default P)");
  mart->add_option("--x", sh.x, "explicit input bits (skips sampling)");
  length_opt(mart);

  CLI::App* cls = app.add_subcommand("classify", "threshold likelihood-ratio verdicts");
  common(cls);
  seeds(cls);
  measure_opt(cls, "measure spec for P");
  cls->add_option("--measure-q", sh.measure_q, "measure spec for Q");
  cls->add_option("--sampler", sh.sampler, "sampling measure (default P)");
  cls->add_option("--t", sh.t, "threshold in bits (default 20)");
  length_opt(cls);

  CLI::App* mdl = app.add_subcommand("mdl", "prior-weighted model selection experiment");
  common(mdl);
  seeds(mdl);
  mdl->add_option("--family", sh.family_csv, "comma-separated member measure specs");
  mdl->add_option("--alpha", sh.alpha_csv, "comma-separated prior weights");
  mdl->add_option("--nstar", sh.nstar, "1-based index of the data-generating member");
  length_opt(mdl);
  checkpoints_opt(mdl);

  CLI::App* post = app.add_subcommand("posterior", "posterior cylinder concentration traces");
  common(post);
  seeds(post);
  product_opt(post);
  post->add_option("--sampler", sh.sampler, "sampling measure for x");
  post->add_option("--theta-bits", sh.theta_bits, "dyadic parameter bits");
  post->add_option("--ytrue", sh.ytrue, "tracked parameter prefix (default theta-bits)");
  post->add_option("--k", sh.k, "cylinder depth");
  length_opt(post);
  checkpoints_opt(post);

  CLI::App* est = app.add_subcommand("estimate", "MAP-cylinder estimation experiment");
  common(est);
  seeds(est);
  product_opt(est);
  est->add_option("--theta-bits", sh.theta_bits, "dyadic parameter bits");
  est->add_option("--schedule", sh.schedule, "half_log2 | ceil_log2");
  length_opt(est);
  checkpoints_opt(est);

  CLI::App* deco = app.add_subcommand("decompose", "joint vs conditional+marginal codelengths");
  common(deco);
  seeds(deco);
  product_opt(deco);
  length_opt(deco);
  checkpoints_opt(deco);

  CLI::App* ind = app.add_subcommand("independence", "joint vs marginal codelengths");
  common(ind);
  seeds(ind);
  product_opt(ind);
  length_opt(ind);
  checkpoints_opt(ind);

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();

    ExperimentConfig cfg;
    if (given(sub, "--config")) cfg = load_config_file(sh.config);
    cfg.kind = sub->get_name();
    if (given(sub, "--out")) cfg.out = sh.out;
    if (given(sub, "--in")) cfg.in = sh.in;
    if (given(sub, "--deterministic")) cfg.deterministic = true;
    if (given(sub, "--measure")) cfg.measure = sh.measure;
    if (given(sub, "--measure-q")) cfg.measure_q = sh.measure_q;
    if (given(sub, "--sampler")) cfg.sampler = sh.sampler;
    if (given(sub, "--product")) cfg.product = sh.product;
    if (given(sub, "--g")) cfg.g = sh.g;
    if (given(sub, "--x")) cfg.x = sh.x;
    if (given(sub, "--y")) cfg.y = sh.y;
    if (given(sub, "--theta-bits")) cfg.theta_bits = sh.theta_bits;
    if (given(sub, "--ytrue")) cfg.ytrue = sh.ytrue;
    if (given(sub, "--schedule")) cfg.schedule = sh.schedule;
    if (given(sub, "--length")) cfg.length = sh.length;
    if (given(sub, "--checkpoints")) cfg.checkpoints = sh.checkpoints;
    if (given(sub, "--t")) cfg.threshold_t = sh.t;
    if (given(sub, "--k")) cfg.k = (std::size_t)sh.k;
    if (given(sub, "--nstar")) cfg.nstar = (std::size_t)sh.nstar;
    if (given(sub, "--max-len")) cfg.max_len = (std::size_t)sh.max_len;
    if (given(sub, "--family")) cfg.family = split_specs(sh.family_csv);
    if (given(sub, "--alpha")) cfg.alpha = split_specs(sh.alpha_csv);
    if (given(sub, "--seed")) cfg.seeds = sh.seeds;
    if (given(sub, "--base-seed") || given(sub, "--seed-count")) {
      if (!(given(sub, "--base-seed") && given(sub, "--seed-count")))
        throw ValidationError("--base-seed and --seed-count must be given together");
      cfg.seeds.clear();
      for (std::uint64_t i = 0; i < sh.seed_count; ++i)
        cfg.seeds.push_back(trial_seed(sh.base_seed, i));
    }

    run_experiment(cfg);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config parse error at line " << e.line << ", column " << e.col << ": "
              << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {  // validation, spec parse, bad arguments
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
