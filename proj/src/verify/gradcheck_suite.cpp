#include "relprobe/verify/gradcheck_suite.hpp"

#include <chrono>
#include <random>

#include "relprobe/autodiff/init.hpp"
#include "relprobe/autodiff/ops.hpp"
#include "relprobe/encoders/lstm.hpp"
#include "relprobe/encoders/toy_encoder.hpp"
#include "relprobe/gat/gat.hpp"
#include "relprobe/graph/day_graph.hpp"
#include "relprobe/relation_head/relation_head.hpp"
#include "relprobe/trainer/loss.hpp"

namespace relprobe::verify {

namespace {

using Tensor = ad::Tensor<double>;
using Named = std::vector<ad::NamedTensor<double>>;

Tensor random_constant(const ad::Shape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(ad::numel(shape));
  for (auto& x : v) x = nd(rng);
  return Tensor::constant(shape, std::move(v));
}

// Scalar <w, t> with w fixed; plain sums hide errors in normalizing ops.
Tensor probe(const Tensor& t, const Tensor& w) { return ad::sum(ad::mul(t, w)); }

void nudge(std::vector<ad::NamedTensor<double>>& params, std::mt19937_64& rng) {
  // Move gains and zero biases off their symmetric initial values.
  std::normal_distribution<double> nd(0.0, 0.3);
  for (auto& p : params) {
    auto d = p.tensor.data();
    for (auto& x : d) x += nd(rng);
  }
}

}  // namespace

std::vector<SuiteEntry> run_gradcheck_suite(const SuiteOptions& opts) {
  std::vector<SuiteEntry> out;
  std::mt19937_64 rng(opts.seed);
  auto run = [&](const std::string& name, const std::function<Tensor()>& f, const Named& inputs) {
    const auto t0 = std::chrono::steady_clock::now();
    auto rep = ad::gradcheck<double>(f, inputs, opts.step, opts.tol);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back({name, std::move(rep), secs});
  };

  constexpr std::size_t n = 4, d = 8, dp = 6, len = 5;

  {
    enc::ToyEncoder<double> encoder({12, 6, d}, rng());
    Named params;
    encoder.collect(params, "encoder.");
    nudge(params, rng);
    const std::vector<int> tokens{3, 0, 11, 7, 3};
    const auto w = random_constant({len, d}, rng);
    run("toy_encoder", [&] { return probe(encoder.encode(tokens).states, w); }, params);
  }

  for (auto variant : {head::HeadVariant::Full, head::HeadVariant::Limited, head::HeadVariant::Pooling}) {
    head::RelationHead<double> rh({n, d, dp}, rng());
    Named params;
    rh.collect(params, "head.", variant);
    nudge(params, rng);
    auto states = ad::randn_param<double>({len, d}, 1.0, rng);
    params.push_back({"states", states});
    const std::vector<std::size_t> mentioned{0, 2};
    const auto w = random_constant({n, n}, rng);
    run(std::string("relation_head_") + head::to_string(variant),
        [&] { return probe(rh.apply(variant, states, mentioned)->interaction, w); }, params);
  }

  {
    auto norm = graph::GraphNorm<double>::make(n);
    Named params;
    norm.collect(params, "graph_norm.");
    nudge(params, rng);
    std::vector<Tensor> interactions;
    for (int i = 0; i < 3; ++i) {
      interactions.push_back(ad::randn_param<double>({n, n}, 1.0, rng));
      params.push_back({"interaction" + std::to_string(i), interactions.back()});
    }
    const graph::ThresholdConfig tc;
    // The support is read once and held fixed while perturbing.
    const auto support = graph::build_day_graph<double>(interactions, n, tc, norm, "d").adjacency;
    std::vector<double> mask(support.begin(), support.end());
    const auto fixed = Tensor::constant({n, n}, mask);
    const auto w = random_constant({n, n}, rng);
    run("day_graph",
        [&] {
          auto g = graph::build_day_graph<double>(interactions, n, tc, norm, "d");
          return probe(ad::mul(g.attr, fixed), w);
        },
        params);
  }

  {
    enc::Lstm<double> lstm({5, dp}, rng());
    Named params;
    lstm.collect(params, "lstm.");
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<enc::MarketWindow> windows(3);
    for (auto& win : windows) {
      win.steps = 4;
      win.features = 5;
      for (int i = 0; i < 20; ++i) win.values.push_back(nd(rng));
    }
    const auto w = random_constant({3, dp}, rng);
    run("lstm", [&] { return probe(lstm.encode(windows), w); }, params);
  }

  {
    auto gp = gat::GatParams<double>::make({dp, dp, 2, 0.2}, rng());
    Named params;
    gp.collect(params, "gat.");
    auto x = ad::randn_param<double>({n, dp}, 1.0, rng);
    params.push_back({"features", x});
    // Edge attributes kept at least 0.2 away from the threshold.
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> attr_v(n * n);
    for (auto& a : attr_v) a = unif(rng) < 0.5 ? 0.7 + unif(rng) : 0.3 - unif(rng);
    auto attr = Tensor::param({n, n}, attr_v);
    params.push_back({"edge_attr", attr});
    const auto w = random_constant({n, 3}, rng);
    run("gat_2layer",
        [&] {
          auto g = graph::threshold_graph<double>(attr, {}, "d", 1);
          return probe(gat::predict(gp, x, g), w);
        },
        params);
  }

  {
    auto logits = ad::randn_param<double>({n, 3}, 1.0, rng);
    const std::vector<int> labels{0, 1, -1, 2};
    run("weighted_ce",
        [&] { return train::weighted_ce(ad::row_softmax(logits), labels, train::kDefaultClassWeights); },
        {{"logits", logits}});
  }
  return out;
}

bool all_pass(const std::vector<SuiteEntry>& entries) {
  for (const auto& e : entries)
    if (!e.report.pass) return false;
  return true;
}

}  // namespace relprobe::verify
