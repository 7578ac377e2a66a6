#include <doctest.h>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "relprobe/autodiff/ops.hpp"
#include "relprobe/trainer/adam.hpp"
#include "relprobe/trainer/labels.hpp"
#include "relprobe/trainer/trainer.hpp"
#include "support/oracles.hpp"
#include "support/tmpdir.hpp"

using namespace relprobe;

namespace {

synth::WorldConfig tiny_world() {
  synth::WorldConfig cfg;
  cfg.tickers = 4;
  cfg.days = 60;
  cfg.articles_per_day = 2;
  cfg.article_len = 10;
  cfg.planted_pairs = 2;
  cfg.max_degree = 2;
  cfg.vocab = 30;
  cfg.relation_vocab = 4;
  return cfg;
}

struct Fixture {
  synth::Corpus corpus;
  train::Dataset ds;
  train::ModelConfig mc;

  Fixture() {
    const auto cfg = tiny_world();
    corpus = synth::PlantedWorld(cfg, 5).generate(6);
    ds = train::build_dataset(corpus.prices, corpus.articles, {5, {8, 1, 1}, false});
    mc.tickers = cfg.tickers;
    mc.encoder = {cfg.vocab, 16, 4};
    mc.proj_dim = 3;
    mc.node_dim = 4;
  }
};

train::TrainConfig quick(std::vector<double> lrs, std::size_t epochs, std::size_t patience) {
  train::TrainConfig tc;
  tc.lrs = std::move(lrs);
  tc.max_epochs = epochs;
  tc.patience = patience;
  tc.seed = 21;
  return tc;
}

bool same_log(const std::vector<train::EpochRecord>& a, const std::vector<train::EpochRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].epoch != b[i].epoch || a[i].lr != b[i].lr || a[i].split != b[i].split ||
        a[i].loss != b[i].loss || a[i].metrics.macro_f1 != b[i].metrics.macro_f1 ||
        a[i].metrics.accuracy != b[i].metrics.accuracy || a[i].metrics.mcc != b[i].metrics.mcc ||
        a[i].metrics.auc != b[i].metrics.auc)
      return false;
  }
  return true;
}

bool same_params(const std::vector<ad::NamedArray>& a, const std::vector<ad::NamedArray>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || a[i].data != b[i].data) return false;
  return true;
}

}  // namespace

TEST_CASE("trend labels use strict bands around one standard deviation") {
  CHECK(train::trend_of(0.02, 0.01) == train::kPositive);
  CHECK(train::trend_of(-0.02, 0.01) == train::kNegative);
  CHECK(train::trend_of(0.01, 0.01) == train::kNeutral);
  CHECK(train::trend_of(-0.01, 0.01) == train::kNeutral);
  CHECK(train::trend_of(0.0, 0.01) == train::kNeutral);
}

TEST_CASE("return std is the sample deviation of finite entries") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> r{nan, 1.0, 2.0, nan, 3.0, 4.0};
  CHECK(*train::return_std(r) == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK_FALSE(train::return_std(std::vector<double>{nan, 1.0}).has_value());
  CHECK_FALSE(train::return_std(std::vector<double>{}).has_value());
}

TEST_CASE("labels come from the next return and the last day stays unlabeled") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<std::vector<double>> returns{{nan, 0.1, -0.1, 0.0, 0.3}, {nan, nan, nan, nan, 1.0}};
  const auto table = train::make_labels(returns);
  const double s = *train::return_std(returns[0]);
  CHECK(table.std_dev[0] == s);
  CHECK(table.labels[0][0] == train::trend_of(0.1, s));
  CHECK(table.labels[0][1] == train::trend_of(-0.1, s));
  CHECK(table.labels[0][3] == train::kPositive);
  CHECK(table.labels[0][4] == train::kUnlabeled);
  CHECK(std::isnan(table.std_dev[1]));
  for (int y : table.labels[1]) CHECK(y == train::kUnlabeled);
  const auto early = train::make_labels(returns, 3);
  CHECK(early.std_dev[0] == doctest::Approx(std::sqrt(0.01 * 2.0)));
}

TEST_CASE("weighted cross-entropy matches the oracle value and gradient") {
  oracle::Gen g(1);
  const train::ClassWeights w{5.0, 1.0, 5.0};
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = g.index(1, 6);
    oracle::Mat p(n * 3);
    std::vector<int> y(n);
    for (std::size_t u = 0; u < n; ++u) {
      double s = 0;
      for (std::size_t c = 0; c < 3; ++c) s += p[u * 3 + c] = g.uniform(0.05, 1.0);
      for (std::size_t c = 0; c < 3; ++c) p[u * 3 + c] /= s;
      y[u] = int(g.index(0, 3)) - 1;
    }
    auto probs = ad::Tensor<double>::param({n, 3}, p);
    const auto loss = train::weighted_ce(probs, y, w);
    double want = 0;
    bool any = false;
    for (std::size_t u = 0; u < n; ++u)
      if (y[u] >= 0) {
        want -= w[y[u]] * std::log(p[u * 3 + y[u]]);
        any = true;
      }
    CHECK(loss.item() == doctest::Approx(want).epsilon(1e-12));
    if (!any) {
      CHECK_FALSE(loss.requires_grad());
      continue;
    }
    ad::backward(loss);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t c = 0; c < 3; ++c) {
        const double gw = (y[u] == int(c)) ? -w[c] / p[u * 3 + c] : 0.0;
        CHECK(probs.grad()[u * 3 + c] == doctest::Approx(gw).epsilon(1e-12));
      }
    const auto plain = train::cross_entropy(probs, y);
    const auto unit = train::weighted_ce(probs, y, {1.0, 1.0, 1.0});
    CHECK(plain.item() == doctest::Approx(unit.item()).epsilon(1e-12));
  }
}

TEST_CASE("cross-entropy floors zero probabilities and checks shapes") {
  const auto probs = ad::Tensor<double>::constant({1, 3}, {0.0, 0.5, 0.5});
  const auto loss = train::weighted_ce(probs, std::vector<int>{0}, {5.0, 1.0, 5.0});
  CHECK(loss.item() == doctest::Approx(-5.0 * std::log(1e-12)));
  CHECK_THROWS_AS(train::weighted_ce(probs, std::vector<int>{0, 1}, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(train::weighted_ce(probs, std::vector<int>{3}, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("Adam follows the bias-corrected update") {
  auto x = ad::Tensor<double>::param({3}, {1.0, -2.0, 0.5});
  const std::vector<double> c1{0.3, -1.0, 2.0}, c2{-0.5, 0.25, 1.0};
  train::Adam<double> adam({{"x", x}});
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<double> m(3, 0), v(3, 0), want{1.0, -2.0, 0.5};
  for (int step = 1; step <= 2; ++step) {
    const auto& c = step == 1 ? c1 : c2;
    adam.zero_grad();
    ad::backward(ad::sum(ad::mul(x, ad::Tensor<double>::constant({3}, c))));
    adam.step(lr);
    for (std::size_t j = 0; j < 3; ++j) {
      m[j] = b1 * m[j] + (1 - b1) * c[j];
      v[j] = b2 * v[j] + (1 - b2) * c[j] * c[j];
      const double mh = m[j] / (1 - std::pow(b1, step)), vh = v[j] / (1 - std::pow(b2, step));
      want[j] -= lr * mh / (std::sqrt(vh) + eps);
    }
    for (std::size_t j = 0; j < 3; ++j) CHECK(x.value()[j] == doctest::Approx(want[j]).epsilon(1e-14));
  }
  CHECK(adam.steps() == 2);
  // First step moves every coordinate by lr against its gradient sign.
  auto y = ad::Tensor<double>::param({1}, {0.0});
  train::Adam<double> fresh({{"y", y}});
  ad::backward(ad::scale(ad::sum(y), 3.0));
  fresh.step(0.01);
  CHECK(y.value()[0] == doctest::Approx(-0.01).epsilon(1e-6));
}

TEST_CASE("Adam refuses non-finite gradients without touching parameters") {
  auto a = ad::Tensor<double>::param({2}, {1.0, 2.0});
  auto b = ad::Tensor<double>::param({2}, {3.0, 4.0});
  train::Adam<double> adam({{"a", a}, {"b", b}});
  ad::backward(ad::sum(ad::add(a, b)));
  b.mutable_grad()[1] = std::numeric_limits<double>::quiet_NaN();
  try {
    adam.step(0.1);
    FAIL("expected NonFiniteGradient");
  } catch (const train::NonFiniteGradient& e) {
    CHECK(e.param() == "b");
  }
  CHECK(a.value()[0] == 1.0);
  CHECK(b.value()[0] == 3.0);
  CHECK(adam.steps() == 0);
  const auto derived = ad::scale(a, 2.0);
  CHECK_THROWS_AS(train::Adam<double>({{"d", derived}}), std::invalid_argument);
}

TEST_CASE("Adam state round trips") {
  auto x = ad::Tensor<float>::param({2}, {1.0f, 2.0f});
  train::Adam<float> adam({{"x", x}});
  ad::backward(ad::sum(ad::mul(x, x)));
  adam.step(0.1);
  auto y = ad::Tensor<float>::param({2}, {1.0f, 2.0f});
  train::Adam<float> other({{"x", y}});
  other.load_state(adam.state());
  CHECK(other.steps() == 1);
  const auto s1 = adam.state(), s2 = other.state();
  CHECK(same_params(s1, s2));
  CHECK_THROWS_AS(other.load_state({}), std::runtime_error);
}

TEST_CASE("dataset splits usable days chronologically") {
  Fixture f;
  // Usable days run from the window end to the second-to-last day.
  const std::size_t usable = 60 - 2 - 5 + 1;
  CHECK(f.ds.train.size() == std::size_t(std::floor(usable * 0.8)));
  CHECK(f.ds.val.size() == std::size_t(std::floor(usable * 0.1)));
  CHECK(f.ds.train.size() + f.ds.val.size() + f.ds.test.size() == usable);
  CHECK(f.ds.train.front().t == 5);
  CHECK(f.ds.test.back().t == 58);
  CHECK(f.ds.train.back().t < f.ds.val.front().t);
  CHECK(f.ds.val.back().t < f.ds.test.front().t);
  const auto table = train::make_labels(enc::close_returns(f.corpus.prices));
  for (const auto& day : f.ds.val) {
    CHECK(day.windows.size() == 4);
    CHECK(day.windows[0].steps == 5);
    for (std::size_t u = 0; u < 4; ++u) CHECK(day.labels[u] == table.labels[u][day.t]);
    CHECK(day.articles.size() == 2);
  }
  const auto counts = train::class_counts(f.ds.train);
  CHECK(counts[0] + counts[1] + counts[2] == f.ds.train.size() * 4);
}

TEST_CASE("market windows are z-scored per ticker on training rows") {
  Fixture f;
  const auto feats = enc::market_features(f.corpus.prices);
  const std::size_t stat_end = f.ds.train.back().t + 1;
  for (std::size_t u = 0; u < 4; ++u)
    for (std::size_t k = 0; k < enc::kMarketFeatures; ++k) {
      double mean = 0, var = 0;
      for (std::size_t t = 1; t < stat_end; ++t) mean += feats[u][t][k] / double(stat_end - 1);
      for (std::size_t t = 1; t < stat_end; ++t) var += std::pow(feats[u][t][k] - mean, 2) / double(stat_end - 1);
      const auto& day = f.ds.test.back();
      const double last = day.windows[u].values[(day.windows[u].steps - 1) * enc::kMarketFeatures + k];
      CHECK(last == doctest::Approx((feats[u][day.t][k] - mean) / std::sqrt(var)).epsilon(1e-9));
    }
}

TEST_CASE("weekend news joins the next session and bad configs are rejected") {
  Fixture f;
  auto articles = f.corpus.articles;
  // 2021-01-09 is a Saturday; the next session is Monday 2021-01-11.
  articles.push_back({"weekend", "2021-01-09", {1, 2}, {0, 1}});
  const auto ds = train::build_dataset(f.corpus.prices, articles, {5, {8, 1, 1}, false});
  const auto& monday = ds.train.at(0);
  REQUIRE(monday.date == "2021-01-11");
  bool found = false;
  for (auto i : monday.articles) found = found || ds.articles[i].id == "weekend";
  CHECK(found);
  CHECK_THROWS_AS(train::build_dataset(f.corpus.prices, articles, {0, {8, 1, 1}, false}),
                  std::invalid_argument);
  CHECK_THROWS_AS(train::build_dataset(f.corpus.prices, articles, {59, {8, 1, 1}, false}),
                  std::invalid_argument);
  CHECK_THROWS_AS(train::build_dataset(f.corpus.prices, articles, {5, {8, 0, 1}, false}),
                  std::invalid_argument);
  CHECK_THROWS_AS(train::build_dataset(f.corpus.prices, articles, {5, {100, 1, 1}, false}),
                  std::invalid_argument);
}

TEST_CASE("training sweeps rates, stops early and keeps the best validation model") {
  Fixture f;
  const auto tc = quick({1e-2, 1e-3}, 4, 1);
  auto factory = [&] { return train::RelationalModel<float>(f.mc, tc.seed); };
  const auto r = train::train<float>(factory, f.ds, tc);
  double best = -1;
  for (double lr : tc.lrs) {
    std::vector<double> val;
    for (const auto& rec : r.log)
      if (rec.lr == lr && rec.split == "val") val.push_back(rec.metrics.macro_f1);
    REQUIRE_FALSE(val.empty());
    CHECK(val.size() <= 4);
    // With patience 1 the run ends at the first epoch that fails to improve.
    double running = -1;
    for (std::size_t e = 0; e < val.size(); ++e) {
      const bool improved = val[e] > running;
      if (!improved) CHECK(e + 1 == val.size());
      running = std::max(running, val[e]);
    }
    best = std::max(best, running);
  }
  CHECK(r.best_val.macro_f1 == best);
  CHECK(std::count(tc.lrs.begin(), tc.lrs.end(), r.best_lr) == 1);
  auto model = factory();
  model.restore(r.best_params);
  const auto val = train::evaluate_split(model, f.ds, f.ds.val, tc.class_weights);
  CHECK(val.macro_f1 == r.best_val.macro_f1);
  for (std::size_t i = 0; i + 1 < r.log.size(); i += 2) {
    CHECK(r.log[i].split == "train");
    CHECK(r.log[i + 1].split == "val");
    CHECK(r.log[i].epoch == r.log[i + 1].epoch);
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  Fixture f;
  const auto tc = quick({3e-3}, 2, 5);
  auto factory = [&] { return train::RelationalModel<float>(f.mc, tc.seed); };
  const auto a = train::train<float>(factory, f.ds, tc);
  const auto b = train::train<float>(factory, f.ds, tc);
  CHECK(same_log(a.log, b.log));
  CHECK(same_params(a.best_params, b.best_params));
  auto other = tc;
  other.seed = 22;
  auto factory2 = [&] { return train::RelationalModel<float>(f.mc, other.seed); };
  CHECK_FALSE(same_params(a.best_params, train::train<float>(factory2, f.ds, other).best_params));
}

TEST_CASE("an interrupted sweep resumes to the same result") {
  Fixture f;
  testutil::TempDir dir;
  const auto tc = quick({1e-2, 3e-3}, 2, 5);
  auto factory = [&] { return train::RelationalModel<float>(f.mc, tc.seed); };
  const auto whole = train::train<float>(factory, f.ds, tc);

  // Crash when the second learning rate asks for a model.
  int calls = 0;
  auto crashing = [&] {
    if (++calls == 2) throw std::runtime_error("simulated crash");
    return train::RelationalModel<float>(f.mc, tc.seed);
  };
  CHECK_THROWS_AS(train::train<float>(crashing, f.ds, tc, dir.path()), std::runtime_error);
  CHECK(std::filesystem::exists(dir.path() / "state.json"));
  const auto resumed = train::train<float>(factory, f.ds, tc, dir.path());
  CHECK(same_log(whole.log, resumed.log));
  CHECK(same_params(whole.best_params, resumed.best_params));
  CHECK(resumed.best_lr == whole.best_lr);
}

TEST_CASE("a sweep stopped mid-rate resumes from the saved epoch") {
  Fixture f;
  testutil::TempDir dir;
  const auto tc = quick({3e-3}, 3, 5);
  auto factory = [&] { return train::RelationalModel<float>(f.mc, tc.seed); };
  const auto whole = train::train<float>(factory, f.ds, tc);

  // A one-epoch budget leaves exactly the files a crash after epoch 1 would.
  auto first = tc;
  first.max_epochs = 1;
  train::train<float>(factory, f.ds, first, dir.path());
  nlohmann::json state;
  std::ifstream(dir.path() / "state.json") >> state;
  state["lr_index"] = 0;
  state["epochs_done"] = 1;
  std::ofstream(dir.path() / "state.json") << state.dump();
  const auto resumed = train::train<float>(factory, f.ds, tc, dir.path());
  CHECK(same_log(whole.log, resumed.log));
  CHECK(same_params(whole.best_params, resumed.best_params));
}

TEST_CASE("training rejects empty sweeps") {
  Fixture f;
  auto factory = [&] { return train::RelationalModel<float>(f.mc, 1); };
  CHECK_THROWS_AS(train::train<float>(factory, f.ds, quick({}, 2, 1)), std::invalid_argument);
  CHECK_THROWS_AS(train::train<float>(factory, f.ds, quick({1e-3}, 0, 1)), std::invalid_argument);
}

TEST_CASE("graph sources and frozen parts change what is trained") {
  Fixture f;
  auto names = [](const std::vector<ad::NamedTensor<float>>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(p.name);
    return out;
  };
  auto has_prefix = [](const std::vector<std::string>& ns, const std::string& pre) {
    return std::any_of(ns.begin(), ns.end(), [&](const std::string& s) { return s.rfind(pre, 0) == 0; });
  };
  const auto full = names(train::RelationalModel<float>(f.mc, 1).trainable());
  CHECK(has_prefix(full, "encoder."));
  CHECK(has_prefix(full, "head."));
  CHECK(has_prefix(full, "lstm."));
  CHECK(has_prefix(full, "gat."));
  auto frozen = f.mc;
  frozen.train_encoder = false;
  CHECK_FALSE(has_prefix(names(train::RelationalModel<float>(frozen, 1).trainable()), "encoder."));
  CHECK(has_prefix(names(train::RelationalModel<float>(frozen, 1).parameters()), "encoder."));
  auto cooc = f.mc;
  cooc.graph = train::GraphSource::Cooccurrence;
  const auto cn = names(train::RelationalModel<float>(cooc, 1).trainable());
  CHECK_FALSE(has_prefix(cn, "head."));
  CHECK_FALSE(has_prefix(cn, "encoder."));
  CHECK(train::graph_source_from_string("shuffled") == train::GraphSource::Shuffled);
  CHECK_THROWS(train::graph_source_from_string("dense"));

  auto empty = f.mc;
  empty.graph = train::GraphSource::Empty;
  const train::RelationalModel<float> m(empty, 1);
  graph::DailyGraph<float> g;
  m.forward(f.ds, f.ds.val.front(), &g);
  CHECK(g.edge_count() == 0);
  const train::RelationalModel<float> c(cooc, 1);
  c.forward(f.ds, f.ds.val.front(), &g);
  std::vector<enc::Article> arts;
  for (auto i : f.ds.val.front().articles) {
    arts.push_back(f.ds.articles[i]);
    arts.back().date = f.ds.val.front().date;
  }
  CHECK(g.adjacency == graph::build_cooccurrence_graph<float>(arts, 4, f.ds.val.front().date).adjacency);
}

TEST_CASE("one step moves gradient into every trainable block") {
  Fixture f;
  auto mc = f.mc;
  const train::RelationalModel<double> model(mc, 3);
  const auto& day = f.ds.train.front();
  const auto probs = model.forward(f.ds, day);
  ad::backward(train::weighted_ce(probs, day.labels, train::kDefaultClassWeights));
  for (const auto& p : model.trainable()) {
    double norm = 0;
    for (double g : p.tensor.grad()) norm += g * g;
    INFO(p.name);
    // A day whose graph happens to be empty leaves the head without gradient;
    // everything downstream of the graph must still see some.
    if (p.name.rfind("lstm.", 0) == 0 || p.name.rfind("gat.", 0) == 0) CHECK(norm > 0);
  }
}

TEST_CASE("snapshots restore into a fresh model and predictions are probability rows") {
  Fixture f;
  const train::RelationalModel<float> a(f.mc, 1);
  train::RelationalModel<float> b(f.mc, 2);
  b.restore(a.snapshot());
  const auto pa = oracle::vec(a.forward(f.ds, f.ds.test.front()).value());
  const auto pb = oracle::vec(b.forward(f.ds, f.ds.test.front()).value());
  CHECK(pa == pb);
  const auto preds = train::predict_split(a, f.ds, f.ds.test, train::kDefaultClassWeights);
  CHECK(preds.probs.size() == preds.labels.size());
  for (const auto& row : preds.probs) CHECK(row[0] + row[1] + row[2] == doctest::Approx(1.0).epsilon(1e-5));
  std::vector<ad::NamedArray> missing = a.snapshot();
  missing.pop_back();
  CHECK_THROWS_AS(b.restore(missing), std::runtime_error);
}

TEST_CASE("training log CSV lists one row per record") {
  testutil::TempDir dir;
  std::vector<train::EpochRecord> log(3);
  log[0].split = "train";
  log[1].split = "val";
  log[2].split = "test";
  log[1].metrics.macro_f1 = 0.25;
  train::write_log_csv(log, dir.path() / "log.csv");
  std::ifstream is(dir.path() / "log.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line == "epoch,lr,split,accuracy,macro_f1,mcc,auc,loss");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
}
