#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "relprobe/synth/planted_world.hpp"
#include "relprobe/trainer/labels.hpp"
#include "support/oracles.hpp"
#include "support/tmpdir.hpp"

using namespace relprobe;

namespace {

synth::WorldConfig small_world() {
  synth::WorldConfig cfg;
  cfg.tickers = 8;
  cfg.days = 60;
  cfg.articles_per_day = 4;
  cfg.planted_pairs = 5;
  cfg.max_degree = 2;
  cfg.vocab = 60;
  cfg.relation_vocab = 10;
  return cfg;
}

ad::Mask truth_mask(const std::vector<synth::TruthEdge>& edges, std::size_t n) {
  ad::Mask m(n * n, 0);
  for (const auto& e : edges) m[e.src * n + e.dst] = 1;
  return m;
}

}  // namespace

TEST_CASE("same seeds give the same corpus and a new seed a different one") {
  const synth::PlantedWorld w(small_world(), 3);
  const auto a = w.generate(5), b = w.generate(5), c = w.generate(6);
  CHECK(a.returns == b.returns);
  REQUIRE(a.articles.size() == b.articles.size());
  for (std::size_t i = 0; i < a.articles.size(); ++i) {
    CHECK(a.articles[i].tokens == b.articles[i].tokens);
    CHECK(a.articles[i].tickers == b.articles[i].tickers);
  }
  CHECK(a.returns != c.returns);
  const synth::PlantedWorld w2(small_world(), 3);
  CHECK(w2.spillover_matrix() == w.spillover_matrix());
}

TEST_CASE("planted pairs respect the degree cap and give symmetric edges") {
  const synth::PlantedWorld w(synth::WorldConfig{}, 11);
  const std::size_t n = 20;
  CHECK(w.edges().size() == 40);
  std::vector<int> degree(n, 0);
  const auto& b = w.spillover_matrix();
  for (std::size_t u = 0; u < n; ++u) {
    CHECK(b[u * n + u] == 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      CHECK(b[u * n + v] == b[v * n + u]);
      if (b[u * n + v] != 0) {
        ++degree[u];
        CHECK(b[u * n + v] == 0.15);
      }
    }
    CHECK(degree[u] <= 3);
  }
  CHECK(w.spectral_radius() + 0.1 < 1.0);
  CHECK(w.ticker_symbols().front() == "T00");
  CHECK(w.ticker_symbols().back() == "T19");
}

TEST_CASE("without spillover or momentum labels follow the Gaussian tail shares") {
  auto cfg = small_world();
  cfg.tickers = 20;
  cfg.days = 2000;
  cfg.articles_per_day = 1;
  cfg.spillover = 0.0;
  cfg.rho = 0.0;
  cfg.vocab = 100;
  const auto corpus = synth::PlantedWorld(cfg, 1).generate(2);
  const auto table = train::make_labels(corpus.returns);
  std::array<double, 3> share{};
  double total = 0;
  for (const auto& row : table.labels)
    for (int y : row)
      if (y >= 0) {
        share[y] += 1;
        total += 1;
      }
  for (auto& s : share) s /= total;
  CHECK(std::abs(share[0] - 0.1587) < 0.01);
  CHECK(std::abs(share[1] - 0.6827) < 0.01);
  CHECK(std::abs(share[2] - 0.1587) < 0.01);
}

TEST_CASE("with every article planted and signalled, co-mentions recover the planted support") {
  auto cfg = small_world();
  cfg.planted_share = 1.0;
  cfg.p_signal = 1.0;
  const synth::PlantedWorld w(cfg, 4);
  const auto corpus = w.generate(9);
  const std::size_t n = cfg.tickers;
  ad::Mask seen(n * n, 0);
  std::map<std::string, std::vector<enc::Article>> by_day;
  for (const auto& a : corpus.articles) by_day[a.date].push_back(a);
  std::size_t t = 0;
  for (const auto& [date, arts] : by_day) {
    const auto g = graph::build_cooccurrence_graph<double>(arts, n, date);
    CHECK(g.adjacency == corpus.active[t++]);
    for (std::size_t i = 0; i < n * n; ++i) seen[i] |= g.adjacency[i];
  }
  CHECK(seen == truth_mask(w.edges(), n));

  // Each planted article carries its pair's relation word relation_tokens times.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_index;
  for (const auto& e : w.edges())
    if (e.src < e.dst) pair_index.emplace(std::pair{e.src, e.dst}, pair_index.size());
  for (const auto& a : corpus.articles) {
    REQUIRE(a.tickers.size() == 2);
    const auto k = pair_index.at({a.tickers[0], a.tickers[1]});
    const int word = w.relation_token(k % cfg.relation_vocab);
    CHECK(std::count(a.tokens.begin(), a.tokens.end(), word) == long(cfg.relation_tokens));
    for (std::size_t u : a.tickers) CHECK(std::count(a.tokens.begin(), a.tokens.end(), int(u)) == 1);
    CHECK(a.tokens.size() == cfg.article_len);
  }
}

TEST_CASE("prices follow the generated returns on business days") {
  const auto corpus = synth::PlantedWorld(small_world(), 2).generate(3);
  CHECK(corpus.prices.dates.size() == 60);
  for (std::size_t u = 0; u < 8; ++u) {
    CHECK(corpus.returns[u][0] == 0.0);
    for (std::size_t t = 1; t < 60; ++t) {
      const double r = corpus.prices.bars[u][t].close / corpus.prices.bars[u][t - 1].close - 1.0;
      CHECK(r == doctest::Approx(corpus.returns[u][t]).epsilon(1e-9));
      const auto& b = corpus.prices.bars[u][t];
      CHECK(b.high >= std::max(b.open, b.close));
      CHECK(b.low <= std::min(b.open, b.close));
    }
  }
}

TEST_CASE("unstable or impossible worlds are rejected") {
  auto cfg = synth::WorldConfig{};
  cfg.spillover = 0.5;
  CHECK_THROWS_WITH_AS(synth::PlantedWorld(cfg, 1), doctest::Contains("unstable spillover"),
                       std::invalid_argument);
  cfg = synth::WorldConfig{};
  cfg.max_degree = 1;
  cfg.planted_pairs = 11;
  CHECK_THROWS_AS(synth::PlantedWorld(cfg, 1), std::invalid_argument);
  cfg = synth::WorldConfig{};
  cfg.vocab = 30;
  CHECK_THROWS_AS(synth::PlantedWorld(cfg, 1), std::invalid_argument);
  cfg = synth::WorldConfig{};
  cfg.p_signal = 1.5;
  CHECK_THROWS_AS(synth::PlantedWorld(cfg, 1), std::invalid_argument);
  cfg = synth::WorldConfig{};
  cfg.start_date = "2021/01/04";
  CHECK_THROWS_AS(synth::PlantedWorld(cfg, 1), std::invalid_argument);
}

TEST_CASE("spectral radius of small known matrices") {
  CHECK(synth::spectral_radius({0, 1, 1, 0}, 2) == doctest::Approx(1.0));
  CHECK(synth::spectral_radius({0, 2, 0, 0}, 2) == doctest::Approx(0.0));
  CHECK(synth::spectral_radius({0, -1, 1, 0}, 2) == doctest::Approx(1.0));
}

TEST_CASE("edge recovery on hand-worked cases") {
  const std::vector<synth::TruthEdge> truth{{0, 1, 0.1}, {1, 0, 0.1}};
  CHECK(synth::edge_recovery_score(truth_mask(truth, 3), 3, truth).f1 == 1.0);
  const auto none = synth::edge_recovery_score(ad::Mask(9, 0), 3, truth);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  ad::Mask half(9, 0);
  half[0 * 3 + 1] = 1;
  half[2 * 3 + 0] = 1;
  half[1 * 3 + 1] = 1;  // diagonal ignored
  const auto s = synth::edge_recovery_score(half, 3, truth);
  CHECK(s.precision == 0.5);
  CHECK(s.recall == 0.5);
  CHECK(s.f1 == 0.5);
  CHECK_THROWS_AS(synth::edge_recovery_score(ad::Mask(4, 0), 3, truth), std::invalid_argument);
}

TEST_CASE("edge recovery matches set arithmetic on random masks") {
  oracle::Gen g(5);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = g.index(2, 7);
    ad::Mask pred(n * n, 0);
    std::vector<synth::TruthEdge> truth;
    std::set<std::pair<std::size_t, std::size_t>> p, t;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) {
        if (g.coin(0.3)) {
          pred[u * n + v] = 1;
          if (u != v) p.insert({u, v});
        }
        if (g.coin(0.3)) {
          truth.push_back({u, v, 0.1});
          if (u != v) t.insert({u, v});
        }
      }
    std::size_t tp = 0;
    for (const auto& e : p) tp += t.count(e);
    const double prec = p.empty() ? 0 : double(tp) / p.size();
    const double rec = t.empty() ? 0 : double(tp) / t.size();
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
    const auto s = synth::edge_recovery_score(pred, n, truth);
    CHECK(s.precision == doctest::Approx(prec));
    CHECK(s.recall == doctest::Approx(rec));
    CHECK(s.f1 == doctest::Approx(f1));
  }
}

TEST_CASE("written corpus reads back") {
  testutil::TempDir dir;
  const synth::PlantedWorld w(small_world(), 7);
  const auto corpus = w.generate(1);
  const auto tickers = w.ticker_symbols();
  synth::write_corpus(corpus, tickers, dir.path());
  CHECK(std::filesystem::exists(dir.path() / "prices.csv"));
  CHECK(std::filesystem::exists(dir.path() / "news.jsonl"));
  const auto edges = synth::read_truth_edges(dir.path() / "truth_edges.csv", tickers);
  REQUIRE(edges.size() == w.edges().size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    CHECK(edges[i].src == w.edges()[i].src);
    CHECK(edges[i].dst == w.edges()[i].dst);
    CHECK(edges[i].coef == w.edges()[i].coef);
  }
  const auto prices = enc::read_prices_csv(dir.path() / "prices.csv");
  CHECK(prices.dates == corpus.prices.dates);
  CHECK_THROWS_AS(synth::read_truth_edges(dir.path() / "nope.csv", tickers), std::runtime_error);
}

TEST_CASE("business days skip weekends") {
  CHECK(synth::business_days("2021-01-01", 4) ==
        std::vector<std::string>{"2021-01-01", "2021-01-04", "2021-01-05", "2021-01-06"});
  CHECK(synth::business_days("2021-01-02", 1) == std::vector<std::string>{"2021-01-04"});
  CHECK(synth::business_days("2020-02-28", 2) == std::vector<std::string>{"2020-02-28", "2020-03-02"});
  CHECK_THROWS_AS(synth::business_days("2021-13-01", 1), std::invalid_argument);
}
