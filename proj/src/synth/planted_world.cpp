#include "relprobe/synth/planted_world.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "relprobe/util/log.hpp"

namespace relprobe::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ (stream * 0x632be59bd9b4e019ULL)) + index);
}

}  // namespace

void WorldConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("world config: " + m); };
  if (tickers < 2) fail("need at least 2 tickers");
  if (days < 3) fail("need at least 3 days");
  if (article_len < 2 + relation_tokens) fail("article_len too short for mentions and relation tokens");
  if (relation_vocab == 0) fail("relation_vocab must be positive");
  if (vocab <= tickers + relation_vocab) fail("vocab leaves no filler tokens");
  if (p_signal < 0 || p_signal > 1) fail("p_signal outside [0, 1]");
  if (planted_share < 0 || planted_share > 1) fail("planted_share outside [0, 1]");
  if (p_single_mention < 0 || p_single_mention > 1) fail("p_single_mention outside [0, 1]");
  if (dormant_scale < 0 || dormant_scale > 1) fail("dormant_scale outside [0, 1]");
  if (planted_share > 0 && planted_pairs == 0) fail("planted articles need planted pairs");
  if (!(noise_std > 0)) fail("noise_std must be positive");
  if (!enc::is_iso_date(start_date)) fail("start_date must be YYYY-MM-DD");
}

double spectral_radius(const std::vector<double>& m, std::size_t n) {
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = m[i * n + j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

PlantedWorld::PlantedWorld(const WorldConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t n = cfg_.tickers;
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) candidates.emplace_back(u, v);
  std::mt19937_64 rng(sub_seed(seed, 1, 0));
  std::shuffle(candidates.begin(), candidates.end(), rng);

  std::vector<std::size_t> degree(n, 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [u, v] : candidates) {
    if (pairs.size() == cfg_.planted_pairs) break;
    if (degree[u] >= cfg_.max_degree || degree[v] >= cfg_.max_degree) continue;
    ++degree[u];
    ++degree[v];
    pairs.emplace_back(u, v);
  }
  if (pairs.size() < cfg_.planted_pairs) {
    throw std::invalid_argument("world config: cannot place " + std::to_string(cfg_.planted_pairs) +
                                " pairs with max_degree " + std::to_string(cfg_.max_degree));
  }
  std::sort(pairs.begin(), pairs.end());

  b_.assign(n * n, 0.0);
  for (const auto& [u, v] : pairs) {
    b_[u * n + v] = cfg_.spillover;
    b_[v * n + u] = cfg_.spillover;
  }
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (b_[u * n + v] != 0) edges_.push_back({u, v, b_[u * n + v]});

  pairs_ = pairs;
  radius_ = synth::spectral_radius(b_, n);
  if (!(std::abs(cfg_.rho) + radius_ < 1.0)) {
    throw std::invalid_argument("unstable spillover: |rho| + spectral radius = " +
                                std::to_string(std::abs(cfg_.rho) + radius_) + " >= 1");
  }
}

std::vector<std::string> PlantedWorld::ticker_symbols() const {
  std::vector<std::string> out;
  const int width = cfg_.tickers > 100 ? 3 : 2;
  for (std::size_t u = 0; u < cfg_.tickers; ++u) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%0*zu", width, u);
    out.emplace_back(buf);
  }
  return out;
}

Corpus PlantedWorld::generate(std::uint64_t seed) const {
  const std::size_t n = cfg_.tickers;
  const std::size_t days = cfg_.days;
  Corpus c;
  c.edges = edges_;
  c.prices.dates = business_days(cfg_.start_date, days);
  c.prices.tickers = ticker_symbols();

  const auto& pairs = pairs_;

  const int filler_lo = first_filler_token();
  const int filler_hi = int(cfg_.vocab) - 1;
  c.active.assign(days, ad::Mask(n * n, 0));
  auto& active = c.active;
  for (std::size_t t = 0; t < days; ++t) {
    std::mt19937_64 rng(sub_seed(seed, 2, t));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> filler(filler_lo, filler_hi);
    std::uniform_int_distribution<std::size_t> ticker(0, n - 1);
    for (std::size_t i = 0; i < cfg_.articles_per_day; ++i) {
      std::size_t u, v;
      std::vector<std::size_t> mentioned;
      int relation_word = -1;
      if (unif(rng) < cfg_.planted_share) {
        std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
        const std::size_t k = pick(rng);
        std::tie(u, v) = pairs[k];
        active[t][u * n + v] = active[t][v * n + u] = 1;
        if (unif(rng) < cfg_.p_signal) relation_word = relation_token(k % cfg_.relation_vocab);
        if (unif(rng) < cfg_.p_single_mention) mentioned = {unif(rng) < 0.5 ? u : v};
        else mentioned = {u, v};
      } else {
        u = ticker(rng);
        do v = ticker(rng);
        while (v == u);
        mentioned = {std::min(u, v), std::max(u, v)};
      }
      std::vector<int> tokens(cfg_.article_len);
      for (auto& tok : tokens) tok = filler(rng);
      std::vector<std::size_t> slots(cfg_.article_len);
      std::iota(slots.begin(), slots.end(), std::size_t{0});
      std::shuffle(slots.begin(), slots.end(), rng);
      std::size_t next = 0;
      for (std::size_t m : mentioned) tokens[slots[next++]] = int(m);
      if (relation_word >= 0) {
        for (std::size_t k = 0; k < cfg_.relation_tokens; ++k) tokens[slots[next++]] = relation_word;
      }
      char id[64];
      std::snprintf(id, sizeof id, "%s-%03zu", c.prices.dates[t].c_str(), i);
      c.articles.push_back({id, c.prices.dates[t], std::move(tokens), std::move(mentioned)});
    }
  }

  c.returns.assign(n, std::vector<double>(days, 0.0));
  std::mt19937_64 noise_rng(sub_seed(seed, 3, 0));
  std::normal_distribution<double> eps(0.0, cfg_.noise_std);
  for (std::size_t t = 1; t < days; ++t) {
    for (std::size_t u = 0; u < n; ++u) {
      double r = cfg_.rho * c.returns[u][t - 1];
      for (std::size_t v = 0; v < n; ++v) {
        const double b = b_[u * n + v];
        if (b == 0) continue;
        const double scale = active[t - 1][u * n + v] ? 1.0 : cfg_.dormant_scale;
        r += b * scale * c.returns[v][t - 1];
      }
      c.returns[u][t] = r + eps(noise_rng);
    }
  }

  std::mt19937_64 bar_rng(sub_seed(seed, 4, 0));
  std::normal_distribution<double> wick(0.0, 0.004);
  std::normal_distribution<double> vol(0.0, 0.2);
  c.prices.bars.assign(n, std::vector<enc::Bar>(days));
  for (std::size_t u = 0; u < n; ++u) {
    double prev_close = 100.0;
    for (std::size_t t = 0; t < days; ++t) {
      const double r = c.returns[u][t];
      const double close = t == 0 ? prev_close : prev_close * (1.0 + r);
      enc::Bar b;
      b.open = prev_close * (1.0 + 0.3 * r + wick(bar_rng));
      b.close = close;
      b.high = std::max(b.open, b.close) * (1.0 + std::abs(wick(bar_rng)));
      b.low = std::min(b.open, b.close) * (1.0 - std::abs(wick(bar_rng)));
      b.volume = std::round(1e6 * std::exp(vol(bar_rng) + 8.0 * std::abs(r)));
      c.prices.bars[u][t] = b;
      prev_close = close;
    }
  }
  return c;
}

void write_corpus(const Corpus& corpus, const std::vector<std::string>& tickers,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  enc::write_prices_csv(dir / "prices.csv", corpus.prices);
  enc::write_news_jsonl(dir / "news.jsonl", corpus.articles, tickers);
  std::ofstream os(dir / "truth_edges.csv", std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + (dir / "truth_edges.csv").string());
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "src,dst,coef\n";
  for (const auto& e : corpus.edges) os << tickers[e.src] << ',' << tickers[e.dst] << ',' << e.coef << '\n';
}

std::vector<TruthEdge> read_truth_edges(const std::filesystem::path& path,
                                        const std::vector<std::string>& tickers) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  if (line.rfind("src,dst,coef", 0) != 0) throw std::runtime_error(path.string() + ": unexpected header");
  auto index_of = [&](const std::string& s) {
    auto it = std::find(tickers.begin(), tickers.end(), s);
    if (it == tickers.end()) throw std::runtime_error(path.string() + ": unknown ticker " + s);
    return std::size_t(it - tickers.begin());
  };
  std::vector<TruthEdge> out;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    }
    out.push_back({index_of(line.substr(0, c1)), index_of(line.substr(c1 + 1, c2 - c1 - 1)),
                   std::stod(line.substr(c2 + 1))});
  }
  return out;
}

EdgeScore edge_recovery_score(const ad::Mask& predicted, std::size_t n,
                              const std::vector<TruthEdge>& truth) {
  if (predicted.size() != n * n) throw std::invalid_argument("edge_recovery_score: mask size mismatch");
  std::vector<std::uint8_t> want(n * n, 0);
  for (const auto& e : truth) {
    if (e.src >= n || e.dst >= n) throw std::invalid_argument("edge_recovery_score: edge out of range");
    if (e.src != e.dst) want[e.src * n + e.dst] = 1;
  }
  std::size_t tp = 0, n_pred = 0, n_true = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      const bool p = predicted[u * n + v] != 0;
      const bool w = want[u * n + v] != 0;
      n_pred += p;
      n_true += w;
      tp += p && w;
    }
  }
  EdgeScore s;
  s.precision = n_pred ? double(tp) / double(n_pred) : 0.0;
  s.recall = n_true ? double(tp) / double(n_true) : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

std::vector<std::string> business_days(const std::string& start, std::size_t count) {
  using namespace std::chrono;
  if (!enc::is_iso_date(start)) throw std::invalid_argument("business_days: bad date " + start);
  const year_month_day ymd{year{std::stoi(start.substr(0, 4))},
                           month{unsigned(std::stoi(start.substr(5, 2)))},
                           day{unsigned(std::stoi(start.substr(8, 2)))}};
  sys_days d{ymd};
  std::vector<std::string> out;
  while (out.size() < count) {
    const weekday wd{d};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day x{d};
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(x.year()), unsigned(x.month()),
                    unsigned(x.day()));
      out.emplace_back(buf);
    }
    d += days{1};
  }
  return out;
}

}  // namespace relprobe::synth
