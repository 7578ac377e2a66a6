#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "relprobe/encoders/article.hpp"
#include "relprobe/encoders/ingest.hpp"
#include "relprobe/graph/day_graph.hpp"

namespace relprobe::synth {

// Token layout: [0, N) ticker mentions, [N, N + relation_vocab) relation
// words, the rest filler. Planted pair k is signalled by relation word
// k mod relation_vocab.
struct WorldConfig {
  std::size_t tickers = 20;
  std::size_t days = 500;
  std::size_t articles_per_day = 10;
  std::size_t article_len = 30;
  std::size_t vocab = 200;
  std::size_t relation_vocab = 20;
  std::size_t relation_tokens = 4;  // per signal article
  double p_signal = 0.8;
  double planted_share = 0.6;       // remaining articles mention a random pair
  double p_single_mention = 0.0;    // planted article names only one side of its pair
  double rho = 0.1;
  double spillover = 0.15;          // B* entry on every planted edge
  double dormant_scale = 1.0;       // fraction of B* in force for pairs not in the news
  std::size_t planted_pairs = 20;   // undirected; each contributes both directions
  std::size_t max_degree = 3;
  double noise_std = 0.02;
  std::string start_date = "2021-01-04";

  void validate() const;
};

struct TruthEdge {
  std::size_t src = 0;  // receiver: its next return loads on dst
  std::size_t dst = 0;
  double coef = 0;
};

struct Corpus {
  enc::PriceTable prices;
  std::vector<enc::Article> articles;
  std::vector<TruthEdge> edges;
  std::vector<std::vector<double>> returns;  // [ticker][day], day 0 is zero
  std::vector<ad::Mask> active;              // [day] N x N, planted edges in that day's news
};

class PlantedWorld {
 public:
  // Draws the planted pairs; throws if rho + spectral radius(B*) >= 1.
  PlantedWorld(const WorldConfig& cfg, std::uint64_t seed);

  const WorldConfig& config() const { return cfg_; }
  const std::vector<TruthEdge>& edges() const { return edges_; }
  // N x N row-major B*.
  const std::vector<double>& spillover_matrix() const { return b_; }
  double spectral_radius() const { return radius_; }
  std::vector<std::string> ticker_symbols() const;
  int relation_token(std::size_t k) const { return int(cfg_.tickers + k); }
  int first_filler_token() const { return int(cfg_.tickers + cfg_.relation_vocab); }

  Corpus generate(std::uint64_t seed) const;

 private:
  WorldConfig cfg_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;  // undirected, u < v
  std::vector<TruthEdge> edges_;
  std::vector<double> b_;
  double radius_ = 0;
};

// Largest eigenvalue modulus of a row-major N x N matrix.
double spectral_radius(const std::vector<double>& m, std::size_t n);

void write_corpus(const Corpus& corpus, const std::vector<std::string>& tickers,
                  const std::filesystem::path& dir);
std::vector<TruthEdge> read_truth_edges(const std::filesystem::path& path,
                                        const std::vector<std::string>& tickers);

struct EdgeScore {
  double precision = 0, recall = 0, f1 = 0;
};

// Directed edge-set comparison, diagonal ignored; undefined ratios count as 0.
EdgeScore edge_recovery_score(const ad::Mask& predicted, std::size_t n,
                              const std::vector<TruthEdge>& truth);
template <class T>
EdgeScore edge_recovery_score(const graph::DailyGraph<T>& g, const std::vector<TruthEdge>& truth) {
  return edge_recovery_score(g.adjacency, g.n, truth);
}

// ISO dates of consecutive weekdays starting at `start`.
std::vector<std::string> business_days(const std::string& start, std::size_t count);

}  // namespace relprobe::synth
