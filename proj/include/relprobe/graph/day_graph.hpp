#pragma once

#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "relprobe/autodiff/gradcheck.hpp"
#include "relprobe/autodiff/ops.hpp"
#include "relprobe/encoders/article.hpp"

namespace relprobe::graph {

struct ThresholdConfig {
  double tau = 0.5;
  bool zero_diagonal = true;
};

// Learnable affine of the day-level row normalization (size N).
template <class T>
struct GraphNorm {
  ad::Tensor<T> gain, bias;

  static GraphNorm make(std::size_t n_tickers);
  void collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix) const;
};

// Directed day graph. adjacency[u*N+v] set means u receives from v.
template <class T>
struct DailyGraph {
  std::string date;
  std::size_t n = 0;
  ad::Tensor<T> attr;
  ad::Mask adjacency;
  ad::Tensor<T> weights;  // adjacency (as 0/1) times attr
  std::size_t n_articles = 0;

  bool edge(std::size_t u, std::size_t v) const { return adjacency[u * n + v] != 0; }
  std::size_t edge_count() const;
};

// Thresholds an edge-attribute matrix: A = attr > tau (strict), W = A * attr.
// The mask is a constant; gradients reach attr only on the kept support.
template <class T>
DailyGraph<T> threshold_graph(ad::Tensor<T> attr, const ThresholdConfig& cfg, std::string date,
                              std::size_t n_articles);

// attr = rownorm(sum of interactions) with the learnable affine. No
// interactions gives the empty graph.
template <class T>
DailyGraph<T> build_day_graph(std::span<const ad::Tensor<T>> interactions, std::size_t n_tickers,
                              const ThresholdConfig& cfg, const GraphNorm<T>& norm,
                              std::string date);

// Symmetric same-article co-mention counts; every positive count is an edge.
template <class T>
DailyGraph<T> build_cooccurrence_graph(std::span<const enc::Article> articles,
                                       std::size_t n_tickers, std::string date);

// Same number of off-diagonal edges and the same weights at random positions.
template <class T>
DailyGraph<T> shuffle_edges(const DailyGraph<T>& g, std::mt19937_64& rng);

// CSV date,src,dst,weight with one row per edge, sorted by (src, dst).
template <class T>
void export_graph(const DailyGraph<T>& g, const std::vector<std::string>& tickers,
                  const std::filesystem::path& path);

struct ParsedGraph {
  std::string date;
  std::size_t n = 0;
  ad::Mask adjacency;
  std::vector<double> weights;
};
ParsedGraph parse_graph_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& tickers);

}  // namespace relprobe::graph
