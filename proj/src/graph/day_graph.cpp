#include "relprobe/graph/day_graph.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace relprobe::graph {

template <class T>
GraphNorm<T> GraphNorm<T>::make(std::size_t n_tickers) {
  return {ad::Tensor<T>::param({n_tickers}, std::vector<T>(n_tickers, T(1))),
          ad::Tensor<T>::param({n_tickers}, std::vector<T>(n_tickers, T(0)))};
}

template <class T>
void GraphNorm<T>::collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix) const {
  out.push_back({prefix + "gain", gain});
  out.push_back({prefix + "bias", bias});
}

template <class T>
std::size_t DailyGraph<T>::edge_count() const {
  return static_cast<std::size_t>(std::count(adjacency.begin(), adjacency.end(), 1));
}

template <class T>
DailyGraph<T> threshold_graph(ad::Tensor<T> attr, const ThresholdConfig& cfg, std::string date,
                              std::size_t n_articles) {
  const std::size_t n = attr.rows();
  if (attr.rank() != 2 || attr.cols() != n) {
    throw std::invalid_argument("threshold_graph: attr must be square, got " +
                                ad::shape_str(attr.shape()));
  }
  DailyGraph<T> g;
  g.date = std::move(date);
  g.n = n;
  g.n_articles = n_articles;
  g.adjacency.assign(n * n, 0);
  std::vector<T> mask_values(n * n, T(0));
  const auto a = attr.value();
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (cfg.zero_diagonal && u == v) continue;
      if (double(a[u * n + v]) > cfg.tau) {
        g.adjacency[u * n + v] = 1;
        mask_values[u * n + v] = T(1);
      }
    }
  }
  g.weights = ad::mul(attr, ad::Tensor<T>::constant({n, n}, std::move(mask_values)));
  g.attr = std::move(attr);
  return g;
}

template <class T>
DailyGraph<T> build_day_graph(std::span<const ad::Tensor<T>> interactions, std::size_t n_tickers,
                              const ThresholdConfig& cfg, const GraphNorm<T>& norm,
                              std::string date) {
  const std::size_t n = n_tickers;
  if (interactions.empty()) {
    DailyGraph<T> g;
    g.date = std::move(date);
    g.n = n;
    g.attr = ad::Tensor<T>::zeros({n, n});
    g.adjacency.assign(n * n, 0);
    g.weights = ad::Tensor<T>::zeros({n, n});
    return g;
  }
  for (const auto& m : interactions) {
    if (m.rank() != 2 || m.rows() != n || m.cols() != n) {
      throw std::invalid_argument("build_day_graph: interaction " + ad::shape_str(m.shape()) +
                                  " does not match universe of " + std::to_string(n));
    }
  }
  ad::Tensor<T> total = interactions[0];
  for (std::size_t i = 1; i < interactions.size(); ++i) total = ad::add(total, interactions[i]);
  auto attr = ad::add_rowvec(ad::mul_rowvec(ad::layer_norm_rows(total), norm.gain), norm.bias);
  return threshold_graph(attr, cfg, std::move(date), interactions.size());
}

template <class T>
DailyGraph<T> build_cooccurrence_graph(std::span<const enc::Article> articles,
                                       std::size_t n_tickers, std::string date) {
  const std::size_t n = n_tickers;
  std::vector<T> counts(n * n, T(0));
  for (const auto& a : articles) {
    if (a.date != date) {
      throw std::invalid_argument("co-occurrence graph for " + date + " given article " + a.id +
                                  " dated " + a.date);
    }
    std::vector<std::size_t> t = a.tickers;
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    for (auto u : t) {
      if (u >= n) throw std::out_of_range("co-occurrence graph: ticker index out of range");
      for (auto v : t)
        if (u != v) counts[u * n + v] += T(1);
    }
  }
  DailyGraph<T> g;
  g.date = std::move(date);
  g.n = n;
  g.n_articles = articles.size();
  g.adjacency.assign(n * n, 0);
  for (std::size_t i = 0; i < n * n; ++i) g.adjacency[i] = counts[i] >= T(1) ? 1 : 0;
  g.attr = ad::Tensor<T>::constant({n, n}, counts);
  g.weights = ad::Tensor<T>::constant({n, n}, std::move(counts));
  return g;
}

template <class T>
DailyGraph<T> shuffle_edges(const DailyGraph<T>& g, std::mt19937_64& rng) {
  const std::size_t n = g.n;
  std::vector<std::size_t> slots;
  std::vector<T> w;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      slots.push_back(u * n + v);
      if (g.edge(u, v)) w.push_back(g.weights.value()[u * n + v]);
    }
  }
  std::shuffle(slots.begin(), slots.end(), rng);
  DailyGraph<T> out;
  out.date = g.date;
  out.n = n;
  out.n_articles = g.n_articles;
  out.adjacency.assign(n * n, 0);
  std::vector<T> weights(n * n, T(0));
  for (std::size_t k = 0; k < w.size(); ++k) {
    out.adjacency[slots[k]] = 1;
    weights[slots[k]] = w[k];
  }
  out.attr = ad::Tensor<T>::constant({n, n}, weights);
  out.weights = ad::Tensor<T>::constant({n, n}, std::move(weights));
  return out;
}

template <class T>
void export_graph(const DailyGraph<T>& g, const std::vector<std::string>& tickers,
                  const std::filesystem::path& path) {
  if (tickers.size() != g.n) throw std::invalid_argument("export_graph: ticker list size mismatch");
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write graph CSV " + path.string());
  os.precision(std::numeric_limits<T>::max_digits10);
  os << "date,src,dst,weight\n";
  const auto w = g.weights.value();
  for (std::size_t u = 0; u < g.n; ++u) {
    for (std::size_t v = 0; v < g.n; ++v) {
      if (g.edge(u, v)) os << g.date << ',' << tickers[u] << ',' << tickers[v] << ',' << w[u * g.n + v] << '\n';
    }
  }
  if (!os) throw std::runtime_error("failed writing graph CSV " + path.string());
}

ParsedGraph parse_graph_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& tickers) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open graph CSV " + path.string());
  ParsedGraph g;
  g.n = tickers.size();
  g.adjacency.assign(g.n * g.n, 0);
  g.weights.assign(g.n * g.n, 0.0);
  std::string line;
  std::getline(is, line);
  if (line.rfind("date,src,dst,weight", 0) != 0) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  auto index_of = [&](const std::string& s) {
    auto it = std::find(tickers.begin(), tickers.end(), s);
    if (it == tickers.end()) throw std::runtime_error(path.string() + ": unknown ticker " + s);
    return static_cast<std::size_t>(it - tickers.begin());
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string date, src, dst, weight;
    std::getline(ss, date, ',');
    std::getline(ss, src, ',');
    std::getline(ss, dst, ',');
    std::getline(ss, weight);
    g.date = date;
    const auto u = index_of(src), v = index_of(dst);
    g.adjacency[u * g.n + v] = 1;
    g.weights[u * g.n + v] = std::stod(weight);
  }
  return g;
}

#define RELPROBE_INSTANTIATE_GRAPH(T)                                                              \
  template struct GraphNorm<T>;                                                                    \
  template struct DailyGraph<T>;                                                                   \
  template DailyGraph<T> threshold_graph(ad::Tensor<T>, const ThresholdConfig&, std::string,      \
                                         std::size_t);                                             \
  template DailyGraph<T> build_day_graph(std::span<const ad::Tensor<T>>, std::size_t,              \
                                         const ThresholdConfig&, const GraphNorm<T>&,              \
                                         std::string);                                             \
  template DailyGraph<T> build_cooccurrence_graph(std::span<const enc::Article>, std::size_t,      \
                                                  std::string);                                    \
  template DailyGraph<T> shuffle_edges(const DailyGraph<T>&, std::mt19937_64&);                    \
  template void export_graph(const DailyGraph<T>&, const std::vector<std::string>&,                \
                             const std::filesystem::path&);

RELPROBE_INSTANTIATE_GRAPH(float)
RELPROBE_INSTANTIATE_GRAPH(double)

}  // namespace relprobe::graph
