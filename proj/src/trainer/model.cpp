#include "relprobe/trainer/model.hpp"

#include <random>
#include <stdexcept>

namespace relprobe::train {

const char* to_string(GraphSource s) {
  switch (s) {
    case GraphSource::Relation: return "relation";
    case GraphSource::Cooccurrence: return "cooccurrence";
    case GraphSource::Shuffled: return "shuffled";
    case GraphSource::Empty: return "empty";
  }
  return "?";
}

GraphSource graph_source_from_string(const std::string& s) {
  if (s == "relation") return GraphSource::Relation;
  if (s == "cooccurrence") return GraphSource::Cooccurrence;
  if (s == "shuffled") return GraphSource::Shuffled;
  if (s == "empty") return GraphSource::Empty;
  throw std::invalid_argument("unknown graph source '" + s +
                              "' (expected relation, cooccurrence, shuffled, empty)");
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

head::RelationHeadConfig head_config(const ModelConfig& cfg) {
  return {cfg.tickers, cfg.encoder.dim, cfg.proj_dim};
}

}  // namespace

template <class T>
RelationalModel<T>::RelationalModel(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      seed_(seed),
      encoder_(cfg.encoder, mix(seed, 1)),
      head_(head_config(cfg), mix(seed, 2)),
      norm_(graph::GraphNorm<T>::make(cfg.tickers)),
      lstm_(enc::LstmConfig{enc::kMarketFeatures, cfg.node_dim}, mix(seed, 3)),
      gat_(gat::GatParams<T>::make({cfg.node_dim, cfg.node_dim, cfg.gat_layers, 0.2}, mix(seed, 4))) {}

template <class T>
void RelationalModel<T>::use_imported_states(std::shared_ptr<const StateMap<T>> states) {
  for (const auto& [id, h] : *states) {
    if (h.dim() != cfg_.encoder.dim) {
      throw std::invalid_argument("imported states for '" + id + "' have d = " +
                                  std::to_string(h.dim()) + ", model expects " +
                                  std::to_string(cfg_.encoder.dim));
    }
  }
  imported_ = std::move(states);
}

template <class T>
ad::Tensor<T> RelationalModel<T>::article_states(const enc::Article& article) const {
  if (imported_) {
    auto it = imported_->find(article.id);
    if (it == imported_->end()) {
      throw std::runtime_error("no imported hidden states for article '" + article.id + "'");
    }
    return enc::select_context(it->second, cfg_.context);
  }
  if (cfg_.context != enc::ContextMode::InputOnly) {
    throw std::invalid_argument("the toy encoder has no generated tokens; use context io");
  }
  if (cfg_.train_encoder) return encoder_.encode(article).states;
  auto it = frozen_cache_.find(article.id);
  if (it != frozen_cache_.end()) return it->second;
  auto states = encoder_.encode(article).states.detach();
  frozen_cache_.emplace(article.id, states);
  return states;
}

template <class T>
graph::DailyGraph<T> RelationalModel<T>::day_graph(const Dataset& ds, const LabeledDay& day) const {
  const std::size_t n = cfg_.tickers;
  switch (cfg_.graph) {
    case GraphSource::Relation: {
      std::vector<ad::Tensor<T>> interactions;
      interactions.reserve(day.articles.size());
      for (std::size_t idx : day.articles) {
        const auto& a = ds.articles[idx];
        auto out = head_.apply(cfg_.variant, article_states(a), a.tickers);
        if (out) interactions.push_back(out->interaction);
      }
      return graph::build_day_graph<T>(interactions, n, cfg_.threshold, norm_, day.date);
    }
    case GraphSource::Cooccurrence:
    case GraphSource::Shuffled: {
      std::vector<enc::Article> arts;
      arts.reserve(day.articles.size());
      for (std::size_t idx : day.articles) {
        arts.push_back(ds.articles[idx]);
        arts.back().date = day.date;  // weekend news counts toward the next session
      }
      auto g = graph::build_cooccurrence_graph<T>(arts, n, day.date);
      if (cfg_.graph == GraphSource::Cooccurrence) return g;
      std::mt19937_64 rng(mix(seed_, 1000 + day.t));
      return graph::shuffle_edges(g, rng);
    }
    case GraphSource::Empty:
      return graph::build_day_graph<T>({}, n, cfg_.threshold, norm_, day.date);
  }
  throw std::logic_error("unhandled graph source");
}

template <class T>
ad::Tensor<T> RelationalModel<T>::forward(const Dataset& ds, const LabeledDay& day,
                                          graph::DailyGraph<T>* graph_out) const {
  if (day.windows.size() != cfg_.tickers) {
    throw std::invalid_argument("forward: day " + day.date + " has " +
                                std::to_string(day.windows.size()) + " windows for " +
                                std::to_string(cfg_.tickers) + " tickers");
  }
  auto g = day_graph(ds, day);
  auto x = lstm_.encode(day.windows);
  auto probs = gat::predict(gat_, x, g);
  if (graph_out) *graph_out = std::move(g);
  return probs;
}

template <class T>
std::vector<ad::NamedTensor<T>> RelationalModel<T>::parameters() const {
  std::vector<ad::NamedTensor<T>> out;
  if (uses_relation_head()) {
    if (!imported_) encoder_.collect(out, "encoder.");
    head_.collect(out, "head.", cfg_.variant);
    norm_.collect(out, "graph_norm.");
  }
  lstm_.collect(out, "lstm.");
  gat_.collect(out, "gat.");
  return out;
}

template <class T>
std::vector<ad::NamedTensor<T>> RelationalModel<T>::trainable() const {
  std::vector<ad::NamedTensor<T>> out;
  if (uses_relation_head()) {
    if (!imported_ && cfg_.train_encoder) encoder_.collect(out, "encoder.");
    if (cfg_.train_head) head_.collect(out, "head.", cfg_.variant);
    norm_.collect(out, "graph_norm.");
  }
  lstm_.collect(out, "lstm.");
  gat_.collect(out, "gat.");
  return out;
}

template <class T>
std::vector<ad::NamedArray> RelationalModel<T>::snapshot() const {
  std::vector<ad::NamedArray> out;
  for (const auto& p : parameters()) out.push_back(ad::to_named_array(p.name, p.tensor));
  return out;
}

template <class T>
void RelationalModel<T>::restore(const std::vector<ad::NamedArray>& entries) {
  std::map<std::string, const ad::NamedArray*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;
  for (auto& p : parameters()) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw std::runtime_error("checkpoint lacks parameter '" + p.name + "'");
    ad::assign_from(p.tensor, *it->second);
  }
  frozen_cache_.clear();
}

template class RelationalModel<float>;
template class RelationalModel<double>;

}  // namespace relprobe::train
