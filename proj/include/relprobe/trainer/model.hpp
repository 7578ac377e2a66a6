#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "relprobe/autodiff/checkpoint.hpp"
#include "relprobe/encoders/lstm.hpp"
#include "relprobe/encoders/toy_encoder.hpp"
#include "relprobe/gat/gat.hpp"
#include "relprobe/graph/day_graph.hpp"
#include "relprobe/relation_head/relation_head.hpp"
#include "relprobe/trainer/dataset.hpp"

namespace relprobe::train {

// Where the day graph comes from. Shuffled permutes the co-occurrence edges;
// Empty leaves only the self-loops inside the GAT.
enum class GraphSource { Relation, Cooccurrence, Shuffled, Empty };

const char* to_string(GraphSource s);
GraphSource graph_source_from_string(const std::string& s);

struct ModelConfig {
  std::size_t tickers = 20;
  head::HeadVariant variant = head::HeadVariant::Full;
  GraphSource graph = GraphSource::Relation;
  enc::ContextMode context = enc::ContextMode::InputOnly;
  enc::ToyEncoderConfig encoder;  // encoder.dim is the token-state width d
  std::size_t proj_dim = 128;
  std::size_t node_dim = 128;
  std::size_t gat_layers = 2;
  graph::ThresholdConfig threshold;
  bool train_encoder = true;  // false: frozen backbone, states computed once
  bool train_head = true;
};

template <class T>
using StateMap = std::unordered_map<std::string, enc::HiddenStates<T>>;

template <class T>
class RelationalModel {
 public:
  RelationalModel(const ModelConfig& cfg, std::uint64_t seed);

  // Token states by article id replace the toy encoder. Every id the model
  // meets must be present; d must equal cfg.encoder.dim.
  void use_imported_states(std::shared_ptr<const StateMap<T>> states);
  bool uses_imported_states() const { return imported_ != nullptr; }

  ad::Tensor<T> article_states(const enc::Article& article) const;
  graph::DailyGraph<T> day_graph(const Dataset& ds, const LabeledDay& day) const;
  // N x 3 class probabilities. The graph used is stored in *graph_out if given.
  ad::Tensor<T> forward(const Dataset& ds, const LabeledDay& day,
                        graph::DailyGraph<T>* graph_out = nullptr) const;

  // Every parameter the configuration uses, trainable or not.
  std::vector<ad::NamedTensor<T>> parameters() const;
  std::vector<ad::NamedTensor<T>> trainable() const;

  std::vector<ad::NamedArray> snapshot() const;
  void restore(const std::vector<ad::NamedArray>& entries);

  const ModelConfig& config() const { return cfg_; }
  const head::RelationHead<T>& head() const { return head_; }
  const gat::GatParams<T>& gat() const { return gat_; }
  const enc::Lstm<T>& lstm() const { return lstm_; }
  const enc::ToyEncoder<T>& encoder() const { return encoder_; }

 private:
  bool uses_relation_head() const { return cfg_.graph == GraphSource::Relation; }

  ModelConfig cfg_;
  std::uint64_t seed_;
  enc::ToyEncoder<T> encoder_;
  head::RelationHead<T> head_;
  graph::GraphNorm<T> norm_;
  enc::Lstm<T> lstm_;
  gat::GatParams<T> gat_;
  std::shared_ptr<const StateMap<T>> imported_;
  mutable std::unordered_map<std::string, ad::Tensor<T>> frozen_cache_;
};

extern template class RelationalModel<float>;
extern template class RelationalModel<double>;

}  // namespace relprobe::train
