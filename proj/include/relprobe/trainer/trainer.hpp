#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relprobe/metrics/metrics.hpp"
#include "relprobe/synth/planted_world.hpp"
#include "relprobe/trainer/loss.hpp"
#include "relprobe/trainer/model.hpp"

namespace relprobe::train {

struct TrainConfig {
  std::vector<double> lrs{1e-3, 1e-4, 1e-5};
  std::size_t max_epochs = 30;
  std::size_t patience = 5;  // non-improving validation epochs tolerated before stopping
  ClassWeights class_weights = kDefaultClassWeights;
  std::uint64_t seed = 13423;
  bool shuffle_days = true;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based; 0 marks the final test row
  double lr = 0;
  std::string split;
  metrics::EvalBundle metrics;
  double loss = 0;  // mean day loss
};

struct TrainResult {
  double best_lr = 0;
  std::size_t best_epoch = 0;
  metrics::EvalBundle best_val;
  std::vector<EpochRecord> log;
  std::vector<ad::NamedArray> best_params;
};

struct SplitPredictions {
  std::vector<metrics::ProbRow> probs;
  std::vector<int> labels;
  double loss = 0;  // mean day loss
};

template <class T>
SplitPredictions predict_split(const RelationalModel<T>& model, const Dataset& ds,
                               const std::vector<LabeledDay>& days, const ClassWeights& weights);

template <class T>
metrics::EvalBundle evaluate_split(const RelationalModel<T>& model, const Dataset& ds,
                                   const std::vector<LabeledDay>& days, const ClassWeights& weights,
                                   double* loss = nullptr);

// Mean per-day edge-recovery scores of the model's graphs against the truth.
template <class T>
synth::EdgeScore graph_recovery(const RelationalModel<T>& model, const Dataset& ds,
                                const std::vector<LabeledDay>& days,
                                const std::vector<synth::TruthEdge>& truth);

template <class T>
using ModelFactory = std::function<RelationalModel<T>()>;

// Sweeps the learning rates, each from a fresh model, early-stopping on
// validation macro F1. With a state directory the run checkpoints after every
// epoch and resumes from an existing state there.
template <class T>
TrainResult train(const ModelFactory<T>& make_model, const Dataset& ds, const TrainConfig& cfg,
                  const std::optional<std::filesystem::path>& state_dir = std::nullopt);

void write_log_csv(const std::vector<EpochRecord>& log, const std::filesystem::path& path);

}  // namespace relprobe::train
