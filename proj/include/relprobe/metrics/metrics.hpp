#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

namespace relprobe::metrics {

// Class order everywhere: negative, neutral, positive.
inline constexpr int kNumClasses = 3;
inline constexpr int kNeutral = 1;

using ProbRow = std::array<double, kNumClasses>;
using Confusion = std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>;  // [true][pred]

struct EvalBundle {
  double accuracy = 0;
  double macro_f1 = 0;
  double mcc = 0;
  double auc = 0;
  Confusion confusion{};
  std::uint64_t n_samples = 0;
};

// Argmax predictions with ties going to the lowest class index.
int argmax(const ProbRow& p);

Confusion confusion_matrix(std::span<const int> labels, std::span<const int> predicted);
double accuracy(const Confusion& cm);
// Per-class F1 is 0 whenever precision or recall is undefined.
double macro_f1(const Confusion& cm);
// Covariance form of the K-class MCC; 0 when the denominator vanishes.
double mcc(const Confusion& cm);
// AUC of `scores` for separating label == positive_class from the rest, ties
// counted as half. Returns -1 when either side is empty.
double one_vs_rest_auc(std::span<const double> scores, std::span<const int> labels,
                       int positive_class);
// Mean of the defined one-vs-rest AUCs; 0.5 when no class is defined.
double macro_auc(std::span<const ProbRow> probs, std::span<const int> labels);

// Throws if sizes differ, M == 0, a label is out of range, or a row does not
// sum to 1 within 1e-4.
EvalBundle evaluate(std::span<const ProbRow> probs, std::span<const int> labels);

// Constant predictor with probability 1 - 2e-6 on neutral.
EvalBundle majority_baseline(std::span<const int> labels);

// Field-wise mean of the four metrics; confusion matrices and counts are summed.
EvalBundle mean_bundle(std::span<const EvalBundle> runs);

nlohmann::json to_json(const EvalBundle& b);
EvalBundle bundle_from_json(const nlohmann::json& j);

}  // namespace relprobe::metrics
