#include "relprobe/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace relprobe::metrics {

int argmax(const ProbRow& p) {
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k) {
    if (p[k] > p[best]) best = k;
  }
  return best;
}

Confusion confusion_matrix(std::span<const int> labels, std::span<const int> predicted) {
  if (labels.size() != predicted.size()) {
    throw std::invalid_argument("confusion_matrix: label/prediction count mismatch");
  }
  Confusion cm{};
  for (std::size_t i = 0; i < labels.size(); ++i) ++cm[labels[i]][predicted[i]];
  return cm;
}

namespace {

std::uint64_t total(const Confusion& cm) {
  std::uint64_t n = 0;
  for (const auto& row : cm)
    for (auto c : row) n += c;
  return n;
}

}  // namespace

double accuracy(const Confusion& cm) {
  const auto n = total(cm);
  if (n == 0) return 0;
  std::uint64_t hit = 0;
  for (int k = 0; k < kNumClasses; ++k) hit += cm[k][k];
  return double(hit) / double(n);
}

double macro_f1(const Confusion& cm) {
  double acc = 0;
  for (int k = 0; k < kNumClasses; ++k) {
    std::uint64_t pred = 0, actual = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      pred += cm[j][k];
      actual += cm[k][j];
    }
    const double tp = double(cm[k][k]);
    if (pred == 0 || actual == 0 || tp == 0) continue;
    const double precision = tp / double(pred);
    const double recall = tp / double(actual);
    acc += 2 * precision * recall / (precision + recall);
  }
  return acc / kNumClasses;
}

double mcc(const Confusion& cm) {
  // c*s - sum_k p_k t_k over sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2)).
  const double s = double(total(cm));
  double c = 0, pt = 0, pp = 0, tt = 0;
  for (int k = 0; k < kNumClasses; ++k) {
    double p = 0, t = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      p += double(cm[j][k]);
      t += double(cm[k][j]);
    }
    c += double(cm[k][k]);
    pt += p * t;
    pp += p * p;
    tt += t * t;
  }
  const double denom = std::sqrt((s * s - pp) * (s * s - tt));
  if (denom == 0) return 0;
  return (c * s - pt) / denom;
}

double one_vs_rest_auc(std::span<const double> scores, std::span<const int> labels,
                       int positive_class) {
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U from midranks.
  double rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j < m && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (double(i + 1) + double(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == positive_class) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = m - n_pos;
  if (n_pos == 0 || n_neg == 0) return -1;
  const double u = rank_sum - double(n_pos) * double(n_pos + 1) / 2.0;
  return u / (double(n_pos) * double(n_neg));
}

double macro_auc(std::span<const ProbRow> probs, std::span<const int> labels) {
  std::vector<double> col(probs.size());
  double acc = 0;
  int defined = 0;
  for (int k = 0; k < kNumClasses; ++k) {
    for (std::size_t i = 0; i < probs.size(); ++i) col[i] = probs[i][k];
    const double a = one_vs_rest_auc(col, labels, k);
    if (a < 0) continue;
    acc += a;
    ++defined;
  }
  return defined == 0 ? 0.5 : acc / defined;
}

EvalBundle evaluate(std::span<const ProbRow> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(probs.size()) + " rows vs " +
                                std::to_string(labels.size()) + " labels");
  }
  if (probs.empty()) throw std::invalid_argument("evaluate: no samples");
  std::vector<int> predicted(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= kNumClasses) {
      throw std::invalid_argument("evaluate: label " + std::to_string(labels[i]) + " at row " +
                                  std::to_string(i) + " out of range");
    }
    const double s = probs[i][0] + probs[i][1] + probs[i][2];
    if (!(std::abs(s - 1.0) <= 1e-4)) {
      throw std::invalid_argument("evaluate: row " + std::to_string(i) + " sums to " +
                                  std::to_string(s));
    }
    predicted[i] = argmax(probs[i]);
  }
  EvalBundle b;
  b.confusion = confusion_matrix(labels, predicted);
  b.n_samples = probs.size();
  b.accuracy = accuracy(b.confusion);
  b.macro_f1 = macro_f1(b.confusion);
  b.mcc = mcc(b.confusion);
  b.auc = macro_auc(probs, labels);
  return b;
}

EvalBundle majority_baseline(std::span<const int> labels) {
  constexpr double eps = 1e-6;
  std::vector<ProbRow> probs(labels.size(), ProbRow{eps, 1 - 2 * eps, eps});
  return evaluate(probs, labels);
}

EvalBundle mean_bundle(std::span<const EvalBundle> runs) {
  if (runs.empty()) throw std::invalid_argument("mean_bundle: no runs");
  EvalBundle m;
  for (const auto& r : runs) {
    m.accuracy += r.accuracy;
    m.macro_f1 += r.macro_f1;
    m.mcc += r.mcc;
    m.auc += r.auc;
    m.n_samples += r.n_samples;
    for (int i = 0; i < kNumClasses; ++i)
      for (int j = 0; j < kNumClasses; ++j) m.confusion[i][j] += r.confusion[i][j];
  }
  const double k = double(runs.size());
  m.accuracy /= k;
  m.macro_f1 /= k;
  m.mcc /= k;
  m.auc /= k;
  return m;
}

nlohmann::json to_json(const EvalBundle& b) {
  nlohmann::json cm = nlohmann::json::array();
  for (const auto& row : b.confusion) cm.push_back(row);
  return {{"accuracy", b.accuracy}, {"macro_f1", b.macro_f1}, {"mcc", b.mcc},
          {"auc", b.auc},           {"confusion", cm},        {"n_samples", b.n_samples}};
}

EvalBundle bundle_from_json(const nlohmann::json& j) {
  EvalBundle b;
  b.accuracy = j.at("accuracy").get<double>();
  b.macro_f1 = j.at("macro_f1").get<double>();
  b.mcc = j.at("mcc").get<double>();
  b.auc = j.at("auc").get<double>();
  b.n_samples = j.at("n_samples").get<std::uint64_t>();
  const auto& cm = j.at("confusion");
  for (int i = 0; i < kNumClasses; ++i)
    for (int j2 = 0; j2 < kNumClasses; ++j2) b.confusion[i][j2] = cm.at(i).at(j2).get<std::uint64_t>();
  return b;
}

}  // namespace relprobe::metrics
