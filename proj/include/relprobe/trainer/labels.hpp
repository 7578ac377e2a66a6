#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace relprobe::train {

enum Trend : int { kUnlabeled = -1, kNegative = 0, kNeutral = 1, kPositive = 2 };

// Strict comparisons: r == +-std is neutral.
int trend_of(double next_return, double std_dev);

// Sample standard deviation of the finite entries; nullopt below 2 of them.
std::optional<double> return_std(std::span<const double> returns);

struct LabelTable {
  std::vector<std::vector<int>> labels;  // [ticker][t], from the t+1 return
  std::vector<double> std_dev;           // NaN for tickers that cannot be labeled
};

// returns[u][t] is the close-to-close return into day t (NaN where undefined).
// std_until limits the std to returns[u][0 .. std_until); default is the full
// series.
LabelTable make_labels(const std::vector<std::vector<double>>& returns,
                       std::optional<std::size_t> std_until = std::nullopt);

}  // namespace relprobe::train
