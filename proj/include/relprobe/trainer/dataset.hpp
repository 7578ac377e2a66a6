#pragma once

#include <string>
#include <vector>

#include "relprobe/encoders/article.hpp"
#include "relprobe/encoders/ingest.hpp"
#include "relprobe/encoders/lstm.hpp"

namespace relprobe::train {

struct DatasetConfig {
  std::size_t window = 20;
  std::array<double, 3> split{8, 1, 1};  // train : val : test, chronological
  bool train_only_std = false;
};

// One prediction day: market windows ending at t, articles dated t (or on
// non-trading days since the previous session), labels from the t+1 return.
struct LabeledDay {
  std::size_t t = 0;
  std::string date;
  std::vector<std::size_t> articles;  // indices into Dataset::articles
  std::vector<enc::MarketWindow> windows;
  std::vector<int> labels;  // per ticker, -1 when unlabeled
};

struct Dataset {
  std::vector<std::string> tickers;
  std::vector<enc::Article> articles;
  std::vector<LabeledDay> train, val, test;
  // Per ticker, from the rows visible to training windows.
  std::vector<std::array<double, enc::kMarketFeatures>> feature_mean, feature_std;
  std::vector<double> label_std;

  std::size_t n_tickers() const { return tickers.size(); }
};

// Throws when any split comes out empty.
Dataset build_dataset(const enc::PriceTable& prices, std::vector<enc::Article> articles,
                      const DatasetConfig& cfg);

// Labeled (ticker, day) pairs per class across the given days.
std::array<std::size_t, 3> class_counts(const std::vector<LabeledDay>& days);

}  // namespace relprobe::train
