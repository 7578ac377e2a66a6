#include "relprobe/trainer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relprobe/trainer/labels.hpp"
#include "relprobe/util/log.hpp"

namespace relprobe::train {

Dataset build_dataset(const enc::PriceTable& prices, std::vector<enc::Article> articles,
                      const DatasetConfig& cfg) {
  const std::size_t n = prices.tickers.size();
  const std::size_t days = prices.dates.size();
  if (cfg.window == 0) throw std::invalid_argument("dataset: window must be positive");
  if (cfg.split[0] <= 0 || cfg.split[1] <= 0 || cfg.split[2] <= 0) {
    throw std::invalid_argument("dataset: split ratios must be positive");
  }
  // Usable days need a full window of returns (rows 1..t) and a t+1 return.
  if (days < cfg.window + 2) {
    throw std::invalid_argument("dataset: " + std::to_string(days) + " days is too short for window " +
                                std::to_string(cfg.window));
  }
  const std::size_t first = cfg.window;
  const std::size_t last = days - 2;
  const std::size_t usable = last - first + 1;
  const double total = cfg.split[0] + cfg.split[1] + cfg.split[2];
  const std::size_t n_train = std::size_t(std::floor(double(usable) * cfg.split[0] / total));
  const std::size_t n_val = std::size_t(std::floor(double(usable) * cfg.split[1] / total));
  const std::size_t n_test = usable - n_train - n_val;
  if (n_train == 0 || n_val == 0 || n_test == 0) {
    throw std::invalid_argument("dataset: empty split (" + std::to_string(n_train) + "/" +
                                std::to_string(n_val) + "/" + std::to_string(n_test) + ")");
  }

  Dataset ds;
  ds.tickers = prices.tickers;

  const auto returns = enc::close_returns(prices);
  std::optional<std::size_t> std_until;
  // Labels of training days read returns up to first + n_train.
  if (cfg.train_only_std) std_until = first + n_train + 1;
  const auto table = make_labels(returns, std_until);
  ds.label_std = table.std_dev;

  const auto features = enc::market_features(prices);
  // Standardize each ticker with statistics of the rows visible to training windows.
  const std::size_t stat_end = first + n_train;
  ds.feature_mean.assign(n, {});
  ds.feature_std.assign(n, {});
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t f = 0; f < enc::kMarketFeatures; ++f) {
      double s = 0, ss = 0;
      for (std::size_t t = 1; t < stat_end; ++t) s += features[u][t][f];
      const double mean = s / double(stat_end - 1);
      for (std::size_t t = 1; t < stat_end; ++t) ss += (features[u][t][f] - mean) * (features[u][t][f] - mean);
      const double sd = std::sqrt(ss / double(stat_end - 1));
      ds.feature_mean[u][f] = mean;
      ds.feature_std[u][f] = sd > 0 ? sd : 1.0;
    }
  }
  // Articles attach to the first session on or after their date.
  std::stable_sort(articles.begin(), articles.end(),
                   [](const enc::Article& a, const enc::Article& b) { return a.date < b.date; });
  std::vector<std::vector<std::size_t>> by_day(days);
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    auto it = std::lower_bound(prices.dates.begin(), prices.dates.end(), articles[i].date);
    if (it == prices.dates.end()) {
      ++dropped;
      continue;
    }
    by_day[std::size_t(it - prices.dates.begin())].push_back(i);
  }
  if (dropped) util::logger()->info("dataset: {} articles after the last session dropped", dropped);
  ds.articles = std::move(articles);

  for (std::size_t t = first; t <= last; ++t) {
    LabeledDay day;
    day.t = t;
    day.date = prices.dates[t];
    day.articles = by_day[t];
    day.labels.resize(n);
    day.windows.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
      day.labels[u] = table.labels[u][t];
      auto& w = day.windows[u];
      w.steps = cfg.window;
      w.features = enc::kMarketFeatures;
      w.values.reserve(cfg.window * enc::kMarketFeatures);
      for (std::size_t s = t + 1 - cfg.window; s <= t; ++s)
        for (std::size_t f = 0; f < enc::kMarketFeatures; ++f)
          w.values.push_back((features[u][s][f] - ds.feature_mean[u][f]) / ds.feature_std[u][f]);
    }
    const std::size_t k = t - first;
    if (k < n_train) ds.train.push_back(std::move(day));
    else if (k < n_train + n_val) ds.val.push_back(std::move(day));
    else ds.test.push_back(std::move(day));
  }
  return ds;
}

std::array<std::size_t, 3> class_counts(const std::vector<LabeledDay>& days) {
  std::array<std::size_t, 3> c{};
  for (const auto& d : days)
    for (int y : d.labels)
      if (y >= 0) ++c[std::size_t(y)];
  return c;
}

}  // namespace relprobe::train
