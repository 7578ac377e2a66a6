#include "relprobe/trainer/labels.hpp"

#include <cmath>
#include <limits>

namespace relprobe::train {

int trend_of(double next_return, double std_dev) {
  if (next_return > std_dev) return kPositive;
  if (next_return < -std_dev) return kNegative;
  return kNeutral;
}

std::optional<double> return_std(std::span<const double> returns) {
  double sum = 0;
  std::size_t n = 0;
  for (double r : returns) {
    if (!std::isfinite(r)) continue;
    sum += r;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double mean = sum / double(n);
  double ss = 0;
  for (double r : returns) {
    if (std::isfinite(r)) ss += (r - mean) * (r - mean);
  }
  return std::sqrt(ss / double(n - 1));
}

LabelTable make_labels(const std::vector<std::vector<double>>& returns,
                       std::optional<std::size_t> std_until) {
  LabelTable out;
  out.labels.resize(returns.size());
  out.std_dev.assign(returns.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t u = 0; u < returns.size(); ++u) {
    const auto& r = returns[u];
    out.labels[u].assign(r.size(), kUnlabeled);
    std::span<const double> basis(r);
    if (std_until) basis = basis.first(std::min(*std_until, r.size()));
    const auto s = return_std(basis);
    if (!s) continue;
    out.std_dev[u] = *s;
    for (std::size_t t = 0; t + 1 < r.size(); ++t) {
      if (std::isfinite(r[t + 1])) out.labels[u][t] = trend_of(r[t + 1], *s);
    }
  }
  return out;
}

}  // namespace relprobe::train
