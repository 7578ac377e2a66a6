#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "relprobe/autodiff/gradcheck.hpp"

namespace relprobe::enc {

// Lookback window for one ticker: steps x features, row-major, oldest first.
struct MarketWindow {
  std::size_t steps = 0;
  std::size_t features = 0;
  std::vector<double> values;

  double at(std::size_t t, std::size_t f) const { return values[t * features + f]; }
};

struct LstmConfig {
  std::size_t input_dim = 5;
  std::size_t hidden = 128;
};

// Single-layer LSTM with zero initial state; the node feature is the final
// hidden state.
template <class T>
class Lstm {
 public:
  Lstm(const LstmConfig& cfg, std::uint64_t seed);

  // One row per window; all windows must share the same shape.
  ad::Tensor<T> encode(std::span<const MarketWindow> windows) const;
  ad::Tensor<T> encode(const MarketWindow& window) const {
    return encode(std::span<const MarketWindow>(&window, 1));
  }

  void collect(std::vector<ad::NamedTensor<T>>& out, const std::string& prefix) const;
  const LstmConfig& config() const { return cfg_; }

  struct Gate {
    ad::Tensor<T> wx, wh, b;
  };
  // Order: input, forget, cell, output.
  std::array<Gate, 4>& gates() { return gates_; }

 private:
  LstmConfig cfg_;
  std::array<Gate, 4> gates_;
};

extern template class Lstm<float>;
extern template class Lstm<double>;

}  // namespace relprobe::enc
