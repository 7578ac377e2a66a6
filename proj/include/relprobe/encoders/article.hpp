#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relprobe/autodiff/tensor.hpp"

namespace relprobe::enc {

struct Article {
  std::string id;
  std::string date;  // ISO-8601 calendar day, YYYY-MM-DD
  std::vector<int> tokens;
  std::vector<std::size_t> tickers;  // indices into the ticker universe
};

enum class ContextMode : std::uint8_t { InputOnly = 0, InputPlusGen = 1 };

const char* to_string(ContextMode mode);
ContextMode context_from_string(const std::string& s);  // "io" | "ig"

// Token states of one article. Rows [0, input_len) come from the prompt,
// the rest from generated tokens.
template <class T>
struct HiddenStates {
  ad::Tensor<T> states;
  std::size_t input_len = 0;
  ContextMode context = ContextMode::InputOnly;

  std::size_t length() const { return states.rows(); }
  std::size_t dim() const { return states.cols(); }
};

template <class T>
ad::Tensor<T> select_context(const HiddenStates<T>& h, ContextMode mode);

bool is_iso_date(const std::string& s);

}  // namespace relprobe::enc
