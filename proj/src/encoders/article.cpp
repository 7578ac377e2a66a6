#include "relprobe/encoders/article.hpp"

#include <cctype>
#include <numeric>
#include <stdexcept>

#include "relprobe/autodiff/ops.hpp"

namespace relprobe::enc {

const char* to_string(ContextMode mode) {
  return mode == ContextMode::InputOnly ? "io" : "ig";
}

ContextMode context_from_string(const std::string& s) {
  if (s == "io") return ContextMode::InputOnly;
  if (s == "ig") return ContextMode::InputPlusGen;
  throw std::invalid_argument("unknown context mode '" + s + "' (expected io or ig)");
}

template <class T>
ad::Tensor<T> select_context(const HiddenStates<T>& h, ContextMode mode) {
  const std::size_t len = h.length();
  if (h.input_len == 0 || h.input_len > len) {
    throw std::invalid_argument("hidden states: input_len " + std::to_string(h.input_len) +
                                " invalid for " + std::to_string(len) + " rows");
  }
  if (mode == ContextMode::InputPlusGen) {
    if (h.context != ContextMode::InputPlusGen) {
      throw std::invalid_argument("I+G context requested but states hold input tokens only");
    }
    return h.states;
  }
  if (h.input_len == len) return h.states;
  std::vector<std::size_t> rows(h.input_len);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return ad::gather_rows(h.states, rows);
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int month = std::stoi(s.substr(5, 2)), day = std::stoi(s.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

template ad::Tensor<float> select_context(const HiddenStates<float>&, ContextMode);
template ad::Tensor<double> select_context(const HiddenStates<double>&, ContextMode);

}  // namespace relprobe::enc
