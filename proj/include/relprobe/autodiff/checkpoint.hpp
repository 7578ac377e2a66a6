#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relprobe/autodiff/tensor.hpp"

// "RPCK" archive of named tensors. Layout, all little-endian:
//   magic "RPCK" | version u32 = 1 | entry count u32
//   per entry: name length u32 | UTF-8 name | rank u32 | dims u32 x rank |
//              payload f32 x prod(dims), row-major
namespace relprobe::ad {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedArray>& entries);
std::vector<NamedArray> load_checkpoint(const std::filesystem::path& path);

template <class T>
NamedArray to_named_array(const std::string& name, const Tensor<T>& t);

// Copies a checkpoint payload into a leaf of identical shape.
template <class T>
void assign_from(Tensor<T>& leaf, const NamedArray& entry);

}  // namespace relprobe::ad
