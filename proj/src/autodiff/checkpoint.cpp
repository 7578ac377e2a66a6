#include "relprobe/autodiff/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "relprobe/util/binary_io.hpp"

namespace relprobe::ad {

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedArray>& entries) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  os.write("RPCK", 4);
  util::write_u32_le(os, kCheckpointVersion);
  util::write_u32_le(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (numel(e.shape) != e.data.size()) {
      throw std::invalid_argument("checkpoint entry '" + e.name + "' shape/payload mismatch");
    }
    util::write_u32_le(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    util::write_u32_le(os, static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) util::write_u32_le(os, static_cast<std::uint32_t>(d));
    for (float v : e.data) util::write_f32_le(os, v);
  }
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

std::vector<NamedArray> load_checkpoint(const std::filesystem::path& path) {
  const std::string buf = util::read_file(path.string());
  util::ByteReader rd(buf, "checkpoint " + path.string());
  if (rd.bytes(4, "magic") != "RPCK") {
    throw std::runtime_error("checkpoint " + path.string() + ": bad magic at offset 0");
  }
  const auto version = rd.u32("version");
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint " + path.string() + ": unsupported version " +
                             std::to_string(version));
  }
  const auto count = rd.u32("entry count");
  std::vector<NamedArray> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray e;
    e.name = rd.bytes(rd.u32("name length"), "name");
    const auto rank = rd.u32("rank");
    for (std::uint32_t r = 0; r < rank; ++r) e.shape.push_back(rd.u32("dim"));
    const std::size_t n = numel(e.shape);
    rd.need(4 * n, "payload");
    e.data.resize(n);
    for (auto& v : e.data) v = rd.f32("payload");
    out.push_back(std::move(e));
  }
  return out;
}

template <class T>
NamedArray to_named_array(const std::string& name, const Tensor<T>& t) {
  NamedArray e{name, t.shape(), {}};
  e.data.reserve(t.numel());
  for (T v : t.value()) e.data.push_back(static_cast<float>(v));
  return e;
}

template <class T>
void assign_from(Tensor<T>& leaf, const NamedArray& entry) {
  if (leaf.shape() != entry.shape) {
    throw std::invalid_argument("checkpoint entry '" + entry.name + "' has shape " +
                                shape_str(entry.shape) + ", expected " + shape_str(leaf.shape()));
  }
  auto d = leaf.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<T>(entry.data[i]);
}

template NamedArray to_named_array(const std::string&, const Tensor<float>&);
template NamedArray to_named_array(const std::string&, const Tensor<double>&);
template void assign_from(Tensor<float>&, const NamedArray&);
template void assign_from(Tensor<double>&, const NamedArray&);

}  // namespace relprobe::ad
