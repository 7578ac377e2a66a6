#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

// Little-endian scalar I/O shared by the checkpoint and hidden-state formats.
namespace relprobe::util {

inline void write_u32_le(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_f32_le(std::ostream& os, float f) {
  write_u32_le(os, std::bit_cast<std::uint32_t>(f));
}

inline std::uint32_t decode_u32_le(const unsigned char* b) {
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

// Sequential reader over an in-memory buffer that tracks its byte offset for
// diagnostics.
class ByteReader {
 public:
  ByteReader(const std::string& buf, std::string what) : buf_(buf), what_(std::move(what)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }

  void need(std::size_t n, const char* field) const {
    if (remaining() < n) {
      throw std::runtime_error(what_ + ": truncated at offset " + std::to_string(pos_) +
                               " reading " + field + " (need " + std::to_string(n) +
                               " bytes, have " + std::to_string(remaining()) + ")");
    }
  }
  std::string bytes(std::size_t n, const char* field) {
    need(n, field);
    std::string out = buf_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    auto v = decode_u32_le(reinterpret_cast<const unsigned char*>(buf_.data() + pos_));
    pos_ += 4;
    return v;
  }
  std::uint8_t u8(const char* field) {
    need(1, field);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  float f32(const char* field) { return std::bit_cast<float>(u32(field)); }

 private:
  const std::string& buf_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);

}  // namespace relprobe::util
