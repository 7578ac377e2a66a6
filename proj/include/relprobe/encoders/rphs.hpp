#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relprobe/encoders/article.hpp"

// RPHS hidden-state file, little-endian:
//   magic "RPHS" | version u32 = 1 | L u32 | d u32 | input_len u32 |
//   context u8 (0 input only, 1 input + generated) | 3 reserved bytes |
//   L x d f32, row-major
namespace relprobe::enc {

inline constexpr std::uint32_t kRphsVersion = 1;
inline constexpr std::size_t kRphsHeaderBytes = 24;

struct RphsRecord {
  std::uint32_t length = 0;
  std::uint32_t dim = 0;
  std::uint32_t input_len = 0;
  ContextMode context = ContextMode::InputOnly;
  std::vector<float> states;
};

class RphsFormatError : public std::runtime_error {
 public:
  RphsFormatError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

void write_rphs(const std::filesystem::path& path, const RphsRecord& rec);
RphsRecord read_rphs(const std::filesystem::path& path);
RphsRecord parse_rphs(const std::string& bytes, const std::string& what);

template <class T>
HiddenStates<T> load_hidden_states(const std::filesystem::path& path);

// One line of the JSON-lines sidecar index.
struct HiddenStateIndexEntry {
  std::string article_id;
  std::string date;
  std::vector<std::string> tickers;
  std::filesystem::path file;
};

// Relative file names resolve against the index's directory; a missing
// "file" field means "<article_id>.rphs".
std::vector<HiddenStateIndexEntry> read_hidden_state_index(const std::filesystem::path& path);
void write_hidden_state_index(const std::filesystem::path& path,
                              const std::vector<HiddenStateIndexEntry>& entries);

}  // namespace relprobe::enc
