#include "relprobe/util/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "relprobe/util/binary_io.hpp"

namespace relprobe::util {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto lg = spdlog::stderr_color_mt("relprobe");
    lg->set_pattern("[%l] %v");
    lg->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("RELPROBE_LOG")) {
      lg->set_level(spdlog::level::from_str(env));
    }
    return lg;
  }();
  return instance;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace relprobe::util
