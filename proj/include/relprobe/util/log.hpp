#pragma once

#include <spdlog/spdlog.h>

#include <memory>

namespace relprobe::util {

// Shared logger; level comes from RELPROBE_LOG (trace, debug, info, warn, err, off).
std::shared_ptr<spdlog::logger> logger();

}  // namespace relprobe::util
