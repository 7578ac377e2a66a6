#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace relprobe::cli {

struct RunOptions {
  std::string command;  // generate | train | evaluate | build-graphs | gradcheck | baseline
  std::optional<std::filesystem::path> config;
  std::size_t runs = 1;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> checkpoint;
  std::string split = "test";  // train | val | test | all
  bool majority = false;
};

// Executes one subcommand. Artifacts go to <out>/<command>-<config hash>/.
// Returns the process exit status; failures are reported on `err`.
int run(const RunOptions& opts, std::ostream& out, std::ostream& err);

// Parses argv (subcommand first) and calls run().
int main_entry(int argc, char** argv);

}  // namespace relprobe::cli
