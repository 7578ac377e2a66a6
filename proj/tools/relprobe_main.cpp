#include "relprobe/cli/runner.hpp"

int main(int argc, char** argv) { return relprobe::cli::main_entry(argc, argv); }
