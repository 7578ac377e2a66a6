#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relprobe/autodiff/gradcheck.hpp"

namespace relprobe::verify {

struct SuiteEntry {
  std::string name;
  ad::GradcheckReport<double> report;
  double seconds = 0;
};

struct SuiteOptions {
  std::uint64_t seed = 7;
  double step = 1e-5;
  double tol = 1e-4;
};

// Finite-difference checks of every differentiable module on tiny shapes
// (N <= 4, d <= 8, L <= 6) in 64-bit. Each composite is reduced to a scalar
// with fixed random weights.
std::vector<SuiteEntry> run_gradcheck_suite(const SuiteOptions& opts = {});

bool all_pass(const std::vector<SuiteEntry>& entries);

}  // namespace relprobe::verify
