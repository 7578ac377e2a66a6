#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace props {

struct Result {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return cases > 0 && failures == 0; }
};

// Randomized invariant suites. Each draws `cases` independent instances from
// `seed` and records the first violation.
Result softmax_rows(std::size_t cases, std::uint64_t seed);
Result head_attention_rows(std::size_t cases, std::uint64_t seed);
Result gat_attention_rows(std::size_t cases, std::uint64_t seed);
Result layer_norm_stats(std::size_t cases, std::uint64_t seed);
Result threshold_monotonicity(std::size_t cases, std::uint64_t seed);
Result weight_support(std::size_t cases, std::uint64_t seed);
Result gat_permutation_equivariance(std::size_t cases, std::uint64_t seed);
Result label_boundary_rule(std::size_t cases, std::uint64_t seed);
Result mcc_covariance(std::size_t cases, std::uint64_t seed);
Result auc_pairwise(std::size_t cases, std::uint64_t seed);

std::vector<Result> all(std::size_t cases, std::uint64_t seed);

}  // namespace props
