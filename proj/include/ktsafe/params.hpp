#pragma once

#include <cstddef>
#include <cstdint>

namespace ktsafe {

/// Privacy thresholds plus the knobs of the preprocessing phase. Defaults are
/// the bold values of the experimental setup.
struct Params {
  int k = 10;
  double t = 0.1;
  int epsilon = 5;
  double alpha = 0.2;
  int n = 1;
  std::size_t gamma = 1000;
  std::size_t s = 4;

  std::uint64_t seed = 1;
  /// Hill-climbing rounds for the partitioning search; 0 disables the
  /// search and falls back to recursive region growing.
  int partition_iterations = 0;
  std::size_t cost_sample_size = 1000;
  int pivot_count = 10;
  int pivot_iterations = 100;
  std::size_t pivot_sample_size = 200;
  /// Use the pivot index as a candidate prefilter (radius 1 only).
  bool use_index = true;
  std::size_t workers = 1;

  /// Throws ContractError when a threshold is out of range.
  void validate() const;
};

}  // namespace ktsafe
