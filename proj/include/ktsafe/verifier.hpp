#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ktsafe/graph.hpp"
#include "ktsafe/params.hpp"

namespace ktsafe {

struct VertexVerdict {
  VertexId vertex = kNoVertex;
  bool safe = false;
  /// Protection set found by the check, the vertex included.
  std::vector<VertexId> witness;
  std::size_t sensitive = 0;
  std::string reason;
};

/// Direct scan over every vertex with the same QI.
VertexVerdict verify_kt_safe_vertex(const AttributedGraph& g, VertexId v, const Params& params);

struct GraphVerdict {
  bool safe = true;
  std::size_t vertices = 0;
  std::size_t unsafe_count = 0;
  double kt_safe_fraction = 1.0;
  /// Smallest protection set size seen and largest sensitive fraction.
  std::size_t min_protection = 0;
  double max_sensitive_fraction = 0.0;
  /// Up to `witness_limit` failing vertices with their evidence.
  std::vector<VertexVerdict> failures;
};

/// Checks every vertex. Vertices whose balls are isomorphic (same QI, GED 0)
/// share one protection set, so they are checked once.
GraphVerdict verify_kt_safe_graph(const AttributedGraph& g, const Params& params, std::size_t workers = 1,
                                  std::size_t witness_limit = 10);

struct UtilityReport {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  double mean_degree = 0;
  double sd_degree = 0;
  std::vector<std::size_t> degree_histogram;
  double mean_spl = 0;
  std::size_t spl_pairs = 0;
  /// Sampled pairs that were not connected and were resampled.
  std::size_t spl_dropped = 0;
  std::vector<std::size_t> spl_histogram;
  /// Mean local clustering coefficient; degree < 2 counts as 0.
  double mean_transitivity = 0;
  std::vector<std::size_t> transitivity_histogram;
  std::size_t largest_component = 0;
};

inline constexpr std::size_t kTransitivityBins = 10;

/// Shortest paths are estimated on `spl_pairs` connected pairs; at most
/// 10x that many draws are made.
UtilityReport utility_report(const AttributedGraph& g, std::size_t spl_pairs, std::uint64_t seed);
std::pair<UtilityReport, UtilityReport> utility_report(const AttributedGraph& original,
                                                      const AttributedGraph& anonymized, std::size_t spl_pairs,
                                                      std::uint64_t seed);

}  // namespace ktsafe
