#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ktsafe/graph.hpp"

namespace ktsafe {

/// Half the L1 norm; switching this to 1.0 turns EMD into plain L1.
inline constexpr double kEmdFactor = 0.5;

inline constexpr std::size_t kGedNodeBudget = 1'000'000;
/// Budget for pivot and index distances, which only need a usable interval.
inline constexpr std::size_t kIndexGedBudget = 2'000;
inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

struct GedResult {
  /// Best edit count found; an upper bound on the true distance.
  int distance = 0;
  /// Proven lower bound. Equal to distance when exact.
  int lower_bound = 0;
  bool exact = true;
};

struct GedOptions {
  std::size_t node_budget = kUnlimited;
  /// When >= 0 the search only has to decide "distance <= cap". Results
  /// above the cap come back inexact with lower_bound > cap.
  int cap = -1;
};

struct EditDelta {
  std::size_t vertices_added = 0;
  std::size_t edges_added = 0;
  std::size_t total() const { return vertices_added + edges_added; }
};

/// Minimal-common-supergraph insertion distance between two balls. The
/// centers always map onto each other and their own labels are ignored;
/// every other vertex may only map onto a vertex with an equal QI.
/// Radius <= 1 runs unbudgeted (exact); larger radii use kGedNodeBudget.
GedResult ged_neighborhood(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2);
GedResult ged_neighborhood(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2,
                           const GedOptions& options);

/// True iff ged <= eps is proven. Inexact answers count as "no".
bool ged_within(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2, int eps);

/// Cheap admissible lower bound (label multiset + edge count difference).
int ged_lower_bound(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2);

double emd(const std::vector<double>& p, const std::vector<double>& q);
double emd_attribute_distance(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2,
                              std::size_t j);

/// EMD <= t on every quasi-identifier and every radius 1..min(radius).
bool t_close(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2, double t);

/// |V delta| + |E delta| over vertex ids and edge pairs.
std::size_t anonymization_cost(const AttributedGraph& g, const AttributedGraph& g_prime);
EditDelta edit_delta(const AttributedGraph& g, const AttributedGraph& g_prime);

long neighborhood_size_diff(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2);

}  // namespace ktsafe
