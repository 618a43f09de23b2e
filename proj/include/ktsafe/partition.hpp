#pragma once

#include <cstdint>
#include <vector>

#include "ktsafe/graph.hpp"
#include "ktsafe/params.hpp"

namespace ktsafe {

/// A core of owned vertices plus a frozen halo of copied context. The local
/// graph lists core vertices first (ascending host id), then the halo.
struct PartitionedSubgraph {
  std::vector<VertexId> core_ids;
  std::vector<VertexId> halo_ids;
  AttributedGraph graph;
  /// Local id -> host id for the core and halo vertices.
  std::vector<VertexId> to_host;

  explicit PartitionedSubgraph(SchemaPtr schema) : graph(std::move(schema)) {}

  bool is_core(VertexId local) const { return local < core_ids.size(); }
  bool is_halo(VertexId local) const {
    return local >= core_ids.size() && local < core_ids.size() + halo_ids.size();
  }
  std::size_t original_count() const { return core_ids.size() + halo_ids.size(); }
};

/// Builds a partition around `core` (host ids). With `with_halo`, every vertex
/// within n hops of the core that is not in it joins the halo.
PartitionedSubgraph make_partition(const AttributedGraph& g, std::vector<VertexId> core, int n,
                                   bool with_halo);

/// Recursive region-growing split into cores of at most gamma vertices.
std::vector<PartitionedSubgraph> partition_graph(const AttributedGraph& g, std::size_t gamma,
                                                 std::size_t s, int n);

/// Raw s-way split used by partition_graph. Exposed for tests.
std::vector<std::vector<VertexId>> split_region(const AttributedGraph& g,
                                                const std::vector<VertexId>& vertices, std::size_t s);

/// Per-vertex costs measured by anonymizing a sample graph.
struct CostSample {
  AttributedGraph graph;
  std::vector<double> c_mkt;
  /// Only meaningful where `border` is set.
  std::vector<double> c_mer;
  std::vector<bool> border;
  std::vector<std::size_t> ball_sizes;

  explicit CostSample(SchemaPtr schema) : graph(std::move(schema)) {}
};

/// Nearest-ball-size lookups into a CostSample.
class CostLookup {
 public:
  explicit CostLookup(const CostSample& sample);
  double kt_cost(std::size_t ball) const;
  double merge_cost(std::size_t ball) const;

 private:
  struct Entry {
    std::size_t ball;
    VertexId id;
    double cost;
  };
  static double nearest(const std::vector<Entry>& table, std::size_t ball);
  std::vector<Entry> kt_;
  std::vector<Entry> mer_;
};

double estimate_partition_cost(const std::vector<PartitionedSubgraph>& parts, const CostSample& sample,
                               int n);

/// Clusters every vertex to its nearest center (hop distance, capacity gamma,
/// ties to the lower center id). Leftovers seed extra clusters.
std::vector<std::vector<VertexId>> cluster_by_centers(const AttributedGraph& g,
                                                      std::vector<VertexId> centers, std::size_t gamma);

struct PartitionSelection {
  std::vector<PartitionedSubgraph> parts;
  std::vector<VertexId> centers;
  /// Best estimate after each iteration.
  std::vector<double> best_cost_history;
};

PartitionSelection select_partitioning(const AttributedGraph& g, std::size_t gamma, std::size_t s,
                                       int ite, const CostSample& sample, std::uint64_t seed, int n);

/// Connected BFS sample of `sample_size` vertices from random seeds.
AttributedGraph sample_subgraph(const AttributedGraph& g, std::size_t sample_size, std::uint64_t seed);

/// Anonymizes a sample of g and records what each vertex cost.
CostSample calibrate_cost_sample(const AttributedGraph& g, std::size_t sample_size, const Params& params,
                                 std::uint64_t seed);

}  // namespace ktsafe
