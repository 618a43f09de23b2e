#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "ktsafe/distances.hpp"
#include "ktsafe/graph.hpp"

namespace ktsafe {

using CandidateSet = std::vector<VertexId>;

/// GED known only up to an interval.
struct GedInterval {
  int lo = 0;
  int hi = 0;
};

inline GedInterval to_interval(const GedResult& r) { return {r.lower_bound, r.distance}; }

/// |d_vp - d_mp| > eps.
bool pivot_prunable(int d_vp, int d_mp, int eps);
/// Sound variant for inexact distances: prunable only if every value in the
/// two intervals leaves a gap above eps.
bool pivot_prunable(const GedInterval& vp, const GedInterval& mp, int eps);

/// Pivot vertices with their balls snapshotted at selection time and a lazy,
/// insert-once cache of pivot-to-vertex distances on the host graph.
class PivotSet {
 public:
  PivotSet() = default;
  PivotSet(const AttributedGraph& g, std::vector<VertexId> pivots, int n);
  PivotSet(const PivotSet& other);
  PivotSet& operator=(const PivotSet& other);

  const std::vector<VertexId>& pivots() const { return pivots_; }
  const NeighborhoodSubgraph& ball(std::size_t i) const { return balls_[i]; }
  std::size_t size() const { return pivots_.size(); }
  int radius() const { return n_; }

  /// Distance from pivot i to host vertex v (memoized).
  GedInterval distance(std::size_t i, VertexId v) const;
  /// Distance from pivot i to an arbitrary ball (not cached).
  GedInterval distance(std::size_t i, const NeighborhoodSubgraph& ball) const;

  std::size_t cached_count() const;

 private:
  const AttributedGraph* graph_ = nullptr;
  int n_ = 1;
  std::vector<VertexId> pivots_;
  std::vector<NeighborhoodSubgraph> balls_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::size_t, VertexId>, GedInterval> cache_;
};

struct PivotSelection {
  PivotSet pivots;
  /// Best pruned-pair count after each iteration.
  std::vector<std::size_t> pruned_history;
};

/// Hill climbing over pivot sets, maximizing pruned ordered sample pairs.
PivotSelection select_pivots_traced(const AttributedGraph& g, std::size_t sample_size, int iter,
                                    int pivot_count, int eps, int n, std::uint64_t seed);
PivotSet select_pivots(const AttributedGraph& g, std::size_t sample_size, int iter, int pivot_count,
                       int eps, int n, std::uint64_t seed);

/// Bit position of code `code` of attribute j in a B-bit vector.
std::size_t attribute_bit(Code code, std::size_t j, std::size_t domain_size, std::size_t B);

struct KtTreeNode {
  std::vector<int> children;
  /// Leaves only.
  std::vector<VertexId> member_ids;
  QiKey qi = 0;
  /// One B-bit vector per quasi-identifier, packed into 64-bit words.
  std::vector<std::vector<std::uint64_t>> bit_vectors;
  /// Index into the pivot set.
  std::size_t pivot = 0;
  VertexId pivot_id = kNoVertex;
  GedInterval ged_interval;

  bool leaf() const { return children.empty(); }
  bool bit_set(std::size_t j, std::size_t bit) const { return (bit_vectors[j][bit / 64] >> (bit % 64)) & 1U; }
};

class KtTree {
 public:
  const std::vector<KtTreeNode>& nodes() const { return nodes_; }
  const KtTreeNode& root() const { return nodes_.at(root_); }
  int root_index() const { return root_; }
  const PivotSet& pivots() const { return pivots_; }
  std::size_t width() const { return B_; }
  int radius() const { return n_; }
  const AttributedGraph& graph() const { return *graph_; }

  /// Every vertex whose stored data survives the bit and pivot tests for a
  /// query ball. Never checks GED exactly.
  std::vector<VertexId> prefilter(const NeighborhoodSubgraph& ball, QiKey qi, const AttributeVector& attrs,
                                  int eps) const;

  /// Leaf members reached from the root along nodes whose bit test passes.
  bool reachable(VertexId v, const AttributeVector& attrs) const;

 private:
  friend KtTree build_kt_tree(const AttributedGraph& g, PivotSet pivots, std::size_t B, int n);
  bool bits_match(const KtTreeNode& node, const std::vector<std::size_t>& bits) const;

  std::vector<KtTreeNode> nodes_;
  int root_ = -1;
  PivotSet pivots_;
  std::size_t B_ = 64;
  int n_ = 1;
  const AttributedGraph* graph_ = nullptr;
};

KtTree build_kt_tree(const AttributedGraph& g, PivotSet pivots, std::size_t B = 64, int n = 1);

/// Same QI and exact GED <= eps, sorted by id. The tree only accelerates.
CandidateSet kt_tree_candidates(const KtTree& tree, VertexId v, int eps, int n);

/// Exhaustive scan, or the tree when one is given.
CandidateSet initial_candidate(const AttributedGraph& g, VertexId v, int eps, int n,
                               const KtTree* index = nullptr);

}  // namespace ktsafe
