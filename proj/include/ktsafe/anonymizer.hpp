#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ktsafe/candidate_index.hpp"
#include "ktsafe/graph.hpp"
#include "ktsafe/params.hpp"
#include "ktsafe/partition.hpp"

namespace ktsafe {

struct ProtectionSet {
  VertexId owner = kNoVertex;
  /// Includes the owner.
  std::vector<VertexId> members;
  /// Fake peers still owed (N_needed + x); materialized by layering.
  std::size_t pending_fakes = 0;
  std::size_t sensitive = 0;
};

enum class EditCause : std::uint8_t { Rehearsal, Duplicate, Layer };

struct EditEntry {
  enum class Kind : std::uint8_t { AddVertex, AddEdge };
  Kind kind = Kind::AddVertex;
  /// AddVertex: u is the new id. AddEdge: the endpoints.
  VertexId u = kNoVertex;
  VertexId v = kNoVertex;
  AttributeVector attrs;
  Origin origin;
  EditCause cause = EditCause::Rehearsal;
  /// Vertex whose safety the edit serves.
  VertexId owner = kNoVertex;
  /// Second owner for layer edges; each owner carries half the edge.
  VertexId co_owner = kNoVertex;
  /// Charged to a border vertex's merge cost instead of owner's kt cost.
  bool merge = false;
};

struct EditLog {
  std::vector<EditEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  /// Applies the log to `base`; throws ContractError if ids do not line up.
  AttributedGraph replay(const AttributedGraph& base) const;
};

/// Per-vertex cost split: kt cost and merge cost, indexed by host id of the
/// input graph (fractional because layer edges split between endpoints).
struct CostAttribution {
  std::vector<double> kt;
  std::vector<double> merge;
};

CostAttribution attribute_costs(const EditLog& log, std::size_t original_count);

/// Modal non-sensitive value of A_d in g (ties by code order); the value
/// carried by every fake and duplicate.
Code fake_sensitive_code(const AttributedGraph& g);

/// Mutable state of one partition while it is being anonymized.
struct WorkState {
  AttributedGraph& g;
  const Params& params;
  EditLog log;
  /// n-hop balls of frozen vertices must not change.
  std::vector<char> frozen;
  std::vector<char> finalized;
  /// Halo vertices are frozen context, never candidates.
  std::vector<char> halo;
  /// Balls changed since `index` was built.
  std::vector<char> dirty;
  const KtTree* index = nullptr;
  /// Vertex currently processed; owner of new edits.
  VertexId owner = kNoVertex;
  Code fake_code = kMissing;
  /// Stage 2 is only run for original core vertices.
  bool rehearse = true;
  /// Vertices added by committed edits, in creation order.
  std::vector<VertexId> appended;
  /// Optional: snapshot of every finalized vertex's ball.
  bool record_snapshots = false;
  std::vector<std::pair<VertexId, NeighborhoodSubgraph>> snapshots;

  WorkState(AttributedGraph& graph, const Params& p);
  void ensure_size();
  void freeze(VertexId v);
  /// No frozen vertex within n-1 hops of y.
  bool attachable(VertexId y) const;
  /// Nearest frozen vertex within n-1 hops of y, or kNoVertex.
  VertexId blocker(VertexId y) const;
  VertexId add_vertex(AttributeVector attrs, Origin origin, EditCause cause, bool merge, VertexId owner);
  void add_edge(VertexId a, VertexId b, EditCause cause, bool merge, VertexId owner);
  void rollback(std::size_t vertex_count, std::size_t log_size);
  void mark_dirty_around(VertexId y);
};

/// Same QI, exact GED <= eps, restricted to non-halo vertices of the live
/// graph. Uses the index as a prefilter when present.
CandidateSet live_candidates(const WorkState& st, VertexId v);

/// Stage 1 seeding, stage 2 admission and the residual demand of stage 3.
ProtectionSet kt_safety_vertex(VertexId v, const CandidateSet& cs, WorkState& st);

/// Rehearses fake-neighbor insertions around v_m until it is t-close to v;
/// keeps them iff v_m stays within eps and the total stays within 2*eps.
bool try_admit_candidate(VertexId v, VertexId vm, WorkState& st);

/// Copy of v_a that takes over edits which would disturb a frozen ball.
VertexId duplicate_on_conflict(VertexId va, WorkState& st);

/// Result of anonymizing one partition.
struct PartitionOutcome {
  AttributedGraph initial;
  AttributedGraph graph;
  EditLog log;
  std::vector<ProtectionSet> protection_sets;
  std::vector<std::pair<VertexId, NeighborhoodSubgraph>> snapshots;

  explicit PartitionOutcome(SchemaPtr schema) : initial(schema), graph(schema) {}
};

PartitionOutcome anonymize_partition(const PartitionedSubgraph& part, const Params& params,
                                     bool record_snapshots = false);

struct MergeResult {
  AttributedGraph graph;
  EditLog log;
  std::size_t merged_halo = 0;
  std::size_t kept_halo = 0;

  explicit MergeResult(AttributedGraph g) : graph(std::move(g)) {}
};

/// Folds anonymized partitions back into the host graph. A halo copy whose
/// ball is unchanged collapses onto its original; otherwise both are kept.
MergeResult merge_subgraphs(const std::vector<PartitionedSubgraph>& parts,
                            const std::vector<PartitionOutcome>& outcomes, const AttributedGraph& original,
                            int n);

/// Protection-set summary of every vertex of g under params.
struct ProtectionSummary {
  std::vector<std::size_t> size;
  std::vector<std::size_t> sensitive;
  /// Members in the same connected component as the vertex.
  std::vector<std::size_t> same_component;
  std::vector<std::size_t> component;
  std::size_t component_count = 0;
};

ProtectionSummary protection_summary(const AttributedGraph& g, const Params& params);

/// Copies of each component needed so every vertex reaches |PS| >= k and a
/// sensitive fraction <= alpha once the copies exist.
std::vector<std::size_t> layer_counts(const ProtectionSummary& ps, const Params& params);

/// Appends layer copies to g (and log). Returns the largest layer count.
std::size_t apply_layers(AttributedGraph& g, EditLog& log, const ProtectionSummary& ps,
                         const std::vector<std::size_t>& counts, const std::vector<VertexId>& owners);

struct AnonymizeReport {
  std::size_t partitions = 0;
  std::size_t halo_instances = 0;
  std::size_t phase_a_edits = 0;
  bool phase_a_kept = true;
  std::size_t max_layers = 0;
  std::size_t fakes = 0;
  std::size_t duplicates = 0;
  std::size_t cost = 0;
  double seconds_partition = 0;
  double seconds_generation = 0;
  double seconds_merge = 0;
  double seconds_layering = 0;
  /// Host ids of halo copies, one entry per copy.
  std::vector<VertexId> border_instances;
};

struct AnonymizeResult {
  AttributedGraph graph;
  EditLog log;
  AnonymizeReport report;

  explicit AnonymizeResult(AttributedGraph g) : graph(std::move(g)) {}
};

/// Partition, anonymize each partition, merge, then layer. With
/// `sample` the partitioning comes from the cost-model search.
AnonymizeResult anonymize(const AttributedGraph& g, const Params& params, const CostSample* sample = nullptr);

}  // namespace ktsafe
