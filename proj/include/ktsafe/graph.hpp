#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ktsafe/error.hpp"

namespace ktsafe {

using VertexId = std::uint32_t;
/// Index into an attribute's domain list; kMissing renders as "-".
using Code = std::int32_t;
/// Mixed-radix encoding of a vertex's quasi-identifier.
using QiKey = std::uint64_t;

inline constexpr Code kMissing = -1;
inline constexpr VertexId kNoVertex = static_cast<VertexId>(-1);

/// Which codes of the sensitive attribute count as sensitive.
struct SensitivityPolicy {
  enum class Kind { ValueSet, LessThan };

  Kind kind = Kind::ValueSet;
  /// Sensitive tokens (ValueSet).
  std::vector<std::string> values;
  /// Tokens strictly below this one are sensitive (LessThan). Numeric tokens
  /// compare numerically, anything else by domain order.
  std::string threshold;

  static SensitivityPolicy value_set(std::vector<std::string> tokens);
  static SensitivityPolicy less_than(std::string threshold);
  /// Parses "lt:<token>" or "in:<tok>,<tok>,...".
  static SensitivityPolicy parse(std::string_view text);
  std::string to_string() const;
};

class AttributeSchema {
 public:
  AttributeSchema(std::vector<std::string> names,
                  std::vector<std::vector<std::string>> domains,
                  SensitivityPolicy policy);

  std::size_t attribute_count() const { return domains_.size(); }
  std::size_t qi_count() const { return domains_.size() - 1; }
  std::size_t sensitive_index() const { return domains_.size() - 1; }

  const std::string& name(std::size_t j) const { return names_.at(j); }
  const std::vector<std::string>& domain(std::size_t j) const { return domains_.at(j); }
  const SensitivityPolicy& policy() const { return policy_; }

  /// Code of `token` in dom(A_j); "-" maps to kMissing.
  Code code_of(std::size_t j, std::string_view token) const;
  /// Token for a code, "-" for kMissing.
  const std::string& token(std::size_t j, Code code) const;
  bool in_domain(std::size_t j, Code code) const;

  /// Sensitivity of a code of A_d. Throws DomainError outside the domain.
  bool sensitive_code(Code code) const;
  /// First non-sensitive code of A_d, or kMissing if every code is sensitive.
  Code first_non_sensitive() const;

  /// Radix used by QiKey for attribute j (domain size + 1 for MISSING).
  QiKey qi_radix(std::size_t j) const { return radix_.at(j); }

  bool operator==(const AttributeSchema& other) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> domains_;
  SensitivityPolicy policy_;
  std::vector<bool> sensitive_;
  std::vector<QiKey> radix_;
};

using SchemaPtr = std::shared_ptr<const AttributeSchema>;

struct AttributeVector {
  std::vector<Code> values;

  Code operator[](std::size_t j) const { return values[j]; }
  std::size_t size() const { return values.size(); }
  bool operator==(const AttributeVector&) const = default;
};

/// Provenance of a vertex. Never serialized into a released graph.
struct Origin {
  enum class Kind : std::uint8_t { Original, Duplicate, Fake };

  Kind kind = Kind::Original;
  VertexId source = kNoVertex;

  static Origin original() { return {}; }
  static Origin duplicate_of(VertexId v) { return {Kind::Duplicate, v}; }
  static Origin fake() { return {Kind::Fake, kNoVertex}; }
  bool operator==(const Origin&) const = default;
};

struct Vertex {
  VertexId id = kNoVertex;
  AttributeVector attrs;
  Origin origin;
};

/// Undirected attributed graph with dense vertex ids 0..n-1 and set-semantics
/// edges. Vertices and edges are only ever added; `truncate` exists so that
/// rehearsed insertions can be rolled back.
class AttributedGraph {
 public:
  explicit AttributedGraph(SchemaPtr schema);

  const AttributeSchema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }

  VertexId add_vertex(AttributeVector attrs, Origin origin = Origin::original());
  /// Inserts {u,v}. Returns false when the edge already existed.
  bool add_edge(VertexId u, VertexId v);
  bool has_edge(VertexId u, VertexId v) const;

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool contains(VertexId v) const { return v < vertices_.size(); }

  const Vertex& vertex(VertexId v) const;
  std::span<const VertexId> neighbors(VertexId v) const;
  std::size_t degree(VertexId v) const { return neighbors(v).size(); }
  QiKey qi_key(VertexId v) const;
  Code attr(VertexId v, std::size_t j) const { return vertex(v).attrs[j]; }

  /// All edges as (u,v) with u < v, sorted.
  std::vector<std::pair<VertexId, VertexId>> edges() const;

  /// Drops every vertex with id >= count and all incident edges.
  void truncate(std::size_t count);

  /// Throws ContractError when an internal invariant is broken.
  void check_invariants() const;

 private:
  void require(VertexId v) const;

  SchemaPtr schema_;
  std::vector<Vertex> vertices_;
  std::vector<std::vector<VertexId>> adjacency_;  // sorted
  std::vector<QiKey> qi_keys_;
  std::size_t edge_count_ = 0;
};

QiKey compute_qi_key(const AttributeSchema& schema, const AttributeVector& attrs);

/// Induced <= radius hop ball around a center; members ordered by (hop, id),
/// so index 0 is always the center.
struct NeighborhoodSubgraph {
  VertexId center = kNoVertex;
  int radius = 0;
  std::vector<VertexId> members;
  std::vector<int> hops;
  std::vector<AttributeVector> attrs;
  std::vector<QiKey> labels;
  /// Local index pairs (a < b), sorted.
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adjacency;
  SchemaPtr schema;

  std::size_t size() const { return members.size(); }
  /// Hop of a member, or -1 when v is not in the ball.
  int hop_of(VertexId v) const;
  /// Sub-ball of radius L <= radius (same center).
  NeighborhoodSubgraph restrict_to(int L) const;
};

NeighborhoodSubgraph hop_neighborhood(const AttributedGraph& g, VertexId v, int n);

/// Number of vertices within n hops of v (including v).
std::size_t ball_size(const AttributedGraph& g, VertexId v, int n);

bool is_sensitive(Code code, const AttributeSchema& schema);

/// Normalized frequency of every value of quasi-identifier attribute j in the
/// ball. MISSING is excluded; entries are indexed by code.
std::vector<double> attribute_pdf(const NeighborhoodSubgraph& hn, std::size_t j,
                                  bool include_center = true);

/// Sparse view of attribute_pdf, keyed by code, zero entries omitted.
std::map<Code, double> attribute_pdf_map(const NeighborhoodSubgraph& hn, std::size_t j,
                                         bool include_center = true);

}  // namespace ktsafe
