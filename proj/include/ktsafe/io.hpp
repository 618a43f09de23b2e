#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ktsafe/graph.hpp"

namespace ktsafe {

inline constexpr const char* kSchemaHeader = "#ktsafe-schema v1";

struct LoadedGraph {
  AttributedGraph graph;
  /// File id of each vertex, indexed by internal id.
  std::vector<std::string> labels;

  explicit LoadedGraph(SchemaPtr schema) : graph(std::move(schema)) {}
};

/// Vertex file: `id<TAB>A1<TAB>...<TAB>Ad`, "-" for missing. Optional header
/// lines `#attr<TAB>NAME<TAB>v1,v2,...` and `#sensitive<TAB>lt<TAB>x` or
/// `#sensitive<TAB>in<TAB>a,b`. Undeclared domains are inferred from the data.
/// `policy` overrides the header.
LoadedGraph load_graph(const std::string& vertex_path, const std::string& edge_path,
                       const std::optional<SensitivityPolicy>& policy = std::nullopt);

/// Ids are relabeled by a permutation drawn from `seed`; origins are not
/// written.
void save_graph(const AttributedGraph& g, const std::string& vertex_path, const std::string& edge_path,
                std::uint64_t seed);

/// Header lines describing the schema.
std::string schema_header(const AttributeSchema& schema);

}  // namespace ktsafe
