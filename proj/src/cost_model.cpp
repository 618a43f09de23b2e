#include <utility>

#include "ktsafe/anonymizer.hpp"
#include "ktsafe/error.hpp"
#include "ktsafe/partition.hpp"

namespace ktsafe {

CostSample calibrate_cost_sample(const AttributedGraph& g, std::size_t sample_size, const Params& params,
                                 std::uint64_t seed) {
  if (g.vertex_count() == 0) throw CalibrationError("cannot calibrate on an empty graph");
  CostSample out(g.schema_ptr());
  out.graph = sample_subgraph(g, sample_size, seed);

  // The sample is anonymized with the plain partitioning; searching it
  // would need a sample of its own.
  Params p = params;
  p.partition_iterations = 0;
  const auto result = anonymize(out.graph, p);
  const std::size_t nv = out.graph.vertex_count();
  auto costs = attribute_costs(result.log, nv);
  out.c_mkt = std::move(costs.kt);
  out.c_mer = std::move(costs.merge);
  out.border.assign(nv, false);
  for (VertexId u : result.report.border_instances) out.border.at(u) = true;
  out.ball_sizes.resize(nv);
  for (VertexId u = 0; u < nv; ++u) out.ball_sizes[u] = ball_size(out.graph, u, params.n);
  return out;
}

}  // namespace ktsafe
