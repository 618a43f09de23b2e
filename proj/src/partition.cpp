#include "ktsafe/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace ktsafe {

namespace {

constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

// Hop distances from `sources` restricted to vertices with in_set[v] set.
void bfs_within(const AttributedGraph& g, const std::vector<char>& in_set, VertexId source,
                std::vector<std::size_t>& dist) {
  std::vector<VertexId> queue{source};
  std::vector<std::size_t> d(g.vertex_count(), kInf);
  d[source] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    VertexId u = queue[h];
    for (VertexId w : g.neighbors(u))
      if (in_set[w] && d[w] == kInf) {
        d[w] = d[u] + 1;
        queue.push_back(w);
      }
  }
  for (VertexId v : queue) dist[v] = std::min(dist[v], d[v]);
}

}  // namespace

std::vector<std::vector<VertexId>> split_region(const AttributedGraph& g,
                                                const std::vector<VertexId>& input, std::size_t s) {
  if (s < 2) throw ContractError("branching count must be at least 2");
  std::vector<VertexId> vertices = input;
  std::sort(vertices.begin(), vertices.end());
  const std::size_t m = vertices.size();
  if (m <= 1) return {vertices};
  s = std::min(s, m);

  std::vector<char> in_set(g.vertex_count(), 0);
  for (VertexId v : vertices) in_set[v] = 1;

  // Farthest-first seeds; unreachable vertices count as infinitely far.
  std::vector<VertexId> seeds{vertices.front()};
  std::vector<std::size_t> dist(g.vertex_count(), kInf);
  bfs_within(g, in_set, seeds.back(), dist);
  while (seeds.size() < s) {
    VertexId pick = kNoVertex;
    std::size_t best = 0;
    for (VertexId v : vertices) {
      if (dist[v] == 0) continue;
      if (pick == kNoVertex || dist[v] > best) {
        best = dist[v];
        pick = v;
      }
    }
    if (pick == kNoVertex) break;
    seeds.push_back(pick);
    bfs_within(g, in_set, pick, dist);
  }

  const std::size_t cap = (m + s - 1) / s;
  std::vector<int> region(g.vertex_count(), -1);
  std::vector<std::vector<VertexId>> parts(seeds.size());
  std::vector<std::pair<int, VertexId>> queue;
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    region[seeds[r]] = static_cast<int>(r);
    parts[r].push_back(seeds[r]);
    queue.emplace_back(static_cast<int>(r), seeds[r]);
  }
  for (std::size_t h = 0; h < queue.size(); ++h) {
    auto [r, u] = queue[h];
    for (VertexId w : g.neighbors(u)) {
      if (!in_set[w] || region[w] >= 0 || parts[r].size() >= cap) continue;
      region[w] = r;
      parts[r].push_back(w);
      queue.emplace_back(r, w);
    }
  }
  for (VertexId v : vertices) {
    if (region[v] >= 0) continue;
    std::size_t smallest = 0;
    for (std::size_t r = 1; r < parts.size(); ++r)
      if (parts[r].size() < parts[smallest].size()) smallest = r;
    region[v] = static_cast<int>(smallest);
    parts[smallest].push_back(v);
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

PartitionedSubgraph make_partition(const AttributedGraph& g, std::vector<VertexId> core, int n,
                                   bool with_halo) {
  std::sort(core.begin(), core.end());
  PartitionedSubgraph part(g.schema_ptr());
  std::vector<int> local(g.vertex_count(), -1);
  for (VertexId v : core) local[v] = 0;

  std::vector<VertexId> halo;
  if (with_halo && n > 0) {
    std::vector<VertexId> frontier = core;
    for (int h = 1; h <= n && !frontier.empty(); ++h) {
      std::vector<VertexId> next;
      for (VertexId u : frontier)
        for (VertexId w : g.neighbors(u))
          if (local[w] < 0) {
            local[w] = 0;
            next.push_back(w);
          }
      halo.insert(halo.end(), next.begin(), next.end());
      frontier = std::move(next);
    }
    std::sort(halo.begin(), halo.end());
  }

  part.core_ids = core;
  part.halo_ids = halo;
  part.to_host = core;
  part.to_host.insert(part.to_host.end(), halo.begin(), halo.end());
  for (std::size_t i = 0; i < part.to_host.size(); ++i) {
    VertexId h = part.to_host[i];
    local[h] = static_cast<int>(i);
    part.graph.add_vertex(g.vertex(h).attrs, g.vertex(h).origin);
  }
  for (std::size_t i = 0; i < part.to_host.size(); ++i)
    for (VertexId w : g.neighbors(part.to_host[i]))
      if (local[w] > static_cast<int>(i)) part.graph.add_edge(static_cast<VertexId>(i), local[w]);
  return part;
}

std::vector<PartitionedSubgraph> partition_graph(const AttributedGraph& g, std::size_t gamma,
                                                 std::size_t s, int n) {
  if (gamma < 1) throw ContractError("gamma must be at least 1");
  if (s < 2) throw ContractError("branching count must be at least 2");
  std::vector<VertexId> all(g.vertex_count());
  std::iota(all.begin(), all.end(), 0);
  std::vector<PartitionedSubgraph> out;
  if (all.size() <= gamma) {
    out.push_back(make_partition(g, all, n, false));
    return out;
  }
  std::vector<std::vector<VertexId>> done;
  std::vector<std::vector<VertexId>> stack{all};
  while (!stack.empty()) {
    auto cur = std::move(stack.back());
    stack.pop_back();
    if (cur.size() <= gamma) {
      done.push_back(std::move(cur));
      continue;
    }
    auto pieces = split_region(g, cur, s);
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it)
      if (!it->empty()) stack.push_back(std::move(*it));
  }
  for (auto& core : done) out.push_back(make_partition(g, std::move(core), n, true));
  return out;
}

CostLookup::CostLookup(const CostSample& sample) {
  if (sample.graph.vertex_count() == 0 || sample.c_mkt.empty())
    throw CalibrationError("cost sample is empty");
  for (VertexId u = 0; u < sample.c_mkt.size(); ++u) {
    kt_.push_back({sample.ball_sizes.at(u), u, sample.c_mkt[u]});
    if (u < sample.border.size() && sample.border[u]) mer_.push_back({sample.ball_sizes[u], u, sample.c_mer.at(u)});
  }
  auto by_ball = [](const Entry& a, const Entry& b) { return std::tie(a.ball, a.id) < std::tie(b.ball, b.id); };
  std::sort(kt_.begin(), kt_.end(), by_ball);
  std::sort(mer_.begin(), mer_.end(), by_ball);
}

double CostLookup::nearest(const std::vector<Entry>& table, std::size_t ball) {
  if (table.empty()) return 0.0;
  // Closest ball size; among equally close entries the smallest sample id.
  auto it = std::lower_bound(table.begin(), table.end(), ball,
                             [](const Entry& e, std::size_t b) { return e.ball < b; });
  std::size_t best_gap = kInf;
  const Entry* best = nullptr;
  auto consider = [&](std::size_t size) {
    for (auto e = std::lower_bound(table.begin(), table.end(), size,
                                   [](const Entry& x, std::size_t b) { return x.ball < b; });
         e != table.end() && e->ball == size; ++e) {
      std::size_t gap = size > ball ? size - ball : ball - size;
      if (gap < best_gap || (gap == best_gap && e->id < best->id)) {
        best_gap = gap;
        best = &*e;
      }
    }
  };
  if (it != table.end()) consider(it->ball);
  if (it != table.begin()) consider(std::prev(it)->ball);
  return best->cost;
}

double CostLookup::kt_cost(std::size_t ball) const { return nearest(kt_, ball); }
double CostLookup::merge_cost(std::size_t ball) const { return nearest(mer_, ball); }

double estimate_partition_cost(const std::vector<PartitionedSubgraph>& parts, const CostSample& sample,
                               int n) {
  CostLookup lookup(sample);
  double total = 0.0;
  for (const auto& p : parts) {
    for (VertexId v = 0; v < p.original_count(); ++v) {
      std::size_t ball = ball_size(p.graph, v, n);
      total += p.is_core(v) ? lookup.kt_cost(ball) : lookup.merge_cost(ball);
    }
  }
  return total;
}

std::vector<std::vector<VertexId>> cluster_by_centers(const AttributedGraph& g,
                                                      std::vector<VertexId> centers, std::size_t gamma) {
  if (gamma < 1) throw ContractError("gamma must be at least 1");
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  std::vector<int> owner(g.vertex_count(), -1);
  std::vector<std::vector<VertexId>> clusters;
  std::vector<std::vector<VertexId>> frontier;
  for (VertexId c : centers) {
    owner[c] = static_cast<int>(clusters.size());
    clusters.push_back({c});
    frontier.push_back({c});
  }
  // One hop per round; lower center ids claim contested vertices first.
  auto grow = [&](std::size_t first) {
    bool active = true;
    while (active) {
      active = false;
      for (std::size_t c = first; c < clusters.size(); ++c) {
        std::vector<VertexId> next;
        for (VertexId u : frontier[c])
          for (VertexId w : g.neighbors(u))
            if (owner[w] < 0 && clusters[c].size() < gamma) {
              owner[w] = static_cast<int>(c);
              clusters[c].push_back(w);
              next.push_back(w);
            }
        frontier[c] = std::move(next);
        active = active || !frontier[c].empty();
      }
    }
  };
  grow(0);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (owner[v] >= 0) continue;
    owner[v] = static_cast<int>(clusters.size());
    clusters.push_back({v});
    frontier.push_back({v});
    grow(clusters.size() - 1);
  }
  for (auto& c : clusters) std::sort(c.begin(), c.end());
  return clusters;
}

namespace {

std::vector<PartitionedSubgraph> parts_from_clusters(const AttributedGraph& g,
                                                     std::vector<std::vector<VertexId>> clusters, int n) {
  std::vector<PartitionedSubgraph> parts;
  const bool halo = clusters.size() > 1;
  for (auto& c : clusters) parts.push_back(make_partition(g, std::move(c), n, halo));
  return parts;
}

}  // namespace

PartitionSelection select_partitioning(const AttributedGraph& g, std::size_t gamma, std::size_t s,
                                       int ite, const CostSample& sample, std::uint64_t seed, int n) {
  if (ite < 1) throw ContractError("iteration count must be at least 1");
  if (gamma < 1 || s < 2) throw ContractError("gamma must be >= 1 and s >= 2");
  PartitionSelection result;
  const std::size_t nv = g.vertex_count();
  if (nv <= gamma) {
    result.parts = partition_graph(g, gamma, s, n);
    result.best_cost_history.assign(1, estimate_partition_cost(result.parts, sample, n));
    return result;
  }
  // Smallest power of s whose share fits gamma.
  std::size_t count = 1;
  while ((nv + count - 1) / count > gamma) count *= s;
  count = std::min(count, nv);

  std::mt19937_64 rng(seed);
  std::vector<VertexId> ids(nv);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<VertexId> centers(ids.begin(), ids.begin() + count);

  result.centers = centers;
  result.parts = parts_from_clusters(g, cluster_by_centers(g, centers, gamma), n);
  double best = estimate_partition_cost(result.parts, sample, n);
  result.best_cost_history.push_back(best);

  for (int it = 2; it <= ite; ++it) {
    if (count == nv) {
      result.best_cost_history.push_back(best);
      continue;
    }
    auto trial = result.centers;
    std::vector<char> is_center(nv, 0);
    for (VertexId c : trial) is_center[c] = 1;
    std::uniform_int_distribution<std::size_t> slot(0, trial.size() - 1);
    std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(nv - 1));
    std::size_t i = slot(rng);
    VertexId replacement = pick(rng);
    while (is_center[replacement]) replacement = pick(rng);
    trial[i] = replacement;
    auto parts = parts_from_clusters(g, cluster_by_centers(g, trial, gamma), n);
    double cost = estimate_partition_cost(parts, sample, n);
    if (cost < best) {
      best = cost;
      result.parts = std::move(parts);
      result.centers = std::move(trial);
    }
    result.best_cost_history.push_back(best);
  }
  return result;
}

AttributedGraph sample_subgraph(const AttributedGraph& g, std::size_t sample_size, std::uint64_t seed) {
  if (sample_size < 1) throw ContractError("sample size must be at least 1");
  const std::size_t nv = g.vertex_count();
  if (sample_size >= nv) return g;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(nv - 1));
  std::vector<char> taken(nv, 0);
  std::vector<VertexId> chosen;
  while (chosen.size() < sample_size) {
    VertexId start = pick(rng);
    while (taken[start]) start = pick(rng);
    std::vector<VertexId> queue{start};
    taken[start] = 1;
    chosen.push_back(start);
    for (std::size_t h = 0; h < queue.size() && chosen.size() < sample_size; ++h)
      for (VertexId w : g.neighbors(queue[h])) {
        if (taken[w] || chosen.size() >= sample_size) continue;
        taken[w] = 1;
        chosen.push_back(w);
        queue.push_back(w);
      }
  }
  std::sort(chosen.begin(), chosen.end());
  return make_partition(g, chosen, 0, false).graph;
}

}  // namespace ktsafe
