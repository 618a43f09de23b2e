#include "ktsafe/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <thread>
#include <tuple>

#include "ktsafe/distances.hpp"
#include "ktsafe/error.hpp"

namespace ktsafe {

namespace {

constexpr double kTolerance = 1e-12;

bool sensitive(const AttributedGraph& g, VertexId v) {
  const auto& schema = g.schema();
  return schema.sensitive_code(g.attr(v, schema.sensitive_index()));
}

bool peers(const NeighborhoodSubgraph& a, const NeighborhoodSubgraph& b, const Params& p) {
  return ged_within(a, b, p.epsilon) && t_close(a, b, p.t);
}

bool acceptable(std::size_t size, std::size_t sens, const Params& p, std::string* reason) {
  if (size < static_cast<std::size_t>(p.k)) {
    if (reason) *reason = "protection set has " + std::to_string(size) + " members, fewer than k";
    return false;
  }
  if (static_cast<double>(sens) / static_cast<double>(size) > p.alpha + kTolerance) {
    if (reason) *reason = "sensitive fraction " + std::to_string(sens) + "/" + std::to_string(size) + " exceeds alpha";
    return false;
  }
  return true;
}

// Isomorphism invariant of a ball: size, edges and the sorted
// (hop, label, in-ball degree) multiset.
std::uint64_t ball_hash(const NeighborhoodSubgraph& b) {
  std::vector<std::tuple<int, QiKey, std::size_t>> items;
  items.reserve(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) items.emplace_back(b.hops[i], i == 0 ? 0 : b.labels[i], b.adjacency[i].size());
  std::sort(items.begin(), items.end());
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t x) {
    h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  mix(b.size());
  mix(b.edges.size());
  for (auto& [hop, label, deg] : items) {
    mix(static_cast<std::uint64_t>(hop));
    mix(label);
    mix(deg);
  }
  return h;
}

template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& body) {
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i; (i = next++) < count;) body(i);
  };
  const std::size_t threads = std::min(workers, count);
  if (threads <= 1) return run();
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(run);
  for (auto& t : pool) t.join();
}

}  // namespace

VertexVerdict verify_kt_safe_vertex(const AttributedGraph& g, VertexId v, const Params& params) {
  if (!g.contains(v)) throw LookupError("unknown vertex " + std::to_string(v));
  VertexVerdict out;
  out.vertex = v;
  const auto ball = hop_neighborhood(g, v, params.n);
  const QiKey qi = g.qi_key(v);
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    if (g.qi_key(u) != qi) continue;
    if (u == v || peers(ball, hop_neighborhood(g, u, params.n), params)) {
      out.witness.push_back(u);
      if (sensitive(g, u)) out.sensitive++;
    }
  }
  out.safe = acceptable(out.witness.size(), out.sensitive, params, &out.reason);
  return out;
}

GraphVerdict verify_kt_safe_graph(const AttributedGraph& g, const Params& params, std::size_t workers,
                                  std::size_t witness_limit) {
  params.validate();
  const std::size_t nv = g.vertex_count();
  GraphVerdict out;
  out.vertices = nv;
  if (nv == 0) return out;

  // Classes of vertices with isomorphic balls.
  std::vector<NeighborhoodSubgraph> reps;
  std::vector<std::size_t> class_size, class_sens;
  std::vector<std::size_t> class_of(nv);
  {
    std::vector<NeighborhoodSubgraph> balls(nv);
    std::vector<std::uint64_t> hashes(nv);
    parallel_for(nv, workers, [&](std::size_t v) {
      balls[v] = hop_neighborhood(g, static_cast<VertexId>(v), params.n);
      hashes[v] = ball_hash(balls[v]);
    });
    std::map<std::pair<QiKey, std::uint64_t>, std::vector<std::size_t>> buckets;
    for (VertexId v = 0; v < nv; ++v) {
      auto& bucket = buckets[{g.qi_key(v), hashes[v]}];
      std::size_t cls = reps.size();
      for (std::size_t r : bucket) {
        if (ged_within(balls[v], reps[r], 0)) {
          cls = r;
          break;
        }
      }
      if (cls == reps.size()) {
        bucket.push_back(cls);
        reps.push_back(std::move(balls[v]));
        class_size.push_back(0);
        class_sens.push_back(0);
      }
      class_of[v] = cls;
      class_size[cls]++;
      class_sens[cls] += sensitive(g, v) ? 1 : 0;
    }
  }

  std::map<QiKey, std::vector<std::size_t>> by_qi;
  std::vector<VertexId> rep_vertex(reps.size());
  for (VertexId v = nv; v-- > 0;) rep_vertex[class_of[v]] = v;
  for (std::size_t r = 0; r < reps.size(); ++r) by_qi[g.qi_key(rep_vertex[r])].push_back(r);

  std::vector<std::size_t> ps_size(class_size), ps_sens(class_sens);
  std::vector<std::vector<std::size_t>*> groups;
  for (auto& [qi, members] : by_qi) groups.push_back(&members);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> hits(groups.size());
  parallel_for(groups.size(), workers, [&](std::size_t gi) {
    const auto& m = *groups[gi];
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = a + 1; b < m.size(); ++b)
        if (peers(reps[m[a]], reps[m[b]], params)) hits[gi].emplace_back(m[a], m[b]);
  });
  for (const auto& list : hits)
    for (auto [a, b] : list) {
      ps_size[a] += class_size[b];
      ps_sens[a] += class_sens[b];
      ps_size[b] += class_size[a];
      ps_sens[b] += class_sens[a];
    }

  out.min_protection = nv;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    out.min_protection = std::min(out.min_protection, ps_size[r]);
    out.max_sensitive_fraction =
        std::max(out.max_sensitive_fraction, static_cast<double>(ps_sens[r]) / static_cast<double>(ps_size[r]));
    if (!acceptable(ps_size[r], ps_sens[r], params, nullptr)) out.unsafe_count += class_size[r];
  }
  out.safe = out.unsafe_count == 0;
  out.kt_safe_fraction = 1.0 - static_cast<double>(out.unsafe_count) / static_cast<double>(nv);
  for (VertexId v = 0; v < nv && out.failures.size() < witness_limit; ++v) {
    const std::size_t r = class_of[v];
    if (!acceptable(ps_size[r], ps_sens[r], params, nullptr)) out.failures.push_back(verify_kt_safe_vertex(g, v, params));
  }
  return out;
}

UtilityReport utility_report(const AttributedGraph& g, std::size_t spl_pairs, std::uint64_t seed) {
  if (spl_pairs < 1) throw DomainError("pair sample count must be at least 1");
  UtilityReport r;
  const std::size_t nv = g.vertex_count();
  r.vertices = nv;
  r.edges = g.edge_count();
  r.transitivity_histogram.assign(kTransitivityBins, 0);
  if (nv == 0) return r;

  double sum = 0, sq = 0;
  for (VertexId v = 0; v < nv; ++v) {
    const std::size_t d = g.degree(v);
    if (d >= r.degree_histogram.size()) r.degree_histogram.resize(d + 1, 0);
    r.degree_histogram[d]++;
    sum += static_cast<double>(d);
    sq += static_cast<double>(d) * static_cast<double>(d);
  }
  r.mean_degree = sum / static_cast<double>(nv);
  r.sd_degree = std::sqrt(std::max(0.0, sq / static_cast<double>(nv) - r.mean_degree * r.mean_degree));

  // local clustering; degree < 2 counts as 0
  double tsum = 0;
  for (VertexId v = 0; v < nv; ++v) {
    const auto nb = g.neighbors(v);
    if (nb.size() < 2) {
      r.transitivity_histogram[0]++;
      continue;
    }
    std::size_t tri = 0;
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b)
        if (g.has_edge(nb[a], nb[b])) tri++;
    const double c = static_cast<double>(tri) / (static_cast<double>(nb.size()) * (nb.size() - 1) / 2.0);
    tsum += c;
    r.transitivity_histogram[std::min(kTransitivityBins - 1, static_cast<std::size_t>(c * kTransitivityBins))]++;
  }
  r.mean_transitivity = tsum / static_cast<double>(nv);

  std::vector<std::size_t> comp(nv, static_cast<std::size_t>(-1));
  for (VertexId s = 0; s < nv; ++s) {
    if (comp[s] != static_cast<std::size_t>(-1)) continue;
    std::size_t size = 0;
    std::deque<VertexId> q{s};
    comp[s] = s;
    while (!q.empty()) {
      const VertexId u = q.front();
      q.pop_front();
      size++;
      for (VertexId w : g.neighbors(u))
        if (comp[w] == static_cast<std::size_t>(-1)) comp[w] = s, q.push_back(w);
    }
    r.largest_component = std::max(r.largest_component, size);
  }

  // Sampled shortest paths. One BFS serves several draws from the same source.
  constexpr std::size_t kDrawsPerSource = 10;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(nv - 1));
  std::vector<int> dist(nv);
  double spl_sum = 0;
  std::size_t draws = 0;
  while (r.spl_pairs < spl_pairs && draws < 10 * spl_pairs) {
    const VertexId s = pick(rng);
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::deque<VertexId> q{s};
    while (!q.empty()) {
      const VertexId u = q.front();
      q.pop_front();
      for (VertexId w : g.neighbors(u))
        if (dist[w] < 0) dist[w] = dist[u] + 1, q.push_back(w);
    }
    for (std::size_t i = 0; i < kDrawsPerSource && r.spl_pairs < spl_pairs && draws < 10 * spl_pairs; ++i) {
      const VertexId t = pick(rng);
      draws++;
      if (t == s || dist[t] < 0) {
        r.spl_dropped++;
        continue;
      }
      const auto d = static_cast<std::size_t>(dist[t]);
      if (d >= r.spl_histogram.size()) r.spl_histogram.resize(d + 1, 0);
      r.spl_histogram[d]++;
      spl_sum += static_cast<double>(d);
      r.spl_pairs++;
    }
  }
  r.mean_spl = r.spl_pairs ? spl_sum / static_cast<double>(r.spl_pairs) : 0.0;
  return r;
}

std::pair<UtilityReport, UtilityReport> utility_report(const AttributedGraph& original,
                                                      const AttributedGraph& anonymized, std::size_t spl_pairs,
                                                      std::uint64_t seed) {
  return {utility_report(original, spl_pairs, seed), utility_report(anonymized, spl_pairs, seed)};
}

}  // namespace ktsafe
