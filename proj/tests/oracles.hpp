#pragma once

// Reference implementations used only by tests. They trade speed for
// obviousness and share no code with the library kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "ktsafe/graph.hpp"

namespace oracle {

using namespace ktsafe;

// Half L1 over the union of supports.
inline double emd(const std::map<Code, double>& p, const std::map<Code, double>& q) {
  if (p.empty() && q.empty()) return 0.0;
  if (p.empty() || q.empty()) return 1.0;
  std::set<Code> keys;
  for (auto& [k, _] : p) keys.insert(k);
  for (auto& [k, _] : q) keys.insert(k);
  double s = 0;
  for (Code k : keys) {
    double a = p.count(k) ? p.at(k) : 0.0;
    double b = q.count(k) ? q.at(k) : 0.0;
    s += std::fabs(a - b);
  }
  return s / 2.0;
}

// Counting pdf straight from the host graph, independent of NeighborhoodSubgraph.
inline std::map<Code, double> pdf(const AttributedGraph& g, VertexId v, int L, std::size_t j) {
  std::map<VertexId, int> dist{{v, 0}};
  std::vector<VertexId> q{v};
  for (std::size_t h = 0; h < q.size(); ++h) {
    VertexId u = q[h];
    if (dist[u] == L) continue;
    for (VertexId w : g.neighbors(u))
      if (!dist.count(w)) {
        dist[w] = dist[u] + 1;
        q.push_back(w);
      }
  }
  std::map<Code, double> counts;
  double total = 0;
  for (auto [u, d] : dist) {
    Code c = g.vertex(u).attrs[j];
    if (c == kMissing) continue;
    counts[c] += 1;
    total += 1;
  }
  for (auto& [k, c] : counts) c /= total;
  return counts;
}

// ---------------------------------------------------------------------------
// Edit-sequence GED oracle for tiny rooted labelled graphs.

struct Small {
  std::vector<int> label;  // label[0] is the root and is always -1
  std::uint64_t edges = 0; // bit b*(b-1)/2 + a for a < b
};

inline int pair_bit(int a, int b) {
  if (a > b) std::swap(a, b);
  return b * (b - 1) / 2 + a;
}

inline bool has(const Small& s, int a, int b) { return (s.edges >> pair_bit(a, b)) & 1ULL; }

using Key = std::pair<std::vector<int>, std::uint64_t>;

inline Key canonical(const Small& s) {
  const int n = static_cast<int>(s.label.size());
  std::vector<int> deg(n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (has(s, a, b)) ++deg[a], ++deg[b];
  // Invariant classes: root alone, then (label, degree, neighbour signature).
  std::vector<std::vector<int>> inv(n);
  for (int a = 0; a < n; ++a) {
    std::vector<int> sig;
    for (int b = 0; b < n; ++b)
      if (b != a && has(s, a, b)) sig.push_back(s.label[b] * 64 + deg[b]);
    std::sort(sig.begin(), sig.end());
    inv[a] = {a == 0 ? -1 : 0, s.label[a], deg[a]};
    inv[a].insert(inv[a].end(), sig.begin(), sig.end());
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return inv[x] < inv[y]; });

  std::vector<std::pair<int, int>> groups;
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && inv[order[j]] == inv[order[i]]) ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  Key best{{}, ~0ULL};
  for (int i = 0; i < n; ++i) best.first.push_back(s.label[order[i]]);

  std::function<void(std::size_t)> rec = [&](std::size_t g) {
    if (g == groups.size()) {
      std::uint64_t m = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (has(s, order[i], order[j])) m |= 1ULL << pair_bit(i, j);
      best.second = std::min(best.second, m);
      return;
    }
    auto [lo, hi] = groups[g];
    std::sort(order.begin() + lo, order.begin() + hi);
    do {
      rec(g + 1);
    } while (std::next_permutation(order.begin() + lo, order.begin() + hi));
  };
  rec(0);
  return best;
}

inline Small from_key(const Key& k) { return Small{k.first, k.second}; }

inline Small from_ball(const NeighborhoodSubgraph& hn, const std::map<QiKey, int>& label_ids) {
  Small s;
  for (std::size_t i = 0; i < hn.size(); ++i) s.label.push_back(i == 0 ? -1 : label_ids.at(hn.labels[i]));
  for (auto [a, b] : hn.edges) s.edges |= 1ULL << pair_bit(a, b);
  return s;
}

/// All graphs reachable with <= depth insertions, keyed by canonical form,
/// valued by the fewest insertions needed.
inline std::map<Key, int> reach(const Small& start, int depth, const std::vector<int>& labels,
                                int max_vertices = 11) {
  std::map<Key, int> seen;
  std::vector<Small> frontier{from_key(canonical(start))};
  seen[canonical(start)] = 0;
  for (int d = 1; d <= depth; ++d) {
    std::vector<Small> next;
    for (const auto& s : frontier) {
      const int n = static_cast<int>(s.label.size());
      auto push = [&](const Small& t) {
        auto k = canonical(t);
        if (seen.emplace(k, d).second) next.push_back(from_key(k));
      };
      if (n < max_vertices)
        for (int l : labels) {
          Small t = s;
          t.label.push_back(l);
          push(t);
        }
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          if (!has(s, a, b)) {
            Small t = s;
            t.edges |= 1ULL << pair_bit(a, b);
            push(t);
          }
    }
    frontier = std::move(next);
  }
  return seen;
}

/// Fewest insertions (both sides) making the two graphs isomorphic, or
/// depth + 1 when none exists within `depth`.
inline int sequence_distance(const std::map<Key, int>& r1, const std::map<Key, int>& r2, int depth) {
  int best = depth + 1;
  const auto& small = r1.size() < r2.size() ? r1 : r2;
  const auto& big = r1.size() < r2.size() ? r2 : r1;
  for (auto& [k, d] : small) {
    auto it = big.find(k);
    if (it != big.end()) best = std::min(best, d + it->second);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Exhaustive mapping enumeration: builds the common supergraph explicitly for
// every root-preserving, label-preserving partial injection.

inline int mapping_distance(const NeighborhoodSubgraph& a, const NeighborhoodSubgraph& b) {
  const int n1 = static_cast<int>(a.size()), n2 = static_cast<int>(b.size());
  std::set<std::pair<int, int>> e1(a.edges.begin(), a.edges.end());
  std::set<std::pair<int, int>> e2(b.edges.begin(), b.edges.end());
  std::vector<int> m(n1, -1);
  std::vector<char> used(n2, 0);
  m[0] = 0;
  used[0] = 1;
  int best = 1 << 30;
  std::function<void(int)> rec = [&](int i) {
    if (i == n1) {
      // Supergraph vertices: b's vertices plus unmapped a-vertices (ids n2+i).
      std::set<std::pair<int, int>> h = e2;
      auto img = [&](int x) { return m[x] >= 0 ? m[x] : n2 + x; };
      for (auto [x, y] : e1) {
        int p = img(x), q = img(y);
        h.insert({std::min(p, q), std::max(p, q)});
      }
      int hv = n2;
      for (int x = 0; x < n1; ++x) hv += m[x] < 0;
      int cost = (hv - n1) + (static_cast<int>(h.size()) - static_cast<int>(e1.size())) + (hv - n2) +
                 (static_cast<int>(h.size()) - static_cast<int>(e2.size()));
      best = std::min(best, cost);
      return;
    }
    rec(i + 1);
    for (int y = 1; y < n2; ++y)
      if (!used[y] && b.labels[y] == a.labels[i]) {
        used[y] = 1;
        m[i] = y;
        rec(i + 1);
        m[i] = -1;
        used[y] = 0;
      }
  };
  rec(1);
  return best;
}

}  // namespace oracle
