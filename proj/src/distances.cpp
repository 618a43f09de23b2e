#include "ktsafe/distances.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <unordered_map>

namespace ktsafe {

namespace {

constexpr double kTolerance = 1e-12;

// Branch-and-bound over partial injections of the smaller ball into the larger.
// Cost of a mapping M with c preserved edges: |V1|+|V2|-2|M| + |E1|+|E2|-2c.
class GedSearch {
 public:
  GedSearch(const NeighborhoodSubgraph& a, const NeighborhoodSubgraph& b, const GedOptions& opt)
      : opt_(opt) {
    const bool swap = a.size() > b.size() || (a.size() == b.size() && a.edges.size() > b.edges.size());
    const NeighborhoodSubgraph& g1 = swap ? b : a;
    const NeighborhoodSubgraph& g2 = swap ? a : b;
    n1_ = static_cast<int>(g1.size());
    n2_ = static_cast<int>(g2.size());
    total_ = n1_ + n2_ + static_cast<int>(g1.edges.size() + g2.edges.size());
    e2_ = static_cast<int>(g2.edges.size());

    // Label 0 is reserved for the two centers.
    std::unordered_map<QiKey, int> ids;
    auto label_id = [&](QiKey k) {
      auto [it, inserted] = ids.emplace(k, static_cast<int>(ids.size()) + 1);
      return it->second;
    };
    lab1_.resize(n1_);
    lab2_.resize(n2_);
    for (int i = 0; i < n1_; ++i) lab1_[i] = i == 0 ? 0 : label_id(g1.labels[i]);
    for (int i = 0; i < n2_; ++i) lab2_[i] = i == 0 ? 0 : label_id(g2.labels[i]);
    const int nl = static_cast<int>(ids.size()) + 1;

    rem1_.assign(nl, 0);
    avail2_.assign(nl, 0);
    for (int l : lab1_) ++rem1_[l];
    for (int l : lab2_) ++avail2_[l];
    by_label2_.resize(nl);
    for (int i = 0; i < n2_; ++i) by_label2_[lab2_[i]].push_back(i);
    vertex_bound_ = 0;
    for (int l = 0; l < nl; ++l) vertex_bound_ += std::min(rem1_[l], avail2_[l]);
    label_lb_ = 0;
    for (int l = 0; l < nl; ++l) label_lb_ += std::abs(rem1_[l] - avail2_[l]);

    adj2_.assign(static_cast<std::size_t>(n2_) * n2_, 0);
    for (auto [x, y] : g2.edges) {
      adj2_[static_cast<std::size_t>(x) * n2_ + y] = 1;
      adj2_[static_cast<std::size_t>(y) * n2_ + x] = 1;
    }
    adj2_list_ = g2.adjacency;

    back_.resize(n1_);
    suffix_edges_.assign(n1_ + 1, 0);
    for (auto [x, y] : g1.edges) {
      int hi = std::max(x, y), lo = std::min(x, y);
      back_[hi].push_back(lo);
      suffix_edges_[hi] += 1;
    }
    for (int i = n1_ - 1; i >= 0; --i) suffix_edges_[i] += suffix_edges_[i + 1];

    map1_.assign(n1_, -1);
    used2_.assign(n2_, 0);
  }

  int quick_lower_bound() const {
    return label_lb_ + std::abs(static_cast<int>(suffix_edges_[0]) - e2_);
  }

  GedResult run() {
    const int lb0 = quick_lower_bound();
    GedResult res;
    if (opt_.cap >= 0 && lb0 > opt_.cap) {
      // Nothing to search; report the trivial supergraph as the upper bound.
      res.distance = total_ - 2;
      res.lower_bound = lb0;
      res.exact = res.distance == lb0;
      return res;
    }
    best_ = greedy();
    if (best_ > lb0) {
      // Center-to-center is forced.
      used2_[0] = 1;
      map1_[0] = 0;
      rem1_[0]--;
      avail2_[0]--;
      // min(rem1,avail2) for label 0 drops from 1 to 0.
      vertex_bound_ -= 1;
      dfs(1, 2);
    }
    res.distance = best_;
    int lb = lb0;
    if (!aborted_) lb = (opt_.cap >= 0 && best_ > opt_.cap) ? std::max(lb0, opt_.cap + 1) : best_;
    res.lower_bound = std::min(lb, best_);
    res.exact = res.lower_bound == res.distance;
    return res;
  }

 private:
  int greedy() {
    std::vector<int> m(n1_, -1);
    std::vector<char> used(n2_, 0);
    m[0] = 0;
    used[0] = 1;
    int gain = 2;
    for (int i = 1; i < n1_; ++i) {
      int pick = -1, pick_gain = -1;
      for (int b : by_label2_[lab1_[i]]) {
        if (used[b]) continue;
        int e = 0;
        for (int j : back_[i])
          if (m[j] >= 0 && adj2_[static_cast<std::size_t>(m[j]) * n2_ + b]) ++e;
        if (e > pick_gain) {
          pick_gain = e;
          pick = b;
        }
      }
      if (pick >= 0) {
        m[i] = pick;
        used[pick] = 1;
        gain += 2 + 2 * pick_gain;
      }
    }
    return total_ - gain;
  }

  int open_e2() const { return e2_ - closed2_; }

  void set_used(int b) {
    used2_[b] = 1;
    for (int c : adj2_list_[b])
      if (used2_[c]) ++closed2_;
  }

  void clear_used(int b) {
    for (int c : adj2_list_[b])
      if (used2_[c]) --closed2_;
    used2_[b] = 0;
  }

  void dfs(int i, int gain) {
    if (aborted_) return;
    if (++nodes_ > opt_.node_budget) {
      aborted_ = true;
      return;
    }
    if (i == n1_) {
      best_ = std::min(best_, total_ - gain);
      return;
    }
    const int bound_gain = gain + 2 * vertex_bound_ + 2 * std::min(suffix_edges_[i], open_e2());
    const int bound_cost = total_ - bound_gain;
    if (bound_cost >= best_) return;
    if (opt_.cap >= 0 && bound_cost > opt_.cap) return;

    const int l = lab1_[i];
    // min(rem1,avail2) before processing i.
    const int before = std::min(rem1_[l], avail2_[l]);
    rem1_[l]--;

    std::vector<std::pair<int, int>> options;
    for (int b : by_label2_[l]) {
      if (used2_[b]) continue;
      int e = 0;
      for (int j : back_[i])
        if (map1_[j] >= 0 && adj2_[static_cast<std::size_t>(map1_[j]) * n2_ + b]) ++e;
      options.emplace_back(-e, b);
    }
    std::sort(options.begin(), options.end());

    for (auto [neg_e, b] : options) {
      avail2_[l]--;
      const int after = std::min(rem1_[l], avail2_[l]);
      vertex_bound_ += after - before;
      map1_[i] = b;
      set_used(b);
      dfs(i + 1, gain + 2 - 2 * neg_e);
      clear_used(b);
      map1_[i] = -1;
      vertex_bound_ -= after - before;
      avail2_[l]++;
      if (aborted_) break;
    }
    if (!aborted_) {
      const int after = std::min(rem1_[l], avail2_[l]);
      vertex_bound_ += after - before;
      dfs(i + 1, gain);
      vertex_bound_ -= after - before;
    }
    rem1_[l]++;
  }

  GedOptions opt_;
  int n1_ = 0, n2_ = 0, total_ = 0, e2_ = 0;
  std::vector<int> lab1_, lab2_;
  std::vector<int> rem1_, avail2_;
  std::vector<std::vector<int>> by_label2_;
  std::vector<unsigned char> adj2_;
  std::vector<std::vector<int>> adj2_list_;
  std::vector<std::vector<int>> back_;
  std::vector<int> suffix_edges_;
  std::vector<int> map1_;
  std::vector<char> used2_;
  int vertex_bound_ = 0;
  int label_lb_ = 0;
  int closed2_ = 0;
  int best_ = 0;
  std::size_t nodes_ = 0;
  bool aborted_ = false;
};

void require_same_radius(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2) {
  if (h1.radius != h2.radius)
    throw ContractError("neighborhoods have different radii (" + std::to_string(h1.radius) +
                        " vs " + std::to_string(h2.radius) + ")");
}

// pdf of attribute j over members within `max_hop` of the center.
void pdf_within(const NeighborhoodSubgraph& hn, std::size_t j, int max_hop, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < hn.members.size() && hn.hops[i] <= max_hop; ++i) {
    Code c = hn.attrs[i][j];
    if (c == kMissing) continue;
    out[c] += 1.0;
    ++total;
  }
  if (total)
    for (auto& p : out) p /= static_cast<double>(total);
}

}  // namespace

GedResult ged_neighborhood(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2) {
  GedOptions opt;
  opt.node_budget = h1.radius <= 1 ? kUnlimited : kGedNodeBudget;
  return ged_neighborhood(h1, h2, opt);
}

GedResult ged_neighborhood(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2,
                           const GedOptions& options) {
  require_same_radius(h1, h2);
  // Same local layout: the identity map is already an isomorphism. Common
  // for layered copies, whose balls are built in the same order.
  if (h1.size() == h2.size() && h1.edges == h2.edges &&
      std::equal(h1.labels.begin() + 1, h1.labels.end(), h2.labels.begin() + 1))
    return GedResult{};
  GedSearch search(h1, h2, options);
  return search.run();
}

bool ged_within(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2, int eps) {
  GedOptions opt;
  opt.cap = eps;
  opt.node_budget = h1.radius <= 1 ? kUnlimited : kGedNodeBudget;
  auto r = ged_neighborhood(h1, h2, opt);
  return r.distance <= eps;
}

int ged_lower_bound(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2) {
  require_same_radius(h1, h2);
  std::map<QiKey, int> diff;
  for (std::size_t i = 1; i < h1.size(); ++i) diff[h1.labels[i]]++;
  for (std::size_t i = 1; i < h2.size(); ++i) diff[h2.labels[i]]--;
  int lb = 0;
  for (auto& [k, c] : diff) lb += std::abs(c);
  lb += std::abs(static_cast<int>(h1.edges.size()) - static_cast<int>(h2.edges.size()));
  return lb;
}

double emd(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ContractError("pdfs over different domains");
  double sp = 0, sq = 0, l1 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sp += p[i];
    sq += q[i];
    l1 += std::abs(p[i] - q[i]);
  }
  const bool ep = sp == 0, eq = sq == 0;
  if (ep && eq) return 0.0;
  if (ep != eq) return 1.0;
  return kEmdFactor * l1;
}

double emd_attribute_distance(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2,
                              std::size_t j) {
  return emd(attribute_pdf(h1, j), attribute_pdf(h2, j));
}

bool t_close(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2, double t) {
  const auto& schema = *h1.schema;
  const int n = std::min(h1.radius, h2.radius);
  std::vector<double> p, q;
  for (int L = 1; L <= n; ++L) {
    for (std::size_t j = 0; j < schema.qi_count(); ++j) {
      p.assign(schema.domain(j).size(), 0.0);
      q.assign(schema.domain(j).size(), 0.0);
      pdf_within(h1, j, L, p);
      pdf_within(h2, j, L, q);
      if (emd(p, q) > t + kTolerance) return false;
    }
  }
  return true;
}

EditDelta edit_delta(const AttributedGraph& g, const AttributedGraph& g_prime) {
  EditDelta d;
  const std::size_t a = g.vertex_count(), b = g_prime.vertex_count();
  d.vertices_added = a > b ? a - b : b - a;
  auto e1 = g.edges();
  auto e2 = g_prime.edges();
  std::vector<std::pair<VertexId, VertexId>> sym;
  std::set_symmetric_difference(e1.begin(), e1.end(), e2.begin(), e2.end(), std::back_inserter(sym));
  d.edges_added = sym.size();
  return d;
}

std::size_t anonymization_cost(const AttributedGraph& g, const AttributedGraph& g_prime) {
  return edit_delta(g, g_prime).total();
}

long neighborhood_size_diff(const NeighborhoodSubgraph& h1, const NeighborhoodSubgraph& h2) {
  return static_cast<long>(h1.size()) - static_cast<long>(h2.size());
}

}  // namespace ktsafe
