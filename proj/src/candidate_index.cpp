#include "ktsafe/candidate_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ktsafe {

namespace {

GedInterval index_distance(const NeighborhoodSubgraph& a, const NeighborhoodSubgraph& b) {
  GedOptions opt;
  opt.node_budget = kIndexGedBudget;
  return to_interval(ged_neighborhood(a, b, opt));
}

}  // namespace

bool pivot_prunable(int d_vp, int d_mp, int eps) { return std::abs(d_vp - d_mp) > eps; }

bool pivot_prunable(const GedInterval& vp, const GedInterval& mp, int eps) {
  const int gap = std::max(vp.lo - mp.hi, mp.lo - vp.hi);
  return gap > eps;
}

PivotSet::PivotSet(const AttributedGraph& g, std::vector<VertexId> pivots, int n)
    : graph_(&g), n_(n), pivots_(std::move(pivots)) {
  for (std::size_t i = 0; i < pivots_.size(); ++i) {
    if (std::find(pivots_.begin(), pivots_.begin() + i, pivots_[i]) != pivots_.begin() + i)
      throw ContractError("duplicate pivot " + std::to_string(pivots_[i]));
    balls_.push_back(hop_neighborhood(g, pivots_[i], n));
  }
}

PivotSet::PivotSet(const PivotSet& other) { *this = other; }

PivotSet& PivotSet::operator=(const PivotSet& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  graph_ = other.graph_;
  n_ = other.n_;
  pivots_ = other.pivots_;
  balls_ = other.balls_;
  cache_ = other.cache_;
  return *this;
}

GedInterval PivotSet::distance(std::size_t i, VertexId v) const {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find({i, v});
    if (it != cache_.end()) return it->second;
  }
  if (!graph_) throw IndexError("pivot set has no host graph");
  GedInterval d = index_distance(balls_.at(i), hop_neighborhood(*graph_, v, n_));
  std::lock_guard lock(mutex_);
  // Insert-once: a racing writer computed the same value.
  return cache_.emplace(std::make_pair(i, v), d).first->second;
}

GedInterval PivotSet::distance(std::size_t i, const NeighborhoodSubgraph& ball) const {
  return index_distance(balls_.at(i), ball);
}

std::size_t PivotSet::cached_count() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

PivotSelection select_pivots_traced(const AttributedGraph& g, std::size_t sample_size, int iter,
                                    int pivot_count, int eps, int n, std::uint64_t seed) {
  if (pivot_count < 1) throw ContractError("pivot count must be at least 1");
  if (iter < 1) throw ContractError("iteration count must be at least 1");
  PivotSelection out;
  const std::size_t nv = g.vertex_count();
  if (nv == 0) return out;
  const std::size_t pc = std::min<std::size_t>(pivot_count, nv);

  std::mt19937_64 rng(seed);
  std::vector<VertexId> ids(nv);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<VertexId> sample(ids.begin(), ids.begin() + std::min(sample_size, nv));
  std::sort(sample.begin(), sample.end());
  std::vector<NeighborhoodSubgraph> sample_balls;
  for (VertexId v : sample) sample_balls.push_back(hop_neighborhood(g, v, n));

  std::map<VertexId, std::vector<GedInterval>> dist;
  auto distances_of = [&](VertexId p) -> const std::vector<GedInterval>& {
    auto it = dist.find(p);
    if (it != dist.end()) return it->second;
    auto pb = hop_neighborhood(g, p, n);
    std::vector<GedInterval> row;
    for (const auto& b : sample_balls) row.push_back(index_distance(pb, b));
    return dist.emplace(p, std::move(row)).first->second;
  };
  auto score = [&](const std::vector<VertexId>& pivots) {
    std::vector<const std::vector<GedInterval>*> rows;
    for (VertexId p : pivots) rows.push_back(&distances_of(p));
    std::size_t pruned = 0;
    for (std::size_t a = 0; a < sample.size(); ++a)
      for (std::size_t b = 0; b < sample.size(); ++b) {
        if (a == b) continue;
        for (auto* row : rows)
          if (pivot_prunable((*row)[a], (*row)[b], eps)) {
            ++pruned;
            break;
          }
      }
    return pruned;
  };

  std::vector<VertexId> best(ids.begin(), ids.begin() + pc);
  std::size_t best_score = score(best);
  out.pruned_history.push_back(best_score);
  std::uniform_int_distribution<std::size_t> slot(0, pc - 1);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(nv - 1));
  for (int it = 2; it <= iter; ++it) {
    if (pc == nv) {
      out.pruned_history.push_back(best_score);
      continue;
    }
    auto trial = best;
    VertexId repl = pick(rng);
    while (std::find(trial.begin(), trial.end(), repl) != trial.end()) repl = pick(rng);
    trial[slot(rng)] = repl;
    std::size_t s = score(trial);
    if (s > best_score) {
      best_score = s;
      best = std::move(trial);
    }
    out.pruned_history.push_back(best_score);
  }
  out.pivots = PivotSet(g, best, n);
  return out;
}

PivotSet select_pivots(const AttributedGraph& g, std::size_t sample_size, int iter, int pivot_count,
                       int eps, int n, std::uint64_t seed) {
  return select_pivots_traced(g, sample_size, iter, pivot_count, eps, n, seed).pivots;
}

std::size_t attribute_bit(Code code, std::size_t j, std::size_t domain_size, std::size_t B) {
  const std::uint64_t a = code == kMissing ? domain_size : static_cast<std::uint64_t>(code);
  return static_cast<std::size_t>((a * 1000003ULL + j * 8191ULL) % B);
}

namespace {

std::vector<std::size_t> bits_of(const AttributeSchema& schema, const AttributeVector& attrs, std::size_t B) {
  std::vector<std::size_t> bits;
  for (std::size_t j = 0; j < schema.qi_count(); ++j)
    bits.push_back(attribute_bit(attrs[j], j, schema.domain(j).size(), B));
  return bits;
}

void or_into(KtTreeNode& dst, const KtTreeNode& src) {
  for (std::size_t j = 0; j < dst.bit_vectors.size(); ++j)
    for (std::size_t w = 0; w < dst.bit_vectors[j].size(); ++w) dst.bit_vectors[j][w] |= src.bit_vectors[j][w];
}

}  // namespace

bool KtTree::bits_match(const KtTreeNode& node, const std::vector<std::size_t>& bits) const {
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (!node.bit_set(j, bits[j])) return false;
  return true;
}

KtTree build_kt_tree(const AttributedGraph& g, PivotSet pivots, std::size_t B, int n) {
  if (B < 8) throw ContractError("bit-vector width must be at least 8");
  if (g.vertex_count() == 0) throw IndexError("cannot index an empty graph");
  KtTree tree;
  tree.B_ = B;
  tree.n_ = n;
  tree.graph_ = &g;
  tree.pivots_ = std::move(pivots);
  const auto& schema = g.schema();
  const std::size_t words = (B + 63) / 64;
  const std::size_t np = tree.pivots_.size();
  const bool pruning = np > 0;

  auto blank = [&] {
    KtTreeNode node;
    node.bit_vectors.assign(schema.qi_count(), std::vector<std::uint64_t>(words, 0));
    return node;
  };
  // Members of every node's subtree, for interval computation.
  std::vector<std::vector<VertexId>> subtree;
  auto set_interval = [&](KtTreeNode& node, const std::vector<VertexId>& members) {
    if (!pruning) return;
    node.pivot_id = tree.pivots_.pivots()[node.pivot];
    bool first = true;
    for (VertexId m : members) {
      auto d = tree.pivots_.distance(node.pivot, m);
      if (first) node.ged_interval = d;
      node.ged_interval.lo = std::min(node.ged_interval.lo, d.lo);
      node.ged_interval.hi = std::max(node.ged_interval.hi, d.hi);
      first = false;
    }
  };

  // Leaves: one per distinct quasi-identifier.
  std::map<QiKey, std::vector<VertexId>> groups;
  for (VertexId v = 0; v < g.vertex_count(); ++v) groups[g.qi_key(v)].push_back(v);
  std::vector<int> level;
  for (auto& [qi, members] : groups) {
    KtTreeNode leaf = blank();
    leaf.qi = qi;
    leaf.member_ids = members;
    auto bits = bits_of(schema, g.vertex(members.front()).attrs, B);
    for (std::size_t j = 0; j < bits.size(); ++j) leaf.bit_vectors[j][bits[j] / 64] |= 1ULL << (bits[j] % 64);
    if (pruning) {
      int best_hi = 0;
      for (std::size_t i = 0; i < np; ++i) {
        int hi = std::numeric_limits<int>::max();
        for (VertexId m : members) hi = std::min(hi, tree.pivots_.distance(i, m).hi);
        if (i == 0 || hi < best_hi) {
          best_hi = hi;
          leaf.pivot = i;
        }
      }
    }
    set_interval(leaf, members);
    level.push_back(static_cast<int>(tree.nodes_.size()));
    tree.nodes_.push_back(std::move(leaf));
    subtree.push_back(members);
  }

  auto make_parent = [&](const std::vector<int>& children, std::size_t pivot) {
    KtTreeNode node = blank();
    node.children = children;
    node.pivot = pivot;
    std::vector<VertexId> members;
    for (int c : children) {
      or_into(node, tree.nodes_[c]);
      members.insert(members.end(), subtree[c].begin(), subtree[c].end());
    }
    std::sort(members.begin(), members.end());
    set_interval(node, members);
    tree.nodes_.push_back(std::move(node));
    subtree.push_back(std::move(members));
    return static_cast<int>(tree.nodes_.size()) - 1;
  };

  if (!pruning) {
    tree.root_ = make_parent(level, 0);
    return tree;
  }

  // Pivot level: leaves grouped by their nearest pivot.
  std::vector<int> pivot_level;
  for (std::size_t i = 0; i < np; ++i) {
    std::vector<int> children;
    for (int leaf : level)
      if (tree.nodes_[leaf].pivot == i) children.push_back(leaf);
    if (!children.empty()) pivot_level.push_back(make_parent(children, i));
  }
  level = std::move(pivot_level);

  // Supernodes around ceil(sqrt(count)) evenly spread centers until one root.
  while (level.size() > 1) {
    const std::size_t count = level.size();
    std::size_t groups_n = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    groups_n = std::clamp<std::size_t>(groups_n, 1, count - 1);
    std::vector<int> centers;
    for (std::size_t c = 0; c < groups_n; ++c) centers.push_back(level[c * count / groups_n]);
    std::vector<std::vector<int>> members(groups_n);
    for (int node : level) {
      std::size_t best = 0;
      int best_d = std::numeric_limits<int>::max();
      for (std::size_t c = 0; c < groups_n; ++c) {
        int d = node == centers[c]
                    ? -1
                    : index_distance(tree.pivots_.ball(tree.nodes_[node].pivot),
                                     tree.pivots_.ball(tree.nodes_[centers[c]].pivot))
                          .hi;
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      members[best].push_back(node);
    }
    std::vector<int> next;
    for (std::size_t c = 0; c < groups_n; ++c)
      if (!members[c].empty()) next.push_back(make_parent(members[c], tree.nodes_[centers[c]].pivot));
    level = std::move(next);
  }
  tree.root_ = level.front();
  return tree;
}

std::vector<VertexId> KtTree::prefilter(const NeighborhoodSubgraph& ball, QiKey qi, const AttributeVector& attrs,
                                        int eps) const {
  std::vector<VertexId> out;
  if (root_ < 0) return out;
  const auto bits = bits_of(*ball.schema, attrs, B_);
  std::vector<std::optional<GedInterval>> to_pivot(pivots_.size());
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const KtTreeNode& node = nodes_[stack.back()];
    stack.pop_back();
    if (!bits_match(node, bits)) continue;
    if (node.pivot_id != kNoVertex) {
      auto& d = to_pivot[node.pivot];
      if (!d) d = pivots_.distance(node.pivot, ball);
      if (pivot_prunable(*d, node.ged_interval, eps)) continue;
    }
    if (node.leaf()) {
      if (node.qi == qi) out.insert(out.end(), node.member_ids.begin(), node.member_ids.end());
      continue;
    }
    for (int c : node.children) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool KtTree::reachable(VertexId v, const AttributeVector& attrs) const {
  if (root_ < 0) return false;
  const auto bits = bits_of(graph_->schema(), attrs, B_);
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const KtTreeNode& node = nodes_[stack.back()];
    stack.pop_back();
    if (!bits_match(node, bits)) continue;
    if (node.leaf()) {
      if (std::binary_search(node.member_ids.begin(), node.member_ids.end(), v)) return true;
      continue;
    }
    for (int c : node.children) stack.push_back(c);
  }
  return false;
}

CandidateSet kt_tree_candidates(const KtTree& tree, VertexId v, int eps, int n) {
  if (n != tree.radius()) throw ContractError("query radius differs from the index radius");
  const AttributedGraph& g = tree.graph();
  auto ball = hop_neighborhood(g, v, n);
  CandidateSet out;
  for (VertexId u : tree.prefilter(ball, g.qi_key(v), g.vertex(v).attrs, eps)) {
    if (u == v) continue;
    if (ged_within(ball, hop_neighborhood(g, u, n), eps)) out.push_back(u);
  }
  return out;
}

CandidateSet initial_candidate(const AttributedGraph& g, VertexId v, int eps, int n, const KtTree* index) {
  if (!g.contains(v)) throw LookupError("unknown vertex " + std::to_string(v));
  if (index) {
    if (&index->graph() != &g) throw IndexError("index was built over a different graph");
    return kt_tree_candidates(*index, v, eps, n);
  }
  auto ball = hop_neighborhood(g, v, n);
  const QiKey qi = g.qi_key(v);
  CandidateSet out;
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    if (u == v || g.qi_key(u) != qi) continue;
    if (ged_within(ball, hop_neighborhood(g, u, n), eps)) out.push_back(u);
  }
  return out;
}

}  // namespace ktsafe
