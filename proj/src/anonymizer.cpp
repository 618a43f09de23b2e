#include "ktsafe/anonymizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>

#include "ktsafe/distances.hpp"
#include "ktsafe/error.hpp"

namespace ktsafe {

namespace {

constexpr double kTolerance = 1e-12;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::size_t ceil_div_alpha(std::size_t sensitive, double alpha) {
  const double x = std::ceil(static_cast<double>(sensitive) / alpha - 1e-9);
  return x > 0 ? static_cast<std::size_t>(x) : 0;
}

// Most frequent non-missing code of attribute j over the ball, ties to the
// lowest code.
Code modal_code(const NeighborhoodSubgraph& ball, std::size_t j) {
  std::map<Code, std::size_t> counts;
  for (const auto& a : ball.attrs)
    if (a[j] != kMissing) counts[a[j]]++;
  Code best = kMissing;
  std::size_t best_count = 0;
  for (auto [code, c] : counts)
    if (c > best_count) best = code, best_count = c;
  return best;
}

bool same_ball(const NeighborhoodSubgraph& a, const NeighborhoodSubgraph& b) {
  return a.members == b.members && a.edges == b.edges && a.attrs == b.attrs;
}

}  // namespace

void Params::validate() const {
  if (k < 1) throw DomainError("k must be at least 1");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0, 1]");
  if (epsilon < 0) throw DomainError("epsilon must be non-negative");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  if (n < 1) throw DomainError("n must be at least 1");
  if (gamma < 1) throw DomainError("gamma must be at least 1");
  if (s < 2) throw DomainError("s must be at least 2");
  if (partition_iterations < 0) throw DomainError("partition iterations must be non-negative");
  if (pivot_count < 1 || pivot_iterations < 1) throw DomainError("pivot settings must be positive");
  if (workers < 1) throw DomainError("workers must be at least 1");
}

AttributedGraph EditLog::replay(const AttributedGraph& base) const {
  AttributedGraph g = base;
  for (const auto& e : entries) {
    if (e.kind == EditEntry::Kind::AddVertex) {
      if (g.add_vertex(e.attrs, e.origin) != e.u) throw ContractError("edit log vertex ids out of sequence");
    } else if (!g.add_edge(e.u, e.v)) {
      throw ContractError("edit log repeats an edge");
    }
  }
  return g;
}

CostAttribution attribute_costs(const EditLog& log, std::size_t original_count) {
  CostAttribution out;
  out.kt.assign(original_count, 0.0);
  out.merge.assign(original_count, 0.0);
  auto charge = [&](VertexId who, double w, bool merge) {
    if (who == kNoVertex || who >= original_count) return;
    (merge ? out.merge : out.kt)[who] += w;
  };
  for (const auto& e : log.entries) {
    if (e.co_owner != kNoVertex) {
      charge(e.owner, 0.5, e.merge);
      charge(e.co_owner, 0.5, e.merge);
    } else {
      charge(e.owner, 1.0, e.merge);
    }
  }
  return out;
}

Code fake_sensitive_code(const AttributedGraph& g) {
  const auto& schema = g.schema();
  const std::size_t d = schema.sensitive_index();
  std::vector<std::size_t> counts(schema.domain(d).size(), 0);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const Code c = g.attr(v, d);
    if (c != kMissing && !schema.sensitive_code(c)) counts[c]++;
  }
  Code best = schema.first_non_sensitive();
  if (best == kMissing) throw PolicyError("no non-sensitive value is available for fake vertices");
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] > counts[best]) best = static_cast<Code>(c);
  return best;
}

// --- WorkState -------------------------------------------------------------

WorkState::WorkState(AttributedGraph& graph, const Params& p) : g(graph), params(p) {
  ensure_size();
  fake_code = fake_sensitive_code(g);
}

void WorkState::ensure_size() {
  const std::size_t nv = g.vertex_count();
  frozen.resize(nv, 0);
  finalized.resize(nv, 0);
  halo.resize(nv, 0);
  dirty.resize(nv, 0);
}

void WorkState::freeze(VertexId v) {
  ensure_size();
  frozen.at(v) = 1;
}

VertexId WorkState::blocker(VertexId y) const {
  if (y < frozen.size() && frozen[y]) return y;
  const int depth = params.n - 1;
  if (depth <= 0) return kNoVertex;
  std::map<VertexId, int> seen{{y, 0}};
  std::deque<VertexId> q{y};
  while (!q.empty()) {
    const VertexId u = q.front();
    q.pop_front();
    const int h = seen[u];
    if (h == depth) continue;
    for (VertexId w : g.neighbors(u)) {
      if (seen.count(w)) continue;
      if (w < frozen.size() && frozen[w]) return w;
      seen[w] = h + 1;
      q.push_back(w);
    }
  }
  return kNoVertex;
}

bool WorkState::attachable(VertexId y) const { return blocker(y) == kNoVertex; }

VertexId WorkState::add_vertex(AttributeVector attrs, Origin origin, EditCause cause, bool merge, VertexId who) {
  const VertexId id = g.add_vertex(attrs, origin);
  EditEntry e;
  e.kind = EditEntry::Kind::AddVertex;
  e.u = id;
  e.attrs = std::move(attrs);
  e.origin = origin;
  e.cause = cause;
  e.owner = who;
  e.merge = merge;
  log.entries.push_back(std::move(e));
  ensure_size();
  return id;
}

void WorkState::add_edge(VertexId a, VertexId b, EditCause cause, bool merge, VertexId who) {
  if (!g.add_edge(a, b)) return;
  EditEntry e;
  e.kind = EditEntry::Kind::AddEdge;
  e.u = std::min(a, b);
  e.v = std::max(a, b);
  e.cause = cause;
  e.owner = who;
  e.merge = merge;
  log.entries.push_back(std::move(e));
}

void WorkState::rollback(std::size_t vertex_count, std::size_t log_size) {
  g.truncate(vertex_count);
  log.entries.resize(log_size);
  frozen.resize(vertex_count);
  finalized.resize(vertex_count);
  halo.resize(vertex_count);
  dirty.resize(vertex_count);
}

void WorkState::mark_dirty_around(VertexId y) {
  ensure_size();
  for (VertexId u : hop_neighborhood(g, y, std::max(0, params.n - 1)).members) dirty[u] = 1;
}

// --- per-vertex procedure ----------------------------------------------------

CandidateSet live_candidates(const WorkState& st, VertexId v) {
  const auto& g = st.g;
  const int n = st.params.n;
  const int eps = st.params.epsilon;
  const QiKey qi = g.qi_key(v);
  const auto ball = hop_neighborhood(g, v, n);

  std::vector<VertexId> pool;
  if (st.index) {
    pool = st.index->prefilter(ball, qi, g.vertex(v).attrs, eps);
    const std::size_t indexed = st.index->graph().vertex_count();
    for (VertexId u = 0; u < g.vertex_count(); ++u)
      if ((u >= indexed || st.dirty[u]) && g.qi_key(u) == qi) pool.push_back(u);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  } else {
    for (VertexId u = 0; u < g.vertex_count(); ++u)
      if (g.qi_key(u) == qi) pool.push_back(u);
  }

  CandidateSet out;
  for (VertexId u : pool) {
    if (u == v || u >= g.vertex_count() || st.halo[u] || g.qi_key(u) != qi) continue;
    if (ged_within(ball, hop_neighborhood(g, u, n), eps)) out.push_back(u);
  }
  return out;
}

VertexId duplicate_on_conflict(VertexId va, WorkState& st) {
  auto& g = st.g;
  const auto& schema = g.schema();
  const VertexId block = st.blocker(va);
  const bool merge = block != kNoVertex && block < st.halo.size() && st.halo[block];
  const VertexId who = merge ? block : st.owner;

  AttributeVector attrs = g.vertex(va).attrs;
  attrs.values[schema.sensitive_index()] = st.fake_code;
  const Origin& src = g.vertex(va).origin;
  Origin origin = src.kind == Origin::Kind::Original    ? Origin::duplicate_of(va)
                  : src.kind == Origin::Kind::Duplicate ? Origin::duplicate_of(src.source)
                                                        : Origin::fake();
  const std::vector<VertexId> nbrs(g.neighbors(va).begin(), g.neighbors(va).end());
  const VertexId dup = st.add_vertex(std::move(attrs), origin, EditCause::Duplicate, merge, who);
  for (VertexId w : nbrs)
    if (st.attachable(w)) st.add_edge(dup, w, EditCause::Duplicate, merge, who);
  return dup;
}

bool try_admit_candidate(VertexId v, VertexId vm, WorkState& st) {
  auto& g = st.g;
  const auto& schema = g.schema();
  const int n = st.params.n;
  const double t = st.params.t;
  if (vm < st.frozen.size() && st.frozen[vm]) return false;

  const std::size_t vertex_mark = g.vertex_count();
  const std::size_t log_mark = st.log.size();
  const std::size_t budget = 2 * static_cast<std::size_t>(st.params.epsilon);
  const auto hv = hop_neighborhood(g, v, n);
  std::vector<VertexId> attach_points;
  auto fail = [&] {
    st.rollback(vertex_mark, log_mark);
    return false;
  };

  for (int L = 1; L <= n; ++L) {
    const auto hvL = hv.restrict_to(L);
    for (;;) {
      const auto hm = hop_neighborhood(g, vm, n);
      const auto hmL = hm.restrict_to(L);

      // attribute with the largest EMD at this hop
      double worst = 0;
      std::size_t worst_j = 0;
      std::vector<double> pv, pm;
      for (std::size_t j = 0; j < schema.qi_count(); ++j) {
        auto a = attribute_pdf(hvL, j);
        auto b = attribute_pdf(hmL, j);
        const double d = emd(a, b);
        if (d > worst) worst = d, worst_j = j, pv = std::move(a), pm = std::move(b);
      }
      if (worst <= t + kTolerance) break;
      if (st.log.size() - log_mark + 2 > budget) return fail();

      Code patch = kMissing;
      double deficit = 0;
      for (std::size_t c = 0; c < pv.size(); ++c)
        if (pv[c] - pm[c] > deficit) deficit = pv[c] - pm[c], patch = static_cast<Code>(c);
      if (patch == kMissing) return fail();

      AttributeVector attrs;
      attrs.values.resize(schema.attribute_count(), kMissing);
      for (std::size_t j = 0; j < schema.qi_count(); ++j) attrs.values[j] = j == worst_j ? patch : modal_code(hvL, j);
      attrs.values[schema.sensitive_index()] = st.fake_code;

      VertexId y = kNoVertex;
      VertexId fallback = kNoVertex;
      for (std::size_t i = 0; i < hm.size(); ++i) {
        if (hm.hops[i] != L - 1) continue;
        if (fallback == kNoVertex) fallback = hm.members[i];
        if (st.attachable(hm.members[i])) {
          y = hm.members[i];
          break;
        }
      }
      if (y == kNoVertex) {
        if (L == 1 || fallback == kNoVertex) return fail();
        const VertexId dup = duplicate_on_conflict(fallback, st);
        if (hop_neighborhood(g, vm, n).hop_of(dup) != L - 1) return fail();
        y = dup;
      }
      const VertexId f = st.add_vertex(std::move(attrs), Origin::fake(), EditCause::Rehearsal, false, st.owner);
      st.add_edge(f, y, EditCause::Rehearsal, false, st.owner);
      attach_points.push_back(y);
      if (st.log.size() - log_mark > budget) return fail();
    }
  }

  const auto hm = hop_neighborhood(g, vm, n);
  if (!ged_within(hv, hm, st.params.epsilon) || !t_close(hv, hm, t)) return fail();

  for (VertexId u = static_cast<VertexId>(vertex_mark); u < g.vertex_count(); ++u) st.appended.push_back(u);
  for (VertexId y : attach_points) st.mark_dirty_around(y);
  return true;
}

ProtectionSet kt_safety_vertex(VertexId v, const CandidateSet& cs, WorkState& st) {
  auto& g = st.g;
  const auto& schema = g.schema();
  const Params& p = st.params;
  st.owner = v;
  st.freeze(v);

  ProtectionSet ps;
  ps.owner = v;
  ps.members.push_back(v);
  const auto hv = hop_neighborhood(g, v, p.n);
  for (VertexId u : cs)
    if (t_close(hv, hop_neighborhood(g, u, p.n), p.t)) ps.members.push_back(u);
  for (VertexId u : ps.members) st.freeze(u);

  if (st.rehearse && ps.members.size() < static_cast<std::size_t>(p.k)) {
    for (VertexId vm : cs) {
      if (std::find(ps.members.begin(), ps.members.end(), vm) != ps.members.end()) continue;
      if (try_admit_candidate(v, vm, st)) {
        ps.members.push_back(vm);
        st.freeze(vm);
      }
      if (ps.members.size() >= static_cast<std::size_t>(p.k)) break;
    }
  }

  for (VertexId u : ps.members)
    if (schema.sensitive_code(g.attr(u, schema.sensitive_index()))) ps.sensitive++;
  const std::size_t size = ps.members.size();
  const std::size_t needed = size < static_cast<std::size_t>(p.k) ? p.k - size : 0;
  const std::size_t target = ceil_div_alpha(ps.sensitive, p.alpha);
  const std::size_t x = target > size + needed ? target - size - needed : 0;
  ps.pending_fakes = needed + x;

  st.ensure_size();
  st.finalized[v] = 1;
  if (st.record_snapshots) st.snapshots.emplace_back(v, hop_neighborhood(g, v, p.n));
  return ps;
}

// --- partitions --------------------------------------------------------------

PartitionOutcome anonymize_partition(const PartitionedSubgraph& part, const Params& params, bool record_snapshots) {
  PartitionOutcome out(part.graph.schema_ptr());
  out.initial = part.graph;
  out.graph = part.graph;

  std::optional<KtTree> tree;
  const std::size_t nv = out.initial.vertex_count();
  // Beyond radius 1 pivot distances are budget-truncated and too loose to
  // prune, so they only add cost on top of the scan.
  if (params.use_index && params.n == 1 && nv >= 4 * static_cast<std::size_t>(params.pivot_count)) {
    auto pivots = select_pivots(out.initial, params.pivot_sample_size, params.pivot_iterations, params.pivot_count,
                                params.epsilon, params.n, params.seed);
    tree = build_kt_tree(out.initial, std::move(pivots), 64, params.n);
  }

  WorkState st(out.graph, params);
  st.record_snapshots = record_snapshots;
  if (tree) st.index = &*tree;
  for (VertexId i = 0; i < part.original_count(); ++i)
    if (part.is_halo(i)) st.halo[i] = st.frozen[i] = 1;

  std::vector<std::pair<std::size_t, VertexId>> order;
  for (VertexId i = 0; i < part.core_ids.size(); ++i) order.emplace_back(ball_size(out.graph, i, params.n), i);
  std::sort(order.begin(), order.end());

  for (auto [ball, v] : order) {
    (void)ball;
    out.protection_sets.push_back(kt_safety_vertex(v, live_candidates(st, v), st));
  }
  // appended vertices: stage 1 only, leftovers go to layering
  st.rehearse = false;
  std::vector<std::pair<std::size_t, VertexId>> tail;
  for (VertexId u : st.appended) tail.emplace_back(ball_size(out.graph, u, params.n), u);
  std::sort(tail.begin(), tail.end());
  for (auto [ball, v] : tail) {
    (void)ball;
    out.protection_sets.push_back(kt_safety_vertex(v, live_candidates(st, v), st));
  }

  out.log = std::move(st.log);
  out.snapshots = std::move(st.snapshots);
  return out;
}

MergeResult merge_subgraphs(const std::vector<PartitionedSubgraph>& parts, const std::vector<PartitionOutcome>& outcomes,
                            const AttributedGraph& original, int n) {
  if (parts.size() != outcomes.size()) throw ContractError("one outcome per partition required");
  MergeResult out(original);
  auto& g = out.graph;

  auto push_vertex = [&](VertexId id, const AttributeVector& attrs, Origin origin, EditCause cause, VertexId owner,
                         bool merge) {
    EditEntry e;
    e.kind = EditEntry::Kind::AddVertex;
    e.u = id;
    e.attrs = attrs;
    e.origin = origin;
    e.cause = cause;
    e.owner = owner;
    e.merge = merge;
    out.log.entries.push_back(std::move(e));
  };
  auto push_edge = [&](VertexId a, VertexId b, EditCause cause, VertexId owner, bool merge) {
    if (!g.add_edge(a, b)) return;
    EditEntry e;
    e.kind = EditEntry::Kind::AddEdge;
    e.u = std::min(a, b);
    e.v = std::max(a, b);
    e.cause = cause;
    e.owner = owner;
    e.merge = merge;
    out.log.entries.push_back(std::move(e));
  };

  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& part = parts[p];
    const auto& oc = outcomes[p];
    const std::size_t base = part.original_count();
    std::vector<VertexId> map(oc.graph.vertex_count(), kNoVertex);
    auto owner_of = [&](VertexId local) { return local < base ? part.to_host[local] : kNoVertex; };

    std::vector<VertexId> changed;
    for (VertexId i = 0; i < base; ++i) {
      if (!part.is_halo(i)) {
        map[i] = part.to_host[i];
        continue;
      }
      if (same_ball(hop_neighborhood(oc.initial, i, n), hop_neighborhood(oc.graph, i, n))) {
        map[i] = part.to_host[i];
        out.merged_halo++;
      } else {
        changed.push_back(i);
      }
    }
    for (VertexId i : changed) {
      const VertexId host = part.to_host[i];
      const auto& attrs = oc.graph.vertex(i).attrs;
      map[i] = g.add_vertex(attrs, Origin::duplicate_of(host));
      push_vertex(map[i], attrs, Origin::duplicate_of(host), EditCause::Duplicate, host, true);
      out.kept_halo++;
    }
    for (VertexId i : changed)
      for (VertexId w : oc.initial.neighbors(i)) push_edge(map[i], map[w], EditCause::Duplicate, part.to_host[i], true);

    for (const auto& e : oc.log.entries) {
      const VertexId owner = owner_of(e.owner);
      if (e.kind == EditEntry::Kind::AddVertex) {
        Origin origin = e.origin;
        if (origin.kind == Origin::Kind::Duplicate) origin.source = part.to_host.at(origin.source);
        map.at(e.u) = g.add_vertex(e.attrs, origin);
        push_vertex(map[e.u], e.attrs, origin, e.cause, owner, e.merge);
      } else {
        push_edge(map.at(e.u), map.at(e.v), e.cause, owner, e.merge);
      }
    }
  }
  return out;
}

// --- layering ----------------------------------------------------------------

ProtectionSummary protection_summary(const AttributedGraph& g, const Params& params) {
  const auto& schema = g.schema();
  const std::size_t nv = g.vertex_count();
  ProtectionSummary ps;
  ps.size.assign(nv, 1);
  ps.sensitive.assign(nv, 0);
  ps.same_component.assign(nv, 1);
  ps.component.assign(nv, static_cast<std::size_t>(-1));

  for (VertexId s = 0; s < nv; ++s) {
    if (ps.component[s] != static_cast<std::size_t>(-1)) continue;
    const std::size_t c = ps.component_count++;
    std::deque<VertexId> q{s};
    ps.component[s] = c;
    while (!q.empty()) {
      const VertexId u = q.front();
      q.pop_front();
      for (VertexId w : g.neighbors(u))
        if (ps.component[w] == static_cast<std::size_t>(-1)) ps.component[w] = c, q.push_back(w);
    }
  }

  std::vector<char> sens(nv, 0);
  for (VertexId v = 0; v < nv; ++v) sens[v] = schema.sensitive_code(g.attr(v, schema.sensitive_index())) ? 1 : 0;
  for (VertexId v = 0; v < nv; ++v) ps.sensitive[v] = sens[v];

  std::map<QiKey, std::vector<VertexId>> classes;
  for (VertexId v = 0; v < nv; ++v) classes[g.qi_key(v)].push_back(v);
  std::vector<NeighborhoodSubgraph> balls(nv);
  for (VertexId v = 0; v < nv; ++v)
    if (classes[g.qi_key(v)].size() > 1) balls[v] = hop_neighborhood(g, v, params.n);

  for (const auto& [qi, members] : classes) {
    (void)qi;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const VertexId u = members[a], w = members[b];
        if (!ged_within(balls[u], balls[w], params.epsilon) || !t_close(balls[u], balls[w], params.t)) continue;
        ps.size[u]++;
        ps.size[w]++;
        ps.sensitive[u] += sens[w];
        ps.sensitive[w] += sens[u];
        if (ps.component[u] == ps.component[w]) ps.same_component[u]++, ps.same_component[w]++;
      }
    }
  }
  return ps;
}

std::vector<std::size_t> layer_counts(const ProtectionSummary& ps, const Params& params) {
  std::vector<std::size_t> counts(ps.component_count, 0);
  for (std::size_t v = 0; v < ps.size.size(); ++v) {
    const std::size_t need = std::max<std::size_t>(params.k, ceil_div_alpha(ps.sensitive[v], params.alpha));
    if (need <= ps.size[v]) continue;
    const std::size_t sc = ps.same_component[v];
    const std::size_t m = (need - ps.size[v] + sc - 1) / sc;
    counts[ps.component[v]] = std::max(counts[ps.component[v]], m);
  }
  return counts;
}

std::size_t apply_layers(AttributedGraph& g, EditLog& log, const ProtectionSummary& ps,
                         const std::vector<std::size_t>& counts, const std::vector<VertexId>& owners) {
  const std::size_t nv = g.vertex_count();
  if (ps.component.size() != nv || owners.size() != nv) throw ContractError("summary does not match graph");
  const auto& schema = g.schema();
  const Code fake = fake_sensitive_code(g);

  std::vector<std::vector<VertexId>> comps(ps.component_count);
  for (VertexId v = 0; v < nv; ++v) comps[ps.component[v]].push_back(v);
  std::size_t max_layers = 0;
  std::vector<VertexId> copy(nv, kNoVertex);

  for (std::size_t c = 0; c < comps.size(); ++c) {
    max_layers = std::max(max_layers, counts[c]);
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (VertexId u : comps[c])
      for (VertexId w : g.neighbors(u))
        if (u < w) edges.emplace_back(u, w);
    for (std::size_t r = 0; r < counts[c]; ++r) {
      for (VertexId u : comps[c]) {
        AttributeVector attrs = g.vertex(u).attrs;
        attrs.values[schema.sensitive_index()] = fake;
        copy[u] = g.add_vertex(attrs, Origin::fake());
        EditEntry e;
        e.kind = EditEntry::Kind::AddVertex;
        e.u = copy[u];
        e.attrs = std::move(attrs);
        e.origin = Origin::fake();
        e.cause = EditCause::Layer;
        e.owner = owners[u];
        log.entries.push_back(std::move(e));
      }
      for (auto [u, w] : edges) {
        g.add_edge(copy[u], copy[w]);
        EditEntry e;
        e.kind = EditEntry::Kind::AddEdge;
        e.u = copy[u];
        e.v = copy[w];
        e.cause = EditCause::Layer;
        e.owner = owners[u];
        e.co_owner = owners[w];
        log.entries.push_back(std::move(e));
      }
    }
  }
  return max_layers;
}

// --- driver ------------------------------------------------------------------

AnonymizeResult anonymize(const AttributedGraph& g, const Params& params, const CostSample* sample) {
  params.validate();
  AnonymizeResult result(g);
  auto& rep = result.report;

  auto clock = std::chrono::steady_clock::now();
  std::vector<PartitionedSubgraph> parts =
      sample && params.partition_iterations > 0
          ? select_partitioning(g, params.gamma, params.s, params.partition_iterations, *sample, params.seed, params.n)
                .parts
          : partition_graph(g, params.gamma, params.s, params.n);
  rep.partitions = parts.size();
  for (const auto& p : parts) {
    rep.halo_instances += p.halo_ids.size();
    rep.border_instances.insert(rep.border_instances.end(), p.halo_ids.begin(), p.halo_ids.end());
  }
  rep.seconds_partition = seconds_since(clock);

  clock = std::chrono::steady_clock::now();
  std::vector<PartitionOutcome> outcomes;
  outcomes.reserve(parts.size());
  for (const auto& p : parts) outcomes.emplace_back(p.graph.schema_ptr());
  {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(parts.size());
    auto work = [&] {
      for (std::size_t i; (i = next++) < parts.size();) {
        try {
          outcomes[i] = anonymize_partition(parts[i], params);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const std::size_t threads = std::min(params.workers, parts.size());
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  rep.seconds_generation = seconds_since(clock);

  clock = std::chrono::steady_clock::now();
  MergeResult merged = merge_subgraphs(parts, outcomes, g, params.n);
  rep.phase_a_edits = merged.log.size();
  rep.seconds_merge = seconds_since(clock);

  clock = std::chrono::steady_clock::now();
  auto plan_cost = [&](const AttributedGraph& h, const ProtectionSummary& ps, const std::vector<std::size_t>& counts) {
    std::vector<std::size_t> weight(ps.component_count, 0);
    for (VertexId v = 0; v < h.vertex_count(); ++v) weight[ps.component[v]]++;
    for (auto [u, w] : h.edges()) {
      (void)w;
      weight[ps.component[u]]++;
    }
    std::size_t total = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) total += counts[c] * weight[c];
    return total;
  };

  ProtectionSummary ps_a = protection_summary(merged.graph, params);
  auto counts_a = layer_counts(ps_a, params);
  const std::size_t cost_a = merged.log.size() + plan_cost(merged.graph, ps_a, counts_a);

  bool keep_a = true;
  ProtectionSummary ps_0;
  std::vector<std::size_t> counts_0;
  if (!merged.log.empty()) {
    ps_0 = protection_summary(g, params);
    counts_0 = layer_counts(ps_0, params);
    keep_a = cost_a <= plan_cost(g, ps_0, counts_0);
  }
  rep.phase_a_kept = keep_a;

  std::vector<VertexId> owners;
  if (keep_a) {
    result.graph = std::move(merged.graph);
    result.log = std::move(merged.log);
    owners.resize(result.graph.vertex_count());
    std::iota(owners.begin(), owners.begin() + g.vertex_count(), 0);
    for (const auto& e : result.log.entries)
      if (e.kind == EditEntry::Kind::AddVertex) owners[e.u] = e.owner;
    rep.max_layers = apply_layers(result.graph, result.log, ps_a, counts_a, owners);
  } else {
    owners.resize(g.vertex_count());
    std::iota(owners.begin(), owners.end(), 0);
    rep.max_layers = apply_layers(result.graph, result.log, ps_0, counts_0, owners);
  }
  rep.seconds_layering = seconds_since(clock);

  for (const auto& e : result.log.entries) {
    if (e.kind != EditEntry::Kind::AddVertex) continue;
    if (e.origin.kind == Origin::Kind::Duplicate)
      rep.duplicates++;
    else
      rep.fakes++;
  }
  rep.cost = result.log.size();
  return result;
}

}  // namespace ktsafe
