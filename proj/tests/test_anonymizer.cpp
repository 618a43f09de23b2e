#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "ktsafe/anonymizer.hpp"
#include "ktsafe/distances.hpp"
#include "ktsafe/error.hpp"
#include "ktsafe/verifier.hpp"

using namespace ktsafe;

namespace {

Params fig1_params() {
  Params p;
  p.k = 2;
  p.t = 0;
  p.epsilon = 0;
  p.n = 1;
  p.alpha = 0.5;
  p.gamma = 3;
  p.s = 2;
  return p;
}

bool same_graph(const AttributedGraph& a, const AttributedGraph& b) {
  if (a.vertex_count() != b.vertex_count() || a.edges() != b.edges()) return false;
  for (VertexId v = 0; v < a.vertex_count(); ++v)
    if (!(a.vertex(v).attrs == b.vertex(v).attrs) || !(a.vertex(v).origin == b.vertex(v).origin)) return false;
  return true;
}

// Star with center QI 0 and the given leaf QI codes, all non-sensitive.
void add_star(AttributedGraph& g, const std::vector<Code>& leaves) {
  const VertexId c = g.add_vertex(AttributeVector{{0, 3}});
  for (Code l : leaves) g.add_edge(c, g.add_vertex(AttributeVector{{l, 3}}));
}

void check_run(const AttributedGraph& g, const Params& p) {
  auto r = anonymize(g, p);
  CHECK(verify_kt_safe_graph(r.graph, p).safe);
  CHECK(anonymization_cost(g, r.graph) == r.log.size());
  CHECK(same_graph(r.log.replay(g), r.graph));
  CHECK(r.report.cost == r.log.size());
  for (VertexId v = 0; v < g.vertex_count(); ++v) CHECK(r.graph.vertex(v).attrs == g.vertex(v).attrs);
  auto costs = attribute_costs(r.log, g.vertex_count());
  double total = 0;
  for (std::size_t i = 0; i < costs.kt.size(); ++i) total += costs.kt[i] + costs.merge[i];
  CHECK(total == doctest::Approx(static_cast<double>(r.log.size())));
}

}  // namespace

TEST_CASE("parameter validation") {
  Params p;
  CHECK_NOTHROW(p.validate());
  auto bad = [](auto mutate) {
    Params q;
    mutate(q);
    return q;
  };
  CHECK_THROWS_AS(bad([](Params& q) { q.k = 0; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](Params& q) { q.t = 1.5; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](Params& q) { q.alpha = 0; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](Params& q) { q.epsilon = -1; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](Params& q) { q.n = 0; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](Params& q) { q.s = 1; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](Params& q) { q.workers = 0; }).validate(), DomainError);
}

TEST_CASE("figure 1 end to end") {
  auto g = fixtures::fig1();
  auto p = fig1_params();
  auto r = anonymize(g, p);
  CHECK(r.report.partitions == 2);
  CHECK(r.report.halo_instances == 2);
  CHECK(verify_kt_safe_graph(r.graph, p).safe);
  CHECK(anonymization_cost(g, r.graph) == r.log.size());
  CHECK(same_graph(r.log.replay(g), r.graph));
}

TEST_CASE("fake sensitive value is the modal non-sensitive one") {
  auto g = fixtures::random_graph({.vertices = 30, .sensitive_prob = 0.0}, 3);
  std::map<Code, int> counts;
  for (VertexId v = 0; v < g.vertex_count(); ++v) counts[g.attr(v, 1)]++;
  Code best = 2;
  for (auto [c, n] : counts)
    if (n > counts[best]) best = c;
  CHECK(fake_sensitive_code(g) == best);

  auto all = std::make_shared<AttributeSchema>(std::vector<std::string>{"Q", "S"},
                                               std::vector<std::vector<std::string>>{{"a"}, {"0", "1"}},
                                               SensitivityPolicy::less_than("5"));
  AttributedGraph h(all);
  h.add_vertex(AttributeVector{{0, 0}});
  CHECK_THROWS_AS(fake_sensitive_code(h), PolicyError);
}

TEST_CASE("admission adds a patching fake and rolls back on failure") {
  AttributedGraph g(fixtures::small_schema(1, 3));
  add_star(g, {0, 1});  // v = 0
  add_star(g, {0, 0});  // vm = 3
  Params p;
  p.k = 2;
  p.t = 0.2;
  p.epsilon = 2;
  p.alpha = 1.0;

  {
    AttributedGraph work = g;
    WorkState st(work, p);
    st.owner = 0;
    st.freeze(0);
    CHECK(try_admit_candidate(0, 3, st));
    CHECK(work.vertex_count() == g.vertex_count() + 1);
    CHECK(st.log.size() == 2);
    const VertexId f = static_cast<VertexId>(g.vertex_count());
    CHECK(work.has_edge(3, f));
    CHECK(work.attr(f, 0) == 1);
    CHECK(work.vertex(f).origin.kind == Origin::Kind::Fake);
    CHECK_FALSE(work.schema().sensitive_code(work.attr(f, 1)));
    CHECK(t_close(hop_neighborhood(work, 0, 1), hop_neighborhood(work, 3, 1), p.t));
    CHECK(st.appended == std::vector<VertexId>{f});
  }
  {
    p.epsilon = 0;  // no budget
    AttributedGraph work = g;
    WorkState st(work, p);
    st.owner = 0;
    st.freeze(0);
    CHECK_FALSE(try_admit_candidate(0, 3, st));
    CHECK(same_graph(work, g));
    CHECK(st.log.empty());
  }
  {
    p.epsilon = 2;
    AttributedGraph work = g;
    WorkState st(work, p);
    st.owner = 0;
    st.freeze(0);
    st.freeze(3);  // L = 1 needs v_m itself
    CHECK_FALSE(try_admit_candidate(0, 3, st));
    CHECK(same_graph(work, g));
  }
}

TEST_CASE("duplicate copies only unblocked edges") {
  auto g = fixtures::fig1();
  Params p = fig1_params();
  WorkState st(g, p);
  st.owner = 1;
  st.freeze(2);
  const std::size_t before = g.vertex_count();
  const VertexId d = duplicate_on_conflict(0, st);
  CHECK(d == before);
  CHECK(g.vertex(d).origin == Origin::duplicate_of(0));
  CHECK(g.attr(d, 0) == g.attr(0, 0));
  CHECK_FALSE(g.schema().sensitive_code(g.attr(d, 1)));
  CHECK(g.has_edge(d, 1));
  CHECK(g.has_edge(d, 3));
  CHECK_FALSE(g.has_edge(d, 2));
  CHECK(st.log.size() == 3);
  for (const auto& e : st.log.entries) {
    CHECK(e.cause == EditCause::Duplicate);
    CHECK(e.owner == 1);
    CHECK_FALSE(e.merge);
  }

  // blocked by a halo vertex: charged to that vertex's merge cost
  auto h = fixtures::fig1();
  p.n = 2;
  WorkState st2(h, p);
  st2.owner = 4;
  st2.halo[3] = st2.frozen[3] = 1;
  const VertexId d2 = duplicate_on_conflict(0, st2);
  CHECK_FALSE(h.has_edge(d2, 3));
  CHECK(st2.log.entries.front().merge);
  CHECK(st2.log.entries.front().owner == 3);
}

TEST_CASE("a duplicate of a duplicate points at the original") {
  auto g = fixtures::fig1();
  Params p = fig1_params();
  WorkState st(g, p);
  st.owner = 5;
  const VertexId d1 = duplicate_on_conflict(0, st);
  const VertexId d2 = duplicate_on_conflict(d1, st);
  CHECK(g.vertex(d2).origin == Origin::duplicate_of(0));
  auto h = fixtures::fig2();
  WorkState st2(h, p);
  st2.owner = 5;
  CHECK(h.vertex(duplicate_on_conflict(6, st2)).origin.kind == Origin::Kind::Fake);
}

TEST_CASE("finalized balls never change afterwards") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto g = fixtures::random_graph({.vertices = 40, .edge_prob = 0.08, .qi_attrs = 1, .qi_values = 2}, seed);
    Params p;
    p.k = 4;
    p.t = 0.3;
    p.epsilon = 3;
    p.alpha = 0.5;
    p.n = 1 + static_cast<int>(seed % 2);
    p.use_index = seed % 3 == 0;
    p.pivot_iterations = 5;
    auto part = make_partition(g, [&] {
      std::vector<VertexId> all(g.vertex_count());
      for (VertexId v = 0; v < all.size(); ++v) all[v] = v;
      return all;
    }(), p.n, false);
    auto out = anonymize_partition(part, p, true);
    CHECK(out.snapshots.size() == out.protection_sets.size());
    for (const auto& [v, ball] : out.snapshots) {
      auto now = hop_neighborhood(out.graph, v, p.n);
      CHECK(now.members == ball.members);
      CHECK(now.edges == ball.edges);
    }
    for (const auto& ps : out.protection_sets) {
      CHECK(ps.members.front() == ps.owner);
      std::set<VertexId> uniq(ps.members.begin(), ps.members.end());
      CHECK(uniq.size() == ps.members.size());
    }
  }
}

TEST_CASE("residual demand") {
  // one sensitive vertex alone: needs k - 1 peers and 1/alpha total
  AttributedGraph g(fixtures::small_schema(1, 2));
  g.add_vertex(AttributeVector{{0, 0}});
  Params p;
  p.k = 3;
  p.alpha = 0.2;
  p.epsilon = 0;
  p.t = 0;
  WorkState st(g, p);
  auto ps = kt_safety_vertex(0, {}, st);
  CHECK(ps.members == std::vector<VertexId>{0});
  CHECK(ps.sensitive == 1);
  CHECK(ps.pending_fakes == 2 + 2);  // N_needed = 2, x = 5 - 3
  CHECK(st.finalized[0]);

  // |PS| = 10, N_sens = 4, alpha = 0.2 -> 10 more
  AttributedGraph h(fixtures::small_schema(1, 2));
  for (int i = 0; i < 10; ++i) h.add_vertex(AttributeVector{{0, i < 4 ? 0 : 3}});
  p.k = 10;
  WorkState st2(h, p);
  auto ps2 = kt_safety_vertex(0, {1, 2, 3, 4, 5, 6, 7, 8, 9}, st2);
  CHECK(ps2.members.size() == 10);
  CHECK(ps2.pending_fakes == 10);
}

TEST_CASE("layer counts") {
  AttributedGraph g(fixtures::small_schema(1, 2));
  g.add_vertex(AttributeVector{{0, 3}});
  g.add_vertex(AttributeVector{{1, 0}});
  g.add_vertex(AttributeVector{{1, 3}});
  g.add_edge(1, 2);
  Params p;
  p.k = 3;
  p.alpha = 0.25;
  p.t = 1;
  p.epsilon = 10;
  auto ps = protection_summary(g, p);
  CHECK(ps.component_count == 2);
  CHECK(ps.size == std::vector<std::size_t>{1, 2, 2});
  CHECK(ps.sensitive == std::vector<std::size_t>{0, 1, 1});
  auto counts = layer_counts(ps, p);
  CHECK(counts[ps.component[0]] == 2);
  CHECK(counts[ps.component[1]] == 1);  // 1/alpha = 4 members, two per copy

  EditLog log;
  std::vector<VertexId> owners{0, 1, 2};
  auto h = g;
  CHECK(apply_layers(h, log, ps, counts, owners) == 2);
  CHECK(h.vertex_count() == 3 + 2 + 2);
  CHECK(h.edge_count() == 2);
  CHECK(log.size() == 2 + 3);
  CHECK(verify_kt_safe_graph(h, p).safe);
  auto costs = attribute_costs(log, 3);
  CHECK(costs.kt[0] == doctest::Approx(2));
  CHECK(costs.kt[1] == doctest::Approx(1.5));
  CHECK(costs.kt[2] == doctest::Approx(1.5));
}

TEST_CASE("merge collapses untouched halos and replays") {
  auto g = fixtures::fig1();
  auto p = fig1_params();
  auto parts = partition_graph(g, p.gamma, p.s, p.n);
  std::vector<PartitionOutcome> outs;
  for (const auto& part : parts) outs.push_back(anonymize_partition(part, p));
  auto merged = merge_subgraphs(parts, outs, g, p.n);
  CHECK(merged.merged_halo == 2);
  CHECK(merged.kept_halo == 0);
  CHECK(same_graph(merged.log.replay(g), merged.graph));

  // a changed halo is kept as a duplicate of its original
  auto outs2 = outs;
  auto& o = outs2[0];
  const VertexId halo = static_cast<VertexId>(parts[0].core_ids.size());
  const VertexId f = o.graph.add_vertex(AttributeVector{{0, 0}}, Origin::fake());
  o.graph.add_edge(halo, f);
  EditEntry ev;
  ev.kind = EditEntry::Kind::AddVertex;
  ev.u = f;
  ev.attrs = AttributeVector{{0, 0}};
  ev.origin = Origin::fake();
  ev.owner = 0;
  EditEntry ee;
  ee.kind = EditEntry::Kind::AddEdge;
  ee.u = halo;
  ee.v = f;
  ee.owner = 0;
  o.log.entries = {ev, ee};
  auto merged2 = merge_subgraphs(parts, outs2, g, p.n);
  CHECK(merged2.kept_halo == 1);
  CHECK(merged2.graph.vertex(6).origin == Origin::duplicate_of(parts[0].halo_ids[0]));
  CHECK(same_graph(merged2.log.replay(g), merged2.graph));
}

TEST_CASE("random graphs across parameters") {
  int run = 0;
  for (int k : {2, 5}) {
    for (double alpha : {0.2, 0.5}) {
      for (int n : {1, 2}) {
        for (std::size_t gamma : {15, 1000}) {
          ++run;
          auto g = fixtures::random_graph({.vertices = 45, .edge_prob = 0.07, .qi_attrs = 1, .qi_values = 3}, run);
          Params p;
          p.k = k;
          p.alpha = alpha;
          p.n = n;
          p.gamma = gamma;
          p.s = 2;
          p.t = 0.3;
          p.epsilon = 3;
          p.pivot_iterations = 5;
          p.workers = 1 + run % 3;
          check_run(g, p);
        }
      }
    }
  }
}

TEST_CASE("deterministic output") {
  auto g = fixtures::random_graph({.vertices = 60, .edge_prob = 0.06, .qi_attrs = 2, .qi_values = 2}, 9);
  Params p;
  p.k = 4;
  p.gamma = 20;
  p.s = 3;
  p.t = 0.3;
  p.epsilon = 3;
  p.pivot_iterations = 5;
  p.workers = 4;
  auto a = anonymize(g, p);
  p.workers = 1;
  auto b = anonymize(g, p);
  CHECK(same_graph(a.graph, b.graph));
  CHECK(a.log.size() == b.log.size());
}

TEST_CASE("plan choice never costs more than layering alone") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto g = fixtures::random_graph({.vertices = 40, .edge_prob = 0.05, .qi_attrs = 1, .qi_values = 2}, seed);
    Params p;
    p.k = 3;
    p.t = 0.3;
    p.epsilon = 4;
    p.alpha = 0.5;
    auto r = anonymize(g, p);
    auto ps = protection_summary(g, p);
    auto counts = layer_counts(ps, p);
    EditLog log;
    auto h = g;
    std::vector<VertexId> owners(g.vertex_count());
    for (VertexId v = 0; v < owners.size(); ++v) owners[v] = v;
    apply_layers(h, log, ps, counts, owners);
    CHECK(r.log.size() <= log.size());
  }
}
