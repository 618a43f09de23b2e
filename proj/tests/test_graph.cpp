#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"

using namespace ktsafe;

TEST_CASE("fig1 one-hop ball of v1") {
  auto g = fixtures::fig1();
  auto hn = hop_neighborhood(g, 0, 1);
  CHECK(hn.members == std::vector<VertexId>{0, 1, 2, 3});
  CHECK(hn.hops == std::vector<int>{0, 1, 1, 1});
  std::vector<std::string> a1;
  for (std::size_t i = 1; i < hn.size(); ++i) a1.push_back(g.schema().token(0, hn.attrs[i][0]));
  std::sort(a1.begin(), a1.end());
  CHECK(a1 == std::vector<std::string>{"0.4", "0.5", "0.5"});
  // v1-v2, v1-v3, v1-v4, v2-v3 are induced
  CHECK(hn.edges.size() == 4);
}

TEST_CASE("radius zero is the center alone") {
  auto g = fixtures::fig1();
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    auto hn = hop_neighborhood(g, v, 0);
    CHECK(hn.members == std::vector<VertexId>{v});
    CHECK(hn.edges.empty());
  }
}

TEST_CASE("path induction") {
  AttributedGraph g(fixtures::small_schema(1, 2));
  for (int i = 0; i < 3; ++i) g.add_vertex(AttributeVector{{0, 2}});
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  auto hn = hop_neighborhood(g, 0, 2);
  CHECK(hn.members == std::vector<VertexId>{0, 1, 2});
  CHECK(hn.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
  CHECK(hn.restrict_to(1).members == std::vector<VertexId>{0, 1});
}

TEST_CASE("unknown vertex is a lookup error") {
  auto g = fixtures::fig1();
  CHECK_THROWS_AS(hop_neighborhood(g, 99, 1), LookupError);
}

TEST_CASE("sensitivity policy") {
  auto g = fixtures::fig1();
  const auto& s = g.schema();
  CHECK(is_sensitive(s.code_of(1, "0.1"), s));
  CHECK_FALSE(is_sensitive(s.code_of(1, "0.7"), s));
  CHECK_FALSE(is_sensitive(kMissing, s));
  CHECK_THROWS_AS(is_sensitive(42, s), DomainError);

  AttributeSchema vs({"Q", "S"}, {{"a"}, {"x", "y", "z"}}, SensitivityPolicy::parse("in:y,z"));
  CHECK_FALSE(vs.sensitive_code(0));
  CHECK(vs.sensitive_code(1));
  CHECK(vs.sensitive_code(2));
  CHECK(vs.first_non_sensitive() == 0);

  AttributeSchema ordered({"Q", "S"}, {{"a"}, {"low", "mid", "high"}}, SensitivityPolicy::parse("lt:mid"));
  CHECK(ordered.sensitive_code(0));
  CHECK_FALSE(ordered.sensitive_code(1));
  CHECK_THROWS_AS(SensitivityPolicy::parse("gt:3"), PolicyError);
}

TEST_CASE("schema invariants") {
  CHECK_THROWS_AS(AttributeSchema({"S"}, {{"a"}}, SensitivityPolicy::value_set({})), DomainError);
  CHECK_THROWS_AS(AttributeSchema({"Q", "S"}, {{}, {"a"}}, SensitivityPolicy::value_set({})), DomainError);
  CHECK_THROWS_AS(AttributeSchema({"Q", "S"}, {{"a", "a"}, {"b"}}, SensitivityPolicy::value_set({})),
                  DomainError);
}

TEST_CASE("attribute pdf") {
  auto g = fixtures::fig1();
  auto pdf = attribute_pdf_map(hop_neighborhood(g, 0, 1), 0);
  const auto& s = g.schema();
  REQUIRE(pdf.size() == 2);
  CHECK(pdf[s.code_of(0, "0.4")] == doctest::Approx(0.25));
  CHECK(pdf[s.code_of(0, "0.5")] == doctest::Approx(0.75));

  auto single = attribute_pdf_map(hop_neighborhood(g, 4, 0), 0);
  CHECK(single.size() == 1);
  CHECK(single.begin()->second == 1.0);

  // excluding the center leaves the three neighbours
  auto nc = attribute_pdf_map(hop_neighborhood(g, 0, 1), 0, false);
  CHECK(nc[s.code_of(0, "0.4")] == doctest::Approx(1.0 / 3));

  CHECK_THROWS_AS(attribute_pdf(hop_neighborhood(g, 0, 1), 1), PolicyError);
}

TEST_CASE("symmetric pdf") {
  AttributedGraph g(fixtures::small_schema(1, 2));
  for (Code c : {0, 0, 1, 1}) g.add_vertex(AttributeVector{{c, 3}});
  for (VertexId v = 1; v < 4; ++v) g.add_edge(0, v);
  auto pdf = attribute_pdf(hop_neighborhood(g, 0, 1), 0);
  CHECK(pdf[0] == 0.5);
  CHECK(pdf[1] == 0.5);
}

TEST_CASE("missing values are excluded from the pdf") {
  AttributedGraph g(fixtures::small_schema(1, 2));
  g.add_vertex(AttributeVector{{kMissing, 3}});
  g.add_vertex(AttributeVector{{1, 3}});
  g.add_edge(0, 1);
  auto pdf = attribute_pdf(hop_neighborhood(g, 0, 1), 0);
  CHECK(pdf[0] == 0.0);
  CHECK(pdf[1] == 1.0);
}

TEST_CASE("graph mutation keeps invariants") {
  auto g = fixtures::fig1();
  CHECK_FALSE(g.add_edge(1, 0));
  CHECK(g.edge_count() == 7);
  CHECK_THROWS_AS(g.add_edge(2, 2), ContractError);
  CHECK_THROWS_AS(g.add_edge(0, 17), LookupError);
  CHECK_THROWS_AS(g.add_vertex(AttributeVector{{0}}), DomainError);
  CHECK_THROWS_AS(g.add_vertex(AttributeVector{{7, 0}}), DomainError);
  auto dup = g.add_vertex(g.vertex(3).attrs, Origin::duplicate_of(3));
  CHECK(g.vertex(dup).origin.source == 3);
  auto fake = g.add_vertex(g.vertex(3).attrs, Origin::fake());
  CHECK_THROWS_AS(g.add_vertex(g.vertex(3).attrs, Origin::duplicate_of(fake)), ContractError);
  g.add_edge(dup, 0);
  g.add_edge(dup, fake);
  g.check_invariants();
  g.truncate(6);
  CHECK(g.vertex_count() == 6);
  CHECK(g.edge_count() == 7);
  g.check_invariants();
  CHECK(g.edges() == fixtures::fig1().edges());
}

TEST_CASE("missing participates in QI equality") {
  AttributedGraph g(fixtures::small_schema(2, 3));
  auto a = g.add_vertex(AttributeVector{{kMissing, 1, 0}});
  auto b = g.add_vertex(AttributeVector{{kMissing, 1, 4}});
  auto c = g.add_vertex(AttributeVector{{0, 1, 4}});
  CHECK(g.qi_key(a) == g.qi_key(b));
  CHECK(g.qi_key(a) != g.qi_key(c));
}

TEST_CASE("property: monotone balls, degree+1, pdf sums") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    fixtures::RandomSpec spec;
    spec.vertices = 25;
    spec.edge_prob = 0.12;
    spec.qi_attrs = 2;
    spec.qi_values = 3;
    spec.missing_prob = 0.1;
    auto g = fixtures::random_graph(spec, seed);
    g.check_invariants();
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      CHECK(hop_neighborhood(g, v, 1).size() == g.degree(v) + 1);
      for (int n = 0; n < 3; ++n) {
        auto small = hop_neighborhood(g, v, n);
        auto big = hop_neighborhood(g, v, n + 1);
        CHECK(ball_size(g, v, n) == small.size());
        std::set<VertexId> bm(big.members.begin(), big.members.end());
        for (VertexId m : small.members) CHECK(bm.count(m));
        std::set<std::pair<VertexId, VertexId>> be;
        for (auto [x, y] : big.edges) be.insert(std::minmax(big.members[x], big.members[y]));
        for (auto [x, y] : small.edges) CHECK(be.count(std::minmax(small.members[x], small.members[y])));
        for (std::size_t j = 0; j < 2; ++j) {
          auto pdf = attribute_pdf(small, j);
          double sum = std::accumulate(pdf.begin(), pdf.end(), 0.0);
          bool any = false;
          for (std::size_t i = 0; i < small.size(); ++i) any = any || small.attrs[i][j] != kMissing;
          if (any) CHECK(std::fabs(sum - 1.0) < 1e-12);
          for (double p : pdf) CHECK(p >= 0.0);
        }
      }
    }
  }
}
