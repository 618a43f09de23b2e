#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ktsafe/graph.hpp"

namespace fixtures {

using namespace ktsafe;

// Fig. 1: two triangles v1v2v3 and v4v5v6 joined by v1-v4. Ids are v_i - 1.
inline SchemaPtr fig1_schema() {
  return std::make_shared<AttributeSchema>(
      std::vector<std::string>{"A1", "A2"},
      std::vector<std::vector<std::string>>{{"0.4", "0.5", "0.6"},
                                            {"0.1", "0.3", "0.5", "0.6", "0.7", "0.9"}},
      SensitivityPolicy::less_than("0.2"));
}

inline AttributeVector attrs(const AttributeSchema& s, const std::string& a1, const std::string& a2) {
  return AttributeVector{{s.code_of(0, a1), s.code_of(1, a2)}};
}

inline AttributedGraph fig1() {
  AttributedGraph g(fig1_schema());
  const auto& s = g.schema();
  const char* a1[] = {"0.5", "0.4", "0.5", "0.5", "0.6", "0.4"};
  const char* a2[] = {"0.7", "0.3", "0.6", "0.1", "0.9", "0.5"};
  for (int i = 0; i < 6; ++i) g.add_vertex(attrs(s, a1[i], a2[i]));
  for (auto [u, v] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {3, 4}, {3, 5}, {4, 5}})
    g.add_edge(u, v);
  return g;
}

// Fig. 2: Fig. 1 plus fakes v7 (A1=0.6) on v1 and v8 (A1=0.5) on v4.
inline AttributedGraph fig2() {
  auto g = fig1();
  const auto& s = g.schema();
  auto v7 = g.add_vertex(attrs(s, "0.6", "0.5"), Origin::fake());
  auto v8 = g.add_vertex(attrs(s, "0.5", "0.5"), Origin::fake());
  g.add_edge(0, v7);
  g.add_edge(3, v8);
  return g;
}

// d-1 QI attributes over `qi_values` codes, sensitive attribute over {0..4}
// with codes "0","1" sensitive.
inline SchemaPtr small_schema(int qi_attrs, int qi_values) {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> domains;
  for (int j = 0; j < qi_attrs; ++j) {
    names.push_back("Q" + std::to_string(j));
    std::vector<std::string> dom;
    for (int c = 0; c < qi_values; ++c) dom.push_back(std::to_string(c));
    domains.push_back(dom);
  }
  names.push_back("S");
  domains.push_back({"0", "1", "2", "3", "4"});
  return std::make_shared<AttributeSchema>(names, domains, SensitivityPolicy::less_than("2"));
}

struct RandomSpec {
  int vertices = 20;
  double edge_prob = 0.2;
  int qi_attrs = 1;
  int qi_values = 2;
  int max_degree = 1 << 20;
  double missing_prob = 0.0;
  double sensitive_prob = 0.2;
};

inline AttributedGraph random_graph(const RandomSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AttributedGraph g(small_schema(spec.qi_attrs, spec.qi_values));
  std::uniform_int_distribution<int> qi(0, spec.qi_values - 1);
  std::uniform_int_distribution<int> ns(2, 4), sv(0, 1);
  for (int i = 0; i < spec.vertices; ++i) {
    AttributeVector a;
    for (int j = 0; j < spec.qi_attrs; ++j) a.values.push_back(unit(rng) < spec.missing_prob ? kMissing : qi(rng));
    a.values.push_back(unit(rng) < spec.sensitive_prob ? sv(rng) : ns(rng));
    g.add_vertex(a);
  }
  for (int u = 0; u < spec.vertices; ++u)
    for (int v = u + 1; v < spec.vertices; ++v)
      if (unit(rng) < spec.edge_prob && static_cast<int>(g.degree(u)) < spec.max_degree &&
          static_cast<int>(g.degree(v)) < spec.max_degree)
        g.add_edge(u, v);
  return g;
}

}  // namespace fixtures
