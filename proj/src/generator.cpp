#include "ktsafe/generator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>

#include "ktsafe/error.hpp"

namespace ktsafe {

namespace {

std::vector<double> zipf_weights(int count) {
  std::vector<double> w;
  for (int r = 1; r <= count; ++r) w.push_back(std::pow(static_cast<double>(r), -kZipfExponent));
  return w;
}

// Independent streams for degrees, pairing and attributes.
std::uint64_t stream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

std::optional<GeneratorKind> parse_generator_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "uniform") return GeneratorKind::Uniform;
  if (s == "gaussian") return GeneratorKind::Gaussian;
  if (s == "zipf") return GeneratorKind::Zipf;
  return std::nullopt;
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Uniform: return "uniform";
    case GeneratorKind::Gaussian: return "gaussian";
    case GeneratorKind::Zipf: return "zipf";
  }
  return "?";
}

SchemaPtr generator_schema() {
  std::vector<std::string> codes;
  for (int c = 1; c <= kGeneratorCodes; ++c) codes.push_back(std::to_string(c));
  std::vector<std::string> names;
  for (int j = 1; j <= kGeneratorAttributes; ++j) names.push_back("A" + std::to_string(j));
  return std::make_shared<AttributeSchema>(names, std::vector<std::vector<std::string>>(kGeneratorAttributes, codes),
                                           SensitivityPolicy::less_than("2"));
}

std::vector<std::size_t> draw_degrees(GeneratorKind kind, std::size_t node_count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> deg(node_count);
  std::uniform_int_distribution<int> uni(0, kGeneratorMaxDegree);
  std::normal_distribution<double> gauss(kGaussianDegreeMean, kGaussianDegreeSigma);
  auto w = zipf_weights(kGeneratorMaxDegree);
  std::discrete_distribution<int> zipf(w.begin(), w.end());
  for (auto& d : deg) {
    switch (kind) {
      case GeneratorKind::Uniform: d = static_cast<std::size_t>(uni(rng)); break;
      case GeneratorKind::Gaussian: d = static_cast<std::size_t>(std::max(0.0, std::round(gauss(rng)))); break;
      case GeneratorKind::Zipf: d = static_cast<std::size_t>(zipf(rng) + 1); break;
    }
  }
  return deg;
}

std::vector<std::pair<VertexId, VertexId>> configuration_model(const std::vector<std::size_t>& degrees,
                                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<VertexId> stubs;
  for (VertexId v = 0; v < degrees.size(); ++v) stubs.insert(stubs.end(), degrees[v], v);
  std::set<std::pair<VertexId, VertexId>> edges;
  for (int round = 0; round < kRepairRounds && stubs.size() >= 2; ++round) {
    for (std::size_t i = stubs.size(); i > 1; --i) std::swap(stubs[i - 1], stubs[rng() % i]);
    std::vector<VertexId> rejected;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      const VertexId a = std::min(stubs[i], stubs[i + 1]), b = std::max(stubs[i], stubs[i + 1]);
      if (a == b || !edges.emplace(a, b).second) {
        rejected.push_back(stubs[i]);
        rejected.push_back(stubs[i + 1]);
      }
    }
    if (stubs.size() % 2) rejected.push_back(stubs.back());
    if (rejected.size() == stubs.size()) break;
    stubs = std::move(rejected);
  }
  return {edges.begin(), edges.end()};
}

AttributedGraph generate_synthetic(GeneratorKind kind, std::size_t node_count, std::uint64_t seed) {
  if (node_count < 1) throw DomainError("node count must be at least 1");
  AttributedGraph g(generator_schema());
  std::mt19937_64 rng(stream(seed, 3));
  std::uniform_int_distribution<int> uni(0, kGeneratorCodes - 1);
  std::normal_distribution<double> gauss((kGeneratorCodes - 1) / 2.0, 1.0);
  auto w = zipf_weights(kGeneratorCodes);
  std::discrete_distribution<int> zipf(w.begin(), w.end());
  for (std::size_t i = 0; i < node_count; ++i) {
    AttributeVector a;
    for (int j = 0; j < kGeneratorAttributes; ++j) {
      int c = 0;
      switch (kind) {
        case GeneratorKind::Uniform: c = uni(rng); break;
        case GeneratorKind::Gaussian:
          c = static_cast<int>(std::clamp(std::round(gauss(rng)), 0.0, kGeneratorCodes - 1.0));
          break;
        case GeneratorKind::Zipf: c = zipf(rng); break;
      }
      a.values.push_back(c);
    }
    g.add_vertex(std::move(a));
  }
  for (auto [u, v] : configuration_model(draw_degrees(kind, node_count, stream(seed, 1)), stream(seed, 2)))
    g.add_edge(u, v);
  return g;
}

}  // namespace ktsafe
