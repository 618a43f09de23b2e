#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ktsafe/graph.hpp"

namespace ktsafe {

enum class GeneratorKind { Uniform, Gaussian, Zipf };

std::optional<GeneratorKind> parse_generator_kind(const std::string& name);
std::string to_string(GeneratorKind kind);

inline constexpr int kGeneratorMaxDegree = 40;
inline constexpr double kGaussianDegreeMean = 20.0;
inline constexpr double kGaussianDegreeSigma = 8.0;
inline constexpr double kZipfExponent = 0.8;
inline constexpr int kGeneratorAttributes = 4;
inline constexpr int kGeneratorCodes = 5;
inline constexpr int kRepairRounds = 100;

/// A1..A4 over {1..5}; A4 is sensitive below 2.
SchemaPtr generator_schema();

/// Target degree per vertex for the named distribution.
std::vector<std::size_t> draw_degrees(GeneratorKind kind, std::size_t node_count, std::uint64_t seed);

/// Configuration-model pairing: rejected stubs are re-paired for up to
/// kRepairRounds rounds, the rest dropped.
std::vector<std::pair<VertexId, VertexId>> configuration_model(const std::vector<std::size_t>& degrees,
                                                               std::uint64_t seed);

AttributedGraph generate_synthetic(GeneratorKind kind, std::size_t node_count, std::uint64_t seed);

}  // namespace ktsafe
