#include "ktsafe/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "ktsafe/error.hpp"

namespace ktsafe {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool numeric(const std::string& s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

// Numeric tokens sort by value, anything else lexicographically.
void sort_domain(std::vector<std::string>& dom) {
  double a = 0, b = 0;
  const bool all_numeric = std::all_of(dom.begin(), dom.end(), [&](const std::string& s) { return numeric(s, a); });
  if (all_numeric)
    std::sort(dom.begin(), dom.end(), [&](const std::string& x, const std::string& y) {
      numeric(x, a);
      numeric(y, b);
      return a < b || (a == b && x < y);
    });
  else
    std::sort(dom.begin(), dom.end());
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace

std::string schema_header(const AttributeSchema& schema) {
  std::ostringstream out;
  out << kSchemaHeader << '\n';
  for (std::size_t j = 0; j < schema.attribute_count(); ++j) {
    out << "#attr\t" << schema.name(j) << '\t';
    const auto& dom = schema.domain(j);
    for (std::size_t c = 0; c < dom.size(); ++c) out << (c ? "," : "") << dom[c];
    out << '\n';
  }
  const auto& pol = schema.policy();
  if (pol.kind == SensitivityPolicy::Kind::LessThan) {
    out << "#sensitive\tlt\t" << pol.threshold << '\n';
  } else {
    out << "#sensitive\tin\t";
    for (std::size_t i = 0; i < pol.values.size(); ++i) out << (i ? "," : "") << pol.values[i];
    out << '\n';
  }
  return out.str();
}

LoadedGraph load_graph(const std::string& vertex_path, const std::string& edge_path,
                       const std::optional<SensitivityPolicy>& policy) {
  auto vin = open_in(vertex_path);
  std::vector<std::string> names;
  std::map<std::size_t, std::vector<std::string>> declared;
  std::optional<SensitivityPolicy> header_policy;
  struct Row {
    std::size_t line;
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(vin, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto f = split(line, '\t');
      if (f[0] == "#attr") {
        if (f.size() != 3) throw ParseError("malformed #attr header", lineno);
        declared[names.size()] = split(f[2], ',');
        names.push_back(f[1]);
      } else if (f[0] == "#sensitive") {
        if (f.size() != 3 || (f[1] != "lt" && f[1] != "in")) throw ParseError("malformed #sensitive header", lineno);
        header_policy = SensitivityPolicy::parse(f[1] + ":" + f[2]);
      }
      continue;
    }
    auto f = split(line, '\t');
    if (f.size() < 3) throw ParseError("vertex line needs an id and at least two attributes", lineno);
    if (!rows.empty() && f.size() != rows.front().fields.size())
      throw ParseError("vertex line has " + std::to_string(f.size()) + " fields, expected " +
                           std::to_string(rows.front().fields.size()),
                       lineno);
    rows.push_back({lineno, std::move(f)});
  }

  const std::size_t d = rows.empty() ? (names.empty() ? 0 : names.size()) : rows.front().fields.size() - 1;
  if (d < 2) throw ParseError("need at least one quasi-identifier and one sensitive attribute", lineno);
  if (!names.empty() && names.size() != d) throw ParseError("#attr headers do not match the column count", 1);

  std::vector<std::vector<std::string>> domains(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (declared.count(j)) {
      domains[j] = declared[j];
      continue;
    }
    std::vector<std::string> seen;
    for (const auto& r : rows)
      if (r.fields[j + 1] != "-") seen.push_back(r.fields[j + 1]);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    sort_domain(seen);
    domains[j] = std::move(seen);
  }
  const auto chosen = policy ? policy : header_policy;
  if (!chosen) throw ParseError("no sensitivity policy declared for the last attribute", 1);

  auto schema = std::make_shared<AttributeSchema>(names, domains, *chosen);
  LoadedGraph out(schema);
  std::unordered_map<std::string, VertexId> ids;
  for (const auto& r : rows) {
    AttributeVector a;
    for (std::size_t j = 0; j < d; ++j) {
      const auto& tok = r.fields[j + 1];
      if (tok == "-") {
        a.values.push_back(kMissing);
        continue;
      }
      try {
        a.values.push_back(schema->code_of(j, tok));
      } catch (const DomainError& e) {
        throw DomainError("line " + std::to_string(r.line) + ": " + e.what());
      }
    }
    if (!ids.emplace(r.fields[0], static_cast<VertexId>(out.labels.size())).second)
      throw ParseError("duplicate vertex id " + r.fields[0], r.line);
    out.graph.add_vertex(std::move(a));
    out.labels.push_back(r.fields[0]);
  }

  auto ein = open_in(edge_path);
  lineno = 0;
  while (std::getline(ein, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 2) throw ParseError("edge line must have two fields", lineno);
    auto a = ids.find(f[0]), b = ids.find(f[1]);
    if (a == ids.end() || b == ids.end())
      throw LookupError("edge line " + std::to_string(lineno) + " names an unknown vertex");
    if (a->second == b->second) throw ParseError("self-loop on " + f[0], lineno);
    out.graph.add_edge(a->second, b->second);
  }
  return out;
}

void save_graph(const AttributedGraph& g, const std::string& vertex_path, const std::string& edge_path,
                std::uint64_t seed) {
  const std::size_t nv = g.vertex_count();
  std::vector<VertexId> perm(nv);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates by hand: std::shuffle's draw sequence is implementation defined.
  for (std::size_t i = nv; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<VertexId> order(nv);
  for (VertexId v = 0; v < nv; ++v) order[perm[v]] = v;

  const auto& schema = g.schema();
  auto vout = open_out(vertex_path);
  vout << schema_header(schema);
  for (VertexId id = 0; id < nv; ++id) {
    const VertexId v = order[id];
    vout << id;
    for (std::size_t j = 0; j < schema.attribute_count(); ++j) {
      const Code c = g.attr(v, j);
      vout << '\t' << (c == kMissing ? std::string("-") : schema.token(j, c));
    }
    vout << '\n';
  }
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (auto [u, v] : g.edges()) edges.emplace_back(std::min(perm[u], perm[v]), std::max(perm[u], perm[v]));
  std::sort(edges.begin(), edges.end());
  auto eout = open_out(edge_path);
  eout << kSchemaHeader << '\n';
  for (auto [u, v] : edges) eout << u << '\t' << v << '\n';
  if (!vout || !eout) throw IoError("write failed");
}

}  // namespace ktsafe
