#include "ktsafe/graph.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>

namespace ktsafe {

namespace {

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

SensitivityPolicy SensitivityPolicy::value_set(std::vector<std::string> tokens) {
  SensitivityPolicy p;
  p.kind = Kind::ValueSet;
  p.values = std::move(tokens);
  return p;
}

SensitivityPolicy SensitivityPolicy::less_than(std::string threshold) {
  SensitivityPolicy p;
  p.kind = Kind::LessThan;
  p.threshold = std::move(threshold);
  return p;
}

SensitivityPolicy SensitivityPolicy::parse(std::string_view text) {
  if (text.starts_with("lt:")) return less_than(std::string(text.substr(3)));
  if (text.starts_with("in:")) {
    auto toks = split(text.substr(3), ',');
    toks.erase(std::remove(toks.begin(), toks.end(), std::string()), toks.end());
    return value_set(std::move(toks));
  }
  throw PolicyError("sensitivity policy must be 'lt:<value>' or 'in:<v1>,<v2>,...', got '" +
                    std::string(text) + "'");
}

std::string SensitivityPolicy::to_string() const {
  if (kind == Kind::LessThan) return "lt:" + threshold;
  std::string out = "in:";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += values[i];
  }
  return out;
}

AttributeSchema::AttributeSchema(std::vector<std::string> names,
                                 std::vector<std::vector<std::string>> domains,
                                 SensitivityPolicy policy)
    : names_(std::move(names)), domains_(std::move(domains)), policy_(std::move(policy)) {
  if (domains_.size() < 2)
    throw DomainError("schema needs at least one quasi-identifier and one sensitive attribute");
  if (names_.empty()) {
    for (std::size_t j = 0; j < domains_.size(); ++j) names_.push_back("A" + std::to_string(j + 1));
  }
  if (names_.size() != domains_.size())
    throw DomainError("schema has " + std::to_string(names_.size()) + " names but " +
                      std::to_string(domains_.size()) + " domains");
  for (std::size_t j = 0; j < domains_.size(); ++j) {
    const auto& dom = domains_[j];
    if (dom.empty()) throw DomainError("domain of " + names_[j] + " is empty");
    std::set<std::string> seen;
    for (const auto& tok : dom) {
      if (tok == "-") throw DomainError("'-' is reserved for missing values");
      if (!seen.insert(tok).second)
        throw DomainError("duplicate value '" + tok + "' in domain of " + names_[j]);
    }
  }

  // Each QI code plus MISSING packs into one radix digit.
  QiKey capacity = 1;
  for (std::size_t j = 0; j + 1 < domains_.size(); ++j) {
    QiKey r = domains_[j].size() + 1;
    if (capacity > std::numeric_limits<QiKey>::max() / r)
      throw DomainError("quasi-identifier space does not fit a 64-bit key");
    capacity *= r;
    radix_.push_back(r);
  }

  const auto& sdom = domains_.back();
  sensitive_.assign(sdom.size(), false);
  if (policy_.kind == SensitivityPolicy::Kind::ValueSet) {
    for (const auto& tok : policy_.values) {
      auto it = std::find(sdom.begin(), sdom.end(), tok);
      if (it == sdom.end())
        throw PolicyError("sensitive value '" + tok + "' is not in the domain of " + names_.back());
      sensitive_[it - sdom.begin()] = true;
    }
  } else {
    double th = 0, scratch = 0;
    bool numeric = parse_number(policy_.threshold, th);
    for (const auto& tok : sdom) numeric = numeric && parse_number(tok, scratch);
    if (numeric) {
      for (std::size_t c = 0; c < sdom.size(); ++c) {
        double x = 0;
        parse_number(sdom[c], x);
        sensitive_[c] = x < th;
      }
    } else {
      auto it = std::find(sdom.begin(), sdom.end(), policy_.threshold);
      if (it == sdom.end())
        throw PolicyError("threshold '" + policy_.threshold + "' is neither numeric nor in the domain");
      for (std::size_t c = 0; c < static_cast<std::size_t>(it - sdom.begin()); ++c) sensitive_[c] = true;
    }
  }
}

Code AttributeSchema::code_of(std::size_t j, std::string_view token) const {
  if (token == "-") return kMissing;
  const auto& dom = domain(j);
  auto it = std::find(dom.begin(), dom.end(), token);
  if (it == dom.end())
    throw DomainError("value '" + std::string(token) + "' is not in the domain of " + names_[j]);
  return static_cast<Code>(it - dom.begin());
}

const std::string& AttributeSchema::token(std::size_t j, Code code) const {
  static const std::string missing = "-";
  if (code == kMissing) return missing;
  if (!in_domain(j, code))
    throw DomainError("code " + std::to_string(code) + " outside the domain of " + names_.at(j));
  return domains_[j][code];
}

bool AttributeSchema::in_domain(std::size_t j, Code code) const {
  return code == kMissing || (code >= 0 && static_cast<std::size_t>(code) < domain(j).size());
}

bool AttributeSchema::sensitive_code(Code code) const {
  if (code == kMissing) return false;
  if (code < 0 || static_cast<std::size_t>(code) >= sensitive_.size())
    throw DomainError("code " + std::to_string(code) + " outside the sensitive domain");
  return sensitive_[code];
}

Code AttributeSchema::first_non_sensitive() const {
  for (std::size_t c = 0; c < sensitive_.size(); ++c)
    if (!sensitive_[c]) return static_cast<Code>(c);
  return kMissing;
}

bool AttributeSchema::operator==(const AttributeSchema& other) const {
  return names_ == other.names_ && domains_ == other.domains_ && sensitive_ == other.sensitive_;
}

QiKey compute_qi_key(const AttributeSchema& schema, const AttributeVector& attrs) {
  QiKey key = 0;
  for (std::size_t j = 0; j < schema.qi_count(); ++j)
    key = key * schema.qi_radix(j) + static_cast<QiKey>(attrs[j] + 1);
  return key;
}

bool is_sensitive(Code code, const AttributeSchema& schema) { return schema.sensitive_code(code); }

AttributedGraph::AttributedGraph(SchemaPtr schema) : schema_(std::move(schema)) {
  if (!schema_) throw ContractError("graph needs a schema");
}

void AttributedGraph::require(VertexId v) const {
  if (!contains(v)) throw LookupError("unknown vertex " + std::to_string(v));
}

VertexId AttributedGraph::add_vertex(AttributeVector attrs, Origin origin) {
  if (attrs.size() != schema_->attribute_count())
    throw DomainError("vertex has " + std::to_string(attrs.size()) + " attributes, schema has " +
                      std::to_string(schema_->attribute_count()));
  for (std::size_t j = 0; j < attrs.size(); ++j)
    if (!schema_->in_domain(j, attrs[j]))
      throw DomainError("code " + std::to_string(attrs[j]) + " outside the domain of " +
                        schema_->name(j));
  if (origin.kind == Origin::Kind::Duplicate) {
    require(origin.source);
    if (vertices_[origin.source].origin.kind != Origin::Kind::Original)
      throw ContractError("duplicates must point at an original vertex");
  }
  auto id = static_cast<VertexId>(vertices_.size());
  qi_keys_.push_back(compute_qi_key(*schema_, attrs));
  vertices_.push_back(Vertex{id, std::move(attrs), origin});
  adjacency_.emplace_back();
  return id;
}

bool AttributedGraph::add_edge(VertexId u, VertexId v) {
  require(u);
  require(v);
  if (u == v) throw ContractError("self-loop on vertex " + std::to_string(u));
  auto& au = adjacency_[u];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it != au.end() && *it == v) return false;
  au.insert(it, v);
  auto& av = adjacency_[v];
  av.insert(std::lower_bound(av.begin(), av.end(), u), u);
  ++edge_count_;
  return true;
}

bool AttributedGraph::has_edge(VertexId u, VertexId v) const {
  if (!contains(u) || !contains(v)) return false;
  const auto& au = adjacency_[u];
  return std::binary_search(au.begin(), au.end(), v);
}

const Vertex& AttributedGraph::vertex(VertexId v) const {
  require(v);
  return vertices_[v];
}

std::span<const VertexId> AttributedGraph::neighbors(VertexId v) const {
  require(v);
  return adjacency_[v];
}

QiKey AttributedGraph::qi_key(VertexId v) const {
  require(v);
  return qi_keys_[v];
}

std::vector<std::pair<VertexId, VertexId>> AttributedGraph::edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(edge_count_);
  for (VertexId u = 0; u < adjacency_.size(); ++u)
    for (VertexId v : adjacency_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

void AttributedGraph::truncate(std::size_t count) {
  if (count >= vertices_.size()) return;
  for (std::size_t u = 0; u < count; ++u) {
    auto& au = adjacency_[u];
    auto cut = std::lower_bound(au.begin(), au.end(), static_cast<VertexId>(count));
    au.erase(cut, au.end());
  }
  std::size_t removed = 0;
  for (std::size_t u = count; u < vertices_.size(); ++u)
    for (VertexId v : adjacency_[u])
      removed += (v < count || v > u) ? 1 : 0;
  edge_count_ -= removed;
  vertices_.resize(count);
  adjacency_.resize(count);
  qi_keys_.resize(count);
}

void AttributedGraph::check_invariants() const {
  std::size_t half_edges = 0;
  for (VertexId u = 0; u < adjacency_.size(); ++u) {
    const auto& au = adjacency_[u];
    if (vertices_[u].id != u) throw ContractError("vertex id mismatch at " + std::to_string(u));
    if (!std::is_sorted(au.begin(), au.end()) ||
        std::adjacent_find(au.begin(), au.end()) != au.end())
      throw ContractError("adjacency of " + std::to_string(u) + " is not a sorted set");
    for (VertexId v : au) {
      if (v == u) throw ContractError("self-loop on " + std::to_string(u));
      if (!contains(v)) throw ContractError("dangling edge endpoint " + std::to_string(v));
      if (!std::binary_search(adjacency_[v].begin(), adjacency_[v].end(), u))
        throw ContractError("asymmetric edge " + std::to_string(u) + "-" + std::to_string(v));
    }
    half_edges += au.size();
  }
  if (half_edges != 2 * edge_count_) throw ContractError("edge count out of sync");
}

int NeighborhoodSubgraph::hop_of(VertexId v) const {
  for (std::size_t i = 0; i < members.size(); ++i)
    if (members[i] == v) return hops[i];
  return -1;
}

NeighborhoodSubgraph NeighborhoodSubgraph::restrict_to(int L) const {
  if (L < 0 || L > radius) throw ContractError("restrict_to radius out of range");
  NeighborhoodSubgraph out;
  out.center = center;
  out.radius = L;
  out.schema = schema;
  std::size_t keep = 0;
  while (keep < members.size() && hops[keep] <= L) ++keep;
  out.members.assign(members.begin(), members.begin() + keep);
  out.hops.assign(hops.begin(), hops.begin() + keep);
  out.attrs.assign(attrs.begin(), attrs.begin() + keep);
  out.labels.assign(labels.begin(), labels.begin() + keep);
  out.adjacency.resize(keep);
  for (auto [a, b] : edges) {
    if (static_cast<std::size_t>(b) < keep) {
      out.edges.emplace_back(a, b);
      out.adjacency[a].push_back(b);
      out.adjacency[b].push_back(a);
    }
  }
  for (auto& adj : out.adjacency) std::sort(adj.begin(), adj.end());
  return out;
}

namespace {

constexpr int kUnseen = -1;
constexpr int kPending = std::numeric_limits<int>::max();

// Per-thread host id -> local index map. Entries are reset to kUnseen after
// each use, so only the touched slots cost anything.
std::vector<int>& local_marks(std::size_t size) {
  thread_local std::vector<int> marks;
  if (marks.size() < size) marks.resize(size, kUnseen);
  return marks;
}

// BFS layers sorted by id within each hop; marks every member with kPending.
std::vector<std::pair<int, VertexId>> bfs_layers(const AttributedGraph& g, VertexId v, int n, std::vector<int>& mark) {
  std::vector<std::pair<int, VertexId>> found{{0, v}};
  std::vector<VertexId> frontier{v};
  mark[v] = kPending;
  for (int h = 1; h <= n && !frontier.empty(); ++h) {
    std::vector<VertexId> next;
    for (VertexId u : frontier)
      for (VertexId w : g.neighbors(u))
        if (mark[w] == kUnseen) {
          mark[w] = kPending;
          next.push_back(w);
        }
    std::sort(next.begin(), next.end());
    for (VertexId w : next) found.emplace_back(h, w);
    frontier = std::move(next);
  }
  return found;
}

}  // namespace

NeighborhoodSubgraph hop_neighborhood(const AttributedGraph& g, VertexId v, int n) {
  if (!g.contains(v)) throw LookupError("unknown vertex " + std::to_string(v));
  if (n < 0) throw ContractError("negative radius");

  auto& mark = local_marks(g.vertex_count());
  const auto found = bfs_layers(g, v, n, mark);
  const std::size_t m = found.size();

  NeighborhoodSubgraph hn;
  hn.center = v;
  hn.radius = n;
  hn.schema = g.schema_ptr();
  hn.members.reserve(m);
  hn.hops.reserve(m);
  hn.attrs.reserve(m);
  hn.labels.reserve(m);
  for (auto [h, w] : found) {
    mark[w] = static_cast<int>(hn.members.size());
    hn.members.push_back(w);
    hn.hops.push_back(h);
    hn.attrs.push_back(g.vertex(w).attrs);
    hn.labels.push_back(g.qi_key(w));
  }

  hn.adjacency.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& adj = hn.adjacency[i];
    for (VertexId w : g.neighbors(hn.members[i])) {
      const int b = mark[w];
      if (b == kUnseen) continue;
      adj.push_back(b);
      if (static_cast<int>(i) < b) hn.edges.emplace_back(static_cast<int>(i), b);
    }
    std::sort(adj.begin(), adj.end());
  }
  for (VertexId w : hn.members) mark[w] = kUnseen;
  std::sort(hn.edges.begin(), hn.edges.end());
  return hn;
}

std::size_t ball_size(const AttributedGraph& g, VertexId v, int n) {
  if (!g.contains(v)) throw LookupError("unknown vertex " + std::to_string(v));
  auto& mark = local_marks(g.vertex_count());
  const auto found = bfs_layers(g, v, n, mark);
  for (auto [h, w] : found) mark[w] = kUnseen;
  return found.size();
}

std::vector<double> attribute_pdf(const NeighborhoodSubgraph& hn, std::size_t j,
                                  bool include_center) {
  if (!hn.schema) throw ContractError("neighborhood without schema");
  if (j >= hn.schema->qi_count())
    throw PolicyError("attribute distributions are defined for quasi-identifiers only");
  std::vector<double> pdf(hn.schema->domain(j).size(), 0.0);
  std::size_t total = 0;
  for (std::size_t i = include_center ? 0 : 1; i < hn.members.size(); ++i) {
    Code c = hn.attrs[i][j];
    if (c == kMissing) continue;
    pdf[c] += 1.0;
    ++total;
  }
  if (total)
    for (auto& p : pdf) p /= static_cast<double>(total);
  return pdf;
}

std::map<Code, double> attribute_pdf_map(const NeighborhoodSubgraph& hn, std::size_t j,
                                         bool include_center) {
  auto pdf = attribute_pdf(hn, j, include_center);
  std::map<Code, double> out;
  for (std::size_t c = 0; c < pdf.size(); ++c)
    if (pdf[c] > 0) out.emplace(static_cast<Code>(c), pdf[c]);
  return out;
}

}  // namespace ktsafe
