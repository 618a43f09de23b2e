#include "ktsafe/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ktsafe/anonymizer.hpp"
#include "ktsafe/distances.hpp"
#include "ktsafe/error.hpp"
#include "ktsafe/generator.hpp"
#include "ktsafe/io.hpp"
#include "ktsafe/partition.hpp"
#include "ktsafe/verifier.hpp"

namespace ktsafe {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
  Params params;
  std::optional<std::uint64_t> seed;
  std::string vertices, edges;
  std::string generate;
  std::size_t nodes = 1000;
  std::string sensitive;
  std::string out_vertices, out_edges;
  std::string report_path, csv_dir;
  std::string original_vertices, original_edges;
  std::size_t spl_pairs = 1000;
  std::size_t sample_size = 1000;
  std::string out_path;
  bool no_index = false;
};

// Failures while reading inputs map to the IO exit code.
struct InputFailure {
  std::string message;
};

void add_params(CLI::App* app, Options& o) {
  auto& p = o.params;
  app->add_option("--k", p.k, "protection set size")->capture_default_str();
  app->add_option("--t", p.t, "t-closeness threshold")->capture_default_str();
  app->add_option("--epsilon", p.epsilon, "neighborhood edit distance bound")->capture_default_str();
  app->add_option("--alpha", p.alpha, "largest sensitive fraction")->capture_default_str();
  app->add_option("--n", p.n, "neighborhood radius")->capture_default_str();
  app->add_option("--gamma", p.gamma, "partition capacity")->capture_default_str();
  app->add_option("--s", p.s, "split fan-out")->capture_default_str();
  app->add_option("--seed", o.seed, "RNG seed (falls back to KT_SEED, then 1)");
  app->add_option("--workers", p.workers, "partition worker threads")->capture_default_str();
  app->add_option("--partition-iterations", p.partition_iterations, "cost-model search iterations, 0 disables")
      ->capture_default_str();
  app->add_option("--cost-sample-size", p.cost_sample_size, "calibration sample size")->capture_default_str();
  app->add_option("--pivots", p.pivot_count, "pivot count")->capture_default_str();
  app->add_option("--pivot-iterations", p.pivot_iterations, "pivot search iterations")->capture_default_str();
  app->add_flag("--no-index", o.no_index, "scan instead of using the tree index");
}

void add_input(CLI::App* app, Options& o, bool required) {
  auto* v = app->add_option("--vertices", o.vertices, "vertex TSV");
  auto* e = app->add_option("--edges", o.edges, "edge TSV");
  v->needs(e);
  e->needs(v);
  if (required) {
    v->required();
    e->required();
  }
  app->add_option("--sensitive", o.sensitive, "sensitivity policy, lt:x or in:a,b (overrides the header)");
}

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("KT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw CLI::ValidationError("KT_SEED", "not an unsigned integer");
    }
  }
  return 1;
}

LoadedGraph load_input(const std::string& vpath, const std::string& epath, const Options& o) {
  try {
    std::optional<SensitivityPolicy> policy;
    if (!o.sensitive.empty()) policy = SensitivityPolicy::parse(o.sensitive);
    return load_graph(vpath, epath, policy);
  } catch (const Error& e) {
    throw InputFailure{e.what()};
  }
}

LoadedGraph labeled(AttributedGraph g) {
  LoadedGraph out(g.schema_ptr());
  out.graph = std::move(g);
  for (VertexId v = 0; v < out.graph.vertex_count(); ++v) out.labels.push_back(std::to_string(v));
  return out;
}

Json params_json(const Params& p) {
  return Json{{"k", p.k},
              {"t", p.t},
              {"epsilon", p.epsilon},
              {"alpha", p.alpha},
              {"n", p.n},
              {"gamma", p.gamma},
              {"s", p.s},
              {"seed", p.seed},
              {"partition_iterations", p.partition_iterations},
              {"cost_sample_size", p.cost_sample_size},
              {"pivot_count", p.pivot_count},
              {"pivot_iterations", p.pivot_iterations},
              {"use_index", p.use_index}};
}

Json utility_json(const UtilityReport& u) {
  return Json{{"vertices", u.vertices},
              {"edges", u.edges},
              {"mean_degree", u.mean_degree},
              {"sd_degree", u.sd_degree},
              {"mean_spl", u.mean_spl},
              {"spl_pairs", u.spl_pairs},
              {"spl_dropped", u.spl_dropped},
              {"mean_transitivity", u.mean_transitivity},
              {"largest_component", u.largest_component},
              {"degree_histogram", u.degree_histogram},
              {"spl_histogram", u.spl_histogram},
              {"transitivity_histogram", u.transitivity_histogram}};
}

Json verdict_json(const GraphVerdict& v, const std::vector<std::string>& labels) {
  Json failures = Json::array();
  for (const auto& f : v.failures) {
    Json witness = Json::array();
    for (VertexId w : f.witness) witness.push_back(labels.at(w));
    failures.push_back({{"vertex", labels.at(f.vertex)}, {"reason", f.reason}, {"protection_set", witness}});
  }
  return Json{{"safe", v.safe},
              {"kt_safe_fraction", v.kt_safe_fraction},
              {"unsafe_count", v.unsafe_count},
              {"min_protection", v.min_protection},
              {"max_sensitive_fraction", v.max_sensitive_fraction},
              {"failures", failures}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write " + path);
}

void write_histogram(const std::filesystem::path& path, const std::string& key, const std::vector<std::size_t>& h,
                     double bin_width = 1.0) {
  std::string text = key + ",count\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    std::ostringstream row;
    if (bin_width == 1.0)
      row << i;
    else
      row << static_cast<double>(i) * bin_width;
    text += row.str() + "," + std::to_string(h[i]) + "\n";
  }
  write_text(path.string(), text);
}

void write_csvs(const std::string& dir, const UtilityReport& original, const UtilityReport& anonymized) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  for (auto [tag, u] : {std::pair{"original", &original}, std::pair{"anonymized", &anonymized}}) {
    write_histogram(d / ("degree_" + std::string(tag) + ".csv"), "degree", u->degree_histogram);
    write_histogram(d / ("spl_" + std::string(tag) + ".csv"), "length", u->spl_histogram);
    write_histogram(d / ("transitivity_" + std::string(tag) + ".csv"), "bin_start", u->transitivity_histogram,
                    1.0 / kTransitivityBins);
  }
}

int run_anonymize(Options& o, std::ostream& out, std::ostream& err) {
  auto& p = o.params;
  const auto t0 = std::chrono::steady_clock::now();
  LoadedGraph in = o.generate.empty() ? load_input(o.vertices, o.edges, o)
                                      : labeled(generate_synthetic(*parse_generator_kind(o.generate), o.nodes, p.seed));
  const auto& g = in.graph;

  double seconds_calibration = 0;
  std::optional<CostSample> sample;
  if (p.partition_iterations > 0) {
    const auto c0 = std::chrono::steady_clock::now();
    sample = calibrate_cost_sample(g, p.cost_sample_size, p, p.seed);
    seconds_calibration = std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
  }
  auto result = anonymize(g, p, sample ? &*sample : nullptr);

  const auto v0 = std::chrono::steady_clock::now();
  std::vector<std::string> labels = in.labels;
  for (VertexId v = static_cast<VertexId>(labels.size()); v < result.graph.vertex_count(); ++v)
    labels.push_back("new:" + std::to_string(v));
  const auto verdict = verify_kt_safe_graph(result.graph, p, p.workers);
  const double seconds_verify = std::chrono::duration<double>(std::chrono::steady_clock::now() - v0).count();

  const auto& rep = result.report;
  const std::size_t bound = static_cast<std::size_t>(p.k - 1) * (g.vertex_count() + g.edge_count());
  Json report{{"report_version", kReportVersion},
              {"params", params_json(p)},
              {"input", {{"vertices", g.vertex_count()}, {"edges", g.edge_count()}}},
              {"output", {{"vertices", result.graph.vertex_count()}, {"edges", result.graph.edge_count()}}},
              {"anonymization_cost", rep.cost},
              {"cost_bound", bound},
              {"within_cost_bound", rep.cost <= bound},
              {"partitions", rep.partitions},
              {"halo_instances", rep.halo_instances},
              {"local_edits", rep.phase_a_edits},
              {"local_edits_kept", rep.phase_a_kept},
              {"max_layers", rep.max_layers},
              {"fake_vertices", rep.fakes},
              {"duplicate_vertices", rep.duplicates},
              {"verification", verdict_json(verdict, labels)}};

  int status = kExitOk;
  if (!verdict.safe) {
    err << "verification failed: " << verdict.unsafe_count << " unsafe vertices; nothing released\n";
    status = kExitUnsafe;
  } else {
    save_graph(result.graph, o.out_vertices, o.out_edges, p.seed);
    const auto utility = utility_report(g, result.graph, o.spl_pairs, p.seed);
    report["utility"] = {{"original", utility_json(utility.first)}, {"anonymized", utility_json(utility.second)}};
    if (!o.csv_dir.empty()) write_csvs(o.csv_dir, utility.first, utility.second);
  }
  report["timing_seconds"] = {{"calibration", seconds_calibration},
                              {"partition", rep.seconds_partition},
                              {"generation", rep.seconds_generation},
                              {"merge", rep.seconds_merge},
                              {"layering", rep.seconds_layering},
                              {"verification", seconds_verify},
                              {"total", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  if (!o.report_path.empty()) write_text(o.report_path, report.dump(2) + "\n");
  out << "cost " << rep.cost << ", " << result.graph.vertex_count() << " vertices, "
      << (verdict.safe ? "kt-safe" : "NOT kt-safe") << "\n";
  return status;
}

int run_verify(Options& o, std::ostream& out, std::ostream&) {
  auto in = load_input(o.vertices, o.edges, o);
  const auto verdict = verify_kt_safe_graph(in.graph, o.params, o.params.workers);
  if (!o.report_path.empty()) write_text(o.report_path, verdict_json(verdict, in.labels).dump(2) + "\n");
  if (verdict.safe) {
    out << "kt-safe: all " << verdict.vertices << " vertices\n";
    return kExitOk;
  }
  out << "not kt-safe: " << verdict.unsafe_count << " of " << verdict.vertices << " vertices fail\n";
  for (const auto& f : verdict.failures) out << "  " << in.labels.at(f.vertex) << ": " << f.reason << "\n";
  return kExitUnsafe;
}

int run_report(Options& o, std::ostream& out, std::ostream&) {
  auto a = load_input(o.original_vertices, o.original_edges, o);
  auto b = load_input(o.vertices, o.edges, o);
  const auto utility = utility_report(a.graph, b.graph, o.spl_pairs, o.params.seed);
  Json report{{"report_version", kReportVersion},
              {"utility", {{"original", utility_json(utility.first)}, {"anonymized", utility_json(utility.second)}}}};
  if (!o.csv_dir.empty()) write_csvs(o.csv_dir, utility.first, utility.second);
  if (o.report_path.empty())
    out << report.dump(2) << "\n";
  else
    write_text(o.report_path, report.dump(2) + "\n");
  return kExitOk;
}

int run_generate(Options& o, std::ostream& out, std::ostream&) {
  const auto g = generate_synthetic(*parse_generator_kind(o.generate), o.nodes, o.params.seed);
  save_graph(g, o.out_vertices, o.out_edges, o.params.seed);
  out << to_string(*parse_generator_kind(o.generate)) << ": " << g.vertex_count() << " vertices, " << g.edge_count()
      << " edges\n";
  return kExitOk;
}

int run_calibrate(Options& o, std::ostream& out, std::ostream&) {
  auto in = load_input(o.vertices, o.edges, o);
  const auto& p = o.params;
  const auto sample = calibrate_cost_sample(in.graph, o.sample_size, p, p.seed);
  const auto parts = partition_graph(in.graph, p.gamma, p.s, p.n);
  const double estimate = estimate_partition_cost(parts, sample, p.n);
  std::string csv = "sample_vertex,ball_size,kt_cost,merge_cost,border\n";
  double total = 0;
  for (VertexId u = 0; u < sample.graph.vertex_count(); ++u) {
    std::ostringstream row;
    row << u << "," << sample.ball_sizes[u] << "," << sample.c_mkt[u] << "," << sample.c_mer[u] << ","
        << (sample.border[u] ? 1 : 0) << "\n";
    csv += row.str();
    total += sample.c_mkt[u] + sample.c_mer[u];
  }
  if (!o.out_path.empty()) write_text(o.out_path, csv);
  Json summary{{"sample_vertices", sample.graph.vertex_count()},
               {"sample_cost", total},
               {"partitions", parts.size()},
               {"estimated_cost", estimate}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"kt-safe graph anonymization"};
  app.require_subcommand(1);
  Options o;

  auto* anon = app.add_subcommand("anonymize", "anonymize, verify and release a graph");
  add_params(anon, o);
  add_input(anon, o, false);
  anon->add_option("--generate", o.generate, "synthetic input: uniform, gaussian or zipf")
      ->check(CLI::IsMember({"uniform", "gaussian", "zipf"}, CLI::ignore_case));
  anon->add_option("--nodes", o.nodes, "synthetic vertex count")->capture_default_str();
  anon->add_option("--out-vertices", o.out_vertices, "released vertex TSV")->required();
  anon->add_option("--out-edges", o.out_edges, "released edge TSV")->required();
  anon->add_option("--report", o.report_path, "JSON report");
  anon->add_option("--csv-dir", o.csv_dir, "directory for histogram CSVs");
  anon->add_option("--spl-pairs", o.spl_pairs, "sampled pairs for path lengths")->capture_default_str();

  auto* ver = app.add_subcommand("verify", "check a graph for kt-safety");
  add_params(ver, o);
  add_input(ver, o, true);
  ver->add_option("--report", o.report_path, "JSON verdict");

  auto* rep = app.add_subcommand("report", "utility statistics of an original and a released graph");
  add_input(rep, o, true);
  rep->add_option("--original-vertices", o.original_vertices, "original vertex TSV")->required();
  rep->add_option("--original-edges", o.original_edges, "original edge TSV")->required();
  rep->add_option("--seed", o.seed, "RNG seed");
  rep->add_option("--spl-pairs", o.spl_pairs, "sampled pairs for path lengths")->capture_default_str();
  rep->add_option("--out", o.report_path, "JSON output (stdout if absent)");
  rep->add_option("--csv-dir", o.csv_dir, "directory for histogram CSVs");

  auto* gen = app.add_subcommand("generate", "write a synthetic graph");
  gen->add_option("--kind", o.generate, "uniform, gaussian or zipf")
      ->required()
      ->check(CLI::IsMember({"uniform", "gaussian", "zipf"}, CLI::ignore_case));
  gen->add_option("--nodes", o.nodes, "vertex count")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "RNG seed");
  gen->add_option("--out-vertices", o.out_vertices, "vertex TSV")->required();
  gen->add_option("--out-edges", o.out_edges, "edge TSV")->required();

  auto* cal = app.add_subcommand("calibrate", "build a cost sample and estimate the cost");
  add_params(cal, o);
  add_input(cal, o, true);
  cal->add_option("--sample-size", o.sample_size, "sample vertices")->capture_default_str();
  cal->add_option("--out", o.out_path, "per-vertex cost CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (anon->parsed() && o.generate.empty() == o.vertices.empty())
      throw CLI::ValidationError("input", "give either --vertices/--edges or --generate");
    o.params.seed = resolve_seed(o);
    o.params.use_index = !o.no_index;
    o.params.validate();
    if (!o.sensitive.empty()) SensitivityPolicy::parse(o.sensitive);
    if (o.spl_pairs < 1) throw CLI::ValidationError("--spl-pairs", "must be at least 1");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PolicyError& e) {
    err << "invalid policy: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (anon->parsed()) return run_anonymize(o, out, err);
    if (ver->parsed()) return run_verify(o, out, err);
    if (rep->parsed()) return run_report(o, out, err);
    if (gen->parsed()) return run_generate(o, out, err);
    return run_calibrate(o, out, err);
  } catch (const InputFailure& e) {
    err << "input error: " << e.message << "\n";
    return kExitIo;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const PolicyError& e) {
    // e.g. every value of the sensitive attribute is sensitive
    err << "input error: " << e.what() << "\n";
    return kExitIo;
  }
}

int cli_run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_run(args, std::cout, std::cerr);
}

}  // namespace ktsafe
