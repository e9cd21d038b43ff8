// Command-line front end: decompose, validate (against the serial oracle),
// gen-rmat, and bench.
//
// Exit codes: 0 ok, 1 validation failure, 2 error.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "nucleus/graph.hpp"
#include "nucleus/hashing.hpp"
#include "nucleus/oracle.hpp"
#include "nucleus/peeling.hpp"

using json = nlohmann::json;
using namespace nucleus;

namespace {

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CommonOptions {
  int r = 2, s = 3;
  int levels = 2;
  bool contiguous = true;
  std::string inverse = "pointer";
  std::string agg;          // empty: pick the (r,s) default
  std::string bucket = "open";
  std::string orientation = "degeneracy";
  int relabel = -1;         // -1: pick the (r,s) default
  int contract = -1;        // -1: pick the (r,s) default
  double contract_edge_factor = 2.0;
  double contract_loss_fraction = 0.25;
  int buffer_size = 64;
  int threads = 0;
  uint64_t seed = 1;
};

void add_common_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--r", o.r, "clique size r")->required();
  cmd->add_option("--s", o.s, "clique size s (r < s)")->required();
  cmd->add_option("--levels", o.levels, "table levels (1..r)")->check(CLI::Range(1, 16));
  cmd->add_flag("--contiguous,!--no-contiguous", o.contiguous,
                "contiguous last-level storage");
  cmd->add_option("--inverse", o.inverse, "inverse index map")
      ->check(CLI::IsMember({"binary", "pointer"}));
  cmd->add_option("--agg", o.agg, "update aggregation")
      ->check(CLI::IsMember({"array", "list-buffer", "hash"}));
  cmd->add_option("--bucket", o.bucket, "bucket structure")
      ->check(CLI::IsMember({"open", "dense"}));
  cmd->add_option("--orientation", o.orientation, "orientation order")
      ->check(CLI::IsMember({"degeneracy", "degree"}));
  cmd->add_flag_callback("--relabel", [&o]() { o.relabel = 1; }, "relabel vertices by rank");
  cmd->add_flag_callback("--no-relabel", [&o]() { o.relabel = 0; },
                         "keep the input labeling");
  cmd->add_flag_callback("--contract", [&o]() { o.contract = 1; }, "(2,3) graph contraction");
  cmd->add_flag_callback("--no-contract", [&o]() { o.contract = 0; },
                         "disable graph contraction");
  cmd->add_option("--contract-edges-factor", o.contract_edge_factor,
                  "contract once peeled edges reach factor*n");
  cmd->add_option("--contract-loss-frac", o.contract_loss_fraction,
                  "rebuild lists that lost this neighbor fraction");
  cmd->add_option("--buffer-size", o.buffer_size, "list-buffer block size");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all)");
  cmd->add_option("--seed", o.seed, "hash seed");
}

PeelConfig to_config(const CommonOptions& o) {
  PeelConfig cfg;
  cfg.r = o.r;
  cfg.s = o.s;
  cfg.table.levels = o.levels;
  cfg.table.contiguous = o.contiguous;
  cfg.table.hash_seed = mix64(o.seed ^ 0x5bd1e995u);
  cfg.table.inverse = o.inverse == "binary" ? InverseMapMethod::BinarySearch
                                            : InverseMapMethod::StoredPointer;
  const bool truss = (o.r == 2 && o.s == 3);
  std::string agg = o.agg.empty() ? (truss ? "hash" : "list-buffer") : o.agg;
  cfg.aggregator = agg == "array"         ? AggregatorKind::SimpleArray
                   : agg == "list-buffer" ? AggregatorKind::ListBuffer
                                          : AggregatorKind::HashTable;
  cfg.bucket = o.bucket == "dense" ? BucketKind::DenseArray : BucketKind::OpenBucket;
  cfg.orientation =
      o.orientation == "degree" ? OrientationKind::Degree : OrientationKind::Degeneracy;
  cfg.relabel = o.relabel < 0 ? !truss : o.relabel > 0;
  cfg.contract = o.contract < 0 ? truss : o.contract > 0;
  cfg.contract_edge_factor = o.contract_edge_factor;
  cfg.contract_loss_fraction = o.contract_loss_fraction;
  cfg.list_buffer_block = o.buffer_size;
  cfg.threads = o.threads;
  return cfg;
}

json report_json(const std::string& input, const UndirectedGraph& g, const PeelConfig& cfg,
                 const PeelResult& res, double parse_seconds) {
  json config = {
      {"levels", res.table->levels()},
      {"contiguous", cfg.table.contiguous},
      {"inverse", cfg.table.inverse == InverseMapMethod::BinarySearch ? "binary" : "pointer"},
      {"aggregation", cfg.aggregator == AggregatorKind::SimpleArray  ? "array"
                      : cfg.aggregator == AggregatorKind::ListBuffer ? "list-buffer"
                                                                     : "hash"},
      {"bucket", cfg.bucket == BucketKind::DenseArray ? "dense" : "open"},
      {"orientation",
       cfg.orientation == OrientationKind::Degree ? "degree" : "degeneracy"},
      {"relabel", cfg.relabel},
      {"contract", cfg.contract},
      {"buffer_size", cfg.list_buffer_block},
  };
  json hist = json::object();
  for (const auto& [core, count] : core_histogram(res)) hist[std::to_string(core)] = count;
  auto rep = res.table->memory_report();
  double total = parse_seconds + res.seconds.orient + res.seconds.build + res.seconds.count +
                 res.seconds.peel;
  return json{
      {"schema", 1},
      {"input", input},
      {"n", g.n},
      {"m", g.m},
      {"r", cfg.r},
      {"s", cfg.s},
      {"threads", omp_get_max_threads()},
      {"config", config},
      {"total_r_cliques", res.total_cliques},
      {"rho", res.rho},
      {"max_core", res.max_core},
      {"fixed_point_scale", res.fixed_point_scale},
      {"histogram", hist},
      {"phases_seconds",
       {{"parse", parse_seconds},
        {"orient", res.seconds.orient},
        {"build", res.seconds.build},
        {"count", res.seconds.count},
        {"peel", res.seconds.peel},
        {"total", total}}},
      {"table",
       {{"key_units", rep.key_units},
        {"key_bytes", rep.key_bytes},
        {"alloc_bytes", rep.alloc_bytes},
        {"entries_per_level", rep.entries_per_level},
        {"capacity_per_level", rep.capacity_per_level}}},
  };
}

int cmd_decompose(const CommonOptions& o, const std::string& input,
                  const std::string& cores_out, bool with_vertices) {
  auto t0 = std::chrono::steady_clock::now();
  UndirectedGraph g = load_graph(input);
  double parse_seconds = now_seconds(t0);

  PeelConfig cfg = to_config(o);
  if (o.threads > 0) omp_set_num_threads(o.threads);
  PeelResult res = nucleus_decomposition(g, cfg);

  std::cout << report_json(input, g, cfg, res, parse_seconds).dump(2) << "\n";

  if (!cores_out.empty()) {
    std::ofstream out(cores_out);
    if (!out) throw IoError("cannot open " + cores_out + " for writing");
    std::vector<VertexId> verts(cfg.r);
    for (uint64_t i = 0; i < res.total_cliques; i++) {
      out << i << ',' << res.core[i];
      if (with_vertices) {
        res.clique_of(i, verts.data());
        out << ',';
        for (int j = 0; j < cfg.r; j++) out << (j ? " " : "") << verts[j];
      }
      out << '\n';
    }
  }
  return 0;
}

int cmd_gen_rmat(const RmatParams& params, const std::string& output, bool binary) {
  UndirectedGraph g = generate_rmat(params);
  if (binary) {
    save_binary(g, output);
  } else {
    std::ofstream out(output);
    if (!out) throw IoError("cannot open " + output + " for writing");
    serialize_edge_list(g, out);
  }
  std::cerr << "rmat scale=" << params.scale << " edge_factor=" << params.edge_factor
            << ": n=" << g.n << " m=" << g.m << " -> " << output << "\n";
  return 0;
}

struct ValidateStats {
  uint64_t cases = 0;
  uint64_t mismatches = 0;
};

// Runs the full configuration matrix against the oracle for one graph.
void validate_graph(const UndirectedGraph& g, const std::string& name, int max_s,
                    bool inject_corruption, ValidateStats& stats) {
  if (g.n > kOracleVertexCap)
    throw ParameterError(name + ": graph exceeds the oracle cap (" +
                         std::to_string(kOracleVertexCap) + " vertices)");
  const int max_threads = omp_get_max_threads();
  for (int r = 1; r < max_s; r++) {
    for (int s = r + 1; s <= max_s; s++) {
      OracleResult expect = oracle_nucleus(g, r, s);
      for (int levels = 1; levels <= std::min(r, 3); levels++)
        for (auto inverse : {InverseMapMethod::BinarySearch, InverseMapMethod::StoredPointer})
          for (auto agg : {AggregatorKind::SimpleArray, AggregatorKind::ListBuffer,
                           AggregatorKind::HashTable})
            for (auto bucket : {BucketKind::OpenBucket, BucketKind::DenseArray})
              for (int threads : {1, max_threads}) {
                PeelConfig cfg;
                cfg.r = r;
                cfg.s = s;
                cfg.table.levels = levels;
                cfg.table.inverse = inverse;
                cfg.aggregator = agg;
                cfg.bucket = bucket;
                cfg.threads = threads;
                cfg.relabel = !(r == 2 && s == 3);
                cfg.contract = (r == 2 && s == 3);
                cfg.check_invariants = true;
                auto res = nucleus_decomposition(g, cfg);
                auto got = canonical_cores(res);
                stats.cases++;
                if (inject_corruption && stats.cases == 1 && !got.empty())
                  got.front().second += 1;  // negative-control hook

                bool ok = got.size() == expect.cores.size() && res.rho == expect.rho;
                if (!ok && res.rho != expect.rho) {
                  std::cerr << "MISMATCH " << name << " r=" << r << " s=" << s
                            << ": rho expected " << expect.rho << ", got " << res.rho << "\n";
                }
                if (ok) {
                  for (const auto& [clique, core] : got) {
                    auto it = expect.cores.find(clique);
                    if (it == expect.cores.end() || it->second != core) {
                      ok = false;
                      std::ostringstream diff;
                      diff << "first divergent clique {";
                      for (size_t i = 0; i < clique.size(); i++)
                        diff << (i ? " " : "") << clique[i];
                      diff << "}: expected "
                           << (it == expect.cores.end() ? std::string("absent")
                                                        : std::to_string(it->second))
                           << ", got " << core;
                      std::cerr << "MISMATCH " << name << " r=" << r << " s=" << s
                                << " levels=" << levels << " threads=" << threads << ": "
                                << diff.str() << "\n";
                      break;
                    }
                  }
                }
                if (!ok) stats.mismatches++;
              }
    }
  }
}

int cmd_bench(const std::vector<std::string>& inputs, const std::string& rmat_spec,
              CommonOptions base, const std::vector<int>& threads_list,
              const std::vector<int>& levels_list, const std::vector<std::string>& agg_list,
              const std::string& output) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!output.empty()) {
    file.open(output);
    if (!file) throw IoError("cannot open " + output + " for writing");
    out = &file;
  }
  *out << "graph,r,s,levels,aggregation,threads,phase,seconds,peak_table_bytes\n";

  std::vector<std::pair<std::string, UndirectedGraph>> graphs;
  for (const auto& path : inputs) graphs.push_back({path, load_graph(path)});
  if (!rmat_spec.empty()) {
    RmatParams p;
    auto colon = rmat_spec.find(':');
    p.scale = std::stoi(rmat_spec.substr(0, colon));
    if (colon != std::string::npos) p.edge_factor = std::stoi(rmat_spec.substr(colon + 1));
    p.seed = base.seed;
    graphs.push_back({"rmat-" + std::to_string(p.scale) + "-" + std::to_string(p.edge_factor),
                      generate_rmat(p)});
  }

  for (const auto& [name, g] : graphs) {
    for (int levels : levels_list) {
      for (const auto& agg : agg_list) {
        for (int threads : threads_list) {
          CommonOptions o = base;
          o.levels = levels;
          o.agg = agg;
          o.threads = threads;
          std::ostringstream prefix;
          prefix << name << ',' << o.r << ',' << o.s << ',' << levels << ',' << agg << ','
                 << threads;
          try {
            PeelConfig cfg = to_config(o);
            PeelResult res = nucleus_decomposition(g, cfg);
            uint64_t bytes = res.table->memory_report().key_bytes;
            for (auto [phase, secs] :
                 std::initializer_list<std::pair<const char*, double>>{
                     {"orient", res.seconds.orient},
                     {"build", res.seconds.build},
                     {"count", res.seconds.count},
                     {"peel", res.seconds.peel}})
              *out << prefix.str() << ',' << phase << ',' << secs << ',' << bytes << "\n";
          } catch (const std::exception& e) {
            *out << prefix.str() << ",error,0,0\n";
            std::cerr << "bench " << prefix.str() << " failed: " << e.what() << "\n";
          }
        }
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"(r,s) nucleus decomposition"};
  app.require_subcommand(1);

  // decompose
  CommonOptions dec_opts;
  std::string dec_input, cores_out;
  bool with_vertices = false;
  auto* dec = app.add_subcommand("decompose", "peel a graph and print a JSON report");
  dec->add_option("--input", dec_input, "edge list or binary cache")->required();
  add_common_flags(dec, dec_opts);
  dec->add_option("--cores-out", cores_out, "write index,core CSV here");
  dec->add_flag("--with-vertices", with_vertices, "append clique vertices to the CSV");

  // validate
  std::string val_input;
  std::vector<std::string> random_spec;
  int max_s = 5;
  uint64_t val_seed = 1;
  int val_threads = 0;
  bool inject = false;
  auto* val = app.add_subcommand("validate", "compare every configuration to the oracle");
  val->add_option("--input", val_input, "edge list (n <= oracle cap)");
  val->add_option("--random", random_spec, "random instances: N P COUNT")->expected(3);
  val->add_option("--max-s", max_s, "check all r < s <= max-s")->check(CLI::Range(2, 6));
  val->add_option("--seed", val_seed, "seed for --random");
  val->add_option("--threads", val_threads, "max worker threads");
  val->add_flag("--inject-corruption", inject, "negative control: corrupt one core");

  // gen-rmat
  RmatParams rmat;
  std::string rmat_out;
  bool rmat_binary = false;
  auto* gen = app.add_subcommand("gen-rmat", "write a synthetic edge list");
  gen->add_option("--scale", rmat.scale, "n = 2^scale")->required();
  gen->add_option("--edge-factor", rmat.edge_factor, "sampled pairs per vertex");
  gen->add_option("--a", rmat.a, "quadrant probability a");
  gen->add_option("--b", rmat.b, "quadrant probability b");
  gen->add_option("--c", rmat.c, "quadrant probability c");
  gen->add_option("--d", rmat.d, "quadrant probability d");
  gen->add_option("--seed", rmat.seed, "generator seed");
  gen->add_option("--output", rmat_out, "output path")->required();
  gen->add_flag("--binary", rmat_binary, "write the binary cache format");

  // bench
  CommonOptions bench_opts;
  std::vector<std::string> bench_inputs;
  std::string bench_rmat, bench_out;
  std::vector<int> threads_list{1, omp_get_max_threads()};
  std::vector<int> levels_list{2};
  std::vector<std::string> agg_list{"list-buffer"};
  auto* bench = app.add_subcommand("bench", "configuration sweep, CSV timings");
  bench->add_option("--input", bench_inputs, "graph files");
  bench->add_option("--rmat", bench_rmat, "generate rmat SCALE[:EDGE_FACTOR]");
  add_common_flags(bench, bench_opts);
  bench->add_option("--threads-list", threads_list, "thread counts to sweep");
  bench->add_option("--levels-list", levels_list, "table levels to sweep");
  bench->add_option("--agg-list", agg_list, "aggregation strategies to sweep");
  bench->add_option("--output", bench_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
    if (dec->parsed()) return cmd_decompose(dec_opts, dec_input, cores_out, with_vertices);
    if (gen->parsed()) return cmd_gen_rmat(rmat, rmat_out, rmat_binary);
    if (bench->parsed())
      return cmd_bench(bench_inputs, bench_rmat, bench_opts, threads_list, levels_list,
                       agg_list, bench_out);
    if (val->parsed()) {
      if (val_threads > 0) omp_set_num_threads(val_threads);
      ValidateStats stats;
      if (!val_input.empty())
        validate_graph(load_graph(val_input), val_input, max_s, inject, stats);
      if (!random_spec.empty()) {
        uint32_t n = static_cast<uint32_t>(std::stoul(random_spec[0]));
        double p = std::stod(random_spec[1]);
        uint64_t count = std::stoull(random_spec[2]);
        for (uint64_t i = 0; i < count; i++) {
          std::vector<std::pair<VertexId, VertexId>> pairs;
          uint64_t state = mix64(val_seed + i);
          for (uint32_t u = 0; u < n; u++)
            for (uint32_t v = u + 1; v < n; v++) {
              state = mix64(state);
              if (static_cast<double>(state >> 11) * 0x1.0p-53 < p) pairs.push_back({u, v});
            }
          validate_graph(build_graph(n, std::move(pairs)), "random-" + std::to_string(i),
                         max_s, inject && i == 0, stats);
        }
      }
      std::cout << "validate: " << stats.cases - stats.mismatches << "/" << stats.cases
                << " configurations match the oracle\n";
      return stats.mismatches == 0 ? 0 : 1;
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
