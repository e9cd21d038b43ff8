#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "nucleus/aggregator.hpp"
#include "nucleus/bucketing.hpp"
#include "nucleus/clique_table.hpp"
#include "nucleus/graph.hpp"

namespace nucleus {

struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

uint64_t binomial(int n, int k);

// Fixed-point scale L = lcm(1..binomial(s, r)). Counts are stored as
// multiples of 1/L, so the per-round decrement of 1/a is exact for every
// a in 1..binomial(s, r).
struct FixedPoint {
  int64_t scale = 1;
  static FixedPoint for_params(int r, int s);
};

enum class OrientationKind { Degeneracy, Degree };

// Observes every count decrement and round boundary; used by the
// conservation checks on small graphs. Implementations must tolerate
// concurrent on_decrement calls.
struct Instrumentation {
  virtual ~Instrumentation() = default;
  // s_clique: s vertices (original ids, rank order); r_idx: decremented index.
  virtual void on_decrement(std::span<const VertexId> s_clique, uint64_t r_idx,
                            int64_t delta) = 0;
  virtual void on_round_end(uint32_t round) { (void)round; }
};

struct PeelConfig {
  int r = 2;
  int s = 3;
  TableConfig table;
  AggregatorKind aggregator = AggregatorKind::ListBuffer;
  BucketKind bucket = BucketKind::OpenBucket;
  OrientationKind orientation = OrientationKind::Degeneracy;
  bool relabel = true;
  bool contract = false;  // (2,3) only
  double contract_edge_factor = 2.0;   // trigger: peeled edges >= factor * n
  double contract_loss_fraction = 0.25;
  int list_buffer_block = 64;
  int threads = 0;  // 0 keeps the ambient OpenMP setting
  bool check_invariants = false;
  Instrumentation* instrumentation = nullptr;
};

struct PhaseTimes {
  double orient = 0, build = 0, count = 0, peel = 0;
};

struct PeelResult {
  uint64_t total_cliques = 0;
  std::vector<uint32_t> core;  // per clique index
  uint32_t rho = 0;
  uint32_t max_core = 0;
  std::vector<uint32_t> extracted_values;  // one per round, non-decreasing
  PhaseTimes seconds;
  int64_t fixed_point_scale = 1;
  PeelConfig config;
  std::shared_ptr<const CliqueTable> table;
  std::vector<VertexId> to_original;  // inverse relabel map; empty = identity

  // The r-clique behind an index, as sorted original vertex ids.
  void clique_of(uint64_t idx, VertexId* out) const;
};

// Fills `table` (built for r-cliques, counts all zero) with s-clique counts:
// every size-r subset of every s-clique gains one whole unit (scale L).
void count_phase(const DirectedGraph& dg, CliqueTable& table, int s, int64_t L);

// Algorithm: orient (optionally relabel), build the count table, count
// s-cliques per r-clique, then peel minimum buckets round by round until
// every r-clique is finished.
PeelResult nucleus_decomposition(const UndirectedGraph& g, const PeelConfig& cfg);

// Canonical clique -> core map: (sorted original vertex tuple, core number),
// sorted; equal across every configuration of the same decomposition.
std::vector<std::pair<std::vector<VertexId>, uint32_t>> canonical_cores(const PeelResult& res);

std::map<uint32_t, uint64_t> core_histogram(const PeelResult& res);

}  // namespace nucleus
