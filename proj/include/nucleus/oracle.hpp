#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "nucleus/graph.hpp"

namespace nucleus {

// Ground truth for the parallel paths: exhaustive enumeration and
// one-bucket-at-a-time peeling with a full recount every round.
// Single-threaded by construction; refuses graphs above the vertex cap.

struct OracleResult {
  std::map<std::vector<VertexId>, uint32_t> cores;  // sorted r-clique -> core
  uint32_t rho = 0;
  uint64_t s_clique_count = 0;
};

constexpr uint32_t kOracleVertexCap = 40;

// All c-cliques as sorted vertex tuples.
std::vector<std::vector<VertexId>> brute_cliques(const UndirectedGraph& g, int c,
                                                 uint32_t cap = kOracleVertexCap);

OracleResult oracle_nucleus(const UndirectedGraph& g, int r, int s,
                            uint32_t cap = kOracleVertexCap);

// Textbook k-core by repeated min-degree removal; independent of the oracle
// peel loop.
std::vector<uint32_t> kcore_reference(const UndirectedGraph& g);

}  // namespace nucleus
