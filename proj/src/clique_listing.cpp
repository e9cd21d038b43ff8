#include "nucleus/clique_listing.hpp"

#include <atomic>

namespace nucleus {

uint64_t count_cliques(const UndirectedGraph& g, int c) {
  if (c < 1) throw ParameterError("clique size must be >= 1");
  if (c == 1) return g.n;
  if (c == 2) return g.m;
  DirectedGraph dg = orient(g, degeneracy_order(g));
  std::atomic<uint64_t> total{0};
  list_cliques_parallel(dg, c, [&](std::span<const VertexId>) {
    total.fetch_add(1, std::memory_order_relaxed);
  });
  return total.load();
}

}  // namespace nucleus
