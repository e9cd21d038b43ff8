#pragma once

#include <algorithm>

#include "nucleus/parallel.hpp"

namespace nucleus {

template <class AlivePred>
UndirectedGraph contract(const UndirectedGraph& g, AlivePred&& alive_edge,
                         const std::vector<uint64_t>& per_vertex_loss) {
  UndirectedGraph out;
  out.n = g.n;
  out.offsets.assign(g.n + 1, 0);

  std::vector<uint8_t> rebuild(g.n, 0);
  parallel_for(0, g.n, [&](uint64_t v) {
    uint64_t deg = g.degree(static_cast<VertexId>(v));
    rebuild[v] = (deg > 0 && 4 * per_vertex_loss[v] >= deg) ? 1 : 0;
  });

  std::vector<uint64_t> new_deg(g.n, 0);
  parallel_for(0, g.n, [&](uint64_t vi) {
    auto v = static_cast<VertexId>(vi);
    if (!rebuild[vi]) {
      new_deg[vi] = g.degree(v);
      return;
    }
    uint64_t kept = 0;
    for (VertexId w : g.neighbors_of(v))
      if (alive_edge(v, w)) kept++;
    new_deg[vi] = kept;
  });

  for (uint32_t v = 0; v < g.n; v++) out.offsets[v + 1] = out.offsets[v] + new_deg[v];
  out.neighbors.resize(out.offsets[g.n]);
  out.m = 0;  // directed slots / 2 is not meaningful once lists diverge; recompute below

  parallel_for(0, g.n, [&](uint64_t vi) {
    auto v = static_cast<VertexId>(vi);
    uint64_t pos = out.offsets[vi];
    if (!rebuild[vi]) {
      for (VertexId w : g.neighbors_of(v)) out.neighbors[pos++] = w;
      return;
    }
    for (VertexId w : g.neighbors_of(v))
      if (alive_edge(v, w)) out.neighbors[pos++] = w;
  });
  out.m = out.neighbors.size() / 2;
  return out;
}

}  // namespace nucleus
