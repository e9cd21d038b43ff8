#pragma once

#include <string>
#include <vector>

#include "nucleus/graph.hpp"
#include "nucleus/hashing.hpp"

namespace fixtures {

// 7-vertex worked example: K5 on {0..4} = {a..e}, f=5 adjacent to a,b,e,
// g=6 adjacent to c,d. 15 edges, 14 triangles, 6 four-cliques.
inline const char* kExampleEdges =
    "# worked example\n"
    "0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n"
    "0 5\n1 5\n4 5\n"
    "2 6\n3 6\n";

inline nucleus::UndirectedGraph example_graph() {
  return nucleus::parse_edge_list(std::string(kExampleEdges));
}

inline nucleus::UndirectedGraph complete_graph(uint32_t n) {
  std::vector<std::pair<nucleus::VertexId, nucleus::VertexId>> pairs;
  for (uint32_t u = 0; u < n; u++)
    for (uint32_t v = u + 1; v < n; v++) pairs.push_back({u, v});
  return nucleus::build_graph(n, std::move(pairs));
}

inline nucleus::UndirectedGraph path_graph(uint32_t n) {
  std::vector<std::pair<nucleus::VertexId, nucleus::VertexId>> pairs;
  for (uint32_t v = 0; v + 1 < n; v++) pairs.push_back({v, v + 1});
  return nucleus::build_graph(n, std::move(pairs));
}

// Erdos-Renyi G(n, p), deterministic per seed.
inline nucleus::UndirectedGraph gnp(uint32_t n, double p, uint64_t seed) {
  std::vector<std::pair<nucleus::VertexId, nucleus::VertexId>> pairs;
  uint64_t state = seed;
  for (uint32_t u = 0; u < n; u++)
    for (uint32_t v = u + 1; v < n; v++) {
      state = nucleus::mix64(state);
      double x = static_cast<double>(state >> 11) * 0x1.0p-53;
      if (x < p) pairs.push_back({u, v});
    }
  return nucleus::build_graph(n, std::move(pairs));
}

// Named triangle lookup for the worked example: a..g = 0..6.
inline std::vector<nucleus::VertexId> verts(std::initializer_list<int> vs) {
  std::vector<nucleus::VertexId> out;
  for (int v : vs) out.push_back(static_cast<nucleus::VertexId>(v));
  return out;
}

}  // namespace fixtures
