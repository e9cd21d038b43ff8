#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nucleus {

using VertexId = uint32_t;

struct ParseError : std::runtime_error {
  ParseError(size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  size_t line_number;
};

struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simple undirected graph in CSR form. Adjacency lists are sorted, free of
// duplicates and self-loops, and symmetric; offsets[n] == 2m.
struct UndirectedGraph {
  uint32_t n = 0;
  uint64_t m = 0;
  std::vector<uint64_t> offsets;   // n + 1
  std::vector<VertexId> neighbors; // 2m

  std::span<const VertexId> neighbors_of(VertexId v) const {
    return {neighbors.data() + offsets[v], neighbors.data() + offsets[v + 1]};
  }
  uint64_t degree(VertexId v) const { return offsets[v + 1] - offsets[v]; }
  bool has_edge(VertexId u, VertexId v) const;
};

// Total vertex order; position[v] is v's rank in the removal order.
struct Ordering {
  std::vector<uint32_t> position;
  uint32_t degeneracy = 0;
};

// Acyclic orientation of a graph: edges point from low rank to high rank.
// Out-adjacency lists are sorted by rank.
struct DirectedGraph {
  uint32_t n = 0;
  std::vector<uint32_t> rank;  // == ordering.position
  std::vector<uint64_t> out_offsets;
  std::vector<VertexId> out_neighbors;
  uint32_t max_out_degree = 0;

  std::span<const VertexId> out_neighbors_of(VertexId v) const {
    return {out_neighbors.data() + out_offsets[v], out_neighbors.data() + out_offsets[v + 1]};
  }
  uint64_t out_degree(VertexId v) const { return out_offsets[v + 1] - out_offsets[v]; }
};

// Builds a graph from raw (possibly duplicated, self-looped) edge pairs.
// Vertex ids are used as given; n must exceed every id in `pairs`.
UndirectedGraph build_graph(uint32_t n, std::vector<std::pair<VertexId, VertexId>> pairs);

// Whitespace-separated "u v" lines, '#' comments. Vertex ids are densified to
// 0..n-1 in first-appearance order; duplicates and self-loops dropped.
UndirectedGraph parse_edge_list(std::istream& in);
UndirectedGraph parse_edge_list(const std::string& text);

// Writes one "u v" line per edge with u < v, sorted. Parsing the output
// reproduces the graph exactly (every vertex of a parsed graph has degree > 0,
// so densification is the identity).
void serialize_edge_list(const UndirectedGraph& g, std::ostream& out);

// Versioned binary cache ("NUCGRAPH1" header).
void save_binary(const UndirectedGraph& g, const std::string& path);
UndirectedGraph load_binary(const std::string& path);
// Sniffs the header and dispatches to the binary or text reader.
UndirectedGraph load_graph(const std::string& path);

struct RmatParams {
  int scale = 10;
  int edge_factor = 16;
  double a = 0.5, b = 0.1, c = 0.1, d = 0.3;
  uint64_t seed = 1;
};

// Recursive-quadrant sampler: edge_factor * 2^scale directed pairs,
// symmetrized with duplicates and self-loops removed. Deterministic per seed.
UndirectedGraph generate_rmat(const RmatParams& params);

// Min-degree peeling order (bucket queue, smallest-id tie-break). The induced
// orientation has out-degree <= degeneracy.
Ordering degeneracy_order(const UndirectedGraph& g);

// Rank by (degree, id); exposed as a cheaper alternative orientation.
Ordering degree_order(const UndirectedGraph& g);

// Keeps exactly the edges (u -> v) with position[u] < position[v].
DirectedGraph orient(const UndirectedGraph& g, const Ordering& ord);

// Renames vertex v to position[v]; the result is isomorphic to the input.
UndirectedGraph relabel(const UndirectedGraph& g, const Ordering& ord);

// Drops dead edges from the adjacency lists of vertices that lost at least a
// quarter of their neighbors (per_vertex_loss, counted since the previous
// contraction). Other lists are left untouched, so the result may be
// asymmetric; lists stay sorted.
template <class AlivePred>
UndirectedGraph contract(const UndirectedGraph& g, AlivePred&& alive_edge,
                         const std::vector<uint64_t>& per_vertex_loss);

}  // namespace nucleus

#include "nucleus/graph_impl.hpp"
