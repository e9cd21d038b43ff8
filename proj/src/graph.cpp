#include "nucleus/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "nucleus/parallel.hpp"

namespace nucleus {

bool UndirectedGraph::has_edge(VertexId u, VertexId v) const {
  auto nbrs = neighbors_of(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

UndirectedGraph build_graph(uint32_t n, std::vector<std::pair<VertexId, VertexId>> pairs) {
  // Symmetrize, then sort/unique once.
  size_t k = pairs.size();
  pairs.reserve(2 * k);
  for (size_t i = 0; i < k; i++) {
    auto [u, v] = pairs[i];
    if (u == v) continue;
    pairs.push_back({v, u});
  }
  pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                             [](const auto& e) { return e.first == e.second; }),
              pairs.end());
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  UndirectedGraph g;
  g.n = n;
  g.offsets.assign(n + 1, 0);
  for (const auto& [u, v] : pairs) {
    if (u >= n || v >= n) throw ParameterError("edge endpoint out of range");
    g.offsets[u + 1]++;
  }
  for (uint32_t v = 0; v < n; v++) g.offsets[v + 1] += g.offsets[v];
  g.neighbors.resize(pairs.size());
  for (size_t i = 0; i < pairs.size(); i++) g.neighbors[i] = pairs[i].second;
  g.m = pairs.size() / 2;
  return g;
}

UndirectedGraph parse_edge_list(std::istream& in) {
  std::vector<std::pair<VertexId, VertexId>> pairs;
  std::unordered_map<uint64_t, VertexId> dense;
  auto densify = [&](uint64_t raw) {
    auto [it, inserted] = dense.try_emplace(raw, static_cast<VertexId>(dense.size()));
    return it->second;
  };

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) i++;
    if (i == line.size() || line[i] == '#') continue;

    uint64_t vals[2];
    int got = 0;
    while (i < line.size() && got < 2) {
      if (!std::isdigit(static_cast<unsigned char>(line[i])))
        throw ParseError(line_no, "expected non-negative integer");
      uint64_t x = 0;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
        x = x * 10 + (line[i] - '0');
        if (x > 0xffffffffULL) throw ParseError(line_no, "vertex id out of range");
        i++;
      }
      vals[got++] = x;
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) i++;
    }
    if (got != 2 || i != line.size()) throw ParseError(line_no, "expected two vertex ids");
    VertexId u = densify(vals[0]);
    VertexId v = densify(vals[1]);
    pairs.emplace_back(u, v);
  }
  return build_graph(static_cast<uint32_t>(dense.size()), std::move(pairs));
}

UndirectedGraph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  return parse_edge_list(in);
}

void serialize_edge_list(const UndirectedGraph& g, std::ostream& out) {
  // Emit edges so that vertex ids first appear in ascending order; re-parsing
  // then densifies to the identity. A parsed graph guarantees each vertex
  // either has a smaller neighbor or carries the edge (v, v+1) from the line
  // that introduced it.
  std::vector<uint8_t> introduced(g.n, 0);
  std::set<std::pair<VertexId, VertexId>> intro_edges;
  for (uint32_t v = 0; v < g.n; v++) {
    if (introduced[v] || g.degree(v) == 0) continue;
    auto nbrs = g.neighbors_of(v);
    if (nbrs.front() < v) {
      out << nbrs.front() << ' ' << v << '\n';
      intro_edges.insert({nbrs.front(), v});
    } else {
      // No smaller neighbor: introduce v together with its partner.
      VertexId w = g.has_edge(v, v + 1) ? v + 1 : nbrs.front();
      out << v << ' ' << w << '\n';
      intro_edges.insert({v, w});
      introduced[w] = 1;
    }
    introduced[v] = 1;
  }
  for (uint32_t u = 0; u < g.n; u++)
    for (VertexId v : g.neighbors_of(u)) {
      if (v <= u) continue;
      if (intro_edges.count({u, v}) || intro_edges.count({v, u})) continue;
      out << u << ' ' << v << '\n';
    }
}

namespace {
constexpr char kBinaryMagic[9] = {'N', 'U', 'C', 'G', 'R', 'A', 'P', 'H', '1'};
}

void save_binary(const UndirectedGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kBinaryMagic, sizeof(kBinaryMagic));
  uint64_t n = g.n, m = g.m;
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&m), sizeof(m));
  out.write(reinterpret_cast<const char*>(g.offsets.data()),
            static_cast<std::streamsize>(g.offsets.size() * sizeof(uint64_t)));
  out.write(reinterpret_cast<const char*>(g.neighbors.data()),
            static_cast<std::streamsize>(g.neighbors.size() * sizeof(VertexId)));
  if (!out) throw IoError("write failed: " + path);
}

UndirectedGraph load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[sizeof(kBinaryMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBinaryMagic, sizeof(magic)) != 0)
    throw IoError("not a graph cache file: " + path);
  uint64_t n = 0, m = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&m), sizeof(m));
  UndirectedGraph g;
  g.n = static_cast<uint32_t>(n);
  g.m = m;
  g.offsets.resize(n + 1);
  g.neighbors.resize(2 * m);
  in.read(reinterpret_cast<char*>(g.offsets.data()),
          static_cast<std::streamsize>(g.offsets.size() * sizeof(uint64_t)));
  in.read(reinterpret_cast<char*>(g.neighbors.data()),
          static_cast<std::streamsize>(g.neighbors.size() * sizeof(VertexId)));
  if (!in) throw IoError("truncated graph cache: " + path);
  return g;
}

UndirectedGraph load_graph(const std::string& path) {
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[sizeof(kBinaryMagic)];
    in.read(magic, sizeof(magic));
    if (in && std::memcmp(magic, kBinaryMagic, sizeof(magic)) == 0) return load_binary(path);
  }
  std::ifstream in(path);
  return parse_edge_list(in);
}

namespace {

// splitmix64: deterministic per-stream mixer, one independent stream per edge.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

UndirectedGraph generate_rmat(const RmatParams& p) {
  if (p.scale < 1) throw ParameterError("rmat scale must be >= 1");
  if (p.edge_factor < 1) throw ParameterError("rmat edge_factor must be >= 1");
  double sum = p.a + p.b + p.c + p.d;
  if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("rmat probabilities must sum to 1");
  if (p.a < 0 || p.b < 0 || p.c < 0 || p.d < 0)
    throw ParameterError("rmat probabilities must be non-negative");

  const uint64_t n = 1ULL << p.scale;
  const uint64_t num_pairs = static_cast<uint64_t>(p.edge_factor) * n;
  const double ab = p.a + p.b;
  const double abc = ab + p.c;

  std::vector<std::pair<VertexId, VertexId>> pairs(num_pairs);
  parallel_for(0, num_pairs, [&](uint64_t i) {
    uint64_t state = mix64(p.seed ^ (i * 0x7fb5d329728ea185ULL + 0x1234567ULL));
    uint64_t u = 0, v = 0;
    for (int bit = 0; bit < p.scale; bit++) {
      state = mix64(state);
      double x = static_cast<double>(state >> 11) * 0x1.0p-53;
      u <<= 1;
      v <<= 1;
      if (x >= ab) u |= 1;                            // quadrant c or d
      if ((x >= p.a && x < ab) || x >= abc) v |= 1;   // quadrant b or d
    }
    pairs[i] = {static_cast<VertexId>(u), static_cast<VertexId>(v)};
  }, 2048);

  return build_graph(static_cast<uint32_t>(n), std::move(pairs));
}

Ordering degeneracy_order(const UndirectedGraph& g) {
  Ordering ord;
  ord.position.assign(g.n, 0);
  std::vector<uint32_t> deg(g.n);
  std::set<std::pair<uint32_t, VertexId>> queue;  // (degree, id): min-degree, smallest-id first
  for (uint32_t v = 0; v < g.n; v++) {
    deg[v] = static_cast<uint32_t>(g.degree(v));
    queue.insert({deg[v], v});
  }
  std::vector<uint8_t> removed(g.n, 0);
  for (uint32_t step = 0; step < g.n; step++) {
    auto [d, v] = *queue.begin();
    queue.erase(queue.begin());
    removed[v] = 1;
    ord.position[v] = step;
    ord.degeneracy = std::max(ord.degeneracy, d);
    for (VertexId w : g.neighbors_of(v)) {
      if (removed[w]) continue;
      queue.erase({deg[w], w});
      deg[w]--;
      queue.insert({deg[w], w});
    }
  }
  return ord;
}

Ordering degree_order(const UndirectedGraph& g) {
  std::vector<VertexId> by_degree(g.n);
  for (uint32_t v = 0; v < g.n; v++) by_degree[v] = v;
  std::sort(by_degree.begin(), by_degree.end(), [&](VertexId a, VertexId b) {
    auto da = g.degree(a), db = g.degree(b);
    return da != db ? da < db : a < b;
  });
  Ordering ord;
  ord.position.assign(g.n, 0);
  for (uint32_t i = 0; i < g.n; i++) ord.position[by_degree[i]] = i;
  // The degeneracy field still reports the true peel bound for diagnostics.
  ord.degeneracy = g.n == 0 ? 0 : degeneracy_order(g).degeneracy;
  return ord;
}

DirectedGraph orient(const UndirectedGraph& g, const Ordering& ord) {
  if (ord.position.size() != g.n) throw ParameterError("ordering does not match graph");
  DirectedGraph dg;
  dg.n = g.n;
  dg.rank = ord.position;
  dg.out_offsets.assign(g.n + 1, 0);

  std::vector<uint64_t> outdeg(g.n, 0);
  parallel_for(0, g.n, [&](uint64_t vi) {
    auto v = static_cast<VertexId>(vi);
    uint64_t d = 0;
    for (VertexId w : g.neighbors_of(v))
      if (ord.position[v] < ord.position[w]) d++;
    outdeg[vi] = d;
  });
  for (uint32_t v = 0; v < g.n; v++) dg.out_offsets[v + 1] = dg.out_offsets[v] + outdeg[v];
  dg.out_neighbors.resize(dg.out_offsets[g.n]);

  parallel_for(0, g.n, [&](uint64_t vi) {
    auto v = static_cast<VertexId>(vi);
    uint64_t pos = dg.out_offsets[vi];
    for (VertexId w : g.neighbors_of(v))
      if (ord.position[v] < ord.position[w]) dg.out_neighbors[pos++] = w;
    std::sort(dg.out_neighbors.begin() + dg.out_offsets[vi],
              dg.out_neighbors.begin() + pos,
              [&](VertexId a, VertexId b) { return ord.position[a] < ord.position[b]; });
  });

  uint32_t maxd = 0;
  for (uint32_t v = 0; v < g.n; v++) maxd = std::max<uint32_t>(maxd, static_cast<uint32_t>(outdeg[v]));
  dg.max_out_degree = maxd;
  return dg;
}

UndirectedGraph relabel(const UndirectedGraph& g, const Ordering& ord) {
  if (ord.position.size() != g.n) throw ParameterError("ordering does not match graph");
  UndirectedGraph out;
  out.n = g.n;
  out.m = g.m;
  out.offsets.assign(g.n + 1, 0);
  for (uint32_t v = 0; v < g.n; v++) out.offsets[ord.position[v] + 1] = g.degree(v);
  for (uint32_t v = 0; v < g.n; v++) out.offsets[v + 1] += out.offsets[v];
  out.neighbors.resize(g.neighbors.size());
  parallel_for(0, g.n, [&](uint64_t vi) {
    auto v = static_cast<VertexId>(vi);
    uint64_t pos = out.offsets[ord.position[v]];
    uint64_t begin = pos;
    for (VertexId w : g.neighbors_of(v)) out.neighbors[pos++] = ord.position[w];
    std::sort(out.neighbors.begin() + begin, out.neighbors.begin() + pos);
  });
  return out;
}

}  // namespace nucleus
