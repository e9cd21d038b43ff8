#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "nucleus/graph.hpp"
#include "nucleus/oracle.hpp"

using namespace nucleus;

namespace {

void check_invariants(const UndirectedGraph& g) {
  REQUIRE(g.offsets.size() == g.n + 1);
  REQUIRE(g.offsets[g.n] == 2 * g.m);
  for (uint32_t v = 0; v < g.n; v++) {
    auto nbrs = g.neighbors_of(v);
    for (size_t i = 0; i < nbrs.size(); i++) {
      CHECK(nbrs[i] != v);  // no self-loops
      if (i > 0) CHECK(nbrs[i - 1] < nbrs[i]);
      CHECK(g.has_edge(nbrs[i], v));  // symmetry
    }
  }
}

// Max over all removal prefixes of the removed vertex's residual degree,
// computed by replaying an arbitrary-order exhaustive search (independent of
// the bucket-queue implementation).
uint32_t brute_degeneracy(const UndirectedGraph& g) {
  std::vector<uint8_t> removed(g.n, 0);
  std::vector<uint32_t> deg(g.n);
  for (uint32_t v = 0; v < g.n; v++) deg[v] = static_cast<uint32_t>(g.degree(v));
  uint32_t worst = 0;
  for (uint32_t step = 0; step < g.n; step++) {
    uint32_t best = g.n;
    for (uint32_t v = 0; v < g.n; v++)
      if (!removed[v] && (best == g.n || deg[v] < deg[best])) best = v;
    worst = std::max(worst, deg[best]);
    removed[best] = 1;
    for (VertexId w : g.neighbors_of(best))
      if (!removed[w]) deg[w]--;
  }
  return worst;
}

}  // namespace

TEST_CASE("parse: triangle") {
  auto g = parse_edge_list(std::string("0 1\n1 2\n2 0\n"));
  CHECK(g.n == 3);
  CHECK(g.m == 3);
  check_invariants(g);
}

TEST_CASE("parse: comments, duplicates, self-loops") {
  auto g = parse_edge_list(std::string("# c\n5 5\n5 6\n6 5\n"));
  CHECK(g.n == 2);
  CHECK(g.m == 1);
}

TEST_CASE("parse: first-appearance densification") {
  auto g = parse_edge_list(std::string("9 4\n9 7\n"));
  // 9 -> 0, 4 -> 1, 7 -> 2
  CHECK(g.n == 3);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(0, 2));
  CHECK(!g.has_edge(1, 2));
}

TEST_CASE("parse: worked example graph") {
  auto g = fixtures::example_graph();
  CHECK(g.n == 7);
  CHECK(g.m == 15);
  CHECK(brute_cliques(g, 3).size() == 14);
  check_invariants(g);
}

TEST_CASE("parse: errors carry line numbers") {
  CHECK_THROWS_AS(parse_edge_list(std::string("0 1\nx 2\n")), ParseError);
  try {
    parse_edge_list(std::string("0 1\n\n2\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line_number == 3);
  }
  CHECK_THROWS_AS(parse_edge_list(std::string("1 2 3\n")), ParseError);
}

TEST_CASE("parse: empty input gives the empty graph") {
  auto g = parse_edge_list(std::string(""));
  CHECK(g.n == 0);
  CHECK(g.m == 0);
}

TEST_CASE("serialize round-trip is exact") {
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    // start from a parsed graph: parse -> serialize -> parse must be identity
    std::ostringstream seed_text;
    serialize_edge_list(fixtures::gnp(20, 0.3, seed), seed_text);
    auto g = parse_edge_list(seed_text.str());
    std::ostringstream out;
    serialize_edge_list(g, out);
    auto h = parse_edge_list(out.str());
    CHECK(g.n == h.n);
    CHECK(g.m == h.m);
    CHECK(g.offsets == h.offsets);
    CHECK(g.neighbors == h.neighbors);
  }
}

TEST_CASE("binary cache round-trip") {
  auto g = fixtures::example_graph();
  auto path = std::filesystem::temp_directory_path() / "nucleus_cache_test.bin";
  save_binary(g, path.string());
  auto h = load_graph(path.string());
  CHECK(g.offsets == h.offsets);
  CHECK(g.neighbors == h.neighbors);
  std::filesystem::remove(path);
}

TEST_CASE("rmat: parameter validation") {
  RmatParams p;
  p.a = 0.6;  // sum : = 1.1
  CHECK_THROWS_AS(generate_rmat(p), ParameterError);
  p = RmatParams{};
  p.scale = 0;
  CHECK_THROWS_AS(generate_rmat(p), ParameterError);
}

TEST_CASE("rmat: size bounds") {
  RmatParams p;
  p.scale = 1;
  p.edge_factor = 1;
  auto g = generate_rmat(p);
  CHECK(g.n <= 2);
  CHECK(g.m <= 1);

  p = RmatParams{};
  p.scale = 10;
  p.edge_factor = 16;
  auto h = generate_rmat(p);
  CHECK(h.m <= 16384);
  check_invariants(h);
}

TEST_CASE("rmat: deterministic per seed") {
  RmatParams p;
  p.scale = 8;
  p.seed = 42;
  auto g1 = generate_rmat(p);
  auto g2 = generate_rmat(p);
  CHECK(g1.offsets == g2.offsets);
  CHECK(g1.neighbors == g2.neighbors);
  p.seed = 43;
  auto g3 = generate_rmat(p);
  CHECK(g1.neighbors != g3.neighbors);
}

TEST_CASE("degeneracy order: forests, cliques, example") {
  CHECK(degeneracy_order(fixtures::path_graph(4)).degeneracy == 1);
  CHECK(degeneracy_order(fixtures::complete_graph(5)).degeneracy == 4);
  auto g = fixtures::example_graph();
  CHECK(degeneracy_order(g).degeneracy == 4);
  CHECK(degeneracy_order(g).degeneracy == brute_degeneracy(g));
}

TEST_CASE("degeneracy order: min-degree removal replay") {
  for (uint64_t seed : {7, 8, 9}) {
    auto g = fixtures::gnp(25, 0.3, seed);
    auto ord = degeneracy_order(g);
    std::vector<VertexId> by_pos(g.n);
    for (uint32_t v = 0; v < g.n; v++) by_pos[ord.position[v]] = v;
    std::vector<uint32_t> deg(g.n);
    std::vector<uint8_t> removed(g.n, 0);
    for (uint32_t v = 0; v < g.n; v++) deg[v] = static_cast<uint32_t>(g.degree(v));
    for (VertexId v : by_pos) {
      for (uint32_t u = 0; u < g.n; u++)
        if (!removed[u]) CHECK(deg[v] <= deg[u]);
      removed[v] = 1;
      for (VertexId w : g.neighbors_of(v))
        if (!removed[w]) deg[w]--;
    }
    CHECK(ord.degeneracy == brute_degeneracy(g));
  }
}

TEST_CASE("orient: triangle and K5") {
  auto tri = parse_edge_list(std::string("0 1\n1 2\n2 0\n"));
  auto dg = orient(tri, degeneracy_order(tri));
  uint64_t total = 0;
  for (uint32_t v = 0; v < 3; v++) {
    CHECK(dg.out_degree(v) <= 2);
    total += dg.out_degree(v);
  }
  CHECK(total == 3);

  auto k5 = fixtures::complete_graph(5);
  auto dk = orient(k5, degeneracy_order(k5));
  std::multiset<uint64_t> degs;
  for (uint32_t v = 0; v < 5; v++) degs.insert(dk.out_degree(v));
  CHECK(degs == std::multiset<uint64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("orient: example bounded by degeneracy, symmetrizes back") {
  auto g = fixtures::example_graph();
  auto ord = degeneracy_order(g);
  auto dg = orient(g, ord);
  CHECK(dg.max_out_degree <= ord.degeneracy);

  // acyclic + out-lists rank-sorted + symmetrization reproduces g
  std::set<std::pair<VertexId, VertexId>> edges;
  for (uint32_t u = 0; u < g.n; u++) {
    uint32_t prev_rank = 0;
    bool first = true;
    for (VertexId v : dg.out_neighbors_of(u)) {
      CHECK(ord.position[u] < ord.position[v]);
      if (!first) CHECK(prev_rank < ord.position[v]);
      prev_rank = ord.position[v];
      first = false;
      edges.insert({std::min(u, v), std::max(u, v)});
    }
  }
  CHECK(edges.size() == g.m);
  for (auto [u, v] : edges) CHECK(g.has_edge(u, v));
}

TEST_CASE("relabel: identity and isomorphism") {
  auto g = fixtures::example_graph();
  Ordering id;
  id.position.resize(g.n);
  for (uint32_t v = 0; v < g.n; v++) id.position[v] = v;
  auto same = relabel(g, id);
  CHECK(same.neighbors == g.neighbors);

  auto ord = degeneracy_order(g);
  auto h = relabel(g, ord);
  CHECK(h.n == g.n);
  CHECK(h.m == g.m);
  CHECK(brute_cliques(h, 3).size() == 14);

  // degree multiset and clique counts are label-invariant
  for (uint64_t seed : {11, 12}) {
    auto r = fixtures::gnp(18, 0.4, seed);
    auto rr = relabel(r, degeneracy_order(r));
    std::multiset<uint64_t> d1, d2;
    for (uint32_t v = 0; v < r.n; v++) {
      d1.insert(r.degree(v));
      d2.insert(rr.degree(v));
    }
    CHECK(d1 == d2);
    for (int c = 2; c <= 5; c++)
      CHECK(brute_cliques(r, c).size() == brute_cliques(rr, c).size());
  }
}

TEST_CASE("relabel then orient with identity matches orient up to renaming") {
  auto g = fixtures::example_graph();
  auto ord = degeneracy_order(g);
  auto dg = orient(g, ord);
  auto h = relabel(g, ord);
  Ordering id;
  id.position.resize(h.n);
  for (uint32_t v = 0; v < h.n; v++) id.position[v] = v;
  auto dh = orient(h, id);
  for (uint32_t v = 0; v < g.n; v++)
    CHECK(dg.out_degree(v) == dh.out_degree(ord.position[v]));
}

TEST_CASE("contract: no peeled edges leaves the graph unchanged") {
  auto g = fixtures::example_graph();
  std::vector<uint64_t> loss(g.n, 0);
  auto h = contract(g, [](VertexId, VertexId) { return true; }, loss);
  CHECK(h.neighbors == g.neighbors);
}

TEST_CASE("contract: fully peeled vertex empties its list") {
  auto g = fixtures::example_graph();
  std::vector<uint64_t> loss(g.n, 0);
  loss[6] = 2;  // g lost both edges
  auto h = contract(g, [](VertexId u, VertexId v) { return u != 6 && v != 6; }, loss);
  CHECK(h.offsets[7] - h.offsets[6] == 0);
}

TEST_CASE("contract: example after peeling g's edges") {
  auto g = fixtures::example_graph();
  std::vector<uint64_t> loss(g.n, 0);
  loss[6] = 2;
  loss[2] = 1;
  loss[3] = 1;
  auto alive = [](VertexId u, VertexId v) { return u != 6 && v != 6; };
  auto h = contract(g, alive, loss);
  // g rebuilt (lost 2 of 2); c and d lost 1 of 5, untouched
  CHECK(h.offsets[7] - h.offsets[6] == 0);
  CHECK(h.offsets[3] - h.offsets[2] == g.degree(2));
  for (uint32_t v = 0; v < h.n; v++) {
    auto nbrs = std::span<const VertexId>(h.neighbors.data() + h.offsets[v],
                                          h.neighbors.data() + h.offsets[v + 1]);
    CHECK(std::is_sorted(nbrs.begin(), nbrs.end()));
  }
  // mutual-adjacency triangle recount drops cdg
  auto mutual = [&](VertexId u, VertexId v) {
    auto a = std::span<const VertexId>(h.neighbors.data() + h.offsets[u],
                                       h.neighbors.data() + h.offsets[u + 1]);
    auto b = std::span<const VertexId>(h.neighbors.data() + h.offsets[v],
                                       h.neighbors.data() + h.offsets[v + 1]);
    return std::binary_search(a.begin(), a.end(), v) && std::binary_search(b.begin(), b.end(), u);
  };
  uint64_t triangles = 0;
  for (uint32_t u = 0; u < h.n; u++)
    for (uint32_t v = u + 1; v < h.n; v++)
      for (uint32_t w = v + 1; w < h.n; w++)
        if (mutual(u, v) && mutual(u, w) && mutual(v, w)) triangles++;
  CHECK(triangles == 13);
}
