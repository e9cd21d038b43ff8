#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "nucleus/graph.hpp"
#include "nucleus/parallel.hpp"

namespace nucleus {

// Sorted-set intersection. Both inputs must be sorted under `less`; the output
// is sorted the same way. Galloping on the larger side keeps the cost
// proportional to the smaller input.
template <class Less>
void intersect_into(std::span<const VertexId> a, std::span<const VertexId> b,
                    std::vector<VertexId>& out, Less less) {
  out.clear();
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return;
  if (b.size() >= 8 * a.size()) {
    auto lo = b.begin();
    for (VertexId x : a) {
      lo = std::lower_bound(lo, b.end(), x, less);
      if (lo == b.end()) break;
      if (!less(x, *lo)) out.push_back(x);
    }
    return;
  }
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (less(a[i], b[j])) i++;
    else if (less(b[j], a[i])) j++;
    else { out.push_back(a[i]); i++; j++; }
  }
}

inline void intersect_by_id(std::span<const VertexId> a, std::span<const VertexId> b,
                            std::vector<VertexId>& out) {
  intersect_into(a, b, out, std::less<VertexId>{});
}

// Candidate sets and out-adjacency lists are ordered by rank, so recursion
// discovers every clique exactly once, as a rank-increasing vertex chain.
struct RankLess {
  const uint32_t* rank;
  bool operator()(VertexId a, VertexId b) const { return rank[a] < rank[b]; }
};

// Per-thread scratch: one candidate buffer per recursion depth plus the
// partial clique under construction.
struct ListingScratch {
  std::vector<std::vector<VertexId>> candidates;
  std::vector<VertexId> clique;

  std::vector<VertexId>& buffer(int depth) {
    if (candidates.size() <= static_cast<size_t>(depth)) candidates.resize(depth + 1);
    return candidates[depth];
  }
};

// Sequential core of the listing recursion: extends `scratch.clique` with
// `level` more vertices drawn from the closure of `cand`, invoking f once per
// completed clique. f receives the clique vertices; candidates joined later in
// the chain always have higher rank.
template <class F>
void rec_list_cliques(const DirectedGraph& dg, std::span<const VertexId> cand, int level, F&& f,
                      ListingScratch& scratch, int depth = 0) {
  if (level == 1) {
    auto& clique = scratch.clique;
    for (VertexId v : cand) {
      clique.push_back(v);
      f(std::span<const VertexId>(clique));
      clique.pop_back();
    }
    return;
  }
  RankLess less{dg.rank.data()};
  for (VertexId v : cand) {
    auto& next = scratch.buffer(depth);
    intersect_into(cand, dg.out_neighbors_of(v), next, less);
    if (next.empty()) continue;
    scratch.clique.push_back(v);
    rec_list_cliques(dg, next, level - 1, f, scratch, depth + 1);
    scratch.clique.pop_back();
  }
}

// Lists every c-clique of the oriented graph, calling f(clique) with vertices
// in rank order. The two outermost levels are flattened into one parallel
// loop over directed edges; deeper levels run sequentially per task. f must
// tolerate concurrent invocation.
template <class F>
void list_cliques_parallel(const DirectedGraph& dg, int c, F&& f) {
  if (c < 1) throw ParameterError("clique size must be >= 1");
  if (c == 1) {
    parallel_for(0, dg.n, [&](uint64_t v) {
      VertexId vv[1] = {static_cast<VertexId>(v)};
      f(std::span<const VertexId>(vv, 1));
    }, 256);
    return;
  }
  if (c == 2) {
    parallel_for(0, dg.n, [&](uint64_t u) {
      VertexId e[2] = {static_cast<VertexId>(u), 0};
      for (VertexId v : dg.out_neighbors_of(static_cast<VertexId>(u))) {
        e[1] = v;
        f(std::span<const VertexId>(e, 2));
      }
    }, 64);
    return;
  }

  ExceptionGate gate;
#pragma omp parallel
  {
    ListingScratch scratch;
    scratch.candidates.resize(c);
    scratch.clique.reserve(c);
    RankLess less{dg.rank.data()};
#pragma omp for schedule(dynamic, 16)
    for (int64_t ui = 0; ui < static_cast<int64_t>(dg.n); ui++) {
      gate.run([&] {
        auto u = static_cast<VertexId>(ui);
        auto out_u = dg.out_neighbors_of(u);
        for (VertexId v : out_u) {
          auto& cand = scratch.buffer(0);
          intersect_into(out_u, dg.out_neighbors_of(v), cand, less);
          if (cand.empty()) continue;
          scratch.clique.assign({u, v});
          if (c == 3) {
            for (VertexId w : cand) {
              scratch.clique.push_back(w);
              f(std::span<const VertexId>(scratch.clique));
              scratch.clique.pop_back();
            }
          } else {
            rec_list_cliques(dg, cand, c - 2, f, scratch, 1);
          }
          scratch.clique.clear();
        }
      });
    }
  }
  gate.rethrow();
}

// Number of c-cliques in g. c = 1 returns n; c = 2 returns m.
uint64_t count_cliques(const UndirectedGraph& g, int c);

}  // namespace nucleus
