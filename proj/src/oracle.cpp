#include "nucleus/oracle.hpp"

#include <algorithm>
#include <limits>

namespace nucleus {

namespace {

void extend(const UndirectedGraph& g, std::vector<VertexId>& cur, int c,
            std::vector<std::vector<VertexId>>& out) {
  if (static_cast<int>(cur.size()) == c) {
    out.push_back(cur);
    return;
  }
  VertexId start = cur.empty() ? 0 : cur.back() + 1;
  for (VertexId v = start; v < g.n; v++) {
    bool ok = true;
    for (VertexId u : cur)
      if (!g.has_edge(u, v)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    cur.push_back(v);
    extend(g, cur, c, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<std::vector<VertexId>> brute_cliques(const UndirectedGraph& g, int c, uint32_t cap) {
  if (c < 1) throw ParameterError("clique size must be >= 1");
  if (g.n > cap) throw ParameterError("graph exceeds the oracle vertex cap");
  std::vector<std::vector<VertexId>> out;
  std::vector<VertexId> cur;
  extend(g, cur, c, out);
  return out;
}

OracleResult oracle_nucleus(const UndirectedGraph& g, int r, int s, uint32_t cap) {
  if (r < 1 || s <= r) throw ParameterError("need 1 <= r < s");
  auto r_cliques = brute_cliques(g, r, cap);
  auto s_cliques = brute_cliques(g, s, cap);

  OracleResult res;
  res.s_clique_count = s_cliques.size();

  std::map<std::vector<VertexId>, size_t> r_index;
  for (size_t i = 0; i < r_cliques.size(); i++) r_index[r_cliques[i]] = i;

  // Per s-clique: the indices of its size-r subsets.
  std::vector<std::vector<size_t>> members(s_cliques.size());
  std::vector<VertexId> sub(r);
  std::vector<int> pick(r);
  for (size_t si = 0; si < s_cliques.size(); si++) {
    for (int i = 0; i < r; i++) pick[i] = i;
    while (true) {
      for (int i = 0; i < r; i++) sub[i] = s_cliques[si][pick[i]];
      members[si].push_back(r_index.at(sub));
      int i = r - 1;
      while (i >= 0 && pick[i] == s - r + i) i--;
      if (i < 0) break;
      pick[i]++;
      for (int j = i + 1; j < r; j++) pick[j] = pick[j - 1] + 1;
    }
  }

  std::vector<uint8_t> r_alive(r_cliques.size(), 1);
  std::vector<uint64_t> count(r_cliques.size());
  uint64_t alive = r_cliques.size();
  uint32_t level = 0;
  std::vector<uint32_t> core(r_cliques.size(), 0);

  while (alive > 0) {
    // Full recount: an s-clique survives iff all its r-subsets survive.
    std::fill(count.begin(), count.end(), 0);
    for (size_t si = 0; si < s_cliques.size(); si++) {
      bool survives = true;
      for (size_t ri : members[si])
        if (!r_alive[ri]) {
          survives = false;
          break;
        }
      if (!survives) continue;
      for (size_t ri : members[si]) count[ri]++;
    }
    // Effective value clamps to the running level, mirroring the bucket
    // structure: a count that fell below the level peels at the level.
    uint64_t kmin = std::numeric_limits<uint64_t>::max();
    for (size_t ri = 0; ri < r_cliques.size(); ri++)
      if (r_alive[ri]) kmin = std::min(kmin, std::max<uint64_t>(count[ri], level));
    for (size_t ri = 0; ri < r_cliques.size(); ri++) {
      if (!r_alive[ri] || std::max<uint64_t>(count[ri], level) != kmin) continue;
      r_alive[ri] = 0;
      core[ri] = static_cast<uint32_t>(kmin);
      alive--;
    }
    level = static_cast<uint32_t>(kmin);
    res.rho++;
  }

  for (size_t ri = 0; ri < r_cliques.size(); ri++) res.cores[r_cliques[ri]] = core[ri];
  return res;
}

std::vector<uint32_t> kcore_reference(const UndirectedGraph& g) {
  std::vector<uint32_t> core(g.n, 0);
  std::vector<int64_t> deg(g.n);
  std::vector<uint8_t> removed(g.n, 0);
  for (uint32_t v = 0; v < g.n; v++) deg[v] = static_cast<int64_t>(g.degree(v));
  uint32_t level = 0;
  for (uint32_t step = 0; step < g.n; step++) {
    uint32_t best = g.n;
    for (uint32_t v = 0; v < g.n; v++)
      if (!removed[v] && (best == g.n || deg[v] < deg[best])) best = v;
    level = std::max<uint32_t>(level, static_cast<uint32_t>(deg[best]));
    removed[best] = 1;
    core[best] = level;
    for (VertexId w : g.neighbors_of(best))
      if (!removed[w]) deg[w]--;
  }
  return core;
}

}  // namespace nucleus
