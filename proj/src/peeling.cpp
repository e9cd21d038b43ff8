#include "nucleus/peeling.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "nucleus/clique_listing.hpp"
#include "nucleus/parallel.hpp"

namespace nucleus {

namespace {

constexpr uint8_t kUnpeeled = 0, kPeelingNow = 1, kPeeled = 2;
constexpr int kMaxCliqueVerts = 16;
constexpr int kMaxSubsets = 64;  // binomial(s,r) is far smaller once L fits in 63 bits

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<uint32_t> subset_masks(int s, int r) {
  std::vector<uint32_t> masks;
  uint32_t m = (1u << r) - 1;
  uint32_t limit = 1u << s;
  while (m < limit) {
    masks.push_back(m);
    uint32_t c = m & -m, rest = m + c;  // Gosper's hack
    m = (((rest ^ m) >> 2) / c) | rest;
    if (c == 0) break;
  }
  return masks;
}

// Adjacency view that supports in-place list shrinking for (2,3) contraction.
struct WorkingAdjacency {
  const UndirectedGraph* base = nullptr;
  bool owned = false;
  std::vector<VertexId> neighbors;
  std::vector<uint64_t> len;

  void init(const UndirectedGraph& g, bool own) {
    base = &g;
    owned = own;
    if (owned) {
      neighbors = g.neighbors;
      len.resize(g.n);
      for (uint32_t v = 0; v < g.n; v++) len[v] = g.degree(v);
    }
  }
  std::span<const VertexId> adj(VertexId v) const {
    if (!owned) return base->neighbors_of(v);
    return {neighbors.data() + base->offsets[v], len[v]};
  }
  std::span<VertexId> mutable_adj(VertexId v) {
    return {neighbors.data() + base->offsets[v], len[v]};
  }
};

struct PeelContext {
  const PeelConfig* cfg;
  const UndirectedGraph* g;
  const DirectedGraph* dg;
  CliqueTable* table;
  int64_t L;
  std::vector<uint32_t> masks;
  std::atomic<uint8_t>* status;
  UpdateAggregator* agg;
  const std::vector<VertexId>* to_original;
  std::atomic<uint64_t>* vertex_loss = nullptr;  // (2,3) contraction
  WorkingAdjacency* work;
};

void count_subsets(const DirectedGraph& dg, CliqueTable& table, int r, int s, int64_t L,
                   const std::vector<uint32_t>& masks) {
  list_cliques_parallel(dg, s, [&](std::span<const VertexId> sc) {
    VertexId sub[kMaxCliqueVerts];
    for (uint32_t mask : masks) {
      int j = 0;
      for (int pos = 0; pos < s; pos++)
        if (mask >> pos & 1) sub[j++] = sc[pos];
      uint64_t idx;
      if (!table.try_index_of({sub, static_cast<size_t>(r)}, idx))
        throw InternalError("s-clique subset missing from the count table");
      table.add_count(idx, L);
    }
  });
}

// One peel round: for every r-clique in A, complete the incident s-cliques
// and decrement the survivors' counts by 1/a (a = subsets of the s-clique
// peeling this round). First toucher claims each changed clique into U.
void update_round(PeelContext& ctx, std::span<const uint64_t> A) {
  const int r = ctx.cfg->r, s = ctx.cfg->s;
  const int64_t L = ctx.L;
  const int comp_levels = s - r;
  Instrumentation* instr = ctx.cfg->instrumentation;

  ExceptionGate gate;
#pragma omp parallel
  {
    ListingScratch scratch;
    scratch.candidates.resize(comp_levels + 1);
    scratch.clique.reserve(comp_levels);
    std::vector<VertexId> buf_a, buf_b, cand;
    VertexId verts[kMaxCliqueVerts];
    VertexId merged[kMaxCliqueVerts];
    VertexId sub[kMaxCliqueVerts];
    uint64_t sub_idx[kMaxSubsets];
    uint8_t sub_status[kMaxSubsets];
    RankLess less{ctx.dg->rank.data()};

#pragma omp for schedule(dynamic, 16)
    for (int64_t ai = 0; ai < static_cast<int64_t>(A.size()); ai++) {
      gate.run([&] {
        uint64_t ridx = A[ai];
        ctx.table->vertices_of(ridx, verts);
        if (ctx.vertex_loss) {
          for (int i = 0; i < r; i++)
            ctx.vertex_loss[verts[i]].fetch_add(1, std::memory_order_relaxed);
        }

        // I: vertices adjacent to all of R (undirected), smallest list first.
        std::span<const VertexId> spans[kMaxCliqueVerts];
        for (int i = 0; i < r; i++) spans[i] = ctx.work->adj(verts[i]);
        std::sort(spans, spans + r,
                  [](const auto& a, const auto& b) { return a.size() < b.size(); });
        buf_a.assign(spans[0].begin(), spans[0].end());
        for (int i = 1; i < r && !buf_a.empty(); i++) {
          intersect_by_id(buf_a, spans[i], buf_b);
          std::swap(buf_a, buf_b);
        }
        if (buf_a.empty()) return;
        cand = buf_a;
        std::sort(cand.begin(), cand.end(), less);

        scratch.clique.clear();
        rec_list_cliques(*ctx.dg, cand, comp_levels, [&](std::span<const VertexId> comps) {
          // Merge R and the completions into rank order.
          int i = 0, j = 0, t = 0;
          while (i < r && j < static_cast<int>(comps.size()))
            merged[t++] = less(verts[i], comps[j]) ? verts[i++] : comps[j++];
          while (i < r) merged[t++] = verts[i++];
          while (j < static_cast<int>(comps.size())) merged[t++] = comps[j++];

          int a = 0;
          bool previously_peeled = false;
          int nsub = 0;
          for (uint32_t mask : ctx.masks) {
            int w = 0;
            for (int pos = 0; pos < s; pos++)
              if (mask >> pos & 1) sub[w++] = merged[pos];
            uint64_t idx;
            if (!ctx.table->try_index_of({sub, static_cast<size_t>(r)}, idx))
              throw InternalError("s-clique subset missing during update");
            uint8_t st = ctx.status[idx].load(std::memory_order_relaxed);
            if (st == kPeeled) {
              previously_peeled = true;
              break;
            }
            if (st == kPeelingNow) a++;
            sub_idx[nsub] = idx;
            sub_status[nsub] = st;
            nsub++;
          }
          if (previously_peeled) return;
          int64_t delta = -(L / a);
          for (int q = 0; q < nsub; q++) {
            if (sub_status[q] != kUnpeeled) continue;
            ctx.table->add_count(sub_idx[q], delta);
            ctx.agg->claim(sub_idx[q]);
            if (instr) {
              VertexId orig[kMaxCliqueVerts];
              for (int p = 0; p < s; p++)
                orig[p] = ctx.to_original->empty() ? merged[p] : (*ctx.to_original)[merged[p]];
              instr->on_decrement({orig, static_cast<size_t>(s)}, sub_idx[q], delta);
            }
          }
        }, scratch);
      });
    }
  }
  gate.rethrow();
}

bool edge_is_peeled(const PeelContext& ctx, VertexId u, VertexId v) {
  VertexId e[2];
  if (ctx.dg->rank[u] < ctx.dg->rank[v]) { e[0] = u; e[1] = v; }
  else { e[0] = v; e[1] = u; }
  uint64_t idx;
  if (!ctx.table->try_index_of({e, 2}, idx))
    throw InternalError("edge missing from the (2,3) table");
  return ctx.status[idx].load(std::memory_order_relaxed) == kPeeled;
}

}  // namespace

void count_phase(const DirectedGraph& dg, CliqueTable& table, int s, int64_t L) {
  if (s <= table.r()) throw ParameterError("s must exceed r");
  if (s > kMaxCliqueVerts) throw ParameterError("s too large");
  count_subsets(dg, table, table.r(), s, L, subset_masks(s, table.r()));
}

uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  uint64_t res = 1;
  for (int i = 1; i <= k; i++) {
    if (res > UINT64_MAX / static_cast<uint64_t>(n - k + i))
      throw ParameterError("binomial coefficient overflows");
    res = res * (n - k + i) / i;
  }
  return res;
}

FixedPoint FixedPoint::for_params(int r, int s) {
  if (r < 1 || s <= r) throw ParameterError("need 1 <= r < s");
  uint64_t c = binomial(s, r);
  uint64_t l = 1;
  for (uint64_t a = 2; a <= c; a++) {
    uint64_t g = std::gcd(l, a);
    uint64_t mult = a / g;
    if (l > (1ULL << 62) / mult)
      throw ParameterError("fixed-point scale lcm(1..binomial(s,r)) overflows; reduce s-r");
    l *= mult;
  }
  return FixedPoint{static_cast<int64_t>(l)};
}

void PeelResult::clique_of(uint64_t idx, VertexId* out) const {
  table->vertices_of(idx, out);
  if (!to_original.empty())
    for (int i = 0; i < config.r; i++) out[i] = to_original[out[i]];
  std::sort(out, out + config.r);
}

PeelResult nucleus_decomposition(const UndirectedGraph& g_in, const PeelConfig& cfg) {
  if (cfg.r < 1) throw ParameterError("r must be >= 1");
  if (cfg.s <= cfg.r) throw ParameterError("s must exceed r");
  if (cfg.s > kMaxCliqueVerts) throw ParameterError("s too large");
  if (cfg.contract && !(cfg.r == 2 && cfg.s == 3))
    throw ParameterError("graph contraction applies to (2,3) decomposition only");
  FixedPoint fp = FixedPoint::for_params(cfg.r, cfg.s);

  ThreadScope threads(cfg.threads);
  PeelResult res;
  res.config = cfg;
  res.fixed_point_scale = fp.scale;

  auto t0 = std::chrono::steady_clock::now();
  Ordering ord = cfg.orientation == OrientationKind::Degeneracy ? degeneracy_order(g_in)
                                                                : degree_order(g_in);
  UndirectedGraph relabeled;
  const UndirectedGraph* g = &g_in;
  Ordering effective = ord;
  if (cfg.relabel) {
    relabeled = relabel(g_in, ord);
    g = &relabeled;
    res.to_original.resize(g_in.n);
    for (uint32_t v = 0; v < g_in.n; v++) res.to_original[ord.position[v]] = v;
    std::iota(effective.position.begin(), effective.position.end(), 0);
  }
  DirectedGraph dg = orient(*g, effective);
  res.seconds.orient = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  auto table = std::make_shared<CliqueTable>(CliqueTable::build(*g, dg, cfg.r, cfg.table));
  res.seconds.build = seconds_since(t0);
  const uint64_t N = table->total_cliques();
  res.total_cliques = N;
  res.table = table;

  PeelContext ctx;
  ctx.cfg = &cfg;
  ctx.g = g;
  ctx.dg = &dg;
  ctx.table = table.get();
  ctx.L = fp.scale;
  ctx.masks = subset_masks(cfg.s, cfg.r);
  if (ctx.masks.size() > kMaxSubsets) throw InternalError("subset mask table overflow");
  ctx.to_original = &res.to_original;

  t0 = std::chrono::steady_clock::now();
  count_subsets(dg, *table, cfg.r, cfg.s, fp.scale, ctx.masks);
  res.seconds.count = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<uint32_t> initial(N);
  parallel_for(0, N, [&](uint64_t i) {
    int64_t c = table->count_unchecked(i);
    if (c < 0 || c % fp.scale != 0) throw InternalError("count phase left a fractional count");
    initial[i] = static_cast<uint32_t>(c / fp.scale);
  }, 4096);

  auto status = std::make_unique<std::atomic<uint8_t>[]>(N ? N : 1);
  parallel_for(0, N, [&](uint64_t i) { status[i].store(kUnpeeled, std::memory_order_relaxed); },
               8192);
  ctx.status = status.get();

  WorkingAdjacency work;
  const bool contracting = cfg.contract && cfg.r == 2 && cfg.s == 3;
  work.init(*g, contracting);
  ctx.work = &work;
  std::unique_ptr<std::atomic<uint64_t>[]> loss;
  if (contracting) {
    loss = std::make_unique<std::atomic<uint64_t>[]>(g->n ? g->n : 1);
    for (uint32_t v = 0; v < g->n; v++) loss[v].store(0, std::memory_order_relaxed);
    ctx.vertex_loss = loss.get();
  }

  UpdateAggregator agg(cfg.aggregator, N, cfg.list_buffer_block);
  ctx.agg = &agg;
  auto buckets = make_buckets(initial, cfg.bucket);
  initial.clear();
  initial.shrink_to_fit();

  res.core.assign(N, 0);
  const uint64_t subsets_minus_one = binomial(cfg.s, cfg.r) - 1;
  std::vector<uint64_t> A;
  std::vector<std::pair<uint64_t, uint32_t>> moves;
  uint64_t finished = 0;
  uint64_t peeled_since_contraction = 0;
  uint32_t round = 0;

  while (finished < N) {
    uint32_t k;
    if (!buckets->next_bucket(k, A))
      throw InternalError("bucket structure exhausted before peeling finished");
    round++;
    finished += A.size();

    parallel_for(0, A.size(), [&](uint64_t i) {
      status[A[i]].store(kPeelingNow, std::memory_order_relaxed);
      res.core[A[i]] = k;
    }, 1024);

    uint64_t max_touched = 0;
#pragma omp parallel for reduction(+ : max_touched) schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(A.size()); i++)
      max_touched += static_cast<uint64_t>(table->count_unchecked(A[i])) /
                     static_cast<uint64_t>(fp.scale);
    max_touched *= subsets_minus_one;

    agg.begin_round(max_touched);
    update_round(ctx, A);
    auto changed = agg.finalize();

    parallel_for(0, A.size(), [&](uint64_t i) {
      status[A[i]].store(kPeeled, std::memory_order_relaxed);
    }, 1024);

    moves.resize(changed.size());
    parallel_for(0, changed.size(), [&](uint64_t i) {
      int64_t c = table->count_unchecked(changed[i]);
      if (c < 0) throw InternalError("negative count after round");
      if (cfg.check_invariants && c % fp.scale != 0)
        throw InternalError("count not a multiple of the fixed-point scale at round end");
      moves[i] = {changed[i], static_cast<uint32_t>(c / fp.scale)};
    }, 1024);
    buckets->update_buckets(moves);

    if (cfg.instrumentation) cfg.instrumentation->on_round_end(round);

    if (contracting) {
      peeled_since_contraction += A.size();
      if (g->n > 0 &&
          static_cast<double>(peeled_since_contraction) >= cfg.contract_edge_factor * g->n) {
        parallel_for(0, g->n, [&](uint64_t vi) {
          auto v = static_cast<VertexId>(vi);
          uint64_t cur = work.len[v];
          if (cur == 0) return;
          uint64_t lost = loss[v].load(std::memory_order_relaxed);
          if (static_cast<double>(lost) < cfg.contract_loss_fraction * static_cast<double>(cur))
            return;
          auto slice = work.mutable_adj(v);
          uint64_t kept = 0;
          for (uint64_t i = 0; i < cur; i++)
            if (!edge_is_peeled(ctx, v, slice[i])) slice[kept++] = slice[i];
          work.len[v] = kept;
          loss[v].store(0, std::memory_order_relaxed);
        }, 64);
        peeled_since_contraction = 0;
      }
    }
  }

  res.rho = round;
  res.extracted_values = buckets->extracted_values();
  res.max_core = res.extracted_values.empty() ? 0 : res.extracted_values.back();
  res.seconds.peel = seconds_since(t0);
  return res;
}

std::vector<std::pair<std::vector<VertexId>, uint32_t>> canonical_cores(const PeelResult& res) {
  std::vector<std::pair<std::vector<VertexId>, uint32_t>> out(res.total_cliques);
  parallel_for(0, res.total_cliques, [&](uint64_t i) {
    VertexId verts[kMaxCliqueVerts];
    res.clique_of(i, verts);
    out[i] = {std::vector<VertexId>(verts, verts + res.config.r), res.core[i]};
  }, 512);
  std::sort(out.begin(), out.end());
  return out;
}

std::map<uint32_t, uint64_t> core_histogram(const PeelResult& res) {
  std::map<uint32_t, uint64_t> hist;
  for (uint64_t i = 0; i < res.total_cliques; i++) hist[res.core[i]]++;
  return hist;
}

}  // namespace nucleus
