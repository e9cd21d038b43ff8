#include "nucleus/clique_table.hpp"

#include <algorithm>
#include <numeric>

#include "nucleus/clique_listing.hpp"
#include "nucleus/parallel.hpp"

namespace nucleus {

namespace {

uint32_t capacity_for(uint32_t size) {
  // next power of two >= 1.5x occupancy, never full
  uint64_t want = (3ULL * size + 1) / 2;
  return static_cast<uint32_t>(std::bit_ceil(std::max<uint64_t>(2, want)));
}

}  // namespace

CliqueTable CliqueTable::build(const UndirectedGraph& g, const DirectedGraph& dg, int r,
                               TableConfig cfg) {
  if (r < 1) throw ParameterError("r must be >= 1");
  CliqueTable t;
  t.r_ = r;
  t.levels_ = (r == 1) ? 1 : cfg.levels;
  if (t.levels_ < 1 || t.levels_ > r)
    throw ConfigError("table levels must lie in 1..r");
  if (cfg.inverse == InverseMapMethod::StoredPointer && !cfg.contiguous)
    throw ConfigError("the stored-pointer inverse map requires contiguous storage");
  t.contiguous_ = cfg.contiguous;
  t.inverse_ = cfg.inverse;
  t.hash_seed_ = cfg.hash_seed;
  t.n_ = g.n;
  t.tail_len_ = r - t.levels_ + 1;
  t.vbits_ = g.n <= 1 ? 1 : std::bit_width(static_cast<uint32_t>(g.n - 1));
  if (t.tail_len_ * t.vbits_ > 63)
    throw ConfigError("packed r-clique key exceeds 63 bits; raise the number of table levels");

  const uint32_t n = g.n;
  const int L = t.levels_;

  // Pass 1: size every leading-vertex slice.
  auto slice_count = std::make_unique<std::atomic<uint64_t>[]>(n ? n : 1);
  for (uint32_t v = 0; v < n; v++) slice_count[v].store(0, std::memory_order_relaxed);
  list_cliques_parallel(dg, r, [&](std::span<const VertexId> s) {
    slice_count[s[0]].fetch_add(1, std::memory_order_relaxed);
  });

  std::vector<uint64_t> slice_begin(n + 1, 0);
  for (uint32_t v = 0; v < n; v++)
    slice_begin[v + 1] = slice_begin[v] + slice_count[v].load(std::memory_order_relaxed);
  t.total_ = slice_begin[n];

  // Pass 2: insert (collect the cliques, then lay the keys out canonically).
  std::vector<VertexId> flat(t.total_ * r);
  auto cursor = std::move(slice_count);
  for (uint32_t v = 0; v < n; v++) cursor[v].store(slice_begin[v], std::memory_order_relaxed);
  list_cliques_parallel(dg, r, [&](std::span<const VertexId> s) {
    uint64_t pos = cursor[s[0]].fetch_add(1, std::memory_order_relaxed);
    std::copy(s.begin(), s.end(), flat.begin() + pos * r);
  });

  // Canonical order: lexicographic by vertex id within each slice. Indices
  // derive from this order alone, so they are independent of the hash seed
  // and of how threads interleaved the passes above.
  if (r > 1) {
    parallel_for(0, n, [&](uint64_t v) {
      uint64_t lo = slice_begin[v], hi = slice_begin[v + 1];
      if (hi - lo <= 1) return;
      std::vector<uint32_t> perm(hi - lo);
      std::iota(perm.begin(), perm.end(), 0);
      std::sort(perm.begin(), perm.end(), [&](uint32_t a, uint32_t b) {
        const VertexId* pa = flat.data() + (lo + a) * r;
        const VertexId* pb = flat.data() + (lo + b) * r;
        return std::lexicographical_compare(pa + 1, pa + r, pb + 1, pb + r);
      });
      std::vector<VertexId> tmp((hi - lo) * r);
      for (uint64_t i = 0; i < hi - lo; i++)
        std::copy_n(flat.data() + (lo + perm[i]) * r, r, tmp.data() + i * r);
      std::copy(tmp.begin(), tmp.end(), flat.begin() + lo * r);
    }, 16);
  }

  // Carve the level hierarchy out of the sorted clique list.
  if (L == 1) {
    if (t.total_ > 0)
      t.tables_.push_back({0, 0, static_cast<uint32_t>(t.total_), 0, kNone});
  } else if (L == 2) {
    t.first_table_of_.assign(n, kNone);
    for (uint32_t v = 0; v < n; v++) {
      uint64_t cnt = slice_begin[v + 1] - slice_begin[v];
      if (cnt == 0) continue;
      t.first_table_of_[v] = static_cast<uint32_t>(t.tables_.size());
      t.tables_.push_back({0, 0, static_cast<uint32_t>(cnt), slice_begin[v], v});
    }
  } else {
    t.level0_of_.assign(n, kNone);
    t.inter_.resize(L - 1);
    const VertexId* prev = nullptr;
    for (uint64_t i = 0; i < t.total_; i++) {
      const VertexId* tup = flat.data() + i * r;
      int change = 0;
      if (prev) {
        change = L - 1;  // sentinel: same table
        for (int j = 0; j <= L - 2; j++) {
          if (tup[j] != prev[j]) {
            change = j;
            break;
          }
        }
      }
      if (!prev || change <= L - 2) {
        for (int j = change; j <= L - 2; j++) {
          LevelEntry e;
          e.vertex = tup[j];
          e.parent = (j == 0) ? kNone : static_cast<uint32_t>(t.inter_[j - 1].size() - 1);
          e.child_begin = (j < L - 2) ? t.inter_[j + 1].size() : t.tables_.size();
          e.clique_begin = i;
          t.inter_[j].push_back(e);
          if (j == 0) t.level0_of_[tup[j]] = static_cast<uint32_t>(t.inter_[0].size() - 1);
        }
        t.tables_.push_back({0, 0, 0, i, static_cast<uint32_t>(t.inter_[L - 2].size() - 1)});
      }
      t.tables_.back().size++;
      prev = tup;
    }
  }

  // Lay the keys out: deterministic linear probing per table, rank/select
  // maps from the canonical order.
  const size_t num_tables = t.tables_.size();
  uint64_t total_cells = 0;
  for (auto& tab : t.tables_) {
    tab.capacity = capacity_for(tab.size);
    tab.cell_begin = total_cells;
    total_cells += tab.capacity + 1;  // +1: barrier
  }
  if (t.contiguous_) {
    t.cells_.assign(total_cells, kEmptyBit);
    t.cell_rank_.assign(total_cells, kNone);
  } else {
    t.cells_nc_.resize(num_tables);
    t.cell_rank_nc_.resize(num_tables);
  }
  t.select_.assign(t.total_, 0);

  parallel_for(0, num_tables, [&](uint64_t ti) {
    LastTable& tab = t.tables_[ti];
    // Up-pointer payload: the leading vertex for two-level tables, the owning
    // level entry otherwise.
    const uint64_t empty_cell = kEmptyBit | (L >= 2 ? tab.parent : 0);

    uint64_t* cells;
    uint32_t* ranks;
    if (t.contiguous_) {
      cells = t.cells_.data() + tab.cell_begin;
      ranks = t.cell_rank_.data() + tab.cell_begin;
    } else {
      t.cells_nc_[ti].assign(tab.capacity + 1, empty_cell);
      t.cell_rank_nc_[ti].assign(tab.capacity + 1, kNone);
      cells = t.cells_nc_[ti].data();
      ranks = t.cell_rank_nc_[ti].data();
    }
    std::fill_n(cells, tab.capacity + 1, empty_cell);

    const uint32_t mask = tab.capacity - 1;
    struct Item {
      uint32_t home;
      uint64_t key;
      uint32_t rank;
    };
    std::vector<Item> items(tab.size);
    for (uint32_t i = 0; i < tab.size; i++) {
      const VertexId* tup = flat.data() + (tab.clique_begin + i) * r;
      uint64_t key = t.pack_tail(tup + (L - 1));
      items[i] = {static_cast<uint32_t>(mix64(key ^ t.hash_seed_)) & mask, key, i};
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      return a.home != b.home ? a.home < b.home : a.key < b.key;
    });
    for (const Item& it : items) {
      uint32_t pos = it.home;
      while (!(cells[pos] & kEmptyBit)) pos = (pos + 1) & mask;
      cells[pos] = it.key;
      ranks[pos] = it.rank;
      t.select_[tab.clique_begin + it.rank] =
          (static_cast<uint64_t>(ti) << 32) | pos;
    }
  }, 1);

  t.counts_ = std::make_unique<std::atomic<int64_t>[]>(t.total_ ? t.total_ : 1);
  parallel_for(0, t.total_, [&](uint64_t i) { t.counts_[i].store(0, std::memory_order_relaxed); },
               4096);
  return t;
}

bool CliqueTable::probe(uint32_t ti, uint64_t key, uint64_t& idx) const {
  const LastTable& tab = tables_[ti];
  const uint32_t mask = tab.capacity - 1;
  uint32_t pos = static_cast<uint32_t>(mix64(key ^ hash_seed_)) & mask;
  while (true) {
    uint64_t c = cell(ti, pos);
    if (c & kEmptyBit) return false;
    if (c == key) {
      idx = tab.clique_begin + cell_rank(ti, pos);
      return true;
    }
    pos = (pos + 1) & mask;
  }
}

uint32_t CliqueTable::find_table(std::span<const VertexId> clique) const {
  if (levels_ == 1) return tables_.empty() ? kNone : 0;
  if (levels_ == 2) return first_table_of_[clique[0]];
  uint32_t e = level0_of_[clique[0]];
  if (e == kNone) return kNone;
  for (int j = 1; j <= levels_ - 2; j++) {
    const auto& level = inter_[j];
    const auto& parent = inter_[j - 1][e];
    uint64_t lo = parent.child_begin;
    uint64_t hi = (e + 1 < inter_[j - 1].size()) ? inter_[j - 1][e + 1].child_begin
                                                 : level.size();
    VertexId want = clique[j];
    auto begin = level.begin() + lo, end = level.begin() + hi;
    auto it = std::partition_point(begin, end,
                                   [&](const LevelEntry& le) { return le.vertex < want; });
    if (it == end || it->vertex != want) return kNone;
    e = static_cast<uint32_t>(it - level.begin());
  }
  return static_cast<uint32_t>(inter_[levels_ - 2][e].child_begin);
}

bool CliqueTable::try_index_of(std::span<const VertexId> clique, uint64_t& idx) const {
  if (static_cast<int>(clique.size()) != r_) return false;
  uint32_t ti = find_table(clique);
  if (ti == kNone) return false;
  return probe(ti, pack_tail(clique.data() + (levels_ - 1)), idx);
}

uint32_t CliqueTable::table_of_index(uint64_t idx, VertexId* prefix_out) const {
  if (levels_ == 1) return 0;
  if (levels_ == 2) {
    auto it = std::partition_point(tables_.begin(), tables_.end(),
                                   [&](const LastTable& tab) { return tab.clique_begin <= idx; });
    uint32_t ti = static_cast<uint32_t>(it - tables_.begin()) - 1;
    prefix_out[0] = tables_[ti].parent;
    return ti;
  }
  // One binary search over prefix sizes per level, recording each level's vertex.
  uint64_t e;
  {
    const auto& level = inter_[0];
    auto it = std::partition_point(level.begin(), level.end(),
                                   [&](const LevelEntry& le) { return le.clique_begin <= idx; });
    e = static_cast<uint64_t>(it - level.begin()) - 1;
    prefix_out[0] = level[e].vertex;
  }
  for (int j = 1; j <= levels_ - 2; j++) {
    const auto& prev = inter_[j - 1];
    const auto& level = inter_[j];
    uint64_t lo = prev[e].child_begin;
    uint64_t hi = (e + 1 < prev.size()) ? prev[e + 1].child_begin : level.size();
    auto begin = level.begin() + lo, end = level.begin() + hi;
    auto it = std::partition_point(begin, end,
                                   [&](const LevelEntry& le) { return le.clique_begin <= idx; });
    e = static_cast<uint64_t>(it - level.begin()) - 1;
    prefix_out[j] = level[e].vertex;
  }
  return static_cast<uint32_t>(inter_[levels_ - 2][e].child_begin);
}

void CliqueTable::vertices_of_binary_search(uint64_t idx, VertexId* out) const {
  if (idx >= total_) throw BoundsError("clique index out of range");
  uint32_t ti = table_of_index(idx, out);
  uint64_t sel = select_[idx];
  (void)ti;
  unpack_tail(cell(static_cast<uint32_t>(sel >> 32), static_cast<uint32_t>(sel)),
              out + (levels_ - 1));
}

void CliqueTable::vertices_of_stored_pointer(uint64_t idx, VertexId* out) const {
  if (idx >= total_) throw BoundsError("clique index out of range");
  if (!contiguous_) throw ConfigError("the stored-pointer inverse map requires contiguous storage");
  uint64_t sel = select_[idx];
  uint32_t ti = static_cast<uint32_t>(sel >> 32);
  uint64_t gpos = tables_[ti].cell_begin + static_cast<uint32_t>(sel);
  unpack_tail(cells_[gpos], out + (levels_ - 1));
  if (levels_ == 1) return;
  // Scan right to the first empty cell or barrier; it carries the up-pointer.
  uint64_t p = gpos + 1;
  while (!(cells_[p] & kEmptyBit)) p++;
  uint64_t up = cells_[p] & ~kEmptyBit;
  if (levels_ == 2) {
    out[0] = static_cast<VertexId>(up);
    return;
  }
  uint32_t e = static_cast<uint32_t>(up);
  for (int j = levels_ - 2; j >= 0; j--) {
    out[j] = inter_[j][e].vertex;
    e = inter_[j][e].parent;
  }
}

TableMemoryReport CliqueTable::memory_report() const {
  TableMemoryReport rep;
  const uint64_t N = total_;
  if (levels_ == 1) {
    rep.key_units = N * r_;
    rep.key_bytes = N * r_ * 4;
    rep.entries_per_level = {N};
  } else if (levels_ == 2) {
    rep.key_units = n_ + N * (r_ - 1);
    rep.key_bytes = uint64_t{n_} * 8 + N * (r_ - 1) * 4;
    rep.entries_per_level = {n_, N};
  } else {
    uint64_t inter_entries = 0;
    for (const auto& level : inter_) {
      inter_entries += level.size();
      rep.entries_per_level.push_back(level.size());
    }
    rep.entries_per_level.push_back(N);
    // ell == r degenerates the last level to single-vertex keys whose values
    // are reached through one more pointer, so it is accounted like an
    // intermediate level.
    uint64_t tail_units = tail_len_ + (levels_ == r_ ? 1 : 0);
    rep.key_units = inter_entries * 2 + N * tail_units;
    rep.key_bytes = inter_entries * 12 + N * (uint64_t{4} * tail_len_ + (levels_ == r_ ? 8 : 0));
  }

  uint64_t cells = 0;
  for (const auto& tab : tables_) cells += tab.capacity + 1;
  rep.capacity_per_level.assign(rep.entries_per_level.begin(), rep.entries_per_level.end());
  if (!rep.capacity_per_level.empty()) rep.capacity_per_level.back() = cells;

  rep.alloc_bytes = cells * (sizeof(uint64_t) + sizeof(uint32_t)) +
                    tables_.size() * sizeof(LastTable) + select_.size() * sizeof(uint64_t) +
                    N * sizeof(std::atomic<int64_t>) +
                    first_table_of_.size() * sizeof(uint32_t) +
                    level0_of_.size() * sizeof(uint32_t);
  for (const auto& level : inter_) rep.alloc_bytes += level.size() * sizeof(LevelEntry);
  return rep;
}

}  // namespace nucleus
