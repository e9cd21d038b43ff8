#pragma once

#include <atomic>
#include <bit>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "nucleus/graph.hpp"
#include "nucleus/hashing.hpp"

namespace nucleus {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BoundsError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

enum class InverseMapMethod { BinarySearch, StoredPointer };

struct TableConfig {
  int levels = 2;
  bool contiguous = true;
  InverseMapMethod inverse = InverseMapMethod::StoredPointer;
  uint64_t hash_seed = 0x8f3a2b19c457d601ULL;
};

struct TableMemoryReport {
  // Abstract accounting from the level structure: one unit per stored vertex
  // or pointer, occupied entries only.
  uint64_t key_units = 0;
  // Same accounting at natural widths (vertex 4 B, pointer 8 B).
  uint64_t key_bytes = 0;
  // What the structure actually allocates, including hash-table slack and the
  // rank/select arrays behind the index map.
  uint64_t alloc_bytes = 0;
  std::vector<uint64_t> entries_per_level;    // occupied entries, last = total cliques
  std::vector<uint64_t> capacity_per_level;   // allocated slots (last level counts barriers)
};

// The count table T: every r-clique of the graph maps to a stable index in
// 0..total_cliques-1 and holds one atomic fixed-point s-clique count.
//
// Layouts: one-level (packed r-clique keys in a single table), two-level
// (array over the leading vertex + per-vertex tables keyed by the remaining
// (r-1)-clique), or l-multi-level (single-vertex intermediate levels, last
// level keyed by packed (r-l+1)-cliques). Last-level tables use linear
// probing with a deterministic layout; an r-clique's index is its key's
// sorted position within its table plus the sizes of earlier tables, so
// indices agree across contiguous and non-contiguous storage and across
// inverse-map methods.
class CliqueTable {
 public:
  static constexpr uint32_t kNone = 0xffffffffu;
  static constexpr uint64_t kEmptyBit = 1ULL << 63;

  CliqueTable() = default;

  // Two passes of the listing kernel at level r: the first sizes every
  // last-level table, the second inserts keys. Counts start at zero.
  static CliqueTable build(const UndirectedGraph& g, const DirectedGraph& dg, int r,
                           TableConfig cfg);

  int r() const { return r_; }
  int levels() const { return levels_; }
  bool contiguous() const { return contiguous_; }
  InverseMapMethod inverse_method() const { return inverse_; }
  uint64_t total_cliques() const { return total_; }

  // clique: r vertex ids in rank order.
  bool try_index_of(std::span<const VertexId> clique, uint64_t& idx) const;
  uint64_t index_of(std::span<const VertexId> clique) const {
    uint64_t idx;
    if (!try_index_of(clique, idx)) throw NotFoundError("not an r-clique of the graph");
    return idx;
  }

  // Writes the clique's r vertices (rank order) to out.
  void vertices_of(uint64_t idx, VertexId* out) const {
    if (inverse_ == InverseMapMethod::StoredPointer) return vertices_of_stored_pointer(idx, out);
    return vertices_of_binary_search(idx, out);
  }
  void vertices_of_binary_search(uint64_t idx, VertexId* out) const;
  void vertices_of_stored_pointer(uint64_t idx, VertexId* out) const;

  void add_count(uint64_t idx, int64_t delta) {
    counts_[idx].fetch_add(delta, std::memory_order_relaxed);
  }
  int64_t count(uint64_t idx) const {
    if (idx >= total_) throw BoundsError("clique index out of range");
    return counts_[idx].load(std::memory_order_relaxed);
  }
  int64_t count_unchecked(uint64_t idx) const {
    return counts_[idx].load(std::memory_order_relaxed);
  }

  TableMemoryReport memory_report() const;

 private:
  struct LevelEntry {
    VertexId vertex = 0;
    uint32_t parent = kNone;     // entry id in the previous level
    uint64_t child_begin = 0;    // entries of the next level, or table id at the deepest level
    uint64_t clique_begin = 0;   // cliques preceding this subtree
  };
  struct LastTable {
    uint64_t cell_begin = 0;     // into cells_ when contiguous
    uint32_t capacity = 0;       // power of two; one barrier cell follows
    uint32_t size = 0;
    uint64_t clique_begin = 0;
    uint32_t parent = kNone;     // level entry (levels >= 3) or leading vertex (levels == 2)
  };

  uint64_t pack_tail(const VertexId* tail) const {
    uint64_t key = 0;
    for (int i = 0; i < tail_len_; i++) key = (key << vbits_) | tail[i];
    return key;
  }
  void unpack_tail(uint64_t key, VertexId* out) const {
    uint64_t mask = (vbits_ >= 64) ? ~0ULL : ((1ULL << vbits_) - 1);
    for (int i = tail_len_ - 1; i >= 0; i--) {
      out[i] = static_cast<VertexId>(key & mask);
      key >>= vbits_;
    }
  }
  uint64_t cell(uint32_t t, uint32_t pos) const {
    return contiguous_ ? cells_[tables_[t].cell_begin + pos] : cells_nc_[t][pos];
  }
  uint32_t cell_rank(uint32_t t, uint32_t pos) const {
    return contiguous_ ? cell_rank_[tables_[t].cell_begin + pos] : cell_rank_nc_[t][pos];
  }
  bool probe(uint32_t t, uint64_t key, uint64_t& idx) const;
  uint32_t find_table(std::span<const VertexId> clique) const;  // kNone if absent
  uint32_t table_of_index(uint64_t idx, VertexId* prefix_out) const;  // binary-search walk

  int r_ = 0;
  int levels_ = 1;
  int tail_len_ = 0;
  int vbits_ = 1;
  bool contiguous_ = true;
  InverseMapMethod inverse_ = InverseMapMethod::StoredPointer;
  uint64_t hash_seed_ = 0;
  uint32_t n_ = 0;
  uint64_t total_ = 0;

  std::vector<uint32_t> first_table_of_;            // levels == 2: vertex -> table id
  std::vector<uint32_t> level0_of_;                 // levels >= 3: vertex -> level-0 entry
  std::vector<std::vector<LevelEntry>> inter_;      // levels >= 3: levels 0..levels-2
  std::vector<LastTable> tables_;
  std::vector<uint64_t> cells_;                     // contiguous layout
  std::vector<uint32_t> cell_rank_;
  std::vector<std::vector<uint64_t>> cells_nc_;     // non-contiguous layout
  std::vector<std::vector<uint32_t>> cell_rank_nc_;
  std::vector<uint64_t> select_;                    // index -> (table << 32 | slot)
  std::unique_ptr<std::atomic<int64_t>[]> counts_;
};

}  // namespace nucleus
