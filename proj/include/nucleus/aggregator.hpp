#pragma once

#include <atomic>
#include <bit>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <omp.h>

#include "nucleus/hashing.hpp"

namespace nucleus {

enum class AggregatorKind { SimpleArray, ListBuffer, HashTable };

// Collects the set U of identifiers whose counts changed in a round. claim()
// returns true exactly once per (round, id) across all threads; finalize()
// yields the duplicate-free set. Strategies:
//   SimpleArray - one shared cursor, a fetch-and-add reserves each slot.
//   ListBuffer  - per-thread cursors over block-reserved ranges; threads only
//                 touch the shared cursor when they exhaust a block.
//   HashTable   - per-round sized open-addressing set; insertion is the claim.
class UpdateAggregator {
 public:
  static constexpr uint64_t kEmpty = ~0ULL;

  UpdateAggregator(AggregatorKind kind, uint64_t total_ids, int block_size = 64)
      : kind_(kind), total_(total_ids), block_(block_size < 1 ? 1 : block_size) {
    int threads = omp_get_max_threads();
    if (kind_ != AggregatorKind::HashTable) {
      stamps_ = std::make_unique<std::atomic<uint32_t>[]>(total_ ? total_ : 1);
      for (uint64_t i = 0; i < total_; i++) stamps_[i].store(0, std::memory_order_relaxed);
    }
    switch (kind_) {
      case AggregatorKind::SimpleArray:
        slots_.resize(total_);
        break;
      case AggregatorKind::ListBuffer:
        slots_.resize(total_ + static_cast<uint64_t>(threads) * block_);
        threads_.resize(threads);
        break;
      case AggregatorKind::HashTable:
        break;
    }
  }

  // max_touched: upper bound on the identifiers that can change this round
  // (the hash strategy sizes its table from it; the others ignore it).
  void begin_round(uint64_t max_touched) {
    round_++;
    cursor_.store(0, std::memory_order_relaxed);
    result_.clear();
    switch (kind_) {
      case AggregatorKind::SimpleArray:
        break;
      case AggregatorKind::ListBuffer:
        for (auto& tc : threads_) {
          tc.pos = 0;
          tc.end = 0;
          tc.blocks.clear();
        }
        break;
      case AggregatorKind::HashTable: {
        uint64_t want = std::max<uint64_t>(16, 2 * max_touched);
        want = std::min<uint64_t>(want, std::max<uint64_t>(16, 2 * total_));
        uint64_t cap = std::bit_ceil(want);
        if (cap > hash_slots_.size()) {
          hash_slots_ = std::vector<std::atomic<uint64_t>>(cap);
          hash_cap_ = cap;
          for (uint64_t i = 0; i < cap; i++)
            hash_slots_[i].store(kEmpty, std::memory_order_relaxed);
        } else {
          hash_cap_ = cap;  // only this prefix is probed and cleared this round
        }
        break;
      }
    }
  }

  bool claim(uint64_t id) {
    switch (kind_) {
      case AggregatorKind::SimpleArray: {
        if (!stamp(id)) return false;
        uint64_t slot = cursor_.fetch_add(1, std::memory_order_relaxed);
        slots_[slot] = id;
        return true;
      }
      case AggregatorKind::ListBuffer: {
        if (!stamp(id)) return false;
        auto& tc = threads_[omp_get_thread_num()];
        if (tc.pos == tc.end) {
          uint64_t block = cursor_.fetch_add(1, std::memory_order_relaxed);
          tc.pos = block * block_;
          tc.end = tc.pos + block_;
          tc.blocks.push_back(tc.pos);
        }
        slots_[tc.pos++] = id;
        return true;
      }
      case AggregatorKind::HashTable: {
        uint64_t mask = hash_cap_ - 1;
        uint64_t pos = mix64(id) & mask;
        while (true) {
          uint64_t cur = hash_slots_[pos].load(std::memory_order_relaxed);
          if (cur == id) return false;
          if (cur == kEmpty) {
            uint64_t expected = kEmpty;
            if (hash_slots_[pos].compare_exchange_strong(expected, id,
                                                         std::memory_order_relaxed))
              return true;
            if (expected == id) return false;
          }
          pos = (pos + 1) & mask;
        }
      }
    }
    return false;
  }

  // Compacts U: no gaps, no duplicates. ListBuffer filters the unused slots of
  // each thread's final block; HashTable scans and clears its round capacity.
  std::span<const uint64_t> finalize() {
    switch (kind_) {
      case AggregatorKind::SimpleArray:
        return {slots_.data(), cursor_.load(std::memory_order_relaxed)};
      case AggregatorKind::ListBuffer: {
        for (const auto& tc : threads_) {
          for (uint64_t start : tc.blocks) {
            uint64_t fill = (start + static_cast<uint64_t>(block_) == tc.end)
                                ? tc.pos - start
                                : static_cast<uint64_t>(block_);
            result_.insert(result_.end(), slots_.begin() + start, slots_.begin() + start + fill);
          }
        }
        return result_;
      }
      case AggregatorKind::HashTable: {
        for (uint64_t i = 0; i < hash_cap_; i++) {
          uint64_t v = hash_slots_[i].exchange(kEmpty, std::memory_order_relaxed);
          if (v != kEmpty) result_.push_back(v);
        }
        return result_;
      }
    }
    return {};
  }

 private:
  bool stamp(uint64_t id) {
    uint32_t cur = stamps_[id].load(std::memory_order_relaxed);
    if (cur == round_) return false;
    return stamps_[id].compare_exchange_strong(cur, round_, std::memory_order_relaxed);
  }

  struct alignas(64) ThreadCursor {
    uint64_t pos = 0;
    uint64_t end = 0;
    std::vector<uint64_t> blocks;
  };

  AggregatorKind kind_;
  uint64_t total_;
  int block_;
  uint32_t round_ = 0;
  std::unique_ptr<std::atomic<uint32_t>[]> stamps_;
  std::vector<uint64_t> slots_;
  std::atomic<uint64_t> cursor_{0};
  std::vector<ThreadCursor> threads_;
  std::vector<std::atomic<uint64_t>> hash_slots_;
  uint64_t hash_cap_ = 0;
  std::vector<uint64_t> result_;
};

}  // namespace nucleus
