#include "nucleus/bucketing.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <limits>

#include <omp.h>

namespace nucleus {

bool BucketStructure::next_bucket(uint32_t& value, std::vector<uint64_t>& ids) {
  ids.clear();
  if (remaining_ == 0) return false;
  if (!pop(value, ids)) return false;
  assert(ks_.empty() || value >= ks_.back());
  ks_.push_back(value);
  cur_ = value;
  remaining_ -= ids.size();
  return true;
}

size_t BucketStructure::claim_valid(uint32_t k, std::vector<uint64_t>& raw,
                                    std::vector<uint64_t>& out) {
  size_t claimed = 0;
  for (uint64_t id : raw) {
    if (extracted_[id] || bucket_of_[id] != k) continue;  // stale copy
    extracted_[id] = 1;
    out.push_back(id);
    claimed++;
  }
  raw.clear();
  return claimed;
}

namespace {

constexpr uint32_t kWindow = 16;

// Materializes a constant window of the lowest buckets plus an overflow
// bucket; advancing the window re-buckets the overflow starting from its
// minimum, skipping empty ranges.
class OpenBucketStructure final : public BucketStructure {
 public:
  OpenBucketStructure(const std::vector<uint32_t>& values) : BucketStructure(values.size()) {
    bucket_of_ = values;
    extracted_.assign(values.size(), 0);
    base_ = 0;
    for (uint64_t id = 0; id < values.size(); id++) place(id, values[id]);
  }

  void update_buckets(std::span<const std::pair<uint64_t, uint32_t>> updates) override {
    for (const auto& [id, value] : updates) {
      if (extracted_[id]) throw ContractViolation("bucket update to an extracted identifier");
      uint32_t clamped = std::max(value, cur_);
      bucket_of_[id] = clamped;
      place(id, clamped);
    }
  }

 protected:
  bool pop(uint32_t& value, std::vector<uint64_t>& ids) override {
    while (true) {
      while (cur_ < base_ + kWindow) {
        auto& cell = window_[cur_ - base_];
        if (!cell.empty() && claim_valid(cur_, cell, ids) > 0) {
          value = cur_;
          return true;
        }
        cur_++;
      }
      // Window exhausted: everything left lives in the overflow bucket.
      uint32_t lowest = std::numeric_limits<uint32_t>::max();
      size_t keep = 0;
      for (size_t i = 0; i < overflow_.size(); i++) {
        uint64_t id = overflow_[i];
        if (extracted_[id] || bucket_of_[id] < base_ + kWindow) continue;
        overflow_[keep++] = id;
        lowest = std::min(lowest, bucket_of_[id]);
      }
      overflow_.resize(keep);
      if (keep == 0) return false;
      base_ = lowest;
      cur_ = lowest;
      std::vector<uint64_t> pending;
      pending.swap(overflow_);
      for (uint64_t id : pending) place(id, bucket_of_[id]);
    }
  }

 private:
  void place(uint64_t id, uint32_t bucket) {
    if (bucket < base_ + kWindow) window_[bucket - base_].push_back(id);
    else overflow_.push_back(id);
  }

  uint32_t base_ = 0;
  std::array<std::vector<uint64_t>, kWindow> window_;
  std::vector<uint64_t> overflow_;
};

// One cell per possible value; retrieval searches doubling regions
// [s + 2^i - 1, s + 2^(i+1) - 1) ahead of the previously popped bucket, each
// region scanned in parallel.
class DenseArrayBuckets final : public BucketStructure {
 public:
  DenseArrayBuckets(const std::vector<uint32_t>& values) : BucketStructure(values.size()) {
    bucket_of_ = values;
    extracted_.assign(values.size(), 0);
    uint32_t max_value = 0;
    for (uint32_t v : values) max_value = std::max(max_value, v);
    cells_.resize(static_cast<size_t>(max_value) + 1);
    for (uint64_t id = 0; id < values.size(); id++) cells_[values[id]].push_back(id);
  }

  void update_buckets(std::span<const std::pair<uint64_t, uint32_t>> updates) override {
    for (const auto& [id, value] : updates) {
      if (extracted_[id]) throw ContractViolation("bucket update to an extracted identifier");
      uint32_t clamped = std::max(value, cur_);
      assert(clamped < cells_.size());
      bucket_of_[id] = clamped;
      cells_[clamped].push_back(id);
    }
  }

 protected:
  bool pop(uint32_t& value, std::vector<uint64_t>& ids) override {
    uint64_t start = cur_;
    while (start < cells_.size()) {
      uint64_t k = find_nonempty_from(start);
      if (k == kNone) return false;
      if (claim_valid(static_cast<uint32_t>(k), cells_[k], ids) > 0) {
        value = static_cast<uint32_t>(k);
        return true;
      }
      start = k + 1;  // the cell held only stale copies
    }
    return false;
  }

 private:
  static constexpr uint64_t kNone = ~0ULL;

  uint64_t find_nonempty_from(uint64_t start) const {
    uint64_t offset = 0, width = 1;
    while (start + offset < cells_.size()) {
      uint64_t lo = start + offset;
      uint64_t hi = std::min<uint64_t>(lo + width, cells_.size());
      uint64_t found = kNone;
      if (hi - lo < 256) {
        for (uint64_t k = lo; k < hi; k++) {
          if (!cells_[k].empty()) { found = k; break; }
        }
      } else {
        uint64_t best = kNone;
#pragma omp parallel for reduction(min : best) schedule(static)
        for (int64_t k = static_cast<int64_t>(lo); k < static_cast<int64_t>(hi); k++) {
          if (!cells_[k].empty()) best = std::min<uint64_t>(best, static_cast<uint64_t>(k));
        }
        found = best;
      }
      if (found != kNone) return found;
      offset += width;
      width *= 2;
    }
    return kNone;
  }

  std::vector<std::vector<uint64_t>> cells_;
};

}  // namespace

std::unique_ptr<BucketStructure> make_buckets(const std::vector<uint32_t>& initial_values,
                                              BucketKind kind) {
  if (kind == BucketKind::OpenBucket)
    return std::make_unique<OpenBucketStructure>(initial_values);
  return std::make_unique<DenseArrayBuckets>(initial_values);
}

}  // namespace nucleus
