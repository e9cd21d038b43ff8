#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace nucleus {

struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

enum class BucketKind { OpenBucket, DenseArray };

// Maps identifiers to integer buckets and repeatedly extracts the minimum
// non-empty bucket at or above the current level. Updates clamp to the
// current level, which fixes each identifier's floor at the running peel
// value. next_bucket and update_buckets are coordinator-only; the batches
// they consume may be assembled in parallel.
class BucketStructure {
 public:
  virtual ~BucketStructure() = default;

  // Extracts the minimum non-empty bucket >= current level into (value, ids).
  // Returns false once every identifier has been extracted.
  bool next_bucket(uint32_t& value, std::vector<uint64_t>& ids);

  // Moves each identifier to bucket max(new_value, current level). At most
  // one entry per identifier per round; updating an extracted identifier is a
  // contract violation.
  virtual void update_buckets(std::span<const std::pair<uint64_t, uint32_t>> updates) = 0;

  uint32_t current_level() const { return cur_; }
  uint64_t remaining() const { return remaining_; }
  const std::vector<uint32_t>& extracted_values() const { return ks_; }

 protected:
  explicit BucketStructure(uint64_t count) : remaining_(count) {}
  virtual bool pop(uint32_t& value, std::vector<uint64_t>& ids) = 0;

  // Drops stale copies, claims the rest. Returns the number claimed.
  size_t claim_valid(uint32_t k, std::vector<uint64_t>& raw, std::vector<uint64_t>& out);

  std::vector<uint32_t> bucket_of_;
  std::vector<uint8_t> extracted_;
  uint64_t remaining_ = 0;
  uint32_t cur_ = 0;
  std::vector<uint32_t> ks_;
};

std::unique_ptr<BucketStructure> make_buckets(const std::vector<uint32_t>& initial_values,
                                              BucketKind kind);

}  // namespace nucleus
