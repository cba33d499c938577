#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "dsinv/core.hpp"
#include "dsinv/rng.hpp"

namespace dsinv {

// 128-bit packed state key; enough headroom for every enumerable instance.
struct PackedKey {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  bool operator==(const PackedKey&) const = default;
  auto operator<=>(const PackedKey&) const = default;
};

inline std::uint64_t hash_key(const PackedKey& k) {
  return combine(mix64(k.lo), k.hi);
}

// Open-addressing map PackedKey -> ordinal, tuned for the solver's lookup
// volume (std::unordered_map is several times slower here).
class KeyIndex {
 public:
  explicit KeyIndex(std::size_t expected = 0);
  void insert(const PackedKey& key, std::int32_t value);
  std::int32_t find(const PackedKey& key) const;  // -1 when absent
  std::size_t size() const { return count_; }

 private:
  void grow();
  std::vector<PackedKey> keys_;
  std::vector<std::int32_t> vals_;
  std::size_t mask_ = 0;
  std::size_t count_ = 0;
};

// Bit layout of one packed state. Field order matches the lexicographic
// state ordering so packed keys sort the same way states do.
struct StateCodec {
  int bits_op = 0;
  int bits_stock = 0;
  int bits_slot_cm = 0;
  int bits_slot_am = 0;
  int lead_cm = 0;
  int lead_am = 0;
  bool simplified = false;

  static StateCodec full(const InstanceParams& params);
  static StateCodec single(const InstanceParams& params);

  PackedKey pack(const SystemState& s) const;
  PackedKey pack(const SimplifiedState& s) const;
  SystemState unpack_full(PackedKey key, const InstanceParams& params) const;
  SimplifiedState unpack_single(PackedKey key,
                                const InstanceParams& params) const;
  // Key increments for appending an order to the newest pipeline slot; used
  // to derive per-decision successors from a base successor cheaply.
  PackedKey newest_cm_unit() const;
  PackedKey newest_am_unit() const;
};

enum class ModelKind { kFull, kSimplified };

// Exhaustive enumeration of every state satisfying the state constraints,
// in lexicographic order. Throws std::runtime_error with a count report when
// the space exceeds `cap` states (the instance needs a heuristic instead).
class StateSpace {
 public:
  static StateSpace enumerate(const InstanceParams& params, ModelKind kind,
                              std::size_t cap = 5'000'000);

  std::size_t size() const { return keys_.size(); }
  ModelKind kind() const { return kind_; }
  const InstanceParams& params() const { return params_; }
  const StateCodec& codec() const { return codec_; }

  PackedKey key(std::size_t index) const { return keys_[index]; }
  std::int32_t index(const PackedKey& key) const { return map_.find(key); }
  std::int32_t index(const SystemState& s) const {
    return map_.find(codec_.pack(s));
  }
  std::int32_t index(const SimplifiedState& s) const {
    return map_.find(codec_.pack(s));
  }
  SystemState full_state(std::size_t index) const {
    return codec_.unpack_full(keys_[index], params_);
  }
  SimplifiedState single_state(std::size_t index) const {
    return codec_.unpack_single(keys_[index], params_);
  }

  // Ordinal of the healthy no-inventory state (full base, nothing on hand or
  // on order); the solver's reference state.
  std::int32_t reference_index() const { return reference_; }

 private:
  StateSpace() : map_(0) {}
  InstanceParams params_;
  ModelKind kind_ = ModelKind::kFull;
  StateCodec codec_;
  std::vector<PackedKey> keys_;
  KeyIndex map_;
  std::int32_t reference_ = -1;
};

// Uniform-ish random valid state, for property tests.
SystemState random_state(const InstanceParams& params, RngStream& rng);

}  // namespace dsinv
