#include "dsinv/space.hpp"

#include <bit>
#include <functional>
#include <stdexcept>
#include <string>

namespace dsinv {

namespace {

using U128 = unsigned __int128;

U128 to128(const PackedKey& k) {
  return (static_cast<U128>(k.hi) << 64) | k.lo;
}

PackedKey from128(U128 v) {
  return {static_cast<std::uint64_t>(v),
          static_cast<std::uint64_t>(v >> 64)};
}

int width_for(int max_value) {
  return std::bit_width(static_cast<unsigned>(max_value));
}

}  // namespace

KeyIndex::KeyIndex(std::size_t expected) {
  std::size_t cap = 16;
  while (cap < expected * 2 + 1) cap <<= 1;
  keys_.resize(cap);
  vals_.assign(cap, -1);
  mask_ = cap - 1;
}

void KeyIndex::grow() {
  KeyIndex bigger(keys_.size());  // doubles: cap >= 2*size+1
  for (std::size_t i = 0; i < keys_.size(); ++i)
    if (vals_[i] >= 0) bigger.insert(keys_[i], vals_[i]);
  *this = std::move(bigger);
}

void KeyIndex::insert(const PackedKey& key, std::int32_t value) {
  if ((count_ + 1) * 2 > keys_.size()) grow();
  std::size_t i = hash_key(key) & mask_;
  while (vals_[i] >= 0) {
    if (keys_[i] == key) {
      vals_[i] = value;
      return;
    }
    i = (i + 1) & mask_;
  }
  keys_[i] = key;
  vals_[i] = value;
  ++count_;
}

std::int32_t KeyIndex::find(const PackedKey& key) const {
  std::size_t i = hash_key(key) & mask_;
  while (vals_[i] >= 0) {
    if (keys_[i] == key) return vals_[i];
    i = (i + 1) & mask_;
  }
  return -1;
}

StateCodec StateCodec::full(const InstanceParams& params) {
  StateCodec c;
  const int n = params.installed_base;
  const int cap = params.max_in_system + n;  // pipeline item bound
  c.bits_op = width_for(n);
  c.bits_stock = width_for(params.max_in_system);
  c.bits_slot_cm = width_for(cap / params.batch_cm);
  c.bits_slot_am = width_for(cap);
  c.lead_cm = params.lead_cm;
  c.lead_am = params.lead_am;
  c.simplified = false;
  const int total = 2 * c.bits_op + 2 * c.bits_stock +
                    c.lead_cm * c.bits_slot_cm + c.lead_am * c.bits_slot_am;
  if (total > 128)
    throw std::runtime_error("state encoding exceeds 128 bits; instance too large");
  return c;
}

StateCodec StateCodec::single(const InstanceParams& params) {
  StateCodec c = full(params);
  c.simplified = true;
  return c;
}

namespace {

struct Packer {
  U128 acc = 0;
  void push(int value, int bits) {
    acc = (acc << bits) | static_cast<unsigned>(value);
  }
};

}  // namespace

PackedKey StateCodec::pack(const SystemState& s) const {
  Packer p;
  p.push(s.op_cm, bits_op);
  p.push(s.op_am, bits_op);
  p.push(s.stock_cm, bits_stock);
  p.push(s.stock_am, bits_stock);
  for (int v : s.pipe_cm) p.push(v, bits_slot_cm);
  for (int v : s.pipe_am) p.push(v, bits_slot_am);
  return from128(p.acc);
}

PackedKey StateCodec::pack(const SimplifiedState& s) const {
  Packer p;
  p.push(s.operating, bits_op);
  p.push(0, bits_op);
  p.push(s.stock, bits_stock);
  p.push(0, bits_stock);
  for (int v : s.pipe_cm) p.push(v, bits_slot_cm);
  for (int v : s.pipe_am) p.push(v, bits_slot_am);
  return from128(p.acc);
}

SystemState StateCodec::unpack_full(PackedKey key,
                                    const InstanceParams& params) const {
  U128 acc = to128(key);
  const int total = 2 * bits_op + 2 * bits_stock + lead_cm * bits_slot_cm +
                    lead_am * bits_slot_am;
  int at = total;
  auto take = [&](int bits) {
    at -= bits;
    if (bits == 0) return 0;
    U128 mask = (static_cast<U128>(1) << bits) - 1;
    return static_cast<int>((acc >> at) & mask);
  };
  SystemState s;
  s.op_cm = take(bits_op);
  s.op_am = take(bits_op);
  s.stock_cm = take(bits_stock);
  s.stock_am = take(bits_stock);
  s.pipe_cm.resize(static_cast<std::size_t>(params.lead_cm));
  for (int& v : s.pipe_cm) v = take(bits_slot_cm);
  s.pipe_am.resize(static_cast<std::size_t>(params.lead_am));
  for (int& v : s.pipe_am) v = take(bits_slot_am);
  return s;
}

SimplifiedState StateCodec::unpack_single(PackedKey key,
                                          const InstanceParams& params) const {
  SystemState f = unpack_full(key, params);
  SimplifiedState s;
  s.operating = f.op_cm;
  s.stock = f.stock_cm;
  s.pipe_cm = std::move(f.pipe_cm);
  s.pipe_am = std::move(f.pipe_am);
  return s;
}

PackedKey StateCodec::newest_cm_unit() const {
  // The newest cm slot sits just above the full am pipeline section.
  return from128(static_cast<U128>(1) << (lead_am * bits_slot_am));
}

PackedKey StateCodec::newest_am_unit() const {
  return from128(static_cast<U128>(1));
}

StateSpace StateSpace::enumerate(const InstanceParams& params, ModelKind kind,
                                 std::size_t cap) {
  params.validate();
  StateSpace space;
  space.params_ = params;
  space.kind_ = kind;
  space.codec_ = kind == ModelKind::kFull ? StateCodec::full(params)
                                          : StateCodec::single(params);
  const int n = params.installed_base;
  const int s_max = params.max_in_system;

  std::vector<int> pipe_cm(static_cast<std::size_t>(params.lead_cm), 0);
  std::vector<int> pipe_am(static_cast<std::size_t>(params.lead_am), 0);
  std::size_t count = 0;

  auto emit = [&](const PackedKey& key) {
    if (++count > cap)
      throw std::runtime_error(
          "state space exceeds cap of " + std::to_string(cap) +
          " states; use a heuristic or learned policy for this instance");
    space.keys_.push_back(key);
  };

  // Enumerate pipeline contents whose item total stays within `budget`,
  // lexicographically, then hand off to `leaf`.
  std::function<void(std::size_t, int, const std::function<void(int)>&)>
      fill_cm = [&](std::size_t slot, int budget,
                    const std::function<void(int)>& leaf) {
        if (slot == pipe_cm.size()) {
          leaf(budget);
          return;
        }
        for (int b = 0; b * params.batch_cm <= budget; ++b) {
          pipe_cm[slot] = b;
          fill_cm(slot + 1, budget - b * params.batch_cm, leaf);
        }
        pipe_cm[slot] = 0;
      };
  std::function<void(std::size_t, int, const std::function<void()>&)> fill_am =
      [&](std::size_t slot, int budget, const std::function<void()>& leaf) {
        if (slot == pipe_am.size()) {
          leaf();
          return;
        }
        for (int items = 0; items <= budget; ++items) {
          pipe_am[slot] = items;
          fill_am(slot + 1, budget - items, leaf);
        }
        pipe_am[slot] = 0;
      };

  auto enumerate_pipes = [&](int budget, const std::function<void()>& leaf) {
    fill_cm(0, budget,
            [&](int rest) { fill_am(0, rest, [&]() { leaf(); }); });
  };

  if (kind == ModelKind::kFull) {
    SystemState s;
    for (s.op_cm = 0; s.op_cm <= n; ++s.op_cm) {
      for (s.op_am = 0; s.op_am + s.op_cm <= n; ++s.op_am) {
        const int back = n - s.op_cm - s.op_am;
        const int stock_cap = back > 0 ? 0 : s_max;
        for (s.stock_cm = 0; s.stock_cm <= stock_cap; ++s.stock_cm) {
          for (s.stock_am = 0; s.stock_am + s.stock_cm <= stock_cap;
               ++s.stock_am) {
            const int budget = s_max + back - s.stock_cm - s.stock_am;
            enumerate_pipes(budget, [&]() {
              s.pipe_cm = pipe_cm;
              s.pipe_am = pipe_am;
              emit(space.codec_.pack(s));
            });
          }
        }
      }
    }
  } else {
    SimplifiedState s;
    for (s.operating = 0; s.operating <= n; ++s.operating) {
      const int back = n - s.operating;
      const int stock_cap = back > 0 ? 0 : s_max;
      for (s.stock = 0; s.stock <= stock_cap; ++s.stock) {
        const int budget = s_max + back - s.stock;
        enumerate_pipes(budget, [&]() {
          s.pipe_cm = pipe_cm;
          s.pipe_am = pipe_am;
          emit(space.codec_.pack(s));
        });
      }
    }
  }

  space.map_ = KeyIndex(space.keys_.size());
  for (std::size_t i = 0; i < space.keys_.size(); ++i)
    space.map_.insert(space.keys_[i], static_cast<std::int32_t>(i));

  if (kind == ModelKind::kFull)
    space.reference_ = space.index(initial_state(params));
  else
    space.reference_ = space.index(initial_state_simplified(params));
  return space;
}

SystemState random_state(const InstanceParams& params, RngStream& rng) {
  const int n = params.installed_base;
  SystemState s;
  s.op_cm = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n) + 1));
  s.op_am = static_cast<int>(
      rng.next_below(static_cast<std::uint64_t>(n - s.op_cm) + 1));
  const int back = n - s.op_cm - s.op_am;
  int budget = params.max_in_system + back;
  if (back == 0) {
    s.stock_cm = static_cast<int>(rng.next_below(
        static_cast<std::uint64_t>(std::min(budget, params.max_in_system)) + 1));
    budget -= s.stock_cm;
    s.stock_am = static_cast<int>(rng.next_below(
        static_cast<std::uint64_t>(std::min(budget, params.max_in_system)) + 1));
    budget -= s.stock_am;
  }
  s.pipe_cm.assign(static_cast<std::size_t>(params.lead_cm), 0);
  for (int& v : s.pipe_cm) {
    v = static_cast<int>(rng.next_below(
        static_cast<std::uint64_t>(budget / params.batch_cm) + 1));
    budget -= v * params.batch_cm;
  }
  s.pipe_am.assign(static_cast<std::size_t>(params.lead_am), 0);
  for (int& v : s.pipe_am) {
    v = static_cast<int>(
        rng.next_below(static_cast<std::uint64_t>(budget) + 1));
    budget -= v;
  }
  return s;
}

}  // namespace dsinv
