#pragma once

// Fixed-size node storage shared by the linked heap variants.
//
// Every slot is [header | node | padding]. The header records the slot index
// so a node pointer can be mapped back to its generation tag. Generations are
// odd while a slot is live and even while it is free; a handle remembers the
// generation it was issued under.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <new>
#include <type_traits>
#include <utility>
#include <vector>

#include "pqlab/core.hpp"

namespace pqlab {

struct PoolCounters {
  std::uint64_t acquires = 0;
  std::uint64_t releases = 0;
  std::uint64_t peak_live = 0;
  /// Reservations made after construction (capacity growth).
  std::uint64_t growth_events = 0;
  /// All reservations, including the initial one.
  std::uint64_t reservations = 0;
};

template <typename Node>
class NodePool {
  static_assert(std::is_trivially_destructible_v<Node>, "pool nodes are never destroyed");

  struct SlotHeader {
    std::uint32_t index;
    std::uint32_t unused;
  };

  static constexpr std::size_t round_up(std::size_t v, std::size_t a) { return (v + a - 1) / a * a; }
  static constexpr std::size_t kAlign = alignof(Node) > alignof(SlotHeader) ? alignof(Node) : alignof(SlotHeader);
  static constexpr std::size_t kNodeOffset = round_up(sizeof(SlotHeader), alignof(Node));

 public:
  static constexpr std::size_t kDoublingInitial = 4;

  /// Slot size in bytes for pad factor 1.
  static constexpr std::size_t base_node_size() { return round_up(kNodeOffset + sizeof(Node), kAlign); }

  NodePool(PoolStrategy strategy, std::size_t capacity_hint, unsigned pad_factor = 1)
      : strategy_(strategy), stride_(base_node_size() * (pad_factor == 0 ? 1 : pad_factor)) {
    switch (strategy_) {
      case PoolStrategy::eager:
        capacity_ = capacity_hint == 0 ? 1 : capacity_hint;
        reserve_block(capacity_);
        break;
      case PoolStrategy::doubling:
        capacity_ = kDoublingInitial;
        reserve_block(capacity_);
        break;
      case PoolStrategy::on_demand:
        capacity_ = 0;
        break;
    }
  }

  NodePool(const NodePool&) = delete;
  NodePool& operator=(const NodePool&) = delete;
  NodePool(NodePool&&) noexcept = default;
  NodePool& operator=(NodePool&&) noexcept = default;

  ~NodePool() {
    if (strategy_ == PoolStrategy::on_demand) {
      for (std::size_t i = 0; i < addr_.size(); ++i) {
        if (addr_[i] != nullptr) ::operator delete(addr_[i]);
      }
    }
  }

  /// Returns a value-initialised node.
  Node* acquire() {
    std::uint32_t idx;
    if (!free_.empty()) {
      idx = free_.back();
      free_.pop_back();
    } else {
      if (high_water_ == capacity_ && strategy_ != PoolStrategy::on_demand) grow();
      idx = static_cast<std::uint32_t>(high_water_++);
      gen_.push_back(0);
      if (strategy_ == PoolStrategy::on_demand) addr_.push_back(nullptr);
    }
    std::byte* slot;
    if (strategy_ == PoolStrategy::on_demand) {
      slot = static_cast<std::byte*>(::operator new(stride_));
      addr_[idx] = slot;
      ++counters_.growth_events;
      ++counters_.reservations;
    } else {
      slot = slot_address(idx);
    }
    ++gen_[idx];
    ++counters_.acquires;
    std::uint64_t live = counters_.acquires - counters_.releases;
    if (live > counters_.peak_live) counters_.peak_live = live;
    new (slot) SlotHeader{idx, 0};
    return new (slot + kNodeOffset) Node{};
  }

  void release(Node* node) {
    std::uint32_t idx = header_of(node)->index;
    if (idx >= gen_.size() || (gen_[idx] & 1u) == 0) throw pool_misuse_error("pool: slot released twice");
    ++gen_[idx];
    ++counters_.releases;
    if (strategy_ == PoolStrategy::on_demand) {
      ::operator delete(addr_[idx]);
      addr_[idx] = nullptr;
    }
    free_.push_back(idx);
  }

  /// Releases every live slot at once.
  void release_all() {
    for (std::size_t i = 0; i < high_water_; ++i) {
      if ((gen_[i] & 1u) == 0) continue;
      ++gen_[i];
      ++counters_.releases;
      if (strategy_ == PoolStrategy::on_demand) {
        ::operator delete(addr_[i]);
        addr_[i] = nullptr;
      }
    }
    free_.clear();
    for (std::size_t i = high_water_; i-- > 0;) free_.push_back(static_cast<std::uint32_t>(i));
  }

  Handle handle_of(Node* node) const {
    std::uint32_t idx = header_of(node)->index;
    return Handle{node, idx, gen_[idx]};
  }

  /// nullptr when the handle's slot has been released since issue.
  Node* resolve(const Handle& h) const {
    if (h.node == nullptr || h.slot >= gen_.size() || gen_[h.slot] != h.generation) return nullptr;
    return static_cast<Node*>(h.node);
  }

  bool is_live(const Node* node) const {
    std::uint32_t idx = header_of(const_cast<Node*>(node))->index;
    return idx < gen_.size() && (gen_[idx] & 1u) != 0;
  }

  std::size_t node_size() const { return stride_; }
  std::size_t capacity() const { return strategy_ == PoolStrategy::on_demand ? high_water_ : capacity_; }
  std::size_t live() const { return static_cast<std::size_t>(counters_.acquires - counters_.releases); }
  PoolStrategy strategy() const { return strategy_; }
  const PoolCounters& counters() const { return counters_; }

 private:
  static SlotHeader* header_of(Node* node) {
    return reinterpret_cast<SlotHeader*>(reinterpret_cast<std::byte*>(node) - kNodeOffset);
  }

  void reserve_block(std::size_t slots) {
    // Value-initialised so page faults happen here rather than in timed code.
    blocks_.push_back(std::make_unique<std::byte[]>(slots * stride_));
    ++counters_.reservations;
  }

  void grow() {
    if (strategy_ == PoolStrategy::eager) {
      throw capacity_error("pool: eager pool exhausted at capacity " + std::to_string(capacity_));
    }
    reserve_block(capacity_);
    capacity_ *= 2;
    ++counters_.growth_events;
  }

  std::byte* slot_address(std::size_t idx) const {
    if (strategy_ == PoolStrategy::eager || idx < kDoublingInitial) return blocks_[0].get() + idx * stride_;
    // Block k >= 1 starts at index kDoublingInitial << (k - 1) and has that many slots.
    std::size_t k = detail::floor_log2(idx / kDoublingInitial) + 1;
    std::size_t start = kDoublingInitial << (k - 1);
    return blocks_[k].get() + (idx - start) * stride_;
  }

  PoolStrategy strategy_;
  std::size_t stride_;
  std::size_t capacity_ = 0;
  std::size_t high_water_ = 0;
  std::vector<std::unique_ptr<std::byte[]>> blocks_;
  std::vector<std::byte*> addr_;  // on_demand only
  std::vector<std::uint32_t> gen_;
  std::vector<std::uint32_t> free_;
  PoolCounters counters_;
};

}  // namespace pqlab
