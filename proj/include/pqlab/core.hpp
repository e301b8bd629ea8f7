#pragma once

// Core vocabulary shared by every heap: composite keys, handles, errors,
// instrumentation counters and the priority-queue contract.

#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace pqlab {

using ItemId = std::uint32_t;

/// 64-bit composite key: user key in the high 32 bits, item id in the low
/// 32 bits. Ordered as an unsigned integer.
class Key64 {
 public:
  constexpr Key64() = default;
  constexpr explicit Key64(std::uint64_t raw) : raw_(raw) {}

  constexpr std::uint64_t raw() const { return raw_; }
  constexpr std::uint32_t key32() const { return static_cast<std::uint32_t>(raw_ >> 32); }
  constexpr std::uint32_t low32() const { return static_cast<std::uint32_t>(raw_); }

  friend constexpr auto operator<=>(Key64, Key64) = default;

 private:
  std::uint64_t raw_ = 0;
};

constexpr Key64 make_key(std::uint32_t key32, ItemId id) {
  return Key64{(static_cast<std::uint64_t>(key32) << 32) | id};
}

inline constexpr Key64 kMaxKey{~std::uint64_t{0}};

struct Entry {
  ItemId item = 0;
  Key64 key;
  friend constexpr bool operator==(const Entry&, const Entry&) = default;
};

// ---------------------------------------------------------------------------
// Errors

class pq_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// delete_min / find_min on an empty heap.
class underflow_error : public pq_error {
 public:
  underflow_error() : pq_error("priority queue underflow: heap is empty") {}
};

/// Eager pool exhausted or a reservation failed.
class capacity_error : public pq_error {
 public:
  using pq_error::pq_error;
};

/// decrease_key with a key that is not strictly smaller.
class contract_error : public pq_error {
 public:
  using pq_error::pq_error;
};

/// A handle used after its item was deleted (or never issued by this heap).
class invalid_handle_error : public pq_error {
 public:
  invalid_handle_error() : pq_error("invalid handle: item is no longer live") {}
};

class unsupported_operation_error : public pq_error {
 public:
  using pq_error::pq_error;
};

/// Internal structural precondition broken (e.g. linking unequal ranks).
class invariant_error : public pq_error {
 public:
  using pq_error::pq_error;
};

/// Pool misuse such as releasing a slot twice.
class pool_misuse_error : public pq_error {
 public:
  using pq_error::pq_error;
};

// ---------------------------------------------------------------------------
// Handles

/// Stable reference to a live node. `node` is the physical address, `slot`
/// and `generation` let the owning pool detect use after release.
struct Handle {
  void* node = nullptr;
  std::uint32_t slot = 0;
  std::uint32_t generation = 0;

  bool empty() const { return node == nullptr; }
  friend bool operator==(const Handle&, const Handle&) = default;
};

// ---------------------------------------------------------------------------
// Instrumentation

struct HeapCounters {
  std::uint64_t comparisons = 0;
  std::uint64_t node_reads = 0;
  std::uint64_t node_writes = 0;
  std::uint64_t links = 0;
  std::uint64_t cuts = 0;
  std::uint64_t marks = 0;
  // Per operation, whether a node's first access was a read or a write.
  std::uint64_t read_first = 0;
  std::uint64_t write_first = 0;

  friend bool operator==(const HeapCounters&, const HeapCounters&) = default;
};

struct HeapStats {
  std::size_t size = 0;
  HeapCounters counters;
};

/// Instrumented pass: counters, handle generation checks.
struct counting_policy {
  static constexpr bool counting = true;
  static constexpr bool checked = true;
};

/// Timed pass: no counters, no handle checks.
struct timing_policy {
  static constexpr bool counting = false;
  static constexpr bool checked = false;
};

template <typename P>
concept InstrumentationPolicy = requires {
  { P::counting } -> std::convertible_to<bool>;
  { P::checked } -> std::convertible_to<bool>;
};

template <InstrumentationPolicy Policy>
class Recorder {
 public:
  static constexpr bool enabled = Policy::counting;

  bool less(Key64 a, Key64 b) {
    if constexpr (enabled) ++c_.comparisons;
    return a < b;
  }

  void read(const void* node) {
    if constexpr (enabled) {
      ++c_.node_reads;
      if (track_first_) first_touch(node, true);
    }
  }
  void write(const void* node) {
    if constexpr (enabled) {
      ++c_.node_writes;
      if (track_first_) first_touch(node, false);
    }
  }
  void link() {
    if constexpr (enabled) ++c_.links;
  }
  void cut() {
    if constexpr (enabled) ++c_.cuts;
  }
  void mark() {
    if constexpr (enabled) ++c_.marks;
  }

  /// Marks an operation boundary for first-touch classification.
  void begin_op() {
    if constexpr (enabled) {
      if (track_first_) touched_.clear();
    }
  }

  void set_track_first_touch(bool on) { track_first_ = on; }
  const HeapCounters& counters() const { return c_; }

 private:
  void first_touch(const void* node, bool is_read) {
    if (touched_.insert(node).second) ++(is_read ? c_.read_first : c_.write_first);
  }

  HeapCounters c_;
  bool track_first_ = false;
  std::unordered_set<const void*> touched_;
};

// ---------------------------------------------------------------------------
// Configuration

enum class PoolStrategy { eager, doubling, on_demand };

struct HeapConfig {
  PoolStrategy pool = PoolStrategy::eager;
  /// Expected maximum number of live items (trace header's max-live size).
  std::size_t capacity_hint = 1024;
  unsigned pad_factor = 1;
  /// Quake heap decay parameter alpha = num/den, in (1/2, 1).
  unsigned alpha_num = 3;
  unsigned alpha_den = 4;
  bool track_first_touch = false;
};

// ---------------------------------------------------------------------------
// Structural validation

struct Violation {
  std::string rule;
  std::string where;
};

// ---------------------------------------------------------------------------
// Contract

template <typename H>
concept PriorityQueue = requires(H h, const H ch, ItemId id, Key64 k, Handle hd) {
  { h.insert(id, k) } -> std::same_as<Handle>;
  { h.delete_min() } -> std::same_as<Entry>;
  h.decrease_key(hd, k);
  { ch.find_min() } -> std::same_as<Entry>;
  { ch.size() } -> std::convertible_to<std::size_t>;
  { ch.empty() } -> std::convertible_to<bool>;
  h.clear();
  { ch.stats() } -> std::same_as<HeapStats>;
  { ch.validate() } -> std::same_as<std::vector<Violation>>;
  { H::supports_decrease_key } -> std::convertible_to<bool>;
};

namespace testing {
/// Defined only by the test suite; lets tests corrupt internals on purpose.
struct access;
}  // namespace testing

namespace detail {

inline void require_smaller(Key64 current, Key64 proposed) {
  if (!(proposed < current)) {
    throw contract_error("decrease_key: new key " + std::to_string(proposed.raw()) +
                         " is not smaller than current key " + std::to_string(current.raw()));
  }
}

inline unsigned floor_log2(std::uint64_t v) {
  unsigned r = 0;
  while (v >>= 1) ++r;
  return r;
}

inline unsigned ceil_log2(std::uint64_t v) {
  return v <= 1 ? 0 : floor_log2(v - 1) + 1;
}

}  // namespace detail

}  // namespace pqlab
