#pragma once

// d-ary heaps for d in {2, 4, 8, 16}:
//   ImplicitSimpleHeap  level-order array of (key, item) pairs, no decrease_key
//   ImplicitHeap        level-order array of node pointers; nodes store their
//                       array index so a node pointer can serve as the handle
//   ExplicitHeap        linked nodes with a fixed d-wide child array
// delete_min moves the last entry to the root and sifts it down.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"

namespace pqlab {

template <unsigned D>
concept SupportedArity = D == 2 || D == 4 || D == 8 || D == 16;

/// Moves a[i] toward the root while it is smaller than its parent.
/// `key(x)` loads a key, `less` compares keys, `placed(pos)` is called for
/// every position that received a new element. Returns the final position.
template <unsigned D, typename T, typename KeyOf, typename Less, typename Placed>
std::size_t sift_up(std::span<T> a, std::size_t i, KeyOf&& key, Less&& less, Placed&& placed) {
  const std::size_t start = i;
  T moving = a[i];
  const Key64 k = key(moving);
  while (i > 0) {
    std::size_t parent = (i - 1) / D;
    if (!less(k, key(a[parent]))) break;
    a[i] = a[parent];
    placed(i);
    i = parent;
  }
  if (i != start) {
    a[i] = moving;
    placed(i);
  }
  return i;
}

/// Moves a[i] toward the leaves, swapping with its least child while that
/// child is smaller. One pass over up to D children per level.
template <unsigned D, typename T, typename KeyOf, typename Less, typename Placed>
std::size_t sift_down(std::span<T> a, std::size_t i, KeyOf&& key, Less&& less, Placed&& placed) {
  const std::size_t n = a.size();
  const std::size_t start = i;
  T moving = a[i];
  const Key64 k = key(moving);
  for (;;) {
    std::size_t first = i * D + 1;
    if (first >= n) break;
    std::size_t last = first + D < n ? first + D : n;
    std::size_t best = first;
    Key64 best_key = key(a[first]);
    for (std::size_t c = first + 1; c < last; ++c) {
      Key64 ck = key(a[c]);
      if (less(ck, best_key)) {
        best = c;
        best_key = ck;
      }
    }
    if (!less(best_key, k)) break;
    a[i] = a[best];
    placed(i);
    i = best;
  }
  if (i != start) {
    a[i] = moving;
    placed(i);
  }
  return i;
}

/// Child indices leading from the root to a level-order position.
struct PathSteps {
  std::array<std::uint8_t, 64> step{};
  unsigned length = 0;

  std::vector<unsigned> to_vector() const { return {step.begin(), step.begin() + length}; }
};

/// Root-to-last-slot path of a complete d-ary tree holding `size` nodes.
template <unsigned D>
PathSteps last_path(std::size_t size) {
  PathSteps reversed;
  for (std::size_t pos = size - 1; pos > 0; pos = (pos - 1) / D) {
    reversed.step[reversed.length++] = static_cast<std::uint8_t>((pos - 1) % D);
  }
  PathSteps path;
  path.length = reversed.length;
  for (unsigned i = 0; i < reversed.length; ++i) path.step[i] = reversed.step[reversed.length - 1 - i];
  return path;
}

// ---------------------------------------------------------------------------

template <unsigned D, InstrumentationPolicy Policy = counting_policy>
  requires SupportedArity<D>
class ImplicitSimpleHeap {
 public:
  static constexpr bool supports_decrease_key = false;
  static constexpr unsigned arity = D;

  struct Slot {
    Key64 key;
    ItemId item;
  };

  explicit ImplicitSimpleHeap(const HeapConfig& config = {}) {
    if (config.pool == PoolStrategy::eager) slots_.reserve(config.capacity_hint);
    rec_.set_track_first_touch(config.track_first_touch);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    slots_.push_back(Slot{key, item});
    rec_.write(&slots_.back());
    sift_up_at(slots_.size() - 1);
    return Handle{};
  }

  Entry delete_min() {
    if (slots_.empty()) throw underflow_error();
    rec_.begin_op();
    rec_.read(&slots_[0]);
    Entry out{slots_[0].item, slots_[0].key};
    rec_.read(&slots_.back());
    slots_[0] = slots_.back();
    slots_.pop_back();
    if (!slots_.empty()) {
      rec_.write(&slots_[0]);
      sift_down_at(0);
    }
    return out;
  }

  void decrease_key(const Handle&, Key64) {
    throw unsupported_operation_error("implicit_simple heap does not support decrease_key");
  }

  Entry find_min() const {
    if (slots_.empty()) throw underflow_error();
    return Entry{slots_[0].item, slots_[0].key};
  }

  std::size_t size() const { return slots_.size(); }
  bool empty() const { return slots_.empty(); }
  void clear() { slots_.clear(); }
  HeapStats stats() const { return HeapStats{slots_.size(), rec_.counters()}; }

  std::size_t sift_up_at(std::size_t i) {
    return sift_up<D>(std::span<Slot>(slots_), i, key_of(), less_of(), placed_of());
  }
  std::size_t sift_down_at(std::size_t i) {
    return sift_down<D>(std::span<Slot>(slots_), i, key_of(), less_of(), placed_of());
  }

  std::span<const Slot> slots() const { return slots_; }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    for (std::size_t i = 1; i < slots_.size(); ++i) {
      if (!(slots_[(i - 1) / D].key < slots_[i].key)) out.push_back({"heap-order", "position " + std::to_string(i)});
    }
    return out;
  }

 private:
  friend struct testing::access;

  auto key_of() {
    return [this](const Slot& s) {
      rec_.read(&s);
      return s.key;
    };
  }
  auto less_of() {
    return [this](Key64 a, Key64 b) { return rec_.less(a, b); };
  }
  auto placed_of() {
    return [this](std::size_t pos) { rec_.write(&slots_[pos]); };
  }

  std::vector<Slot> slots_;
  Recorder<Policy> rec_;
};

// ---------------------------------------------------------------------------

template <unsigned D, InstrumentationPolicy Policy = counting_policy>
  requires SupportedArity<D>
class ImplicitHeap {
 public:
  static constexpr bool supports_decrease_key = true;
  static constexpr unsigned arity = D;

  struct Node {
    Key64 key;
    ItemId item;
    std::uint32_t index;
  };

  explicit ImplicitHeap(const HeapConfig& config = {})
      : pool_(config.pool, config.capacity_hint, config.pad_factor) {
    if (config.pool == PoolStrategy::eager) slots_.reserve(config.capacity_hint);
    rec_.set_track_first_touch(config.track_first_touch);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    Node* node = pool_.acquire();
    node->key = key;
    node->item = item;
    node->index = static_cast<std::uint32_t>(slots_.size());
    rec_.write(node);
    slots_.push_back(node);
    sift_up_at(node->index);
    return pool_.handle_of(node);
  }

  Entry delete_min() {
    if (slots_.empty()) throw underflow_error();
    rec_.begin_op();
    Node* top = slots_[0];
    rec_.read(top);
    Entry out{top->item, top->key};
    Node* last = slots_.back();
    slots_.pop_back();
    if (!slots_.empty()) {
      slots_[0] = last;
      last->index = 0;
      rec_.write(last);
      sift_down_at(0);
    }
    pool_.release(top);
    return out;
  }

  void decrease_key(const Handle& h, Key64 key) {
    Node* node = resolve(h);
    rec_.begin_op();
    detail::require_smaller(node->key, key);
    node->key = key;
    rec_.write(node);
    sift_up_at(node->index);
  }

  Entry find_min() const {
    if (slots_.empty()) throw underflow_error();
    return Entry{slots_[0]->item, slots_[0]->key};
  }

  std::size_t size() const { return slots_.size(); }
  bool empty() const { return slots_.empty(); }
  void clear() {
    slots_.clear();
    pool_.release_all();
  }
  HeapStats stats() const { return HeapStats{slots_.size(), rec_.counters()}; }
  const NodePool<Node>& pool() const { return pool_; }

  std::size_t sift_up_at(std::size_t i) {
    return sift_up<D>(std::span<Node*>(slots_), i, key_of(), less_of(), placed_of());
  }
  std::size_t sift_down_at(std::size_t i) {
    return sift_down<D>(std::span<Node*>(slots_), i, key_of(), less_of(), placed_of());
  }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i] == nullptr) {
        out.push_back({"shape", "empty slot at position " + std::to_string(i)});
        continue;
      }
      if (slots_[i]->index != i) out.push_back({"back-link", "position " + std::to_string(i)});
      if (i > 0 && slots_[(i - 1) / D] != nullptr && !(slots_[(i - 1) / D]->key < slots_[i]->key)) {
        out.push_back({"heap-order", "position " + std::to_string(i)});
      }
    }
    return out;
  }

 private:
  friend struct testing::access;

  Node* resolve(const Handle& h) const {
    if constexpr (Policy::checked) {
      Node* n = pool_.resolve(h);
      if (n == nullptr) throw invalid_handle_error();
      return n;
    } else {
      return static_cast<Node*>(h.node);
    }
  }

  auto key_of() {
    return [this](const Node* n) {
      rec_.read(n);
      return n->key;
    };
  }
  auto less_of() {
    return [this](Key64 a, Key64 b) { return rec_.less(a, b); };
  }
  auto placed_of() {
    return [this](std::size_t pos) {
      slots_[pos]->index = static_cast<std::uint32_t>(pos);
      rec_.write(slots_[pos]);
    };
  }

  NodePool<Node> pool_;
  std::vector<Node*> slots_;
  Recorder<Policy> rec_;
};

// ---------------------------------------------------------------------------

template <unsigned D, InstrumentationPolicy Policy = counting_policy>
  requires SupportedArity<D>
class ExplicitHeap {
 public:
  static constexpr bool supports_decrease_key = true;
  static constexpr unsigned arity = D;

  struct Node {
    Key64 key;
    ItemId item;
    std::uint8_t which;  // slot in parent's child array
    std::uint8_t count;  // occupied child slots, always a prefix
    Node* parent;
    std::array<Node*, D> child;
  };

  explicit ExplicitHeap(const HeapConfig& config = {})
      : pool_(config.pool, config.capacity_hint, config.pad_factor) {
    rec_.set_track_first_touch(config.track_first_touch);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    Node* node = pool_.acquire();
    node->key = key;
    node->item = item;
    rec_.write(node);
    ++size_;
    if (root_ == nullptr) {
      root_ = node;
    } else {
      PathSteps path = last_path<D>(size_);
      Node* parent = root_;
      for (unsigned i = 0; i + 1 < path.length; ++i) {
        rec_.read(parent);
        parent = parent->child[path.step[i]];
      }
      std::uint8_t slot = path.step[path.length - 1];
      parent->child[slot] = node;
      ++parent->count;
      rec_.write(parent);
      node->parent = parent;
      node->which = slot;
      sift_up_node(node);
    }
    return pool_.handle_of(node);
  }

  Entry delete_min() {
    if (root_ == nullptr) throw underflow_error();
    rec_.begin_op();
    Node* top = root_;
    rec_.read(top);
    Entry out{top->item, top->key};
    if (size_ == 1) {
      root_ = nullptr;
    } else {
      Node* last = node_at(size_);
      Node* lp = last->parent;
      lp->child[last->which] = nullptr;
      --lp->count;
      rec_.write(lp);
      last->parent = nullptr;
      last->which = 0;
      last->count = top->count;
      last->child = top->child;
      for (unsigned i = 0; i < last->count; ++i) {
        last->child[i]->parent = last;
        rec_.write(last->child[i]);
      }
      rec_.write(last);
      root_ = last;
      sift_down_node(last);
    }
    --size_;
    pool_.release(top);
    return out;
  }

  void decrease_key(const Handle& h, Key64 key) {
    Node* node = resolve(h);
    rec_.begin_op();
    rec_.read(node);
    detail::require_smaller(node->key, key);
    node->key = key;
    rec_.write(node);
    sift_up_node(node);
  }

  Entry find_min() const {
    if (root_ == nullptr) throw underflow_error();
    return Entry{root_->item, root_->key};
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  void clear() {
    root_ = nullptr;
    size_ = 0;
    pool_.release_all();
  }
  HeapStats stats() const { return HeapStats{size_, rec_.counters()}; }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    if (root_ == nullptr) {
      if (size_ != 0) out.push_back({"shape", "null root with nonzero size"});
      return out;
    }
    if (root_->parent != nullptr) out.push_back({"shape", "root has a parent"});
    // Level-order walk assigning implicit indices.
    std::vector<std::pair<const Node*, std::size_t>> frontier{{root_, 0}};
    std::size_t seen = 0;
    while (!frontier.empty()) {
      auto [n, idx] = frontier.back();
      frontier.pop_back();
      ++seen;
      std::string where = "level-order index " + std::to_string(idx);
      if (idx >= size_) out.push_back({"shape", where + " beyond size"});
      if (n->count > D) out.push_back({"shape", where + " child count exceeds arity"});
      for (unsigned j = 0; j < D; ++j) {
        const Node* c = n->child[j];
        if ((j < n->count) != (c != nullptr)) {
          out.push_back({"shape", where + " child slots are not a prefix"});
          continue;
        }
        if (c == nullptr) continue;
        if (c->parent != n || c->which != j) out.push_back({"parent-link", where + " child " + std::to_string(j)});
        if (!(n->key < c->key)) out.push_back({"heap-order", where + " child " + std::to_string(j)});
        frontier.push_back({c, idx * D + 1 + j});
      }
    }
    if (seen != size_) out.push_back({"shape", "reachable node count differs from size"});
    return out;
  }

 private:
  friend struct testing::access;

  Node* resolve(const Handle& h) const {
    if constexpr (Policy::checked) {
      Node* n = pool_.resolve(h);
      if (n == nullptr) throw invalid_handle_error();
      return n;
    } else {
      return static_cast<Node*>(h.node);
    }
  }

  /// Node at 1-based level-order rank `rank`.
  Node* node_at(std::size_t rank) {
    PathSteps path = last_path<D>(rank);
    Node* n = root_;
    for (unsigned i = 0; i < path.length; ++i) {
      rec_.read(n);
      n = n->child[path.step[i]];
    }
    return n;
  }

  void sift_up_node(Node* x) {
    const Key64 k = x->key;
    while (x->parent != nullptr) {
      rec_.read(x->parent);
      if (!rec_.less(k, x->parent->key)) break;
      swap_with_parent(x);
    }
  }

  void sift_down_node(Node* x) {
    const Key64 k = x->key;
    while (x->count > 0) {
      Node* best = x->child[0];
      rec_.read(best);
      for (unsigned j = 1; j < x->count; ++j) {
        rec_.read(x->child[j]);
        if (rec_.less(x->child[j]->key, best->key)) best = x->child[j];
      }
      if (!rec_.less(best->key, k)) break;
      swap_with_parent(best);
    }
  }

  /// Exchanges the tree positions of `c` and its parent; keys stay with nodes.
  void swap_with_parent(Node* c) {
    Node* p = c->parent;
    Node* gp = p->parent;
    const std::uint8_t j = c->which;
    const std::uint8_t k = p->which;
    const std::array<Node*, D> c_children = c->child;
    const std::uint8_t c_count = c->count;

    c->parent = gp;
    c->which = k;
    if (gp != nullptr) {
      gp->child[k] = c;
      rec_.write(gp);
    } else {
      root_ = c;
    }
    c->child = p->child;
    c->count = p->count;
    c->child[j] = p;
    for (unsigned i = 0; i < c->count; ++i) {
      c->child[i]->parent = c;
      if (c->child[i] != p) rec_.write(c->child[i]);
    }
    rec_.write(c);

    p->parent = c;
    p->which = j;
    p->child = c_children;
    p->count = c_count;
    for (unsigned i = 0; i < p->count; ++i) {
      p->child[i]->parent = p;
      rec_.write(p->child[i]);
    }
    rec_.write(p);
  }

  NodePool<Node> pool_;
  Node* root_ = nullptr;
  std::size_t size_ = 0;
  Recorder<Policy> rec_;
};

}  // namespace pqlab
