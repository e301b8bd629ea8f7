#pragma once

// Binomial queue: a forest of perfect heap-ordered binomial trees, at most
// one per rank. Insertion links eagerly (binary-counter carries).
// decrease_key sifts upward by exchanging payloads with the parent, so the
// handle addresses a small cell that always points at the item's node.

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"

namespace pqlab {

template <InstrumentationPolicy Policy = counting_policy>
class BinomialHeap {
 public:
  static constexpr bool supports_decrease_key = true;
  static constexpr unsigned kMaxRank = 64;

  struct Cell;
  struct Node {
    Key64 key;
    ItemId item;
    std::uint32_t rank;
    Node* parent;
    Node* child;    // highest-rank child; children are in descending rank order
    Node* sibling;  // next lower-rank sibling
    Cell* cell;
  };
  struct Cell {
    Node* node;
  };

  explicit BinomialHeap(const HeapConfig& config = {})
      : nodes_(config.pool, config.capacity_hint, config.pad_factor),
        cells_(config.pool, config.capacity_hint, 1) {
    rec_.set_track_first_touch(config.track_first_touch);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    Node* node = nodes_.acquire();
    Cell* cell = cells_.acquire();
    node->key = key;
    node->item = item;
    node->cell = cell;
    cell->node = node;
    rec_.write(node);
    ++size_;
    if (min_ == nullptr || rec_.less(key, min_->key)) min_ = node;
    add_root(node);
    return cells_.handle_of(cell);
  }

  Entry delete_min() {
    if (min_ == nullptr) throw underflow_error();
    rec_.begin_op();
    Node* m = min_;
    rec_.read(m);
    Entry out{m->item, m->key};
    roots_[m->rank] = nullptr;
    occupied_ &= ~(std::uint64_t{1} << m->rank);
    Node* c = m->child;
    while (c != nullptr) {
      Node* next = c->sibling;
      c->parent = nullptr;
      c->sibling = nullptr;
      rec_.write(c);
      add_root(c);
      c = next;
    }
    cells_.release(m->cell);
    nodes_.release(m);
    --size_;
    recompute_min();
    return out;
  }

  void decrease_key(const Handle& h, Key64 key) {
    Node* x = resolve(h)->node;
    rec_.begin_op();
    detail::require_smaller(x->key, key);
    x->key = key;
    rec_.write(x);
    while (x->parent != nullptr) {
      Node* p = x->parent;
      rec_.read(p);
      if (!rec_.less(key, p->key)) break;
      swap_payload(x, p);
      x = p;
    }
    if (x->parent == nullptr && rec_.less(x->key, min_->key)) min_ = x;
  }

  Entry find_min() const {
    if (min_ == nullptr) throw underflow_error();
    return Entry{min_->item, min_->key};
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  void clear() {
    roots_.fill(nullptr);
    occupied_ = 0;
    min_ = nullptr;
    size_ = 0;
    rank_limit_ = 0;
    nodes_.release_all();
    cells_.release_all();
  }
  HeapStats stats() const { return HeapStats{size_, rec_.counters()}; }

  /// Links two roots of equal rank; the lesser key becomes the parent.
  Node* link(Node* a, Node* b) {
    if (a->rank != b->rank) {
      throw invariant_error("binomial link of unequal ranks " + std::to_string(a->rank) + " and " +
                            std::to_string(b->rank));
    }
    rec_.read(a);
    rec_.read(b);
    Node* winner = rec_.less(a->key, b->key) ? a : b;
    Node* loser = winner == a ? b : a;
    loser->parent = winner;
    loser->sibling = winner->child;
    winner->child = loser;
    ++winner->rank;
    rec_.write(loser);
    rec_.write(winner);
    rec_.link();
    return winner;
  }

  /// Ranks of the current roots, ascending.
  std::vector<unsigned> root_ranks() const {
    std::vector<unsigned> out;
    for (unsigned r = 0; r < rank_limit_; ++r) {
      if (roots_[r] != nullptr) out.push_back(r);
    }
    return out;
  }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    std::size_t total = 0;
    std::size_t root_count = 0;
    const Node* best = nullptr;
    for (unsigned r = 0; r < kMaxRank; ++r) {
      const Node* t = roots_[r];
      if (t == nullptr) continue;
      ++root_count;
      std::string where = "root of rank slot " + std::to_string(r);
      if (t->rank != r) out.push_back({"root-rank", where + " holds rank " + std::to_string(t->rank)});
      if (t->parent != nullptr) out.push_back({"parent-link", where + " has a parent"});
      if (best == nullptr || t->key < best->key) best = t;
      total += check_tree(t, out);
    }
    if (total != size_) out.push_back({"size", "node count " + std::to_string(total) + " != size " + std::to_string(size_)});
    if (size_ > 0 && root_count > detail::floor_log2(size_) + 1) {
      out.push_back({"root-count", std::to_string(root_count) + " roots for size " + std::to_string(size_)});
    }
    if (best != min_) out.push_back({"min", "cached minimum is not the least root"});
    return out;
  }

 private:
  friend struct testing::access;

  Cell* resolve(const Handle& h) const {
    if constexpr (Policy::checked) {
      Cell* c = cells_.resolve(h);
      if (c == nullptr) throw invalid_handle_error();
      return c;
    } else {
      return static_cast<Cell*>(h.node);
    }
  }

  void add_root(Node* t) {
    unsigned r = t->rank;
    while (roots_[r] != nullptr) {
      Node* other = roots_[r];
      roots_[r] = nullptr;
      occupied_ &= ~(std::uint64_t{1} << r);
      t = link(other, t);
      ++r;
    }
    roots_[r] = t;
    occupied_ |= std::uint64_t{1} << r;
    if (r + 1 > rank_limit_) rank_limit_ = r + 1;
  }

  void recompute_min() {
    min_ = nullptr;
    for (std::uint64_t bits = occupied_; bits != 0; bits &= bits - 1) {
      Node* t = roots_[static_cast<unsigned>(std::countr_zero(bits))];
      rec_.read(t);
      if (min_ == nullptr || rec_.less(t->key, min_->key)) min_ = t;
    }
  }

  void swap_payload(Node* a, Node* b) {
    std::swap(a->key, b->key);
    std::swap(a->item, b->item);
    std::swap(a->cell, b->cell);
    a->cell->node = a;
    b->cell->node = b;
    rec_.write(a);
    rec_.write(b);
  }

  /// Returns the subtree size; appends violations.
  std::size_t check_tree(const Node* t, std::vector<Violation>& out) const {
    std::size_t count = 1;
    std::string where = "node with key " + std::to_string(t->key.raw());
    if (t->cell == nullptr || t->cell->node != t) out.push_back({"cell-link", where});
    std::uint32_t expect = t->rank;
    std::uint32_t children = 0;
    for (const Node* c = t->child; c != nullptr; c = c->sibling) {
      ++children;
      if (expect == 0 || c->rank != expect - 1) out.push_back({"perfection", where + " child rank order"});
      expect = c->rank;
      if (c->parent != t) out.push_back({"parent-link", where});
      if (!(t->key < c->key)) out.push_back({"heap-order", where});
      count += check_tree(c, out);
    }
    if (children != t->rank) out.push_back({"perfection", where + " has " + std::to_string(children) + " children at rank " + std::to_string(t->rank)});
    if (t->rank < 64 && count != (std::size_t{1} << t->rank)) {
      out.push_back({"perfection", where + " rank " + std::to_string(t->rank) + " subtree size " + std::to_string(count)});
    }
    return count;
  }

  NodePool<Node> nodes_;
  NodePool<Cell> cells_;
  std::array<Node*, kMaxRank> roots_{};
  unsigned rank_limit_ = 0;
  std::uint64_t occupied_ = 0;  // bit r set when roots_[r] is non-null
  Node* min_ = nullptr;
  std::size_t size_ = 0;
  Recorder<Policy> rec_;
};

}  // namespace pqlab
