#pragma once

// Violation heap. Children are kept newest first, so the first two children
// of a node are its "active" ones and determine its rank:
//   rank(z) <= ceil((rank(c1) + rank(c2)) / 2) + 1,  missing child = -1.
// Insertion is lazy. delete_min consolidates with three-way links until at
// most two trees of each rank remain. decrease_key cuts only on a heap-order
// violation and propagates rank decreases while the node is an active child.

#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"

namespace pqlab {

template <InstrumentationPolicy Policy = counting_policy>
class ViolationHeap {
 public:
  static constexpr bool supports_decrease_key = true;

  struct Node {
    Key64 key;
    ItemId item;
    int rank;
    Node* parent;
    Node* child;
    Node* prev;  // siblings (also the root list)
    Node* next;
  };

  explicit ViolationHeap(const HeapConfig& config = {})
      : pool_(config.pool, config.capacity_hint, config.pad_factor),
        buckets_(2 * (2 * detail::ceil_log2(config.capacity_hint + 1) + 4), nullptr) {
    rec_.set_track_first_touch(config.track_first_touch);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    Node* x = pool_.acquire();
    x->key = key;
    x->item = item;
    x->rank = 0;
    rec_.write(x);
    push_root(x);
    if (min_ == nullptr || rec_.less(key, min_->key)) min_ = x;
    ++size_;
    consolidated_ = false;
    return pool_.handle_of(x);
  }

  Entry delete_min() {
    if (min_ == nullptr) throw underflow_error();
    rec_.begin_op();
    Node* m = min_;
    rec_.read(m);
    Entry out{m->item, m->key};
    unlink_root(m);
    for (Node* c = m->child; c != nullptr;) {
      Node* next = c->next;
      c->parent = nullptr;
      rec_.write(c);
      push_root(c);
      c = next;
    }
    pool_.release(m);
    --size_;
    consolidate();
    return out;
  }

  void decrease_key(const Handle& h, Key64 key) {
    Node* x = resolve(h);
    rec_.begin_op();
    detail::require_smaller(x->key, key);
    x->key = key;
    rec_.write(x);
    if (Node* p = x->parent; p != nullptr) {
      rec_.read(p);
      if (rec_.less(key, p->key)) {
        bool active = p->child == x || p->child->next == x;
        unlink_child(x, p);
        push_root(x);
        rec_.cut();
        consolidated_ = false;
        if (active) propagate(p);
      }
    }
    if (rec_.less(key, min_->key)) min_ = x;
  }

  Entry find_min() const {
    if (min_ == nullptr) throw underflow_error();
    return Entry{min_->item, min_->key};
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  void clear() {
    roots_ = min_ = nullptr;
    size_ = 0;
    consolidated_ = true;
    pool_.release_all();
  }
  HeapStats stats() const { return HeapStats{size_, rec_.counters()}; }

  /// Three-way link of detached roots of equal rank: the least key becomes
  /// the parent of the other two.
  Node* link3(Node* a, Node* b, Node* c) {
    if (a->rank != b->rank || b->rank != c->rank) {
      throw invariant_error("violation link of unequal ranks " + std::to_string(a->rank) + ", " +
                            std::to_string(b->rank) + ", " + std::to_string(c->rank));
    }
    rec_.read(a);
    rec_.read(b);
    rec_.read(c);
    Node* w = a;
    if (rec_.less(b->key, w->key)) w = b;
    if (rec_.less(c->key, w->key)) w = c;
    for (Node* x : {a, b, c}) {
      if (x == w) continue;
      x->parent = w;
      x->prev = nullptr;
      x->next = w->child;
      if (w->child != nullptr) w->child->prev = x;
      w->child = x;
      rec_.write(x);
      rec_.link();
    }
    w->rank = formula(w);
    rec_.write(w);
    return w;
  }

  /// Rank implied by a node's two active children.
  static int formula(const Node* z) {
    int r1 = -1, r2 = -1;
    if (z->child != nullptr) {
      r1 = z->child->rank;
      if (z->child->next != nullptr) r2 = z->child->next->rank;
    }
    int s = r1 + r2;
    return ((s + 1) >> 1) + 1;  // ceil(s/2) + 1, s may be negative
  }

  std::size_t root_count() const {
    std::size_t n = 0;
    for (const Node* x = roots_; x != nullptr; x = x->next) ++n;
    return n;
  }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    std::size_t total = 0;
    std::vector<int> per_rank;
    bool min_seen = min_ == nullptr;
    const Node* prev = nullptr;
    for (const Node* x = roots_; x != nullptr; x = x->next) {
      if (x->prev != prev) out.push_back({"sibling-link", "root list"});
      if (x->parent != nullptr) out.push_back({"parent-link", "root has a parent"});
      if (min_ != nullptr && x->key < min_->key) out.push_back({"min", "cached minimum is not the least root"});
      if (x == min_) min_seen = true;
      if (x->rank >= 0) {
        if (per_rank.size() <= static_cast<std::size_t>(x->rank)) per_rank.resize(x->rank + 1, 0);
        ++per_rank[x->rank];
      }
      total += check_tree(x, out);
      prev = x;
      if (total > size_ + 1) break;
    }
    if (consolidated_) {
      for (std::size_t r = 0; r < per_rank.size(); ++r) {
        if (per_rank[r] > 2) {
          out.push_back({"rank-cap", std::to_string(per_rank[r]) + " roots of rank " + std::to_string(r)});
        }
      }
    }
    if (!min_seen) out.push_back({"min", "cached minimum is not on the root list"});
    if (total != size_) out.push_back({"size", "node count " + std::to_string(total) + " != size " + std::to_string(size_)});
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

  void push_root(Node* x) {
    x->prev = nullptr;
    x->next = roots_;
    if (roots_ != nullptr) roots_->prev = x;
    roots_ = x;
  }

  void unlink_root(Node* x) {
    if (x->prev != nullptr) {
      x->prev->next = x->next;
    } else {
      roots_ = x->next;
    }
    if (x->next != nullptr) x->next->prev = x->prev;
    x->prev = x->next = nullptr;
  }

  void unlink_child(Node* x, Node* p) {
    if (x->prev != nullptr) {
      x->prev->next = x->next;
      rec_.write(x->prev);
    } else {
      p->child = x->next;
    }
    if (x->next != nullptr) {
      x->next->prev = x->prev;
      rec_.write(x->next);
    }
    x->prev = x->next = nullptr;
    x->parent = nullptr;
    rec_.write(p);
  }

  void propagate(Node* u) {
    for (;;) {
      rec_.read(u);
      int k = formula(u);
      if (k >= u->rank) return;
      u->rank = k;
      rec_.write(u);
      Node* p = u->parent;
      if (p == nullptr) return;
      rec_.read(p);
      if (p->child != u && p->child->next != u) return;
      u = p;
    }
  }

  // Each rank bucket holds up to two trees; a third triggers link3 and the
  // result carries into the next rank.
  void consolidate() {
    int max_rank = -1;
    for (Node* x = roots_; x != nullptr;) {
      Node* next = x->next;
      x->prev = x->next = nullptr;
      Node* t = x;
      for (;;) {
        std::size_t r = static_cast<std::size_t>(t->rank);
        if (2 * r + 1 >= buckets_.size()) buckets_.resize(2 * r + 2, nullptr);
        if (static_cast<int>(r) > max_rank) max_rank = static_cast<int>(r);
        Node*& a = buckets_[2 * r];
        Node*& b = buckets_[2 * r + 1];
        if (a == nullptr) {
          a = t;
          break;
        }
        if (b == nullptr) {
          b = t;
          break;
        }
        Node* u = a;
        Node* v = b;
        a = b = nullptr;
        t = link3(u, v, t);
      }
      x = next;
    }
    roots_ = nullptr;
    min_ = nullptr;
    for (int r = 0; r <= max_rank; ++r) {
      for (int j = 0; j < 2; ++j) {
        Node*& slot = buckets_[2 * r + j];
        if (slot == nullptr) continue;
        Node* t = slot;
        slot = nullptr;
        rec_.read(t);
        push_root(t);
        if (min_ == nullptr || rec_.less(t->key, min_->key)) min_ = t;
      }
    }
    consolidated_ = true;
  }

  std::size_t check_tree(const Node* t, std::vector<Violation>& out) const {
    std::size_t count = 1;
    std::string where = "node with key " + std::to_string(t->key.raw());
    if (t->rank < 0) out.push_back({"rank", where + " negative rank"});
    if (t->rank > formula(t)) out.push_back({"rank", where + " rank exceeds its active children's bound"});
    const Node* prev = nullptr;
    for (const Node* c = t->child; c != nullptr; c = c->next) {
      if (c->prev != prev) out.push_back({"sibling-link", where});
      if (c->parent != t) out.push_back({"parent-link", where});
      if (!(t->key < c->key)) out.push_back({"heap-order", where});
      count += check_tree(c, out);
      if (count > size_ + 1) break;
      prev = c;
    }
    return count;
  }

  NodePool<Node> pool_;
  std::vector<Node*> buckets_;  // two slots per rank
  Node* roots_ = nullptr;
  Node* min_ = nullptr;
  std::size_t size_ = 0;
  bool consolidated_ = true;
  Recorder<Policy> rec_;
};

}  // namespace pqlab
