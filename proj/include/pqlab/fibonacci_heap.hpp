#pragma once

// Fibonacci heap: lazy insertion into a circular root list, consolidation by
// rank at delete_min, cascading cuts on decrease_key.

#include <cstdint>
#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"

namespace pqlab {

template <InstrumentationPolicy Policy = counting_policy>
class FibonacciHeap {
 public:
  static constexpr bool supports_decrease_key = true;

  struct Node {
    Key64 key;
    ItemId item;
    std::uint32_t rank;
    bool mark;
    Node* parent;
    Node* child;
    Node* left;  // circular sibling list
    Node* right;
  };

  explicit FibonacciHeap(const HeapConfig& config = {})
      : pool_(config.pool, config.capacity_hint, config.pad_factor),
        table_(2 * detail::ceil_log2(config.capacity_hint + 1) + 2, nullptr) {
    rec_.set_track_first_touch(config.track_first_touch);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    Node* x = pool_.acquire();
    x->key = key;
    x->item = item;
    x->left = x->right = x;
    rec_.write(x);
    splice_root(x);
    if (min_ == nullptr || rec_.less(key, min_->key)) min_ = x;
    ++size_;
    return pool_.handle_of(x);
  }

  Entry delete_min() {
    if (min_ == nullptr) throw underflow_error();
    rec_.begin_op();
    Node* m = min_;
    rec_.read(m);
    Entry out{m->item, m->key};
    // Children join the root list.
    if (Node* c = m->child; c != nullptr) {
      Node* x = c;
      do {
        x->parent = nullptr;
        x->mark = false;
        rec_.write(x);
        x = x->right;
      } while (x != c);
      splice_list(m, c);
    }
    Node* rest = m->right == m ? nullptr : m->right;
    unlink(m);
    pool_.release(m);
    --size_;
    min_ = nullptr;
    if (rest != nullptr) consolidate(rest);
    return out;
  }

  void decrease_key(const Handle& h, Key64 key) {
    Node* x = resolve(h);
    rec_.begin_op();
    detail::require_smaller(x->key, key);
    x->key = key;
    rec_.write(x);
    Node* p = x->parent;
    if (p != nullptr) {
      rec_.read(p);
      if (rec_.less(key, p->key)) {
        cut(x, p);
        cascading_cut(p);
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
    min_ = nullptr;
    size_ = 0;
    pool_.release_all();
  }
  HeapStats stats() const { return HeapStats{size_, rec_.counters()}; }

  std::size_t root_count() const {
    if (min_ == nullptr) return 0;
    std::size_t n = 0;
    const Node* x = min_;
    do {
      ++n;
      x = x->right;
    } while (x != min_);
    return n;
  }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    std::size_t total = 0;
    if (min_ != nullptr) {
      const Node* x = min_;
      do {
        if (x->parent != nullptr) out.push_back({"parent-link", "root has a parent"});
        if (x->mark) out.push_back({"root-mark", "root is marked"});
        if (x->key < min_->key) out.push_back({"min", "cached minimum is not the least root"});
        total += check_tree(x, out);
        if (x->right->left != x) {
          out.push_back({"sibling-link", "root list is inconsistent"});
          break;
        }
        x = x->right;
      } while (x != min_ && total <= size_ + 1);
    }
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

  // Inserts the single node x into the root list next to min_.
  void splice_root(Node* x) {
    if (min_ == nullptr) {
      x->left = x->right = x;
      return;
    }
    x->right = min_->right;
    x->left = min_;
    min_->right->left = x;
    min_->right = x;
    rec_.write(min_);
  }

  // Joins the circular list headed by b into the list containing a.
  static void splice_list(Node* a, Node* b) {
    Node* a_right = a->right;
    Node* b_left = b->left;
    a->right = b;
    b->left = a;
    b_left->right = a_right;
    a_right->left = b_left;
  }

  static void unlink(Node* x) {
    x->left->right = x->right;
    x->right->left = x->left;
    x->left = x->right = x;
  }

  void consolidate(Node* start) {
    scratch_.clear();
    Node* x = start;
    do {
      scratch_.push_back(x);
      x = x->right;
    } while (x != start);
    std::size_t max_rank = 0;
    for (Node* w : scratch_) {
      Node* t = w;
      t->left = t->right = t;
      std::size_t r = t->rank;
      for (;;) {
        if (r >= table_.size()) table_.resize(r + 1, nullptr);
        if (table_[r] == nullptr) break;
        Node* other = table_[r];
        table_[r] = nullptr;
        t = link(other, t);
        ++r;
      }
      table_[r] = t;
      if (r > max_rank) max_rank = r;
    }
    min_ = nullptr;
    for (std::size_t r = 0; r <= max_rank; ++r) {
      Node* t = table_[r];
      if (t == nullptr) continue;
      table_[r] = nullptr;
      rec_.read(t);
      t->left = t->right = t;
      splice_root(t);
      if (min_ == nullptr || rec_.less(t->key, min_->key)) min_ = t;
    }
  }

  // Both arguments are detached singleton roots of equal rank.
  Node* link(Node* a, Node* b) {
    rec_.read(a);
    rec_.read(b);
    Node* w = rec_.less(a->key, b->key) ? a : b;
    Node* l = w == a ? b : a;
    l->parent = w;
    l->mark = false;
    if (w->child == nullptr) {
      l->left = l->right = l;
      w->child = l;
    } else {
      l->left = l->right = l;
      splice_list(w->child, l);
    }
    ++w->rank;
    rec_.write(l);
    rec_.write(w);
    rec_.link();
    return w;
  }

  void cut(Node* x, Node* p) {
    if (x->right == x) {
      p->child = nullptr;
    } else {
      if (p->child == x) p->child = x->right;
      unlink(x);
    }
    --p->rank;
    rec_.write(p);
    x->parent = nullptr;
    x->mark = false;
    x->left = x->right = x;
    splice_root(x);
    rec_.write(x);
    rec_.cut();
  }

  void cascading_cut(Node* y) {
    while (Node* z = y->parent) {
      if (!y->mark) {
        y->mark = true;
        rec_.write(y);
        rec_.mark();
        return;
      }
      rec_.read(z);
      cut(y, z);
      y = z;
    }
  }

  std::size_t check_tree(const Node* t, std::vector<Violation>& out) const {
    std::size_t count = 1;
    std::uint32_t children = 0;
    std::string where = "node with key " + std::to_string(t->key.raw());
    if (const Node* c = t->child; c != nullptr) {
      const Node* x = c;
      do {
        ++children;
        if (x->parent != t) out.push_back({"parent-link", where});
        if (!(t->key < x->key)) out.push_back({"heap-order", where});
        if (x->right->left != x) {
          out.push_back({"sibling-link", where});
          break;
        }
        count += check_tree(x, out);
        x = x->right;
      } while (x != c && children <= size_);
    }
    if (children != t->rank) {
      out.push_back({"rank", where + " rank " + std::to_string(t->rank) + " with " + std::to_string(children) + " children"});
    }
    // Subtree of rank r holds at least F(r+2) nodes.
    std::uint64_t f0 = 1, f1 = 2;  // F(2), F(3)
    for (std::uint32_t i = 0; i < t->rank && f0 <= count; ++i) {
      std::uint64_t f2 = f0 + f1;
      f0 = f1;
      f1 = f2;
    }
    if (count < f0) out.push_back({"rank-bound", where + " rank " + std::to_string(t->rank) + " subtree size " + std::to_string(count)});
    return count;
  }

  NodePool<Node> pool_;
  std::vector<Node*> table_;
  std::vector<Node*> scratch_;
  Node* min_ = nullptr;
  std::size_t size_ = 0;
  Recorder<Policy> rec_;
};

}  // namespace pqlab
