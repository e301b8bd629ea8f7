#pragma once

// Pairing heap: a single heap-ordered multiway tree in child/sibling form.
// Insertion and decrease_key link with the root immediately; delete_min
// combines the root's children with the standard two-pass pairing.

#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"

namespace pqlab {

template <InstrumentationPolicy Policy = counting_policy>
class PairingHeap {
 public:
  static constexpr bool supports_decrease_key = true;

  struct Node {
    Key64 key;
    ItemId item;
    Node* child;
    Node* next;
    Node* prev;  // previous sibling, or the parent for a first child
  };

  explicit PairingHeap(const HeapConfig& config = {})
      : pool_(config.pool, config.capacity_hint, config.pad_factor) {
    rec_.set_track_first_touch(config.track_first_touch);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    Node* x = pool_.acquire();
    x->key = key;
    x->item = item;
    rec_.write(x);
    root_ = root_ == nullptr ? x : link(root_, x);
    ++size_;
    return pool_.handle_of(x);
  }

  Entry delete_min() {
    if (root_ == nullptr) throw underflow_error();
    rec_.begin_op();
    Node* m = root_;
    rec_.read(m);
    Entry out{m->item, m->key};
    Node* first = m->child;
    if (first != nullptr) first->prev = nullptr;
    root_ = combine(first);
    pool_.release(m);
    --size_;
    return out;
  }

  void decrease_key(const Handle& h, Key64 key) {
    Node* x = resolve(h);
    rec_.begin_op();
    detail::require_smaller(x->key, key);
    x->key = key;
    rec_.write(x);
    if (x == root_) return;
    detach(x);
    root_ = link(root_, x);
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

  /// Two-pass pairing of a sibling list (first->next->...): pairs are linked
  /// left to right, then the results are folded right to left.
  Node* combine(Node* first) {
    if (first == nullptr) return nullptr;
    Node* stack = nullptr;  // pass-one winners, rightmost on top
    Node* x = first;
    while (x != nullptr) {
      Node* a = x;
      Node* b = a->next;
      rec_.read(a);
      if (b == nullptr) {
        a->prev = nullptr;
        a->next = stack;
        stack = a;
        break;
      }
      rec_.read(b);
      x = b->next;
      a->next = a->prev = nullptr;
      b->next = b->prev = nullptr;
      Node* w = link(a, b);
      w->next = stack;
      stack = w;
    }
    Node* result = stack;
    stack = stack->next;
    result->next = nullptr;
    while (stack != nullptr) {
      Node* n = stack->next;
      stack->next = nullptr;
      result = link(stack, result);
      stack = n;
    }
    rec_.write(result);
    return result;
  }

  /// Keys of x's children in list order.
  std::vector<Key64> child_keys(const Node* x) const {
    std::vector<Key64> out;
    for (const Node* c = x->child; c != nullptr; c = c->next) out.push_back(c->key);
    return out;
  }
  const Node* root() const { return root_; }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    std::size_t total = 0;
    if (root_ != nullptr) {
      if (root_->prev != nullptr || root_->next != nullptr) out.push_back({"root-link", "root has siblings"});
      total = check_tree(root_, out);
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

  // a and b are detached roots; the loser becomes the winner's first child.
  Node* link(Node* a, Node* b) {
    Node* w = rec_.less(a->key, b->key) ? a : b;
    Node* l = w == a ? b : a;
    l->next = w->child;
    if (w->child != nullptr) {
      w->child->prev = l;
      rec_.write(w->child);
    }
    l->prev = w;
    w->child = l;
    rec_.write(l);
    rec_.write(w);
    rec_.link();
    return w;
  }

  void detach(Node* x) {
    Node* p = x->prev;
    rec_.read(p);
    if (p->child == x) {
      p->child = x->next;
    } else {
      p->next = x->next;
    }
    rec_.write(p);
    if (x->next != nullptr) {
      x->next->prev = p;
      rec_.write(x->next);
    }
    x->next = x->prev = nullptr;
    rec_.cut();
  }

  std::size_t check_tree(const Node* t, std::vector<Violation>& out) const {
    std::size_t count = 1;
    const Node* prev = t;
    std::string where = "node with key " + std::to_string(t->key.raw());
    for (const Node* c = t->child; c != nullptr; c = c->next) {
      if (c->prev != prev) out.push_back({"sibling-link", where});
      if (!(t->key < c->key)) out.push_back({"heap-order", where});
      count += check_tree(c, out);
      if (count > size_ + 1) break;
      prev = c;
    }
    return count;
  }

  NodePool<Node> pool_;
  Node* root_ = nullptr;
  std::size_t size_ = 0;
  Recorder<Policy> rec_;
};

}  // namespace pqlab
