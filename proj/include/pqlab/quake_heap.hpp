#pragma once

// Quake heap, full tournament representation. Leaves hold the items; an
// internal node records the leaf that won below it, so an item's clones form
// the path from its leaf up to its `top` node. n[h] counts nodes at height h.
//
// decrease_key cuts the item's top node from its parent (the parent keeps
// its other child). delete_min removes the winner's clone path, links roots of
// equal height, and then, if some height breaks n[i+1] <= alpha * n[i],
// deletes every node above that height and links again.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"

namespace pqlab {

template <InstrumentationPolicy Policy = counting_policy>
class QuakeHeap {
 public:
  static constexpr bool supports_decrease_key = true;

  struct Node {
    Key64 key;    // leaves only
    ItemId item;  // leaves only
    int height;
    Node* leaf;  // winning leaf (self for a leaf)
    Node* parent;
    Node* left;
    Node* right;
    Node* top;  // leaves only: highest clone
  };

  explicit QuakeHeap(const HeapConfig& config = {})
      : pool_(config.pool, pool_capacity(config), config.pad_factor),
        alpha_num_(config.alpha_num),
        alpha_den_(config.alpha_den) {
    if (!(2 * alpha_num_ > alpha_den_ && alpha_num_ < alpha_den_)) {
      throw contract_error("quake heap: alpha must lie in (1/2, 1)");
    }
    rec_.set_track_first_touch(config.track_first_touch);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    Node* x = pool_.acquire();
    x->key = key;
    x->item = item;
    x->leaf = x;
    x->top = x;
    rec_.write(x);
    roots_.push_back(x);
    bump(0, +1);
    if (min_ == nullptr || rec_.less(key, min_->key)) min_ = x;
    ++size_;
    settled_ = false;
    return pool_.handle_of(x);
  }

  Entry delete_min() {
    if (min_ == nullptr) throw underflow_error();
    rec_.begin_op();
    Node* m = min_;
    rec_.read(m);
    Entry out{m->item, m->key};

    Node* t = m->top;
    for (std::size_t i = 0; i < roots_.size(); ++i) {
      if (roots_[i] == t) {
        roots_[i] = roots_.back();
        roots_.pop_back();
        break;
      }
    }
    // Walk the winner's clone path; the losing siblings become roots.
    for (Node* x = t; x != nullptr;) {
      Node* next = nullptr;
      for (Node* c : {x->left, x->right}) {
        if (c == nullptr) continue;
        rec_.read(c);
        if (c->leaf == m) {
          next = c;
        } else {
          c->parent = nullptr;
          rec_.write(c);
          roots_.push_back(c);
        }
      }
      bump(x->height, -1);
      pool_.release(x);
      x = next;
    }
    --size_;
    min_ = nullptr;

    link_all();
    if (std::optional<int> h = violated_height()) {
      quake(*h);
      link_all();
    }
    recompute_min();
    settled_ = true;
    return out;
  }

  void decrease_key(const Handle& h, Key64 key) {
    Node* x = resolve(h);
    rec_.begin_op();
    detail::require_smaller(x->key, key);
    x->key = key;
    rec_.write(x);
    Node* u = x->top;
    if (Node* p = u->parent; p != nullptr) {
      rec_.read(p);
      if (p->left == u) {
        p->left = p->right;
      }
      p->right = nullptr;
      rec_.write(p);
      u->parent = nullptr;
      rec_.write(u);
      roots_.push_back(u);
      rec_.cut();
      settled_ = false;
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
    roots_.clear();
    counts_.clear();
    min_ = nullptr;
    size_ = 0;
    settled_ = true;
    pool_.release_all();
  }
  HeapStats stats() const { return HeapStats{size_, rec_.counters()}; }

  /// Lowest height h >= 1 with n[h] > alpha * n[h-1], if any.
  std::optional<int> violated_height() const {
    for (std::size_t i = 0; i + 1 < counts_.size(); ++i) {
      if (alpha_den_ * counts_[i + 1] > alpha_num_ * counts_[i]) return static_cast<int>(i + 1);
    }
    return std::nullopt;
  }

  /// Removes every node at height >= h_cut; subtrees below become roots.
  void quake(int h_cut) {
    std::vector<Node*> kept;
    std::vector<Node*> stack;
    for (Node* r : roots_) {
      if (r->height < h_cut) {
        kept.push_back(r);
        continue;
      }
      stack.push_back(r);
      while (!stack.empty()) {
        Node* x = stack.back();
        stack.pop_back();
        for (Node* c : {x->left, x->right}) {
          if (c == nullptr) continue;
          if (c->height >= h_cut) {
            stack.push_back(c);
          } else {
            c->parent = nullptr;
            c->leaf->top = c;
            rec_.write(c);
            rec_.write(c->leaf);
            kept.push_back(c);
          }
        }
        bump(x->height, -1);
        pool_.release(x);
      }
    }
    roots_.swap(kept);
    ++quakes_;
  }

  const std::vector<std::uint64_t>& height_counts() const { return counts_; }
  std::size_t root_count() const { return roots_.size(); }
  std::uint64_t quakes() const { return quakes_; }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    std::vector<std::uint64_t> seen;
    std::vector<char> height_used;
    std::size_t leaves = 0;
    const Node* least = nullptr;
    for (const Node* r : roots_) {
      std::string where = "root with key " + std::to_string(r->leaf->key.raw());
      if (r->parent != nullptr) out.push_back({"parent-link", where + " has a parent"});
      if (r->leaf->top != r) out.push_back({"clone-chain", where + " is not its leaf's top"});
      if (least == nullptr || r->leaf->key < least->key) least = r->leaf;
      if (settled_) {
        if (height_used.size() <= static_cast<std::size_t>(r->height)) height_used.resize(r->height + 1, 0);
        if (height_used[r->height]) out.push_back({"root-height", "two roots of height " + std::to_string(r->height)});
        height_used[r->height] = 1;
      }
      leaves += check_tree(r, out, seen);
      if (leaves > size_ + 1) break;
    }
    if (leaves != size_) out.push_back({"size", "leaf count " + std::to_string(leaves) + " != size " + std::to_string(size_)});
    seen.resize(std::max(seen.size(), counts_.size()), 0);
    for (std::size_t h = 0; h < seen.size(); ++h) {
      std::uint64_t c = h < counts_.size() ? counts_[h] : 0;
      if (c != seen[h]) out.push_back({"height-count", "n[" + std::to_string(h) + "] = " + std::to_string(c) + " but " + std::to_string(seen[h]) + " nodes"});
    }
    if (settled_) {
      for (std::size_t i = 0; i + 1 < counts_.size(); ++i) {
        if (alpha_den_ * counts_[i + 1] > alpha_num_ * counts_[i]) {
          out.push_back({"decay", "n[" + std::to_string(i + 1) + "] exceeds alpha * n[" + std::to_string(i) + "]"});
        }
      }
    }
    if (least != min_) out.push_back({"min", "cached minimum is not the least root"});
    return out;
  }

 private:
  friend struct testing::access;

  static std::size_t pool_capacity(const HeapConfig& c) {
    // Leaves plus internal nodes: at most n / (1 - alpha) after a quake check,
    // plus one linking round's worth of new nodes.
    std::size_t den = c.alpha_den > c.alpha_num ? c.alpha_den - c.alpha_num : 1;
    return c.capacity_hint * (c.alpha_den / den + 2) + 64;
  }

  Node* resolve(const Handle& h) const {
    if constexpr (Policy::checked) {
      Node* n = pool_.resolve(h);
      if (n == nullptr || n->height != 0) throw invalid_handle_error();
      return n;
    } else {
      return static_cast<Node*>(h.node);
    }
  }

  void bump(int h, int delta) {
    if (counts_.size() <= static_cast<std::size_t>(h)) counts_.resize(h + 1, 0);
    counts_[h] += delta;
    while (!counts_.empty() && counts_.back() == 0) counts_.pop_back();
  }

  Node* link(Node* a, Node* b) {
    rec_.read(a);
    rec_.read(b);
    Node* c = pool_.acquire();
    c->height = a->height + 1;
    c->left = a;
    c->right = b;
    a->parent = b->parent = c;
    c->leaf = rec_.less(a->leaf->key, b->leaf->key) ? a->leaf : b->leaf;
    c->leaf->top = c;
    rec_.write(a);
    rec_.write(b);
    rec_.write(c);
    rec_.write(c->leaf);
    bump(c->height, +1);
    rec_.link();
    return c;
  }

  // Links roots of equal height until all heights are distinct.
  void link_all() {
    scratch_.clear();
    for (Node* r : roots_) {
      Node* t = r;
      for (;;) {
        std::size_t h = static_cast<std::size_t>(t->height);
        if (scratch_.size() <= h) scratch_.resize(h + 1, nullptr);
        if (scratch_[h] == nullptr) {
          scratch_[h] = t;
          break;
        }
        Node* other = scratch_[h];
        scratch_[h] = nullptr;
        t = link(other, t);
      }
    }
    roots_.clear();
    for (Node*& s : scratch_) {
      if (s != nullptr) roots_.push_back(s);
      s = nullptr;
    }
  }

  void recompute_min() {
    min_ = nullptr;
    for (Node* r : roots_) {
      Node* l = r->leaf;
      rec_.read(l);
      if (min_ == nullptr || rec_.less(l->key, min_->key)) min_ = l;
    }
  }

  // Returns the number of leaves under t.
  std::size_t check_tree(const Node* t, std::vector<Violation>& out, std::vector<std::uint64_t>& seen) const {
    if (seen.size() <= static_cast<std::size_t>(t->height)) seen.resize(t->height + 1, 0);
    ++seen[t->height];
    if (t->height == 0) {
      if (t->leaf != t || t->left != nullptr || t->right != nullptr) out.push_back({"leaf", "malformed leaf"});
      // Clone chain: top is reached by climbing while the parent carries this leaf.
      const Node* u = t;
      while (u->parent != nullptr && u->parent->leaf == t) u = u->parent;
      if (u != t->top) out.push_back({"clone-chain", "leaf with key " + std::to_string(t->key.raw()) + " has a broken clone path"});
      return 1;
    }
    std::string where = "internal node at height " + std::to_string(t->height);
    if (t->left == nullptr) {
      out.push_back({"shape", where + " has no left child"});
      return 0;
    }
    std::size_t leaves = 0;
    const Node* best = nullptr;
    for (const Node* c : {t->left, t->right}) {
      if (c == nullptr) continue;
      if (c->parent != t) out.push_back({"parent-link", where});
      if (c->height != t->height - 1) out.push_back({"shape", where + " child height"});
      if (best == nullptr || c->leaf->key < best->leaf->key) best = c;
      leaves += check_tree(c, out, seen);
    }
    if (t->leaf != best->leaf) out.push_back({"tournament", where + " does not carry its children's minimum"});
    return leaves;
  }

  NodePool<Node> pool_;
  std::uint64_t alpha_num_;
  std::uint64_t alpha_den_;
  std::vector<Node*> roots_;
  std::vector<Node*> scratch_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t quakes_ = 0;
  Node* min_ = nullptr;
  std::size_t size_ = 0;
  bool settled_ = true;
  Recorder<Policy> rec_;
};

}  // namespace pqlab
