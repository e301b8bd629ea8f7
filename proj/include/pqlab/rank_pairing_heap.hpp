#pragma once

// Rank-pairing heap over half-trees (binary form: left = first child,
// right = next sibling). A root has no right subtree and rank r(left)+1.
// Type-1 and type-2 differ only in how a non-root's rank follows from its
// children after a cut.
//
// decrease_key always cuts a non-root (with its left subtree), so at most one
// cut per call; delete_min disassembles the right spine of the old root's left
// child and links half-trees one pass through a rank table.

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"

namespace pqlab {

enum class RankRule { type1, type2 };

template <RankRule Rule, InstrumentationPolicy Policy = counting_policy>
class RankPairingHeap {
 public:
  static constexpr bool supports_decrease_key = true;
  static constexpr RankRule rule = Rule;

  struct Node {
    Key64 key;
    ItemId item;
    int rank;
    Node* left;
    Node* right;
    Node* parent;
    Node* next;  // root list
  };

  explicit RankPairingHeap(const HeapConfig& config = {})
      : pool_(config.pool, config.capacity_hint, config.pad_factor),
        buckets_(2 * detail::ceil_log2(config.capacity_hint + 1) + 4, nullptr) {
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
    return pool_.handle_of(x);
  }

  Entry delete_min() {
    if (min_ == nullptr) throw underflow_error();
    rec_.begin_op();
    Node* m = min_;
    rec_.read(m);
    Entry out{m->item, m->key};

    touched_.clear();
    Node* roots = roots_;
    roots_ = nullptr;
    min_ = nullptr;
    // Spine of the old root's left child: each node becomes a root.
    for (Node* x = m->left; x != nullptr;) {
      Node* next = x->right;
      x->right = nullptr;
      x->parent = nullptr;
      x->rank = rank_of(x->left) + 1;
      rec_.write(x);
      bucket_link(x);
      x = next;
    }
    for (Node* x = roots; x != nullptr;) {
      Node* next = x->next;
      if (x != m) bucket_link(x);
      x = next;
    }
    for (int r : touched_) {
      if (buckets_[r] != nullptr) {
        emit_root(buckets_[r]);
        buckets_[r] = nullptr;
      }
    }
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
    if (x->parent != nullptr) {
      Node* y = x->parent;
      Node* r = x->right;
      rec_.read(y);
      if (y->left == x) {
        y->left = r;
      } else {
        y->right = r;
      }
      if (r != nullptr) {
        r->parent = y;
        rec_.write(r);
      }
      rec_.write(y);
      x->right = nullptr;
      x->parent = nullptr;
      x->rank = rank_of(x->left) + 1;
      push_root(x);
      rec_.cut();
      propagate(y);
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
    pool_.release_all();
  }
  HeapStats stats() const { return HeapStats{size_, rec_.counters()}; }

  /// Rank of a non-root whose children have ranks a and b (missing = -1).
  static int rule_rank(int a, int b) {
    int hi = std::max(a, b);
    if constexpr (Rule == RankRule::type1) {
      return a == b ? a + 1 : hi;
    } else {
      return std::abs(a - b) <= 1 ? hi + 1 : hi;
    }
  }

  /// Whether rank differences (da, db) to the two children are allowed.
  static bool rule_allows(int da, int db) {
    if (da < 0 || db < 0) return false;
    if (da == 0 || db == 0) return true;
    if constexpr (Rule == RankRule::type1) {
      return da == 1 && db == 1;
    } else {
      return (da == 1 && db == 1) || (da == 1 && db == 2) || (da == 2 && db == 1);
    }
  }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    std::size_t total = 0;
    bool min_seen = min_ == nullptr;
    for (const Node* x = roots_; x != nullptr; x = x->next) {
      std::string where = "root with key " + std::to_string(x->key.raw());
      if (x->parent != nullptr) out.push_back({"parent-link", where + " has a parent"});
      if (x->right != nullptr) out.push_back({"root-shape", where + " has a right subtree"});
      if (x->rank != rank_of(x->left) + 1) out.push_back({"rank-rule", where + " rank is not r(left)+1"});
      if (min_ != nullptr && x->key < min_->key) out.push_back({"min", "cached minimum is not the least root"});
      if (x == min_) min_seen = true;
      if (x->left != nullptr) {
        if (x->left->parent != x) out.push_back({"parent-link", where});
        total += check_half_tree(x->left, x->key, out);
      }
      ++total;
      if (total > size_ + 1) break;
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

  static int rank_of(const Node* x) { return x == nullptr ? -1 : x->rank; }

  void push_root(Node* x) {
    x->next = roots_;
    roots_ = x;
  }

  void emit_root(Node* x) {
    push_root(x);
    if (min_ == nullptr || rec_.less(x->key, min_->key)) min_ = x;
  }

  // One-pass linking: a half-tree meeting an equal-rank one is linked and the
  // result goes straight to the output root list.
  void bucket_link(Node* x) {
    int r = x->rank;
    if (static_cast<std::size_t>(r) >= buckets_.size()) buckets_.resize(r + 1, nullptr);
    if (buckets_[r] == nullptr) {
      buckets_[r] = x;
      touched_.push_back(r);
      return;
    }
    Node* y = buckets_[r];
    buckets_[r] = nullptr;
    emit_root(link(x, y));
  }

  // x and y are roots of equal rank; the loser becomes the winner's left
  // child and the winner's old left subtree hangs to the loser's right.
  Node* link(Node* x, Node* y) {
    rec_.read(x);
    rec_.read(y);
    Node* w = rec_.less(x->key, y->key) ? x : y;
    Node* l = w == x ? y : x;
    l->right = w->left;
    if (l->right != nullptr) {
      l->right->parent = l;
      rec_.write(l->right);
    }
    l->parent = w;
    w->left = l;
    ++w->rank;
    rec_.write(l);
    rec_.write(w);
    rec_.link();
    return w;
  }

  void propagate(Node* u) {
    for (;;) {
      rec_.read(u);
      if (u->parent == nullptr) {
        u->rank = rank_of(u->left) + 1;
        rec_.write(u);
        return;
      }
      int k = rule_rank(rank_of(u->left), rank_of(u->right));
      if (k >= u->rank) return;
      u->rank = k;
      rec_.write(u);
      u = u->parent;
    }
  }

  // Half-tree order: every node in x's half-tree is larger than `bound`,
  // the key of the node whose left subtree contains it.
  std::size_t check_half_tree(const Node* x, Key64 bound, std::vector<Violation>& out) const {
    std::size_t count = 0;
    for (const Node* u = x; u != nullptr; u = u->right) {
      std::string where = "node with key " + std::to_string(u->key.raw());
      ++count;
      if (!(bound < u->key)) out.push_back({"heap-order", where});
      int da = u->rank - rank_of(u->left);
      int db = u->rank - rank_of(u->right);
      if (!rule_allows(da, db)) {
        out.push_back({"rank-rule", where + " rank differences {" + std::to_string(da) + "," + std::to_string(db) + "}"});
      }
      if (u->left != nullptr) {
        if (u->left->parent != u) out.push_back({"parent-link", where});
        count += check_half_tree(u->left, u->key, out);
      }
      if (u->right != nullptr && u->right->parent != u) out.push_back({"parent-link", where});
      if (count > size_ + 1) break;
    }
    return count;
  }

  NodePool<Node> pool_;
  std::vector<Node*> buckets_;
  std::vector<int> touched_;
  Node* roots_ = nullptr;
  Node* min_ = nullptr;
  std::size_t size_ = 0;
  Recorder<Policy> rec_;
};

}  // namespace pqlab
