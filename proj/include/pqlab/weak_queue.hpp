#pragma once

// Rank-relaxed weak queue, kept in its binomial-tree form (a perfect weak
// heap with left = first child and right = next sibling is the same tree).
// Roots have unique ranks. A node whose key may be smaller than its parent's
// is marked; marks are bucketed by rank. When the number of marks exceeds
// floor(log2 n), one transformation removes at least one mark:
//
//   clean       x not the last child: swap x with the last child of its
//               higher-rank sibling s (only when s is unmarked), making x a
//               last child.
//   pair        two marked last children of equal rank r: cut both, link
//               them, hang the larger parent under the smaller one and put
//               the linked pair where the larger parent was.
//   parent      x a marked last child: x and its parent trade places.
//
// The pair transformation is tried first on any rank holding two marks (after
// cleaning both); otherwise the highest-rank marked node is raised with
// clean/parent steps until it is in order or becomes a root.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"

namespace pqlab {

template <InstrumentationPolicy Policy = counting_policy>
class WeakQueue {
 public:
  static constexpr bool supports_decrease_key = true;
  static constexpr unsigned kMaxRank = 64;

  struct Node {
    Key64 key;
    ItemId item;
    int rank;
    bool marked;
    Node* parent;
    Node* child;  // last child: the one of rank (rank - 1)
    Node* prev;   // sibling of rank + 1
    Node* next;   // sibling of rank - 1
    Node* mprev;  // mark bucket
    Node* mnext;
  };

  explicit WeakQueue(const HeapConfig& config = {})
      : pool_(config.pool, config.capacity_hint, config.pad_factor) {
    rec_.set_track_first_touch(config.track_first_touch);
    crowd_pos_.fill(-1);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    Node* x = pool_.acquire();
    x->key = key;
    x->item = item;
    rec_.write(x);
    ++size_;
    if (min_ == nullptr || rec_.less(key, min_->key)) min_ = x;
    add_root(x);
    return pool_.handle_of(x);
  }

  Entry delete_min() {
    if (min_ == nullptr) throw underflow_error();
    rec_.begin_op();
    Node* m = min_;
    rec_.read(m);
    Entry out{m->item, m->key};
    if (m->parent != nullptr) fix_fully(m);
    roots_[m->rank] = nullptr;
    for (Node* c = m->child; c != nullptr;) {
      Node* next = c->next;
      c->parent = c->prev = c->next = nullptr;
      unmark(c);
      rec_.write(c);
      add_root(c);
      c = next;
    }
    pool_.release(m);
    --size_;
    while (marked_ > budget()) reduce();
    recompute_min();
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
      if (rec_.less(key, p->key)) mark(x);
    }
    if (rec_.less(key, min_->key)) min_ = x;
    while (marked_ > budget()) reduce();
  }

  Entry find_min() const {
    if (min_ == nullptr) throw underflow_error();
    return Entry{min_->item, min_->key};
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  void clear() {
    roots_.fill(nullptr);
    mhead_.fill(nullptr);
    mcount_.fill(0);
    crowd_pos_.fill(-1);
    crowded_.clear();
    marked_ = 0;
    rank_limit_ = 0;
    min_ = nullptr;
    size_ = 0;
    pool_.release_all();
  }
  HeapStats stats() const { return HeapStats{size_, rec_.counters()}; }

  std::size_t marked_count() const { return marked_; }
  /// Maximum number of marks tolerated between operations.
  std::size_t budget() const { return size_ == 0 ? 0 : detail::floor_log2(size_); }
  /// Transformations (mark-reducing restructurings) performed so far.
  std::uint64_t transformations() const { return transformations_; }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    std::size_t total = 0;
    std::size_t marks = 0;
    const Node* least = nullptr;
    for (unsigned r = 0; r < kMaxRank; ++r) {
      const Node* t = roots_[r];
      if (t == nullptr) continue;
      std::string where = "root in rank slot " + std::to_string(r);
      if (t->rank != static_cast<int>(r)) out.push_back({"root-rank", where + " has rank " + std::to_string(t->rank)});
      if (t->parent != nullptr || t->prev != nullptr || t->next != nullptr) out.push_back({"root-link", where});
      if (t->marked) out.push_back({"root-mark", where + " is marked"});
      total += check_tree(t, out, marks, least);
      if (total > size_ + 1) break;
    }
    if (total != size_) out.push_back({"size", "node count " + std::to_string(total) + " != size " + std::to_string(size_)});
    if (marks != marked_) out.push_back({"marks", "marked nodes " + std::to_string(marks) + " != counter " + std::to_string(marked_)});
    if (marked_ > budget()) out.push_back({"mark-budget", std::to_string(marked_) + " marks exceed budget " + std::to_string(budget())});
    std::size_t bucketed = 0;
    for (unsigned r = 0; r < kMaxRank; ++r) {
      std::size_t n = 0;
      const Node* prev = nullptr;
      for (const Node* x = mhead_[r]; x != nullptr && n <= size_; x = x->mnext) {
        ++n;
        if (!x->marked || x->rank != static_cast<int>(r) || x->mprev != prev) {
          out.push_back({"mark-bucket", "rank " + std::to_string(r) + " bucket is inconsistent"});
        }
        prev = x;
      }
      if (n != mcount_[r]) out.push_back({"mark-bucket", "rank " + std::to_string(r) + " count mismatch"});
      if ((mcount_[r] >= 2) != (crowd_pos_[r] >= 0)) out.push_back({"mark-bucket", "rank " + std::to_string(r) + " crowding flag"});
      bucketed += n;
    }
    if (bucketed != marked_) out.push_back({"mark-bucket", "bucketed marks != counter"});
    if (least != min_) out.push_back({"min", "cached minimum is not the least key"});
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

  // --- mark buckets -------------------------------------------------------

  void bucket_add(Node* x) {
    int r = x->rank;
    x->mprev = nullptr;
    x->mnext = mhead_[r];
    if (mhead_[r] != nullptr) mhead_[r]->mprev = x;
    mhead_[r] = x;
    if (++mcount_[r] == 2) {
      crowd_pos_[r] = static_cast<int>(crowded_.size());
      crowded_.push_back(r);
    }
  }

  void bucket_remove(Node* x) {
    int r = x->rank;
    if (x->mprev != nullptr) {
      x->mprev->mnext = x->mnext;
    } else {
      mhead_[r] = x->mnext;
    }
    if (x->mnext != nullptr) x->mnext->mprev = x->mprev;
    x->mprev = x->mnext = nullptr;
    if (mcount_[r]-- == 2) {
      int pos = crowd_pos_[r];
      int last = crowded_.back();
      crowded_[pos] = last;
      crowd_pos_[last] = pos;
      crowded_.pop_back();
      crowd_pos_[r] = -1;
    }
  }

  void mark(Node* x) {
    if (x->marked) return;
    x->marked = true;
    bucket_add(x);
    ++marked_;
    rec_.write(x);
    rec_.mark();
  }

  void unmark(Node* x) {
    if (!x->marked) return;
    bucket_remove(x);
    x->marked = false;
    --marked_;
    rec_.write(x);
  }

  void set_rank(Node* x, int r) {
    if (x->marked) {
      bucket_remove(x);
      x->rank = r;
      bucket_add(x);
    } else {
      x->rank = r;
    }
  }

  // --- structure ------------------------------------------------------------

  Node* detach_last_child(Node* p) {
    Node* x = p->child;
    p->child = x->next;
    if (x->next != nullptr) {
      x->next->prev = nullptr;
      rec_.write(x->next);
    }
    x->parent = x->prev = x->next = nullptr;
    set_rank(p, p->rank - 1);
    rec_.write(p);
    rec_.write(x);
    return x;
  }

  void add_last_child(Node* p, Node* c) {
    c->parent = p;
    c->prev = nullptr;
    c->next = p->child;
    if (p->child != nullptr) {
      p->child->prev = c;
      rec_.write(p->child);
    }
    p->child = c;
    set_rank(p, p->rank + 1);
    rec_.write(p);
    rec_.write(c);
  }

  // Detached b takes a's position; slot_rank is the root slot a occupies.
  void replace(Node* a, Node* b, int slot_rank) {
    Node* p = a->parent;
    b->parent = p;
    b->prev = a->prev;
    b->next = a->next;
    if (p == nullptr) {
      roots_[slot_rank] = b;
    } else {
      if (a->prev != nullptr) {
        a->prev->next = b;
      } else {
        p->child = b;
      }
      if (a->next != nullptr) a->next->prev = b;
      rec_.write(p);
    }
    a->parent = a->prev = a->next = nullptr;
    rec_.write(b);
  }

  // Exchanges two equal-rank non-roots that hang under different parents.
  void swap_positions(Node* a, Node* b) {
    Node* pa = a->parent;
    Node* ap = a->prev;
    Node* an = a->next;
    Node* pb = b->parent;
    Node* bp = b->prev;
    Node* bn = b->next;
    auto place = [](Node* x, Node* p, Node* prev, Node* next) {
      x->parent = p;
      x->prev = prev;
      x->next = next;
      if (prev != nullptr) {
        prev->next = x;
      } else {
        p->child = x;
      }
      if (next != nullptr) next->prev = x;
    };
    place(b, pa, ap, an);
    place(a, pb, bp, bn);
    rec_.write(a);
    rec_.write(b);
    rec_.write(pa);
    rec_.write(pb);
  }

  Node* link(Node* a, Node* b) {
    rec_.read(a);
    rec_.read(b);
    Node* w = rec_.less(a->key, b->key) ? a : b;
    Node* l = w == a ? b : a;
    unmark(l);
    add_last_child(w, l);
    rec_.link();
    return w;
  }

  void add_root(Node* t) {
    int r = t->rank;
    while (roots_[r] != nullptr) {
      Node* other = roots_[r];
      roots_[r] = nullptr;
      t = link(other, t);
      ++r;
    }
    roots_[r] = t;
    if (static_cast<unsigned>(r) + 1 > rank_limit_) rank_limit_ = r + 1;
  }

  // --- transformations ------------------------------------------------------

  void reduce() {
    ++transformations_;
    if (!crowded_.empty()) {
      int r = crowded_.back();
      Node* x = mhead_[r];
      Node* y = x->mnext;
      if (try_pair(x, y)) return;
    }
    for (int r = static_cast<int>(kMaxRank) - 1; r >= 0; --r) {
      if (mhead_[r] != nullptr) {
        fix_fully(mhead_[r]);
        return;
      }
    }
  }

  // Makes marked x a last child if its higher-rank sibling is unmarked.
  void clean(Node* x) {
    Node* p = x->parent;
    rec_.read(p);
    if (p->child == x) return;
    Node* s = x->prev;
    rec_.read(s);
    if (s->marked) return;
    Node* s2 = s->child;
    rec_.read(s2);
    swap_positions(x, s2);
    if (!rec_.less(x->key, s->key)) unmark(x);
    if (s2->marked && !rec_.less(s2->key, p->key)) unmark(s2);
  }

  bool try_pair(Node* x, Node* y) {
    std::size_t before = marked_;
    clean(x);
    if (marked_ < before) return true;
    if (!y->marked) return false;
    clean(y);
    if (marked_ < before) return true;
    if (!x->marked || !y->marked || x->rank != y->rank) return false;
    Node* px = x->parent;
    Node* py = y->parent;
    if (px->child != x || py->child != y || px == py) return false;
    pair_transform(x, y, px, py);
    return true;
  }

  void pair_transform(Node* x, Node* y, Node* px, Node* py) {
    int r = x->rank;
    bool px_first = rec_.less(px->key, py->key);
    Node* p = px_first ? px : py;
    Node* q = px_first ? py : px;
    detach_last_child(px);
    detach_last_child(py);
    unmark(x);
    unmark(y);
    Node* z = link(x, y);
    replace(q, z, r + 1);
    add_last_child(p, q);
    unmark(q);
    if (z->parent != nullptr) {
      rec_.read(z->parent);
      if (rec_.less(z->key, z->parent->key)) mark(z);
    }
  }

  // Raises x with clean and parent steps until it is in order with its
  // parent or is a root; x ends unmarked.
  void fix_fully(Node* x) {
    for (;;) {
      Node* p = x->parent;
      if (p == nullptr) {
        unmark(x);
        return;
      }
      rec_.read(p);
      if (!rec_.less(x->key, p->key)) {
        unmark(x);
        return;
      }
      if (p->child != x) {
        Node* s = x->prev;
        Node* s2 = s->child;
        rec_.read(s);
        rec_.read(s2);
        swap_positions(x, s2);
        if (rec_.less(s2->key, p->key)) {
          mark(s2);
        } else {
          unmark(s2);
        }
        p = s;
        if (!rec_.less(x->key, p->key)) {
          unmark(x);
          return;
        }
      }
      // x is the last child of p and smaller than it: trade places.
      int slot = p->rank;
      detach_last_child(p);
      replace(p, x, slot);
      add_last_child(x, p);
      unmark(p);
    }
  }

  void recompute_min() {
    min_ = nullptr;
    for (unsigned r = 0; r < rank_limit_; ++r) {
      Node* t = roots_[r];
      if (t == nullptr) continue;
      rec_.read(t);
      if (min_ == nullptr || rec_.less(t->key, min_->key)) min_ = t;
    }
    for (unsigned r = 0; r < kMaxRank && r < rank_limit_; ++r) {
      for (Node* x = mhead_[r]; x != nullptr; x = x->mnext) {
        rec_.read(x);
        if (rec_.less(x->key, min_->key)) min_ = x;
      }
    }
  }

  std::size_t check_tree(const Node* t, std::vector<Violation>& out, std::size_t& marks, const Node*& least) const {
    std::size_t count = 1;
    std::string where = "node with key " + std::to_string(t->key.raw());
    if (t->marked) ++marks;
    if (least == nullptr || t->key < least->key) least = t;
    int expect = t->rank;
    int children = 0;
    const Node* prev = nullptr;
    for (const Node* c = t->child; c != nullptr; c = c->next) {
      ++children;
      if (c->rank != expect - 1) out.push_back({"perfection", where + " child rank order"});
      expect = c->rank;
      if (c->parent != t || c->prev != prev) out.push_back({"link", where});
      if (!c->marked && !(t->key < c->key)) out.push_back({"weak-order", "unmarked node with key " + std::to_string(c->key.raw()) + " is above its parent"});
      count += check_tree(c, out, marks, least);
      if (count > size_ + 1) return count;
      prev = c;
    }
    if (children != t->rank) out.push_back({"perfection", where + " has " + std::to_string(children) + " children at rank " + std::to_string(t->rank)});
    if (t->rank >= 0 && t->rank < 64 && count != (std::size_t{1} << t->rank)) {
      out.push_back({"perfection", where + " rank " + std::to_string(t->rank) + " subtree size " + std::to_string(count)});
    }
    return count;
  }

  NodePool<Node> pool_;
  std::array<Node*, kMaxRank> roots_{};
  unsigned rank_limit_ = 0;
  std::array<Node*, kMaxRank> mhead_{};
  std::array<std::size_t, kMaxRank> mcount_{};
  std::array<int, kMaxRank> crowd_pos_{};
  std::vector<int> crowded_;
  std::size_t marked_ = 0;
  std::uint64_t transformations_ = 0;
  Node* min_ = nullptr;
  std::size_t size_ = 0;
  Recorder<Policy> rec_;
};

}  // namespace pqlab
