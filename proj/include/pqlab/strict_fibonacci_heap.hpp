#pragma once

// Strict Fibonacci heap: a single heap-ordered tree whose non-root nodes are
// active or passive. An active node's rank is its number of active children;
// an active non-root whose parent is active has a loss (active children lost).
// An active node whose parent is passive is an active root.
//
// Children lists keep active children before passive ones. The root's
// children are held in three groups (active, passive non-linkable, passive
// linkable); a passive node is linkable when it has no active child.
// Q is a queue of every non-root node; delete_min rotates it to shed degree.
//
// Active roots and loss-1 nodes are bucketed by rank, with a list of ranks
// holding two or more members, so a reducible pair is found in O(1).
// Handles address cells because decrease_key may swap items with the root.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"

namespace pqlab {

template <InstrumentationPolicy Policy = counting_policy>
class StrictFibonacciHeap {
 public:
  static constexpr bool supports_decrease_key = true;

  struct Cell;
  struct Node {
    Key64 key;
    ItemId item;
    Cell* cell;
    Node* parent;
    Node* child;  // leftmost child (non-root nodes only)
    Node* left;   // circular sibling ring
    Node* right;
    Node* qprev;  // circular Q ring
    Node* qnext;
    Node* bprev;  // rank bucket / loss list
    Node* bnext;
    std::uint32_t rank;
    std::uint32_t loss;
    std::uint32_t brank;
    bool active;
    std::uint8_t group;
    std::uint8_t bucket;
  };
  struct Cell {
    Node* node;
  };

  enum : std::uint8_t { kNoGroup = 0, kActive = 1, kNonLinkable = 2, kLinkable = 3 };
  enum : std::uint8_t { kNoBucket = 0, kActiveRoots = 1, kLossOne = 2, kLossTwo = 3 };

  /// Reductions applied after each insert and decrease_key.
  static constexpr int kInsertActiveRootReductions = 1;
  static constexpr int kInsertRootDegreeReductions = 1;
  static constexpr int kDecreaseLossReductions = 1;
  static constexpr int kDecreaseActiveRootReductions = 6;
  static constexpr int kDecreaseRootDegreeReductions = 4;

  explicit StrictFibonacciHeap(const HeapConfig& config = {})
      : nodes_(config.pool, config.capacity_hint, config.pad_factor),
        cells_(config.pool, config.capacity_hint, 1) {
    rec_.set_track_first_touch(config.track_first_touch);
  }

  Handle insert(ItemId item, Key64 key) {
    rec_.begin_op();
    Node* x = nodes_.acquire();
    Cell* cell = cells_.acquire();
    x->key = key;
    x->item = item;
    x->cell = cell;
    x->left = x->right = x;
    x->qprev = x->qnext = x;
    cell->node = x;
    rec_.write(x);
    ++size_;
    if (root_ == nullptr) {
      root_ = x;
      return cells_.handle_of(cell);
    }
    rec_.read(root_);
    if (rec_.less(key, root_->key)) {
      // The old root becomes x's only child; its groups form one child list.
      Node* y = root_;
      Node* list = nullptr;
      for (std::uint8_t g = kActive; g <= kLinkable; ++g) {
        list = ring_concat(list, groups_[g]);
        groups_[g] = nullptr;
        gcount_[g] = 0;
      }
      y->child = list;
      root_ = x;
      attach(x, y);
      q_push_back(y);
      rec_.write(y);
    } else {
      attach(root_, x);
      q_push_back(x);
    }
    for (int i = 0; i < kInsertActiveRootReductions; ++i) active_root_reduction();
    for (int i = 0; i < kInsertRootDegreeReductions; ++i) root_degree_reduction();
    return cells_.handle_of(cell);
  }

  Entry delete_min() {
    if (root_ == nullptr) throw underflow_error();
    rec_.begin_op();
    Node* old = root_;
    rec_.read(old);
    Entry out{old->item, old->key};
    --size_;
    if (size_ == 0) {
      cells_.release(old->cell);
      nodes_.release(old);
      root_ = nullptr;
      return out;
    }

    Node* x = nullptr;
    for (std::uint8_t g = kActive; g <= kLinkable; ++g) {
      Node* h = groups_[g];
      if (h == nullptr) continue;
      Node* c = h;
      do {
        rec_.read(c);
        if (x == nullptr || rec_.less(c->key, x->key)) x = c;
        c = c->right;
      } while (c != h);
    }
    detach(x);
    q_remove(x);
    if (x->active) {
      unfile(x);
      x->active = false;
      set_loss(x, 0);
      x->rank = 0;
      if (Node* h = x->child; h != nullptr) {
        Node* c = h;
        do {
          if (!c->active) break;
          set_loss(c, 0);
          refile(c);
          c = c->right;
        } while (c != h);
      }
    }
    rec_.write(x);

    // x becomes the root: its own children and the old root's children are
    // regrouped under it.
    std::array<Node*, 4> old_groups = groups_;
    groups_.fill(nullptr);
    gcount_.fill(0);
    Node* kids = x->child;
    x->child = nullptr;
    root_ = x;
    adopt_ring(kids);
    for (std::uint8_t g = kActive; g <= kLinkable; ++g) adopt_ring(old_groups[g]);
    cells_.release(old->cell);
    nodes_.release(old);

    for (int i = 0; i < 2 && q_ != nullptr; ++i) {
      Node* y = q_;
      q_ = y->qnext;
      rec_.read(y);
      for (int j = 0; j < 2; ++j) {
        if (y->child == nullptr) break;
        Node* z = y->child->left;
        rec_.read(z);
        if (z->active) break;
        move_under(z, root_, false);
      }
    }
    while (loss_reduction()) {
    }
    while (active_root_reduction() || root_degree_reduction()) {
    }
    return out;
  }

  void decrease_key(const Handle& h, Key64 key) {
    Node* x = resolve(h)->node;
    rec_.begin_op();
    detail::require_smaller(x->key, key);
    x->key = key;
    rec_.write(x);
    if (x == root_) return;
    rec_.read(root_);
    if (rec_.less(key, root_->key)) swap_payload(x, root_);
    if (x->parent != root_) move_under(x, root_, true);
    for (int i = 0; i < kDecreaseLossReductions; ++i) loss_reduction();
    for (int i = 0; i < kDecreaseActiveRootReductions; ++i) active_root_reduction();
    for (int i = 0; i < kDecreaseRootDegreeReductions; ++i) root_degree_reduction();
  }

  Entry find_min() const {
    if (root_ == nullptr) throw underflow_error();
    return Entry{root_->item, root_->key};
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  void clear() {
    root_ = nullptr;
    q_ = nullptr;
    groups_.fill(nullptr);
    gcount_.fill(0);
    active_roots_.clear();
    loss_one_.clear();
    loss_two_ = nullptr;
    lambda_ = 0;
    size_ = 0;
    nodes_.release_all();
    cells_.release_all();
  }
  HeapStats stats() const { return HeapStats{size_, rec_.counters()}; }

  /// R = 2 * ceil(lg n) + 6.
  std::size_t bound_r() const { return 2 * detail::ceil_log2(size_ == 0 ? 1 : size_) + 6; }
  std::size_t total_loss() const { return lambda_; }
  std::size_t active_root_count() const { return active_roots_.total; }
  std::size_t root_degree() const { return gcount_[kActive] + gcount_[kNonLinkable] + gcount_[kLinkable]; }

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    if (root_ == nullptr) {
      if (size_ != 0) out.push_back({"size", "empty root with nonzero size"});
      return out;
    }
    Walk w;
    if (root_->active) out.push_back({"I2", "root is active"});
    if (root_->parent != nullptr) out.push_back({"parent-link", "root has a parent"});
    check_cell(root_, out);
    w.count = 1;
    for (std::uint8_t g = kActive; g <= kLinkable; ++g) {
      std::size_t n = 0;
      Node* h = groups_[g];
      if (h != nullptr) {
        const Node* c = h;
        do {
          ++n;
          if (c->group != g) out.push_back({"I1", "root child group tag"});
          bool ok = g == kActive ? c->active : (!c->active && (linkable(c) == (g == kLinkable)));
          if (!ok) out.push_back({"I1", "root child in group " + std::to_string(g) + " has the wrong kind"});
          if (c->right->left != c) out.push_back({"sibling-link", "root group ring"});
          check_subtree(c, root_, out, w);
          c = c->right;
        } while (c != h && w.count <= size_ + 1);
      }
      if (n != gcount_[g]) out.push_back({"group-count", "root group " + std::to_string(g)});
    }
    if (w.count != size_) out.push_back({"size", "node count " + std::to_string(w.count) + " != size " + std::to_string(size_)});
    if (w.loss != lambda_) out.push_back({"loss-total", "sum of losses " + std::to_string(w.loss) + " != " + std::to_string(lambda_)});
    if (w.active_roots != active_roots_.total) out.push_back({"buckets", "active root count mismatch"});
    std::size_t r = bound_r();
    if (lambda_ > r + 1) out.push_back({"I5", "total loss " + std::to_string(lambda_) + " > R+1 = " + std::to_string(r + 1)});
    if (active_roots_.total > r + 1) {
      out.push_back({"I5", std::to_string(active_roots_.total) + " active roots > R+1 = " + std::to_string(r + 1)});
    }
    if (root_degree() > r + 3) out.push_back({"I5", "root degree " + std::to_string(root_degree()) + " > R+3 = " + std::to_string(r + 3)});

    // Q holds every non-root node once; the k-th from the front has degree
    // at most 2 lg n + 2k.
    std::size_t qn = 0;
    if (q_ != nullptr) {
      const Node* c = q_;
      std::size_t lg = detail::ceil_log2(size_);
      do {
        ++qn;
        if (c == root_) out.push_back({"Q", "root is queued"});
        if (c->qnext->qprev != c) out.push_back({"Q", "ring link"});
        std::size_t deg = degree(c);
        if (deg > 2 * lg + 2 * qn) {
          out.push_back({"I4", "queue position " + std::to_string(qn) + " has degree " + std::to_string(deg)});
        }
        c = c->qnext;
      } while (c != q_ && qn <= size_);
    }
    if (qn + 1 != size_) out.push_back({"Q", std::to_string(qn) + " queued nodes for size " + std::to_string(size_)});
    check_buckets(out);
    return out;
  }

 private:
  friend struct testing::access;

  struct RankLists {
    std::vector<Node*> head;
    std::vector<std::uint32_t> count;
    std::vector<int> pos;
    std::vector<std::uint32_t> crowded;
    std::size_t total = 0;

    RankLists() { grow(160); }
    void grow(std::size_t n) {
      head.resize(n, nullptr);
      count.resize(n, 0);
      pos.resize(n, -1);
    }
    void clear() {
      std::fill(head.begin(), head.end(), nullptr);
      std::fill(count.begin(), count.end(), 0);
      std::fill(pos.begin(), pos.end(), -1);
      crowded.clear();
      total = 0;
    }
    void add(Node* x, std::uint32_t r) {
      if (r >= head.size()) grow(2 * r + 2);
      x->bprev = nullptr;
      x->bnext = head[r];
      if (head[r] != nullptr) head[r]->bprev = x;
      head[r] = x;
      ++total;
      if (++count[r] == 2) {
        pos[r] = static_cast<int>(crowded.size());
        crowded.push_back(r);
      }
    }
    void remove(Node* x, std::uint32_t r) {
      if (x->bprev != nullptr) {
        x->bprev->bnext = x->bnext;
      } else {
        head[r] = x->bnext;
      }
      if (x->bnext != nullptr) x->bnext->bprev = x->bprev;
      x->bprev = x->bnext = nullptr;
      --total;
      if (count[r]-- == 2) {
        std::uint32_t last = crowded.back();
        crowded[pos[r]] = last;
        pos[last] = pos[r];
        crowded.pop_back();
        pos[r] = -1;
      }
    }
  };

  struct Walk {
    std::size_t count = 0;
    std::size_t loss = 0;
    std::size_t active_roots = 0;
  };

  Cell* resolve(const Handle& h) const {
    if constexpr (Policy::checked) {
      Cell* c = cells_.resolve(h);
      if (c == nullptr) throw invalid_handle_error();
      return c;
    } else {
      return static_cast<Cell*>(h.node);
    }
  }

  // --- rings ----------------------------------------------------------------

  static void ring_push(Node*& head, Node* x, bool front) {
    if (head == nullptr) {
      x->left = x->right = x;
      head = x;
      return;
    }
    Node* tail = head->left;
    x->right = head;
    x->left = tail;
    tail->right = x;
    head->left = x;
    if (front) head = x;
  }

  static void ring_remove(Node*& head, Node* x) {
    if (x->right == x) {
      head = nullptr;
    } else {
      x->left->right = x->right;
      x->right->left = x->left;
      if (head == x) head = x->right;
    }
    x->left = x->right = x;
  }

  static Node* ring_concat(Node* a, Node* b) {
    if (a == nullptr) return b;
    if (b == nullptr) return a;
    Node* a_tail = a->left;
    Node* b_tail = b->left;
    a_tail->right = b;
    b->left = a_tail;
    b_tail->right = a;
    a->left = b_tail;
    return a;
  }

  void q_push_back(Node* x) {
    if (q_ == nullptr) {
      x->qprev = x->qnext = x;
      q_ = x;
      return;
    }
    Node* tail = q_->qprev;
    x->qnext = q_;
    x->qprev = tail;
    tail->qnext = x;
    q_->qprev = x;
  }

  void q_remove(Node* x) {
    if (x->qnext == x) {
      q_ = nullptr;
    } else {
      x->qprev->qnext = x->qnext;
      x->qnext->qprev = x->qprev;
      if (q_ == x) q_ = x->qnext;
    }
    x->qprev = x->qnext = x;
  }

  // --- structure ------------------------------------------------------------

  static bool linkable(const Node* x) { return !x->active && (x->child == nullptr || !x->child->active); }

  void detach(Node* x) {
    Node* p = x->parent;
    if (p == root_) {
      ring_remove(groups_[x->group], x);
      --gcount_[x->group];
      x->group = kNoGroup;
    } else {
      ring_remove(p->child, x);
    }
    rec_.write(p);
    x->parent = nullptr;
  }

  void attach(Node* p, Node* x) {
    x->parent = p;
    if (p == root_) {
      std::uint8_t g = x->active ? kActive : (linkable(x) ? kLinkable : kNonLinkable);
      ring_push(groups_[g], x, true);
      ++gcount_[g];
      x->group = g;
    } else {
      ring_push(p->child, x, x->active);
    }
    rec_.write(p);
    rec_.write(x);
  }

  // Re-homes every node of a detached sibling ring under the root.
  void adopt_ring(Node* h) {
    if (h == nullptr) return;
    Node* c = h;
    Node* stop = h->left;
    for (;;) {
      Node* next = c->right;
      bool last = c == stop;
      attach(root_, c);
      if (last) break;
      c = next;
    }
  }

  bool is_active_root(const Node* x) const { return x->active && x->parent != nullptr && !x->parent->active; }

  void set_loss(Node* x, std::uint32_t v) {
    lambda_ += v;
    lambda_ -= x->loss;
    x->loss = v;
  }

  void unfile(Node* x) {
    switch (x->bucket) {
      case kActiveRoots:
        active_roots_.remove(x, x->brank);
        break;
      case kLossOne:
        loss_one_.remove(x, x->brank);
        break;
      case kLossTwo:
        if (x->bprev != nullptr) {
          x->bprev->bnext = x->bnext;
        } else {
          loss_two_ = x->bnext;
        }
        if (x->bnext != nullptr) x->bnext->bprev = x->bprev;
        x->bprev = x->bnext = nullptr;
        break;
      default:
        break;
    }
    x->bucket = kNoBucket;
  }

  void refile(Node* x) {
    std::uint8_t want = kNoBucket;
    if (x->active) {
      if (x->parent != nullptr && !x->parent->active) {
        want = kActiveRoots;
      } else if (x->loss == 1) {
        want = kLossOne;
      } else if (x->loss >= 2) {
        want = kLossTwo;
      }
    }
    if (want == x->bucket && (want == kNoBucket || want == kLossTwo || x->brank == x->rank)) return;
    unfile(x);
    x->bucket = want;
    x->brank = x->rank;
    switch (want) {
      case kActiveRoots:
        active_roots_.add(x, x->rank);
        break;
      case kLossOne:
        loss_one_.add(x, x->rank);
        break;
      case kLossTwo:
        x->bprev = nullptr;
        x->bnext = loss_two_;
        if (loss_two_ != nullptr) loss_two_->bprev = x;
        loss_two_ = x;
        break;
      default:
        break;
    }
  }

  // p has just lost the active child it had.
  void lost_active_child(Node* p) {
    if (p == root_) return;
    if (p->active) {
      --p->rank;
      if (!is_active_root(p)) set_loss(p, p->loss + 1);
      refile(p);
    } else if (p->parent == root_ && p->group == kNonLinkable && linkable(p)) {
      ring_remove(groups_[kNonLinkable], p);
      --gcount_[kNonLinkable];
      ring_push(groups_[kLinkable], p, true);
      ++gcount_[kLinkable];
      p->group = kLinkable;
    }
    rec_.write(p);
  }

  // Moves y (with its subtree) to become a child of x.
  void move_under(Node* y, Node* x, bool as_cut) {
    if (Node* p = y->parent; p != nullptr) {
      detach(y);
      if (y->active) lost_active_child(p);
    }
    attach(x, y);
    if (y->active) {
      if (x->active) {
        ++x->rank;
        refile(x);
      } else {
        set_loss(y, 0);
      }
    }
    refile(y);
    if (as_cut) {
      rec_.cut();
    } else {
      rec_.link();
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

  // --- reductions -----------------------------------------------------------

  bool active_root_reduction() {
    if (active_roots_.crowded.empty()) return false;
    std::uint32_t r = active_roots_.crowded.back();
    Node* x = active_roots_.head[r];
    Node* y = x->bnext;
    rec_.read(x);
    rec_.read(y);
    if (rec_.less(y->key, x->key)) std::swap(x, y);
    move_under(y, x, false);
    Node* z = x->child->left;
    rec_.read(z);
    if (!z->active) move_under(z, root_, false);
    return true;
  }

  bool root_degree_reduction() {
    if (gcount_[kLinkable] < 3) return false;
    Node* a = groups_[kLinkable]->left;
    Node* b = a->left;
    Node* c = b->left;
    rec_.read(a);
    rec_.read(b);
    rec_.read(c);
    if (rec_.less(b->key, a->key)) std::swap(a, b);
    if (rec_.less(c->key, b->key)) std::swap(b, c);
    if (rec_.less(b->key, a->key)) std::swap(a, b);
    // a < b < c: c under b, b under a, a an active root of rank 1.
    detach(a);
    detach(b);
    detach(c);
    b->active = true;
    b->rank = 0;
    set_loss(b, 0);
    attach(b, c);
    a->active = true;
    a->rank = 1;
    set_loss(a, 0);
    attach(a, b);
    attach(root_, a);
    refile(a);
    refile(b);
    rec_.link();
    rec_.link();
    return true;
  }

  bool loss_reduction() {
    if (loss_two_ != nullptr) {
      Node* x = loss_two_;
      rec_.read(x);
      move_under(x, root_, true);
      return true;
    }
    if (loss_one_.crowded.empty()) return false;
    std::uint32_t r = loss_one_.crowded.back();
    Node* x = loss_one_.head[r];
    Node* y = x->bnext;
    rec_.read(x);
    rec_.read(y);
    if (rec_.less(y->key, x->key)) std::swap(x, y);
    // y's old parent z is charged after the reset, so z == x keeps its loss.
    Node* z = y->parent;
    detach(y);
    --z->rank;
    attach(x, y);
    ++x->rank;
    set_loss(x, 0);
    set_loss(y, 0);
    if (!is_active_root(z)) set_loss(z, z->loss + 1);
    refile(z);
    refile(x);
    refile(y);
    rec_.link();
    return true;
  }

  // --- validation -----------------------------------------------------------

  static std::size_t degree(const Node* x) {
    std::size_t d = 0;
    if (const Node* h = x->child; h != nullptr) {
      const Node* c = h;
      do {
        ++d;
        c = c->right;
      } while (c != h);
    }
    return d;
  }

  void check_cell(const Node* x, std::vector<Violation>& out) const {
    if (x->cell == nullptr || x->cell->node != x) out.push_back({"cell-link", "node with key " + std::to_string(x->key.raw())});
  }

  void check_subtree(const Node* x, const Node* parent, std::vector<Violation>& out, Walk& w) const {
    ++w.count;
    std::string where = "node with key " + std::to_string(x->key.raw());
    check_cell(x, out);
    if (x->parent != parent) out.push_back({"parent-link", where});
    if (!(parent->key < x->key)) out.push_back({"heap-order", where});
    bool active_root = is_active_root(x);
    if (active_root) ++w.active_roots;
    if (x->active) {
      w.loss += x->loss;
      if (active_root && x->loss != 0) out.push_back({"I2", where + " is an active root with loss " + std::to_string(x->loss)});
    } else if (x->loss != 0 || x->rank != 0) {
      out.push_back({"I2", where + " is passive with rank or loss"});
    }
    // Active children first; rank counts them; I3 on the i-th rightmost.
    std::vector<const Node*> actives;
    bool seen_passive = false;
    if (const Node* h = x->child; h != nullptr) {
      const Node* c = h;
      do {
        if (c->active) {
          if (seen_passive) out.push_back({"I1", where + " has an active child after a passive one"});
          actives.push_back(c);
        } else {
          seen_passive = true;
        }
        if (c->right->left != c) out.push_back({"sibling-link", where});
        check_subtree(c, x, out, w);
        c = c->right;
      } while (c != h && w.count <= size_ + 1);
    }
    if (x->active) {
      if (actives.size() != x->rank) {
        out.push_back({"I2", where + " rank " + std::to_string(x->rank) + " with " + std::to_string(actives.size()) + " active children"});
      }
      for (std::size_t i = 1; i <= actives.size(); ++i) {
        const Node* y = actives[actives.size() - i];
        if (y->rank + y->loss + 1 < i) {
          out.push_back({"I3", where + " active child " + std::to_string(i) + " from the right has rank+loss " + std::to_string(y->rank + y->loss)});
        }
      }
    }
  }

  void check_buckets(std::vector<Violation>& out) const {
    auto check_lists = [&](const RankLists& lists, std::uint8_t tag, const char* name) {
      std::size_t total = 0;
      for (std::size_t r = 0; r < lists.head.size(); ++r) {
        std::uint32_t n = 0;
        for (const Node* x = lists.head[r]; x != nullptr && n <= size_; x = x->bnext) {
          ++n;
          bool ok = x->bucket == tag && x->brank == r && x->rank == r && x->active;
          ok = ok && (tag == kActiveRoots ? is_active_root(x) : (!is_active_root(x) && x->loss == 1));
          if (!ok) out.push_back({"buckets", std::string(name) + " bucket " + std::to_string(r) + " holds a stray node"});
        }
        if (n != lists.count[r]) out.push_back({"buckets", std::string(name) + " count at rank " + std::to_string(r)});
        if ((n >= 2) != (lists.pos[r] >= 0)) out.push_back({"buckets", std::string(name) + " crowding flag at rank " + std::to_string(r)});
        total += n;
      }
      if (total != lists.total) out.push_back({"buckets", std::string(name) + " total"});
    };
    check_lists(active_roots_, kActiveRoots, "active-root");
    check_lists(loss_one_, kLossOne, "loss-one");
    std::size_t n = 0;
    for (const Node* x = loss_two_; x != nullptr && n <= size_; x = x->bnext) {
      ++n;
      if (x->bucket != kLossTwo || x->loss < 2 || !x->active || is_active_root(x)) {
        out.push_back({"buckets", "loss-two list holds a stray node"});
      }
    }
  }

  NodePool<Node> nodes_;
  NodePool<Cell> cells_;
  Node* root_ = nullptr;
  Node* q_ = nullptr;
  std::array<Node*, 4> groups_{};
  std::array<std::size_t, 4> gcount_{};
  RankLists active_roots_;
  RankLists loss_one_;
  Node* loss_two_ = nullptr;
  std::size_t lambda_ = 0;
  std::size_t size_ = 0;
  Recorder<Policy> rec_;
};

}  // namespace pqlab
