#pragma once

// Back door into heap internals, used only to corrupt structures on purpose
// and check that validate() notices.

#include "pqlab/pqlab.hpp"

namespace pqlab::testing {

struct access {
  template <typename H>
  static auto* node(H& heap, const Handle& h) {
    auto* p = heap.resolve(h);
    if constexpr (requires { p->node->key; }) {
      return p->node;
    } else {
      return p;
    }
  }

  /// Overwrites a stored key without restoring any invariant.
  template <typename H>
  static void poke_key(H& heap, const Handle& h, Key64 key) {
    node(heap, h)->key = key;
  }

  template <unsigned D, typename P>
  static void poke_slot_key(ImplicitSimpleHeap<D, P>& heap, std::size_t i, Key64 key) {
    heap.slots_[i].key = key;
  }

  template <unsigned D, typename P>
  static void break_back_link(ImplicitHeap<D, P>& heap, std::size_t i) {
    heap.slots_[i]->index += 1;
  }

  template <typename H>
  static void bump_rank(H& heap, const Handle& h) {
    ++node(heap, h)->rank;
  }

  /// A node from the heap's own pool that is not linked into the heap.
  template <typename H>
  static auto* fresh_node(H& heap, Key64 key, ItemId item) {
    auto* n = [&] {
      if constexpr (requires { heap.nodes_.acquire(); }) {
        return heap.nodes_.acquire();
      } else {
        return heap.pool_.acquire();
      }
    }();
    n->key = key;
    n->item = item;
    return n;
  }

  /// Adds a rank-0 root behind the heap's back (no linking, no flags).
  template <typename P>
  static void violation_add_root(ViolationHeap<P>& heap, Key64 key, ItemId item) {
    heap.push_root(fresh_node(heap, key, item));
    ++heap.size_;
  }

  /// Links the trees topped by two leaves' clone paths into one root.
  template <typename P>
  static void quake_link(QuakeHeap<P>& heap, const Handle& a, const Handle& b) {
    auto* ta = node(heap, a)->top;
    auto* tb = node(heap, b)->top;
    std::erase(heap.roots_, ta);
    std::erase(heap.roots_, tb);
    heap.roots_.push_back(heap.link(ta, tb));
  }

  template <typename P>
  static void bump_height_count(QuakeHeap<P>& heap, std::size_t h, std::uint64_t delta) {
    if (heap.counts_.size() <= h) heap.counts_.resize(h + 1, 0);
    heap.counts_[h] += delta;
  }

  template <typename P>
  static void set_loss(StrictFibonacciHeap<P>& heap, const Handle& h, std::uint32_t loss) {
    node(heap, h)->loss = loss;
  }
};

}  // namespace pqlab::testing
