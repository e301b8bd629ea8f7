#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "heap_types.hpp"
#include "pqlab/pqlab.hpp"

using namespace pqlab;

TEST_CASE("composite key layout") {
  CHECK(make_key(1, 2).raw() == 0x0000000100000002ull);
  CHECK(make_key(0, 0).raw() == 0);
  CHECK(make_key(0xFFFFFFFFu, 0xFFFFFFFFu).raw() == 0xFFFFFFFFFFFFFFFFull);
  Key64 k = make_key(0xDEADBEEF, 77);
  CHECK(k.key32() == 0xDEADBEEF);
  CHECK(k.low32() == 77);
  CHECK(make_key(7, 1) < make_key(7, 2));
  CHECK(make_key(6, 0xFFFFFFFF) < make_key(7, 0));
}

TEST_CASE("log helpers") {
  CHECK(detail::floor_log2(1) == 0);
  CHECK(detail::floor_log2(2) == 1);
  CHECK(detail::floor_log2(1023) == 9);
  CHECK(detail::ceil_log2(1) == 0);
  CHECK(detail::ceil_log2(2) == 1);
  CHECK(detail::ceil_log2(1025) == 11);
}

TEMPLATE_TEST_CASE("every variant satisfies the contract concept", "[contract]", PQLAB_ALL_HEAPS) {
  STATIC_REQUIRE(PriorityQueue<TestType>);
}

TEMPLATE_TEST_CASE("basic contract examples", "[contract]", PQLAB_ALL_HEAPS) {
  TestType h;
  CHECK(h.size() == 0);
  CHECK(h.empty());
  CHECK_THROWS_AS(h.delete_min(), underflow_error);
  CHECK_THROWS_AS(h.find_min(), underflow_error);

  SECTION("single insert then find_min") {
    h.insert(0, make_key(5, 0));
    CHECK(h.find_min() == Entry{0, make_key(5, 0)});
    CHECK(h.find_min() == h.find_min());
    CHECK(h.size() == 1);
  }
  SECTION("three keys come out in order") {
    h.insert(0, make_key(3, 0));
    h.insert(1, make_key(1, 1));
    h.insert(2, make_key(2, 2));
    CHECK(h.delete_min().item == 1);
    CHECK(h.delete_min().item == 2);
    CHECK(h.delete_min().item == 0);
    CHECK(h.empty());
  }
  SECTION("equal user keys tie-break on the item id") {
    h.insert(1, make_key(7, 1));
    h.insert(2, make_key(7, 2));
    CHECK(h.delete_min().item == 1);
    CHECK(h.delete_min().item == 2);
  }
  SECTION("delete_min returns the pair and shrinks the heap") {
    h.insert(0, make_key(4, 0));
    h.insert(1, make_key(9, 1));
    CHECK(h.delete_min() == Entry{0, make_key(4, 0)});
    CHECK(h.size() == 1);
    CHECK(h.delete_min() == Entry{1, make_key(9, 1)});
    CHECK(h.empty());
  }
  SECTION("clear empties the heap and keeps the counters") {
    for (ItemId i = 0; i < 50; ++i) h.insert(i, make_key(100 - i, i));
    CHECK(h.size() == 50);
    HeapCounters before = h.stats().counters;
    h.clear();
    CHECK(h.size() == 0);
    CHECK(h.stats().counters == before);
    h.insert(60, make_key(1, 60));
    CHECK(h.delete_min().item == 60);
  }
}

TEMPLATE_TEST_CASE("decrease_key contract", "[contract]", PQLAB_DECREASE_HEAPS) {
  TestType h;
  SECTION("decrease a non-minimum below the minimum") {
    Handle a = h.insert(0, make_key(50, 0));
    h.insert(1, make_key(30, 1));
    h.decrease_key(a, make_key(10, 0));
    CHECK(h.find_min() == Entry{0, make_key(10, 0)});
    CHECK(h.delete_min() == Entry{0, make_key(10, 0)});
  }
  SECTION("decrease the minimum itself") {
    h.insert(0, make_key(50, 0));
    Handle b = h.insert(1, make_key(30, 1));
    h.decrease_key(b, make_key(20, 1));
    CHECK(h.find_min() == Entry{1, make_key(20, 1)});
  }
  SECTION("a key that is not smaller is a contract error") {
    Handle a = h.insert(0, make_key(50, 0));
    CHECK_THROWS_AS(h.decrease_key(a, make_key(50, 0)), contract_error);
    CHECK_THROWS_AS(h.decrease_key(a, make_key(60, 0)), contract_error);
    CHECK(h.find_min() == Entry{0, make_key(50, 0)});
  }
  SECTION("a handle used after its delete_min is rejected") {
    Handle a = h.insert(0, make_key(1, 0));
    h.insert(1, make_key(2, 1));
    h.delete_min();
    CHECK_THROWS_AS(h.decrease_key(a, make_key(0, 0)), invalid_handle_error);
  }
}

TEMPLATE_TEST_CASE("implicit_simple rejects decrease_key", "[contract]", ImplicitSimpleHeap<2>, ImplicitSimpleHeap<4>,
                   ImplicitSimpleHeap<8>, ImplicitSimpleHeap<16>) {
  TestType h;
  Handle a = h.insert(0, make_key(5, 0));
  CHECK_THROWS_AS(h.decrease_key(a, make_key(1, 0)), unsupported_operation_error);
  STATIC_REQUIRE_FALSE(TestType::supports_decrease_key);
}

TEMPLATE_TEST_CASE("size tracks inserts minus deletes", "[contract]", PQLAB_ALL_HEAPS) {
  TestType h;
  std::mt19937_64 rng(11);
  std::size_t expected = 0;
  ItemId next = 0;
  for (int i = 0; i < 2000; ++i) {
    if (expected == 0 || rng() % 3 != 0) {
      h.insert(next, make_key(static_cast<std::uint32_t>(rng()), next));
      ++next;
      ++expected;
    } else {
      h.delete_min();
      --expected;
    }
    REQUIRE(h.size() == expected);
  }
}

TEST_CASE("oracle examples") {
  OracleHeap o;
  o.insert(0, make_key(9, 0));
  o.insert(1, make_key(3, 1));
  CHECK(o.delete_min() == Entry{1, make_key(3, 1)});
  CHECK_THROWS_AS(o.insert(2, make_key(9, 0)), contract_error);
  CHECK_THROWS_AS(o.decrease_item(5, make_key(1, 5)), invalid_handle_error);
  CHECK_THROWS_AS(o.decrease_item(0, make_key(10, 0)), contract_error);
  o.decrease_item(0, make_key(1, 0));
  CHECK(o.key_of(0) == make_key(1, 0));
}

// ---------------------------------------------------------------------------
// Node pool

namespace {
struct Payload {
  std::uint64_t a;
  std::uint64_t b;
};
}  // namespace

TEST_CASE("eager pool reserves once") {
  NodePool<Payload> p(PoolStrategy::eager, 1000);
  CHECK(p.capacity() == 1000);
  std::vector<Payload*> v;
  for (int i = 0; i < 1000; ++i) v.push_back(p.acquire());
  CHECK(p.counters().growth_events == 0);
  CHECK(p.counters().reservations == 1);
  CHECK(p.counters().peak_live == 1000);
}

TEST_CASE("eager pool exhaustion is a capacity error") {
  NodePool<Payload> p(PoolStrategy::eager, 2);
  p.acquire();
  p.acquire();
  CHECK_THROWS_AS(p.acquire(), capacity_error);
}

TEST_CASE("doubling pool grows 4 -> 8 -> 16 over 9 acquires") {
  NodePool<Payload> p(PoolStrategy::doubling, 123456);
  std::vector<std::size_t> capacities;
  for (int i = 0; i < 9; ++i) {
    p.acquire();
    capacities.push_back(p.capacity());
  }
  CHECK(p.counters().growth_events == 2);
  CHECK(capacities == std::vector<std::size_t>{4, 4, 4, 4, 8, 8, 8, 8, 16});
}

TEST_CASE("on-demand pool reserves per acquire") {
  NodePool<Payload> p(PoolStrategy::on_demand, 10);
  for (int i = 0; i < 7; ++i) p.acquire();
  CHECK(p.counters().growth_events == p.counters().acquires);
}

TEST_CASE("pool round trip and LIFO reuse") {
  for (PoolStrategy s : {PoolStrategy::eager, PoolStrategy::doubling}) {
    NodePool<Payload> p(s, 16);
    Payload* a = p.acquire();
    CHECK(p.live() == 1);
    p.release(a);
    CHECK(p.live() == 0);

    Payload* x = p.acquire();
    Payload* y = p.acquire();
    p.acquire();
    p.release(y);
    CHECK(p.acquire() == y);
    (void)x;
  }
}

TEST_CASE("pool hands out zeroed slots and detects misuse") {
  NodePool<Payload> p(PoolStrategy::eager, 4);
  Payload* a = p.acquire();
  a->a = 99;
  a->b = 98;
  Handle h = p.handle_of(a);
  CHECK(p.resolve(h) == a);
  p.release(a);
  CHECK(p.resolve(h) == nullptr);
  CHECK_THROWS_AS(p.release(a), pool_misuse_error);
  Payload* b = p.acquire();
  CHECK(b == a);
  CHECK(b->a == 0);
  CHECK(b->b == 0);
  CHECK(p.resolve(h) == nullptr);
}

TEST_CASE("padding multiplies the slot size") {
  NodePool<Payload> p1(PoolStrategy::eager, 4, 1);
  NodePool<Payload> p2(PoolStrategy::eager, 4, 2);
  NodePool<Payload> p4(PoolStrategy::eager, 4, 4);
  CHECK(p1.node_size() == NodePool<Payload>::base_node_size());
  CHECK(p2.node_size() == 2 * p1.node_size());
  CHECK(p4.node_size() == 4 * p1.node_size());
}

TEMPLATE_TEST_CASE("padding and pool strategy leave results and comparisons unchanged", "[pool]", PQLAB_DECREASE_HEAPS) {
  auto run = [](HeapConfig cfg) {
    cfg.capacity_hint = 600;
    TestType h(cfg);
    std::mt19937_64 rng(5);
    std::vector<Handle> handles;
    std::vector<Key64> keys;
    std::vector<Entry> out;
    std::set<Key64> live;
    for (ItemId i = 0; i < 600; ++i) {
      Key64 k = make_key(static_cast<std::uint32_t>(rng()), i);
      handles.push_back(h.insert(i, k));
      keys.push_back(k);
      live.insert(k);
    }
    for (int round = 0; round < 300; ++round) {
      Entry e = h.delete_min();
      live.erase(e.key);
      out.push_back(e);
      ItemId t = static_cast<ItemId>(rng() % 600);
      if (!live.count(keys[t]) || keys[t].key32() == 0) continue;
      Key64 nk = make_key(keys[t].key32() - 1, t);
      live.erase(keys[t]);
      live.insert(nk);
      keys[t] = nk;
      h.decrease_key(handles[t], nk);
    }
    return std::pair{out, h.stats().counters.comparisons};
  };
  HeapConfig base;
  auto reference = run(base);
  for (PoolStrategy s : {PoolStrategy::eager, PoolStrategy::doubling, PoolStrategy::on_demand}) {
    for (unsigned pad : {1u, 2u, 4u}) {
      HeapConfig c;
      c.pool = s;
      c.pad_factor = pad;
      CHECK(run(c) == reference);
    }
  }
}
