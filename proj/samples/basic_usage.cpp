// Small tour: use a heap directly, then generate a trace and replay it
// against two variants.

#include <cstdio>

#include "pqlab/pqlab.hpp"

int main() {
  using namespace pqlab;

  PairingHeap<> h;
  Handle a = h.insert(0, make_key(40, 0));
  h.insert(1, make_key(10, 1));
  h.insert(2, make_key(30, 2));
  h.decrease_key(a, make_key(5, 0));
  while (!h.empty()) {
    Entry e = h.delete_min();
    std::printf("item %u key %u\n", e.item, e.key.key32());
  }

  Graph g = gen_grid_graph(16, 16, 100, 7);
  Trace t = gen_dijkstra(g, 0);
  std::vector<std::uint32_t> dist = distances_from_trace(t);
  std::printf("grid 16x16: %llu records, distance to far corner %u\n", static_cast<unsigned long long>(t.header.total),
              dist.back());

  std::string bytes = encode_trace(t);
  RunOptions opt;
  opt.one_shot = true;
  for (const char* name : {"pairing", "implicit_4"}) {
    MetricRecord m = run_driver(parse_variant(name), bytes, opt);
    std::printf("%-12s comparisons %llu\n", name, static_cast<unsigned long long>(m.counters.comparisons));
  }
  return 0;
}
