#pragma once

// Trace generators. Every generator runs its operation stream through the
// reference heap, so DELETE_MIN records carry the exact expected answer, and
// keeps live keys unique at every prefix.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/graph.hpp"
#include "pqlab/oracle.hpp"
#include "pqlab/trace.hpp"

namespace pqlab {

enum class DecreaseMode { middle, min };

inline const char* mode_name(DecreaseMode m) { return m == DecreaseMode::middle ? "middle" : "min"; }

inline DecreaseMode parse_mode(const std::string& s) {
  if (s == "middle") return DecreaseMode::middle;
  if (s == "min") return DecreaseMode::min;
  throw contract_error("unknown decrease mode '" + s + "' (expected middle or min)");
}

struct ArtificialParams {
  std::uint64_t n = 1024;
  std::uint64_t c = 1;
  std::uint64_t k = 1;
  DecreaseMode mode = DecreaseMode::middle;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::uint32_t random_key32(std::mt19937_64& rng) { return static_cast<std::uint32_t>(rng() >> 32); }

// Oracle plus the trace being built.
class TraceBuilder {
 public:
  explicit TraceBuilder(std::string generator) { trace_.header.params.emplace_back("generator", std::move(generator)); }

  void param(const std::string& k, const std::string& v) { trace_.header.params.emplace_back(k, v); }

  ItemId insert(std::uint32_t key32) {
    ItemId id = next_id_++;
    Key64 key = make_key(key32, id);
    oracle_.insert(id, key);
    trace_.records.push_back({OpCode::insert, id, key});
    return id;
  }

  Entry delete_min() {
    Entry e = oracle_.delete_min();
    trace_.records.push_back({OpCode::delete_min, e.item, e.key});
    return e;
  }

  void decrease(ItemId id, Key64 key) {
    oracle_.decrease_item(id, key);
    trace_.records.push_back({OpCode::decrease_key, id, key});
  }

  const OracleHeap& oracle() const { return oracle_; }
  void reserve(std::size_t records) { trace_.records.reserve(records); }

  Trace finish() {
    fill_counts(trace_);
    return std::move(trace_);
  }

 private:
  OracleHeap oracle_;
  Trace trace_;
  ItemId next_id_ = 0;
};

}  // namespace detail

/// n random inserts followed by n delete-mins.
inline Trace gen_sort(std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw contract_error("gen_sort: n must be at least 1");
  std::mt19937_64 rng(seed);
  detail::TraceBuilder b("sort");
  b.param("n", std::to_string(n));
  b.param("seed", std::to_string(seed));
  b.reserve(2 * n);
  for (std::uint64_t i = 0; i < n; ++i) b.insert(detail::random_key32(rng));
  for (std::uint64_t i = 0; i < n; ++i) b.delete_min();
  return b.finish();
}

/// n warm-up inserts, then c*n rounds of (insert, delete-min).
inline Trace gen_insert_delete(std::uint64_t n, std::uint64_t c, std::uint64_t seed) {
  if (n < 1 || c < 1) throw contract_error("gen_insert_delete: n and c must be at least 1");
  std::mt19937_64 rng(seed);
  detail::TraceBuilder b("insert_delete");
  b.param("n", std::to_string(n));
  b.param("c", std::to_string(c));
  b.param("seed", std::to_string(seed));
  b.reserve(n + 2 * c * n);
  for (std::uint64_t i = 0; i < n; ++i) b.insert(detail::random_key32(rng));
  for (std::uint64_t i = 0; i < c * n; ++i) {
    b.insert(detail::random_key32(rng));
    b.delete_min();
  }
  return b.finish();
}

/// n warm-up inserts, then c*n rounds of (insert, k decreases, delete-min).
/// Targets are drawn uniformly, with replacement, from the live items other
/// than the current minimum.
inline Trace gen_decrease_key(const ArtificialParams& p) {
  if (p.n < 2) throw contract_error("gen_decrease_key: n must be at least 2");
  if (p.c < 1 || p.k < 1) throw contract_error("gen_decrease_key: c and k must be at least 1");
  std::mt19937_64 rng(p.seed);
  detail::TraceBuilder b("decrease_key");
  b.param("n", std::to_string(p.n));
  b.param("c", std::to_string(p.c));
  b.param("k", std::to_string(p.k));
  b.param("mode", mode_name(p.mode));
  b.param("seed", std::to_string(p.seed));
  b.reserve(p.n + p.c * p.n * (p.k + 2));

  // Live ids in a dense array for uniform sampling; pos[id] indexes it.
  std::uint64_t total_ids = p.n + p.c * p.n;
  std::vector<ItemId> live;
  std::vector<std::uint32_t> pos(total_ids, 0);
  auto add = [&](ItemId id) {
    pos[id] = static_cast<std::uint32_t>(live.size());
    live.push_back(id);
  };
  auto remove = [&](ItemId id) {
    ItemId last = live.back();
    live[pos[id]] = last;
    pos[last] = pos[id];
    live.pop_back();
  };

  for (std::uint64_t i = 0; i < p.n; ++i) add(b.insert(detail::random_key32(rng)));
  for (std::uint64_t it = 0; it < p.c * p.n; ++it) {
    add(b.insert(detail::random_key32(rng)));
    for (std::uint64_t j = 0; j < p.k; ++j) {
      const OracleHeap& o = b.oracle();
      Entry m = o.find_min();
      ItemId target = 0;
      Key64 key;
      for (int attempt = 0;; ++attempt) {
        if (attempt == 1 << 16) throw contract_error("gen_decrease_key: no decrease target with room below it");
        target = live[detail::draw_below(rng, live.size())];
        if (target == m.item) continue;
        if (p.mode == DecreaseMode::min) {
          if (m.key.raw() == 0) throw contract_error("gen_decrease_key: min-mode key underflow (seed " + std::to_string(p.seed) + ")");
          key = Key64{m.key.raw() - 1};
          break;
        }
        std::uint64_t lo = m.key.raw();
        std::uint64_t hi = o.key_of(target).raw();
        if (hi - lo < 2) continue;
        key = Key64{lo + 1 + detail::draw_below(rng, hi - lo - 1)};
        if (o.contains_key(key)) continue;
        break;
      }
      b.decrease(target, key);
    }
    remove(b.delete_min().item);
  }
  return b.finish();
}

/// Dijkstra from `source`, every vertex inserted up front. Tentative
/// distances are stored in the high key bits and saturate at 2^32-2;
/// unreached vertices keep 2^32-1.
inline Trace gen_dijkstra(const Graph& g, std::uint32_t source) {
  if (g.vertex_count() == 0) throw contract_error("gen_dijkstra: empty graph");
  if (source >= g.vertex_count()) throw contract_error("gen_dijkstra: source out of range");
  detail::TraceBuilder b("dijkstra");
  b.param("n", std::to_string(g.vertex_count()));
  b.param("m", std::to_string(g.arc_count()));
  b.param("source", std::to_string(source));
  b.reserve(2 * g.vertex_count() + g.arc_count());

  std::vector<std::uint32_t> dist(g.vertex_count(), kInfinity);
  dist[source] = 0;
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) b.insert(dist[v]);
  std::vector<char> settled(g.vertex_count(), 0);
  for (std::uint32_t i = 0; i < g.vertex_count(); ++i) {
    Entry e = b.delete_min();
    std::uint32_t u = e.item;
    settled[u] = 1;
    if (dist[u] == kInfinity) continue;
    for (const Arc& a : g.out(u)) {
      if (settled[a.to]) continue;
      std::uint64_t nd = std::min<std::uint64_t>(std::uint64_t{dist[u]} + a.weight, kInfinity - 1);
      if (nd < dist[a.to]) {
        dist[a.to] = static_cast<std::uint32_t>(nd);
        b.decrease(a.to, make_key(dist[a.to], a.to));
      }
    }
  }
  return b.finish();
}

/// Reads each vertex's settled distance (high key bits) off a Dijkstra trace.
inline std::vector<std::uint32_t> distances_from_trace(const Trace& t) {
  std::vector<std::uint32_t> d(t.header.inserts, kInfinity);
  for (const Entry& e : oracle_replay(t)) d.at(e.item) = e.key.key32();
  return d;
}

struct DegeneracyStats {
  double p_new_min = 0;          // probe estimate at the end of the run
  double p_new_min_running = 0;  // over every post-warmup insert
  double stack_likeness = 0;     // last n rounds: deleted item == item just inserted
  bool largest_keys_ok = true;
  std::uint64_t samples = 0;
  std::uint64_t probes = 0;
};

/// Simulates gen_insert_delete(n, c, seed) on the reference heap. The
/// end-of-run probability that a fresh key lands below the minimum is
/// estimated with `probes` independent draws that do not touch the heap.
inline DegeneracyStats degeneracy_stats(std::uint64_t n, std::uint64_t c, std::uint64_t seed, std::uint64_t sample_every,
                                        std::uint64_t probes = 0) {
  if (n < 1 || c < 1) throw contract_error("degeneracy_stats: n and c must be at least 1");
  if (sample_every < 1) sample_every = 1;
  if (probes == 0) probes = std::max<std::uint64_t>(n, 1 << 14);
  std::mt19937_64 rng(seed);
  std::set<Key64> live;
  std::vector<Key64> inserted;
  inserted.reserve(n + c * n);
  ItemId next = 0;
  auto insert = [&] {
    Key64 k = make_key(detail::random_key32(rng), next++);
    live.insert(k);
    inserted.push_back(k);
    return k;
  };

  DegeneracyStats s;
  auto sample = [&] {
    ++s.samples;
    std::vector<Key64> top(inserted);
    std::nth_element(top.begin(), top.end() - static_cast<std::ptrdiff_t>(n), top.end());
    std::sort(top.end() - static_cast<std::ptrdiff_t>(n), top.end());
    if (!std::equal(live.begin(), live.end(), top.end() - static_cast<std::ptrdiff_t>(n), top.end()) || live.size() != n) {
      s.largest_keys_ok = false;
    }
  };

  for (std::uint64_t i = 0; i < n; ++i) insert();
  std::uint64_t below = 0, stacky = 0;
  std::uint64_t rounds = c * n;
  for (std::uint64_t it = 0; it < rounds; ++it) {
    Key64 m = *live.begin();
    Key64 k = insert();
    if (k < m) ++below;
    Key64 d = *live.begin();
    live.erase(live.begin());
    if (it + n >= rounds && d == k) ++stacky;
    if ((it + 1) % sample_every == 0) sample();
  }
  if (rounds % sample_every != 0) sample();

  std::mt19937_64 probe_rng(seed ^ 0x9E3779B97F4A7C15ull);
  Key64 m = *live.begin();
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < probes; ++i) {
    if (make_key(detail::random_key32(probe_rng), next) < m) ++hits;
  }
  s.probes = probes;
  s.p_new_min = static_cast<double>(hits) / static_cast<double>(probes);
  s.p_new_min_running = static_cast<double>(below) / static_cast<double>(rounds);
  s.stack_likeness = static_cast<double>(stacky) / static_cast<double>(std::min(n, rounds));
  return s;
}

}  // namespace pqlab
