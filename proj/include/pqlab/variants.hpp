#pragma once

// Runtime naming of heap variants and dispatch to the concrete types.

#include <string>
#include <type_traits>
#include <vector>

#include "pqlab/array_heaps.hpp"
#include "pqlab/binomial_heap.hpp"
#include "pqlab/core.hpp"
#include "pqlab/fibonacci_heap.hpp"
#include "pqlab/pairing_heap.hpp"
#include "pqlab/quake_heap.hpp"
#include "pqlab/rank_pairing_heap.hpp"
#include "pqlab/strict_fibonacci_heap.hpp"
#include "pqlab/violation_heap.hpp"
#include "pqlab/weak_queue.hpp"

namespace pqlab {

enum class HeapFamily {
  implicit_simple,
  implicit,
  explicit_,
  binomial,
  pairing,
  fibonacci,
  rank_pairing_t1,
  rank_pairing_t2,
  violation,
  quake,
  rank_relaxed_weak,
  strict_fibonacci,
};

inline constexpr HeapFamily kAllFamilies[] = {
    HeapFamily::implicit_simple, HeapFamily::implicit,        HeapFamily::explicit_,       HeapFamily::binomial,
    HeapFamily::pairing,         HeapFamily::fibonacci,       HeapFamily::rank_pairing_t1, HeapFamily::rank_pairing_t2,
    HeapFamily::violation,       HeapFamily::quake,           HeapFamily::rank_relaxed_weak, HeapFamily::strict_fibonacci,
};

inline const char* family_name(HeapFamily f) {
  switch (f) {
    case HeapFamily::implicit_simple: return "implicit_simple";
    case HeapFamily::implicit: return "implicit";
    case HeapFamily::explicit_: return "explicit";
    case HeapFamily::binomial: return "binomial";
    case HeapFamily::pairing: return "pairing";
    case HeapFamily::fibonacci: return "fibonacci";
    case HeapFamily::rank_pairing_t1: return "rank_pairing_t1";
    case HeapFamily::rank_pairing_t2: return "rank_pairing_t2";
    case HeapFamily::violation: return "violation";
    case HeapFamily::quake: return "quake";
    case HeapFamily::rank_relaxed_weak: return "rank_relaxed_weak";
    case HeapFamily::strict_fibonacci: return "strict_fibonacci";
  }
  return "?";
}

inline bool is_array_family(HeapFamily f) {
  return f == HeapFamily::implicit_simple || f == HeapFamily::implicit || f == HeapFamily::explicit_;
}

inline const char* pool_name(PoolStrategy s) {
  switch (s) {
    case PoolStrategy::eager: return "eager";
    case PoolStrategy::doubling: return "doubling";
    case PoolStrategy::on_demand: return "on_demand";
  }
  return "?";
}

inline PoolStrategy parse_pool(const std::string& s) {
  if (s == "eager") return PoolStrategy::eager;
  if (s == "doubling") return PoolStrategy::doubling;
  if (s == "on_demand") return PoolStrategy::on_demand;
  throw contract_error("unknown pool strategy '" + s + "'");
}

struct HeapVariant {
  HeapFamily family = HeapFamily::pairing;
  unsigned d = 4;
  unsigned pad_factor = 1;
  PoolStrategy pool = PoolStrategy::eager;

  /// "implicit_4", "pairing", ... (arity appended for array families).
  std::string name() const {
    std::string s = family_name(family);
    if (is_array_family(family)) s += "_" + std::to_string(d);
    return s;
  }

  /// name() plus any non-default padding or pool strategy.
  std::string label() const {
    std::string s = name();
    if (pad_factor != 1) s += "/pad" + std::to_string(pad_factor);
    if (pool != PoolStrategy::eager) s += std::string("/") + pool_name(pool);
    return s;
  }

  bool supports_decrease_key() const { return family != HeapFamily::implicit_simple; }

  void check() const {
    if (is_array_family(family) && d != 2 && d != 4 && d != 8 && d != 16) {
      throw contract_error("arity must be 2, 4, 8 or 16 (got " + std::to_string(d) + ")");
    }
    if (pad_factor < 1) throw contract_error("pad_factor must be at least 1");
  }

  friend bool operator==(const HeapVariant& a, const HeapVariant& b) {
    return a.family == b.family && (!is_array_family(a.family) || a.d == b.d) && a.pad_factor == b.pad_factor && a.pool == b.pool;
  }
};

/// Accepts a family name, optionally followed by "_<d>" for array families
/// ("implicit_4"). A bare array family name keeps `default_d`.
inline HeapVariant parse_variant(const std::string& text, unsigned default_d = 4) {
  for (HeapFamily f : kAllFamilies) {
    std::string base = family_name(f);
    if (text == base) {
      HeapVariant v{f, default_d};
      v.check();
      return v;
    }
    if (is_array_family(f) && text.size() > base.size() + 1 && text.compare(0, base.size() + 1, base + "_") == 0) {
      std::string digits = text.substr(base.size() + 1);
      if (digits.find_first_not_of("0123456789") != std::string::npos) continue;
      HeapVariant v{f, static_cast<unsigned>(std::stoul(digits))};
      v.check();
      return v;
    }
  }
  throw contract_error("unknown heap variant '" + text + "'");
}

/// The benchmark line-up: every array family at d = 2, 4, 8, 16 and every
/// linked family once.
inline std::vector<HeapVariant> all_variants() {
  std::vector<HeapVariant> out;
  for (HeapFamily f : kAllFamilies) {
    if (is_array_family(f)) {
      for (unsigned d : {2u, 4u, 8u, 16u}) out.push_back({f, d});
    } else {
      out.push_back({f});
    }
  }
  return out;
}

namespace detail {
template <template <unsigned, typename> class H, typename Policy, typename F>
decltype(auto) visit_arity(unsigned d, F&& f) {
  switch (d) {
    case 2: return f(std::type_identity<H<2, Policy>>{});
    case 4: return f(std::type_identity<H<4, Policy>>{});
    case 8: return f(std::type_identity<H<8, Policy>>{});
    case 16: return f(std::type_identity<H<16, Policy>>{});
  }
  throw contract_error("arity must be 2, 4, 8 or 16 (got " + std::to_string(d) + ")");
}
}  // namespace detail

/// Calls f(std::type_identity<Heap>{}) with the concrete heap type for v.
template <typename Policy, typename F>
decltype(auto) visit_variant(const HeapVariant& v, F&& f) {
  switch (v.family) {
    case HeapFamily::implicit_simple: return detail::visit_arity<ImplicitSimpleHeap, Policy>(v.d, f);
    case HeapFamily::implicit: return detail::visit_arity<ImplicitHeap, Policy>(v.d, f);
    case HeapFamily::explicit_: return detail::visit_arity<ExplicitHeap, Policy>(v.d, f);
    case HeapFamily::binomial: return f(std::type_identity<BinomialHeap<Policy>>{});
    case HeapFamily::pairing: return f(std::type_identity<PairingHeap<Policy>>{});
    case HeapFamily::fibonacci: return f(std::type_identity<FibonacciHeap<Policy>>{});
    case HeapFamily::rank_pairing_t1: return f(std::type_identity<RankPairingHeap<RankRule::type1, Policy>>{});
    case HeapFamily::rank_pairing_t2: return f(std::type_identity<RankPairingHeap<RankRule::type2, Policy>>{});
    case HeapFamily::violation: return f(std::type_identity<ViolationHeap<Policy>>{});
    case HeapFamily::quake: return f(std::type_identity<QuakeHeap<Policy>>{});
    case HeapFamily::rank_relaxed_weak: return f(std::type_identity<WeakQueue<Policy>>{});
    case HeapFamily::strict_fibonacci: return f(std::type_identity<StrictFibonacciHeap<Policy>>{});
  }
  throw contract_error("unknown heap family");
}

}  // namespace pqlab
