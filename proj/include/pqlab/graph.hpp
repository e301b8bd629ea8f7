#pragma once

// Directed weighted graphs for shortest-path traces: DIMACS .gr ingestion,
// two synthetic generators, and a Bellman-Ford reference.

#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pqlab/core.hpp"

namespace pqlab {

using Weight = std::uint32_t;
inline constexpr std::uint32_t kInfinity = 0xFFFFFFFFu;

struct Arc {
  std::uint32_t from;
  std::uint32_t to;
  Weight weight;
  friend bool operator==(const Arc&, const Arc&) = default;
};

class Graph {
 public:
  Graph() = default;
  Graph(std::uint32_t vertices, std::vector<Arc> arcs) : n_(vertices), arcs_(std::move(arcs)) {
    for (const Arc& a : arcs_) {
      if (a.from >= n_ || a.to >= n_) throw contract_error("graph: arc endpoint out of range");
      if (a.weight == kInfinity) throw contract_error("graph: weight 2^32-1 is reserved for infinity");
    }
    // Counting sort into CSR form; arcs keep their input order per vertex.
    offsets_.assign(n_ + 1, 0);
    for (const Arc& a : arcs_) ++offsets_[a.from + 1];
    for (std::uint32_t v = 0; v < n_; ++v) offsets_[v + 1] += offsets_[v];
    adj_.resize(arcs_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Arc& a : arcs_) adj_[fill[a.from]++] = a;
  }

  std::uint32_t vertex_count() const { return n_; }
  std::size_t arc_count() const { return arcs_.size(); }
  const std::vector<Arc>& arcs() const { return arcs_; }

  struct Range {
    const Arc* b;
    const Arc* e;
    const Arc* begin() const { return b; }
    const Arc* end() const { return e; }
  };
  Range out(std::uint32_t v) const { return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]}; }

 private:
  std::uint32_t n_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Arc> adj_;
};

class graph_parse_error : public pq_error {
 public:
  graph_parse_error(const std::string& what, std::uint64_t line)
      : pq_error("DIMACS parse error at line " + std::to_string(line) + ": " + what), line_(line) {}
  std::uint64_t line() const { return line_; }

 private:
  std::uint64_t line_;
};

inline Graph read_dimacs_gr(std::istream& in) {
  std::string line;
  std::uint64_t lineno = 0;
  bool have_problem = false;
  std::uint64_t n = 0, m = 0;
  std::vector<Arc> arcs;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "p") {
      std::string kind;
      if (have_problem) throw graph_parse_error("second problem line", lineno);
      if (!(ls >> kind >> n >> m) || kind != "sp") throw graph_parse_error("expected 'p sp <n> <m>'", lineno);
      if (n > std::numeric_limits<std::uint32_t>::max() - 1) throw graph_parse_error("too many vertices", lineno);
      have_problem = true;
      arcs.reserve(m);
    } else if (tag == "a") {
      if (!have_problem) throw graph_parse_error("arc before problem line", lineno);
      std::uint64_t u = 0, v = 0, w = 0;
      if (!(ls >> u >> v >> w)) throw graph_parse_error("expected 'a <u> <v> <w>'", lineno);
      std::string rest;
      if (ls >> rest) throw graph_parse_error("trailing text on arc line", lineno);
      if (u < 1 || u > n || v < 1 || v > n) throw graph_parse_error("arc endpoint out of range", lineno);
      if (w >= kInfinity) throw graph_parse_error("weight must be below 2^32-1", lineno);
      arcs.push_back({static_cast<std::uint32_t>(u - 1), static_cast<std::uint32_t>(v - 1), static_cast<Weight>(w)});
    } else {
      throw graph_parse_error("unknown line type '" + tag + "'", lineno);
    }
  }
  if (!have_problem) throw graph_parse_error("missing problem line", lineno);
  if (arcs.size() != m) {
    throw graph_parse_error("problem line declares " + std::to_string(m) + " arcs, found " + std::to_string(arcs.size()), lineno);
  }
  return Graph(static_cast<std::uint32_t>(n), std::move(arcs));
}

inline Graph read_dimacs_gr(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pq_error("cannot open " + path);
  return read_dimacs_gr(in);
}

namespace detail {
// Unbiased draw from [0, bound) with a fixed engine so outputs do not depend
// on the standard library's distribution implementations.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}
}  // namespace detail

inline Graph gen_random_graph(std::uint32_t n, std::uint64_t m, Weight max_w, std::uint64_t seed) {
  if (n == 0) throw contract_error("random graph needs at least one vertex");
  if (max_w < 1 || max_w == kInfinity) throw contract_error("max_w must lie in [1, 2^32-2]");
  std::mt19937_64 rng(seed);
  std::vector<Arc> arcs;
  arcs.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    auto u = static_cast<std::uint32_t>(detail::draw_below(rng, n));
    auto v = static_cast<std::uint32_t>(detail::draw_below(rng, n));
    auto w = static_cast<Weight>(1 + detail::draw_below(rng, max_w));
    arcs.push_back({u, v, w});
  }
  return Graph(n, std::move(arcs));
}

/// 4-neighbour grid, each undirected edge as two arcs with independent weights.
inline Graph gen_grid_graph(std::uint32_t rows, std::uint32_t cols, Weight max_w, std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw contract_error("grid needs positive dimensions");
  if (max_w < 1 || max_w == kInfinity) throw contract_error("max_w must lie in [1, 2^32-2]");
  std::mt19937_64 rng(seed);
  std::vector<Arc> arcs;
  auto id = [cols](std::uint32_t r, std::uint32_t c) { return r * cols + c; };
  auto add = [&](std::uint32_t a, std::uint32_t b) {
    arcs.push_back({a, b, static_cast<Weight>(1 + detail::draw_below(rng, max_w))});
    arcs.push_back({b, a, static_cast<Weight>(1 + detail::draw_below(rng, max_w))});
  };
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) add(id(r, c), id(r, c + 1));
      if (r + 1 < rows) add(id(r, c), id(r + 1, c));
    }
  }
  return Graph(rows * cols, std::move(arcs));
}

/// Exact distances (64-bit, no saturation); unreachable vertices get
/// UINT64_MAX.
inline std::vector<std::uint64_t> bellman_ford(const Graph& g, std::uint32_t source) {
  constexpr std::uint64_t inf = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> d(g.vertex_count(), inf);
  d.at(source) = 0;
  for (std::uint32_t round = 0; round + 1 < g.vertex_count() + 1; ++round) {
    bool changed = false;
    for (const Arc& a : g.arcs()) {
      if (d[a.from] != inf && d[a.from] + a.weight < d[a.to]) {
        d[a.to] = d[a.from] + a.weight;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d;
}

}  // namespace pqlab
