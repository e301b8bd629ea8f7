#pragma once

// JSON-lines serialization of MetricRecord (one object per line).

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pqlab/bench.hpp"

namespace pqlab {

inline nlohmann::json counters_json(const HeapCounters& c) {
  return {{"comparisons", c.comparisons}, {"node_reads", c.node_reads}, {"node_writes", c.node_writes},
          {"links", c.links},             {"cuts", c.cuts},             {"marks", c.marks},
          {"read_first", c.read_first},   {"write_first", c.write_first}};
}

inline HeapCounters counters_from_json(const nlohmann::json& j) {
  HeapCounters c;
  c.comparisons = j.value("comparisons", std::uint64_t{0});
  c.node_reads = j.value("node_reads", std::uint64_t{0});
  c.node_writes = j.value("node_writes", std::uint64_t{0});
  c.links = j.value("links", std::uint64_t{0});
  c.cuts = j.value("cuts", std::uint64_t{0});
  c.marks = j.value("marks", std::uint64_t{0});
  c.read_first = j.value("read_first", std::uint64_t{0});
  c.write_first = j.value("write_first", std::uint64_t{0});
  return c;
}

inline void to_json(nlohmann::json& j, const MetricRecord& r) {
  j = nlohmann::json{{"variant", r.variant},
                     {"family", r.family},
                     {"d", r.d},
                     {"pad_factor", r.pad_factor},
                     {"pool", r.pool},
                     {"trace_id", r.trace_id},
                     {"workload", r.workload},
                     {"wallclock_ns", r.wallclock_ns},
                     {"raw_wallclock_ns", r.raw_wallclock_ns},
                     {"baseline_ns", r.baseline_ns},
                     {"baseline_subtracted", r.baseline_subtracted},
                     {"iterations", r.iterations},
                     {"records", r.records},
                     {"inserts", r.inserts},
                     {"deletes", r.deletes},
                     {"decreases", r.decreases},
                     {"avg_live", r.avg_live}};
  nlohmann::json c = counters_json(r.counters);
  for (auto it = c.begin(); it != c.end(); ++it) j[it.key()] = it.value();
  j["per_op"] = {{"insert", counters_json(r.per_op[0])},
                 {"delete_min", counters_json(r.per_op[1])},
                 {"decrease_key", counters_json(r.per_op[2])}};
  for (const std::string& col : external_columns()) {
    auto it = r.external.find(col);
    j[col] = it == r.external.end() ? nlohmann::json(nullptr) : nlohmann::json(it->second);
  }
}

inline void from_json(const nlohmann::json& j, MetricRecord& r) {
  r.variant = j.at("variant").get<std::string>();
  r.family = j.value("family", std::string{});
  r.d = j.value("d", 0u);
  r.pad_factor = j.value("pad_factor", 1u);
  r.pool = j.value("pool", std::string("eager"));
  r.trace_id = j.at("trace_id").get<std::string>();
  r.workload = j.value("workload", std::string{});
  r.wallclock_ns = j.at("wallclock_ns").get<double>();
  r.raw_wallclock_ns = j.value("raw_wallclock_ns", r.wallclock_ns);
  r.baseline_ns = j.value("baseline_ns", 0.0);
  r.baseline_subtracted = j.value("baseline_subtracted", false);
  r.iterations = j.value("iterations", std::uint64_t{0});
  r.records = j.value("records", std::uint64_t{0});
  r.inserts = j.value("inserts", std::uint64_t{0});
  r.deletes = j.value("deletes", std::uint64_t{0});
  r.decreases = j.value("decreases", std::uint64_t{0});
  r.avg_live = j.value("avg_live", 0.0);
  r.counters = counters_from_json(j);
  if (j.contains("per_op")) {
    const auto& p = j.at("per_op");
    r.per_op[0] = counters_from_json(p.value("insert", nlohmann::json::object()));
    r.per_op[1] = counters_from_json(p.value("delete_min", nlohmann::json::object()));
    r.per_op[2] = counters_from_json(p.value("decrease_key", nlohmann::json::object()));
  }
  r.external.clear();
  for (const std::string& col : external_columns()) {
    if (j.contains(col) && !j.at(col).is_null()) r.external[col] = j.at(col).get<double>();
  }
}

inline void write_metrics(std::ostream& out, const MetricRecord& r) { out << nlohmann::json(r).dump() << "\n"; }

/// Reads JSON-lines; blank lines and lines starting with '#' are skipped.
inline std::vector<MetricRecord> read_metrics(std::istream& in) {
  std::vector<MetricRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<MetricRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw pq_error("metrics line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace pqlab
