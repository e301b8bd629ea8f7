#pragma once

// Trace replay drivers, the timing protocol, baseline subtraction, and the
// report builders (ratio tables, log-scaled series, profiler import).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pqlab/core.hpp"
#include "pqlab/trace.hpp"
#include "pqlab/variants.hpp"

namespace pqlab {

/// Columns that only an external profiler can fill.
inline const std::vector<std::string>& external_columns() {
  static const std::vector<std::string> cols = {"inst", "l1_rd", "l1_wr", "l2_rd", "l2_wr", "br", "l1_m", "l2_m", "br_m"};
  return cols;
}

inline const std::vector<std::string>& counter_columns() {
  static const std::vector<std::string> cols = {"comparisons", "node_reads", "node_writes", "links", "cuts", "marks"};
  return cols;
}

struct MetricRecord {
  std::string variant;  // HeapVariant::label(), or "dummy"
  std::string family;
  unsigned d = 0;
  unsigned pad_factor = 1;
  std::string pool = "eager";

  std::string trace_id;
  std::string workload;

  double wallclock_ns = 0;  // per iteration, after any baseline subtraction
  double raw_wallclock_ns = 0;
  double baseline_ns = 0;
  bool baseline_subtracted = false;
  std::uint64_t iterations = 0;

  HeapCounters counters;                 // one instrumented iteration
  std::array<HeapCounters, 3> per_op{};  // same, split by opcode
  std::uint64_t records = 0;
  std::uint64_t inserts = 0;
  std::uint64_t deletes = 0;
  std::uint64_t decreases = 0;
  double avg_live = 0;

  std::map<std::string, double> external;
};

/// "sort n=1024 seed=1"-style identity built from the header parameters.
inline std::string trace_id_of(const TraceHeader& h) {
  std::string id = h.param("generator", "trace");
  for (const auto& [k, v] : h.params) {
    if (k != "generator") id += " " + k + "=" + v;
  }
  id += " records=" + std::to_string(h.total);
  return id;
}

// ---------------------------------------------------------------------------
// Timing protocol

/// max(min_iterations, ceil(budget / single)), all in nanoseconds.
inline std::uint64_t protocol_iterations(std::uint64_t single_ns, std::uint64_t budget_ns = 2'000'000'000,
                                         std::uint64_t min_iterations = 5) {
  if (single_ns == 0) single_ns = 1;
  std::uint64_t needed = (budget_ns + single_ns - 1) / single_ns;
  return std::max(min_iterations, needed);
}

struct RunOptions {
  bool one_shot = false;  // exactly one timed iteration (profiler runs)
  std::uint64_t budget_ns = 2'000'000'000;
  std::uint64_t min_iterations = 5;
  bool timed = true;     // false: counting pass only
  bool counting = true;  // false: timing only
  bool track_first_touch = false;
};

class replay_mismatch_error : public pq_error {
 public:
  replay_mismatch_error(const std::string& what, std::uint64_t index)
      : pq_error("replay mismatch at record " + std::to_string(index) + ": " + what), index_(index) {}
  std::uint64_t index() const { return index_; }

 private:
  std::uint64_t index_;
};

namespace detail {

inline std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch()).count());
}

inline HeapCounters minus(const HeapCounters& a, const HeapCounters& b) {
  return {a.comparisons - b.comparisons, a.node_reads - b.node_reads, a.node_writes - b.node_writes, a.links - b.links,
          a.cuts - b.cuts,               a.marks - b.marks,           a.read_first - b.read_first,   a.write_first - b.write_first};
}

inline void add_to(HeapCounters& a, const HeapCounters& b) {
  a.comparisons += b.comparisons;
  a.node_reads += b.node_reads;
  a.node_writes += b.node_writes;
  a.links += b.links;
  a.cuts += b.cuts;
  a.marks += b.marks;
  a.read_first += b.read_first;
  a.write_first += b.write_first;
}

// One timed iteration: fresh heap, streaming parse, no checks. Returns a
// value derived from every output so the work cannot be elided.
template <typename H>
std::uint64_t timed_iteration(std::string_view bytes, const HeapConfig& config, std::vector<Handle>& handles,
                              std::uint64_t& elapsed_ns) {
  H heap(config);
  std::uint64_t sink = 0;
  std::uint64_t t0 = now_ns();
  for_each_record(bytes, [&](const TraceRecord& r) {
    switch (r.op) {
      case OpCode::insert:
        handles[r.id] = heap.insert(r.id, r.key);
        break;
      case OpCode::delete_min:
        sink += heap.delete_min().key.raw();
        break;
      case OpCode::decrease_key:
        heap.decrease_key(handles[r.id], r.key);
        break;
    }
  });
  elapsed_ns = now_ns() - t0;
  return sink;
}

inline void time_protocol(MetricRecord& rec, const RunOptions& opt, auto&& iteration) {
  std::uint64_t first = 0;
  iteration(first);
  std::uint64_t n = opt.one_shot ? 1 : protocol_iterations(first, opt.budget_ns, opt.min_iterations);
  long double total = first;
  for (std::uint64_t i = 1; i < n; ++i) {
    std::uint64_t t = 0;
    iteration(t);
    total += t;
  }
  rec.iterations = n;
  rec.raw_wallclock_ns = static_cast<double>(total / n);
  rec.wallclock_ns = rec.raw_wallclock_ns;
}

inline volatile std::uint64_t g_sink = 0;

}  // namespace detail

/// Instrumented replay of an in-memory trace: checks every embedded
/// DELETE_MIN answer and fills the counter fields of `rec`.
template <typename H>
void counting_replay(const Trace& t, const HeapConfig& config, MetricRecord& rec) {
  H heap(config);
  std::vector<Handle> handles(t.header.inserts);
  long double live_sum = 0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const TraceRecord& r = t.records[i];
    HeapCounters before = heap.stats().counters;
    switch (r.op) {
      case OpCode::insert:
        if (r.id >= handles.size()) throw replay_mismatch_error("id beyond the header's insert count", i);
        handles[r.id] = heap.insert(r.id, r.key);
        break;
      case OpCode::delete_min: {
        if (heap.empty()) throw replay_mismatch_error("delete_min on an empty heap", i);
        Entry e = heap.delete_min();
        if (t.header.has_expected && (e.item != r.id || e.key != r.key)) {
          throw replay_mismatch_error("got (" + std::to_string(e.item) + ", " + std::to_string(e.key.raw()) + "), expected (" +
                                          std::to_string(r.id) + ", " + std::to_string(r.key.raw()) + ")",
                                      i);
        }
        break;
      }
      case OpCode::decrease_key:
        if (r.id >= handles.size()) throw replay_mismatch_error("id beyond the header's insert count", i);
        heap.decrease_key(handles[r.id], r.key);
        break;
    }
    detail::add_to(rec.per_op[static_cast<std::size_t>(r.op)], detail::minus(heap.stats().counters, before));
    live_sum += heap.size();
  }
  rec.counters = heap.stats().counters;
  rec.avg_live = t.records.empty() ? 0.0 : static_cast<double>(live_sum / t.records.size());
}

inline MetricRecord blank_record(const Trace& t) {
  MetricRecord rec;
  rec.trace_id = trace_id_of(t.header);
  rec.workload = t.header.param("generator", "trace");
  rec.records = t.header.total;
  rec.inserts = t.header.inserts;
  rec.deletes = t.header.deletes;
  rec.decreases = t.header.decreases;
  return rec;
}

/// Runs one variant over an encoded trace. The counting pass and the timed
/// passes use separate heap instantiations.
inline MetricRecord run_driver(const HeapVariant& v, std::string_view bytes, const RunOptions& opt = {}) {
  v.check();
  Trace t = decode_trace(bytes);
  if (!v.supports_decrease_key() && t.header.decreases > 0) {
    throw unsupported_operation_error(v.name() + " cannot replay a trace containing DECREASE_KEY");
  }
  MetricRecord rec = blank_record(t);
  rec.variant = v.label();
  rec.family = family_name(v.family);
  rec.d = is_array_family(v.family) ? v.d : 0;
  rec.pad_factor = v.pad_factor;
  rec.pool = pool_name(v.pool);

  HeapConfig config;
  config.pool = v.pool;
  config.pad_factor = v.pad_factor;
  config.capacity_hint = std::max<std::size_t>(t.header.max_live, 1);

  if (opt.counting) {
    HeapConfig counted = config;
    counted.track_first_touch = opt.track_first_touch;
    visit_variant<counting_policy>(v, [&]<typename H>(std::type_identity<H>) { counting_replay<H>(t, counted, rec); });
  }
  if (opt.timed) {
    std::vector<Handle> handles(t.header.inserts);
    visit_variant<timing_policy>(v, [&]<typename H>(std::type_identity<H>) {
      detail::time_protocol(rec, opt, [&](std::uint64_t& ns) { detail::g_sink = detail::g_sink + detail::timed_iteration<H>(bytes, config, handles, ns); });
    });
  }
  return rec;
}

/// Parse-only baseline on the same bytes and protocol; no heap operations.
inline MetricRecord dummy_replay(std::string_view bytes, const RunOptions& opt = {}) {
  Trace t = decode_trace(bytes);
  MetricRecord rec = blank_record(t);
  rec.variant = "dummy";
  rec.family = "dummy";
  detail::time_protocol(rec, opt, [&](std::uint64_t& ns) {
    std::uint64_t t0 = detail::now_ns();
    DummyResult d = dummy_parse(bytes);
    ns = detail::now_ns() - t0;
    detail::g_sink = detail::g_sink + d.checksum;
    if (d.records != t.header.total) throw format_error("record count differs from header", 0);
  });
  return rec;
}

// ---------------------------------------------------------------------------
// Baseline subtraction

/// Subtracts the dummy's wallclock and external columns; counters are left
/// alone. Negative differences clamp to zero and append a warning.
inline MetricRecord subtract_baseline(MetricRecord rec, const MetricRecord& dummy, std::vector<std::string>* warnings = nullptr) {
  if (rec.trace_id != dummy.trace_id) {
    throw contract_error("baseline is for trace '" + dummy.trace_id + "', record is for '" + rec.trace_id + "'");
  }
  auto warn = [&](const std::string& what) {
    if (warnings != nullptr) warnings->push_back(rec.variant + ": " + what + " below baseline, clamped to 0");
  };
  double base = rec.baseline_subtracted ? rec.raw_wallclock_ns : rec.wallclock_ns;
  rec.raw_wallclock_ns = base;
  rec.baseline_ns = dummy.wallclock_ns;
  rec.wallclock_ns = base - dummy.wallclock_ns;
  if (rec.wallclock_ns < 0) {
    rec.wallclock_ns = 0;
    warn("wallclock");
  }
  for (auto& [col, value] : rec.external) {
    auto it = dummy.external.find(col);
    if (it == dummy.external.end()) continue;
    value -= it->second;
    if (value < 0) {
      value = 0;
      warn(col);
    }
  }
  rec.baseline_subtracted = true;
  return rec;
}

// ---------------------------------------------------------------------------
// Ratio tables

inline std::optional<double> metric_value(const MetricRecord& r, const std::string& column) {
  if (column == "time" || column == "wallclock") return r.wallclock_ns;
  if (column == "comparisons") return static_cast<double>(r.counters.comparisons);
  if (column == "node_reads") return static_cast<double>(r.counters.node_reads);
  if (column == "node_writes") return static_cast<double>(r.counters.node_writes);
  if (column == "links") return static_cast<double>(r.counters.links);
  if (column == "cuts") return static_cast<double>(r.counters.cuts);
  if (column == "marks") return static_cast<double>(r.counters.marks);
  if (column == "read_first") return static_cast<double>(r.counters.read_first);
  if (column == "write_first") return static_cast<double>(r.counters.write_first);
  auto it = r.external.find(column);
  if (it != r.external.end()) return it->second;
  return std::nullopt;
}

struct RatioCell {
  std::optional<double> value;  // raw metric
  double ratio = 0;             // value / column minimum, 2 decimals
  bool is_min = false;
};

struct RatioTable {
  std::vector<std::string> columns;
  std::vector<bool> absolute;  // column minimum was 0: cells hold raw values
  std::vector<std::string> rows;
  std::vector<std::vector<RatioCell>> cells;
  std::vector<std::string> warnings;
};

inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

/// Rows sorted by ascending wallclock; each cell is the metric divided by its
/// column's minimum. Columns with no value in any record are dropped.
inline RatioTable make_ratio_table(std::vector<MetricRecord> records, const std::vector<std::string>& columns) {
  if (records.empty()) throw contract_error("ratio table needs at least one record");
  for (const MetricRecord& r : records) {
    if (r.trace_id != records.front().trace_id) throw contract_error("ratio table records span more than one trace");
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const MetricRecord& a, const MetricRecord& b) { return a.wallclock_ns < b.wallclock_ns; });
  RatioTable t;
  for (const MetricRecord& r : records) t.rows.push_back(r.variant);
  t.cells.resize(records.size());
  for (const std::string& col : columns) {
    std::optional<double> lo;
    for (const MetricRecord& r : records) {
      if (auto v = metric_value(r, col); v && (!lo || *v < *lo)) lo = v;
    }
    if (!lo) {
      t.warnings.push_back("column '" + col + "' has no values; omitted");
      continue;
    }
    bool absolute = *lo == 0;
    if (absolute) t.warnings.push_back("column '" + col + "' has minimum 0; reported as absolute values");
    t.columns.push_back(col);
    t.absolute.push_back(absolute);
    for (std::size_t i = 0; i < records.size(); ++i) {
      RatioCell c;
      c.value = metric_value(records[i], col);
      if (c.value) {
        c.ratio = absolute ? *c.value : round2(*c.value / *lo);
        c.is_min = *c.value == *lo;
      }
      t.cells[i].push_back(c);
    }
  }
  return t;
}

inline std::string format_cell(const RatioCell& c, bool absolute) {
  if (!c.value) return "-";
  char buf[64];
  if (absolute) {
    std::snprintf(buf, sizeof buf, "%.0f", *c.value);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f", c.ratio);
  }
  return buf;
}

/// Aligned plain text; minimum cells carry a trailing '*'.
inline std::string render_text(const RatioTable& t) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head{"variant"};
  for (std::size_t j = 0; j < t.columns.size(); ++j) head.push_back(t.columns[j] + (t.absolute[j] ? "(abs)" : ""));
  grid.push_back(head);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    std::vector<std::string> row{t.rows[i]};
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      row.push_back(format_cell(t.cells[i][j], t.absolute[j]) + (t.cells[i][j].is_min ? "*" : " "));
    }
    grid.push_back(row);
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : grid) {
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  }
  std::ostringstream out;
  for (const auto& row : grid) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j == 0) {
        out << row[j] << std::string(width[j] - row[j].size(), ' ');
      } else {
        out << "  " << std::string(width[j] - row[j].size(), ' ') << row[j];
      }
    }
    out << "\n";
  }
  for (const std::string& w : t.warnings) out << "# " << w << "\n";
  return out.str();
}

/// Long-form CSV: one line per cell, minimum cells flagged "min=true".
inline std::string render_csv(const RatioTable& t) {
  std::ostringstream out;
  out << "variant,metric,value,ratio,flag\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      const RatioCell& c = t.cells[i][j];
      char value[64] = "";
      if (c.value) std::snprintf(value, sizeof value, "%.17g", *c.value);
      out << t.rows[i] << ',' << t.columns[j] << ',' << value << ',' << (c.value ? format_cell(c, t.absolute[j]) : "") << ','
          << (t.absolute[j] ? "absolute" : "") << (t.absolute[j] && c.is_min ? ";" : "") << (c.is_min ? "min=true" : "") << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Scaled series

enum class Scaling { all_ops_logn, delmin_only_logn };

inline Scaling parse_scaling(const std::string& s) {
  if (s == "all_ops_logn") return Scaling::all_ops_logn;
  if (s == "delmin_only_logn") return Scaling::delmin_only_logn;
  throw contract_error("unknown scaling '" + s + "'");
}

inline double scaled_op_count(const MetricRecord& r, Scaling s) {
  double lg = std::log2(r.avg_live);
  double I = static_cast<double>(r.inserts), D = static_cast<double>(r.deletes), X = static_cast<double>(r.decreases);
  return s == Scaling::all_ops_logn ? (I + D + X) * lg : I + X + D * lg;
}

struct SeriesPoint {
  std::string variant;
  std::string workload;
  double n = 0;
  double scaled_ops = 0;
  double value = 0;  // wallclock_ns / scaled_ops
};

struct SeriesTable {
  std::vector<SeriesPoint> points;  // grouped by (variant, workload), ascending n
  std::vector<std::string> warnings;
};

inline SeriesTable scaled_series(const std::vector<MetricRecord>& records, Scaling s) {
  SeriesTable out;
  for (const MetricRecord& r : records) {
    double ops = r.avg_live > 1 ? scaled_op_count(r, s) : 0;
    if (!(ops > 0)) {
      out.warnings.push_back(r.variant + " on '" + r.trace_id + "': no usable size, skipped");
      continue;
    }
    out.points.push_back({r.variant, r.workload, r.avg_live, ops, r.wallclock_ns / ops});
  }
  std::stable_sort(out.points.begin(), out.points.end(), [](const SeriesPoint& a, const SeriesPoint& b) {
    if (a.variant != b.variant) return a.variant < b.variant;
    if (a.workload != b.workload) return a.workload < b.workload;
    return a.n < b.n;
  });
  return out;
}

inline std::string render_series(const SeriesTable& t, bool csv) {
  std::ostringstream out;
  char buf[256];
  if (csv) {
    out << "variant,workload,n,scaled_ops,value\n";
    for (const SeriesPoint& p : t.points) {
      std::snprintf(buf, sizeof buf, "%s,%s,%.1f,%.17g,%.6g\n", p.variant.c_str(), p.workload.c_str(), p.n, p.scaled_ops, p.value);
      out << buf;
    }
  } else {
    std::snprintf(buf, sizeof buf, "%-22s %-14s %12s %14s\n", "variant", "workload", "n", "ns/scaled-op");
    out << buf;
    for (const SeriesPoint& p : t.points) {
      std::snprintf(buf, sizeof buf, "%-22s %-14s %12.1f %14.4f\n", p.variant.c_str(), p.workload.c_str(), p.n, p.value);
      out << buf;
    }
    for (const std::string& w : t.warnings) out << "# " << w << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Profiler import

class profile_import_error : public pq_error {
 public:
  using pq_error::pq_error;
};

/// Reads event totals from a cache-simulator report: either the raw output
/// file ("events:" / "summary:" lines) or an annotated listing (an
/// "Events shown:" or "Events recorded:" line plus a "PROGRAM TOTALS" line).
inline std::map<std::string, double> parse_profile_totals(std::string_view text) {
  std::vector<std::string> names, shown;
  std::vector<double> totals;
  bool have_totals = false;
  std::istringstream in{std::string(text)};
  std::string line;
  auto words = [](const std::string& s) {
    std::istringstream ls(s);
    std::vector<std::string> w;
    for (std::string x; ls >> x;) w.push_back(x);
    return w;
  };
  auto numbers = [](const std::vector<std::string>& ws) {
    std::vector<double> v;
    for (std::string w : ws) {
      if (!w.empty() && w.front() == '(') continue;  // percentage column
      w.erase(std::remove(w.begin(), w.end(), ','), w.end());
      if (w.empty() || w.find_first_not_of("0123456789.") != std::string::npos) break;
      v.push_back(std::stod(w));
    }
    return v;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("events:", 0) == 0) {
      names = words(line.substr(7));
    } else if (line.rfind("Events recorded:", 0) == 0) {
      names = words(line.substr(16));
    } else if (line.rfind("Events shown:", 0) == 0) {
      shown = words(line.substr(13));
    } else if (line.rfind("summary:", 0) == 0) {
      totals = numbers(words(line.substr(8)));
      have_totals = true;
    } else if (line.find("PROGRAM TOTALS") != std::string::npos && !have_totals) {
      totals = numbers(words(line.substr(0, line.find("PROGRAM TOTALS"))));
      have_totals = true;
      if (!shown.empty()) names = shown;
    }
  }
  if (!have_totals || names.empty() || totals.empty()) throw profile_import_error("no event totals found in profiler report");
  std::map<std::string, double> events;
  for (std::size_t i = 0; i < names.size() && i < totals.size(); ++i) events[names[i]] = totals[i];
  return events;
}

/// Maps raw profiler events onto the report columns. Columns whose inputs are
/// absent stay unset.
inline std::map<std::string, double> external_from_events(const std::map<std::string, double>& ev) {
  std::map<std::string, double> out;
  auto sum = [&](std::initializer_list<const char*> keys) -> std::optional<double> {
    double s = 0;
    for (const char* k : keys) {
      auto it = ev.find(k);
      if (it == ev.end()) return std::nullopt;
      s += it->second;
    }
    return s;
  };
  auto put = [&](const char* col, std::optional<double> v) {
    if (v) out[col] = *v;
  };
  put("inst", sum({"Ir"}));
  put("l1_rd", sum({"Dr"}));
  put("l1_wr", sum({"Dw"}));
  put("l2_rd", sum({"D1mr"}));
  put("l2_wr", sum({"D1mw"}));
  put("br", sum({"Bc", "Bi"}));
  put("l1_m", sum({"D1mr", "D1mw"}));
  put("l2_m", sum({"DLmr", "DLmw"}));
  put("br_m", sum({"Bcm", "Bim"}));
  return out;
}

inline MetricRecord profiler_import(std::string_view report, MetricRecord rec) {
  std::map<std::string, double> cols = external_from_events(parse_profile_totals(report));
  if (cols.empty()) throw profile_import_error("profiler report has none of the recognised events");
  for (const auto& [k, v] : cols) rec.external[k] = v;
  return rec;
}

}  // namespace pqlab
