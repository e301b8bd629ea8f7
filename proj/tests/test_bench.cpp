#include <catch_amalgamated.hpp>

#include <sstream>

#include "pqlab/metrics_json.hpp"
#include "pqlab/pqlab.hpp"

using namespace pqlab;

namespace {

MetricRecord fixture(const std::string& variant, double wall, std::uint64_t comparisons = 0) {
  MetricRecord r;
  r.variant = variant;
  r.trace_id = "fixture";
  r.wallclock_ns = wall;
  r.raw_wallclock_ns = wall;
  r.counters.comparisons = comparisons;
  return r;
}

std::size_t column(const RatioTable& t, const std::string& name) {
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (t.columns[j] == name) return j;
  }
  FAIL("column " << name << " missing");
  return 0;
}

}  // namespace

TEST_CASE("iteration count follows max(5, ceil(2 s / t))") {
  constexpr std::uint64_t ms = 1'000'000;
  CHECK(protocol_iterations(500 * ms) == 5);
  CHECK(protocol_iterations(100 * ms) == 20);
  CHECK(protocol_iterations(3000 * ms) == 5);
  CHECK(protocol_iterations(300 * ms) == 7);
  CHECK(protocol_iterations(1) == 2'000'000'000);
  CHECK(protocol_iterations(0) == 2'000'000'000);
}

TEST_CASE("one-shot runs a single timed iteration") {
  std::string bytes = encode_trace(gen_sort(64, 1));
  MetricRecord r = run_driver(parse_variant("pairing"), bytes, RunOptions{.one_shot = true});
  CHECK(r.iterations == 1);
  CHECK(r.counters.comparisons > 0);
}

TEST_CASE("short runs reach the minimum iteration count") {
  std::string bytes = encode_trace(gen_sort(64, 1));
  RunOptions opt;
  opt.budget_ns = 1;
  MetricRecord r = run_driver(parse_variant("binomial"), bytes, opt);
  CHECK(r.iterations == 5);
}

TEST_CASE("baseline subtraction") {
  constexpr double ms = 1e6;
  MetricRecord driver = fixture("pairing", 10 * ms, 1234);
  driver.external["inst"] = 900;
  MetricRecord dummy = fixture("dummy", 2 * ms);
  dummy.external["inst"] = 100;

  std::vector<std::string> warnings;
  MetricRecord out = subtract_baseline(driver, dummy, &warnings);
  CHECK(out.wallclock_ns == 8 * ms);
  CHECK(out.raw_wallclock_ns == 10 * ms);
  CHECK(out.baseline_ns == 2 * ms);
  CHECK(out.counters.comparisons == 1234);
  CHECK(out.external.at("inst") == 800);
  CHECK(warnings.empty());

  SECTION("noise below the baseline clamps to zero with a warning") {
    MetricRecord slow_dummy = fixture("dummy", 12 * ms);
    MetricRecord c = subtract_baseline(driver, slow_dummy, &warnings);
    CHECK(c.wallclock_ns == 0);
    CHECK(warnings.size() == 1);
  }
  SECTION("subtracting twice starts from the raw value") {
    CHECK(subtract_baseline(out, dummy).wallclock_ns == 8 * ms);
  }
  SECTION("baselines from another trace are rejected") {
    MetricRecord other = dummy;
    other.trace_id = "elsewhere";
    CHECK_THROWS_AS(subtract_baseline(driver, other), contract_error);
  }
}

TEST_CASE("ratio tables") {
  SECTION("wallclocks 10, 20, 40") {
    RatioTable t = make_ratio_table({fixture("b", 20), fixture("c", 40), fixture("a", 10)}, {"time"});
    CHECK(t.rows == std::vector<std::string>{"a", "b", "c"});
    CHECK(t.cells[0][0].ratio == 1.00);
    CHECK(t.cells[1][0].ratio == 2.00);
    CHECK(t.cells[2][0].ratio == 4.00);
    CHECK(t.cells[0][0].is_min);
    CHECK_FALSE(t.cells[1][0].is_min);
  }
  SECTION("single record is all ones") {
    RatioTable t = make_ratio_table({fixture("x", 77, 5)}, {"time", "comparisons"});
    for (const RatioCell& c : t.cells[0]) {
      CHECK(c.ratio == 1.00);
      CHECK(c.is_min);
    }
  }
  SECTION("rows follow wallclock, not other columns") {
    RatioTable t = make_ratio_table({fixture("fast", 1, 900), fixture("slow", 3, 300)}, {"comparisons", "time"});
    CHECK(t.rows == std::vector<std::string>{"fast", "slow"});
    std::size_t cmp = column(t, "comparisons");
    CHECK(t.cells[0][cmp].ratio == 3.00);
    CHECK(t.cells[1][cmp].is_min);
  }
  SECTION("ratios round to two decimals") {
    RatioTable t = make_ratio_table({fixture("a", 3), fixture("b", 10)}, {"time"});
    CHECK(t.cells[1][0].ratio == 3.33);
  }
  SECTION("every column has a 1.00 cell") {
    std::vector<MetricRecord> rs = {fixture("a", 5, 40), fixture("b", 9, 10), fixture("c", 7, 22)};
    RatioTable t = make_ratio_table(rs, {"time", "comparisons"});
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      bool one = false;
      for (const auto& row : t.cells) one = one || row[j].ratio == 1.00;
      CHECK(one);
    }
  }
  SECTION("zero minimum reports absolute values") {
    RatioTable t = make_ratio_table({fixture("a", 5, 0), fixture("b", 6, 12)}, {"comparisons"});
    REQUIRE(t.absolute.size() == 1);
    CHECK(t.absolute[0]);
    CHECK(t.cells[1][0].ratio == 12);
    CHECK_FALSE(t.warnings.empty());
  }
  SECTION("columns nobody has are dropped") {
    RatioTable t = make_ratio_table({fixture("a", 5)}, {"time", "l2_m"});
    CHECK(t.columns == std::vector<std::string>{"time"});
  }
  SECTION("imported columns use their own minima") {
    MetricRecord a = fixture("a", 5), b = fixture("b", 6);
    a.external = {{"inst", 400}, {"l1_m", 10}};
    b.external = {{"inst", 100}, {"l1_m", 30}};
    RatioTable t = make_ratio_table({a, b}, {"inst", "l1_m"});
    CHECK(t.cells[0][column(t, "inst")].ratio == 4.00);
    CHECK(t.cells[1][column(t, "l1_m")].ratio == 3.00);
  }
  SECTION("records from different traces are rejected") {
    MetricRecord other = fixture("z", 1);
    other.trace_id = "other";
    CHECK_THROWS_AS(make_ratio_table({fixture("a", 1), other}, {"time"}), contract_error);
    CHECK_THROWS_AS(make_ratio_table({}, {"time"}), contract_error);
  }
}

TEST_CASE("rendered tables mark minima") {
  RatioTable t = make_ratio_table({fixture("a", 10), fixture("b", 20)}, {"time"});
  std::string text = render_text(t);
  CHECK(text.find("1.00*") != std::string::npos);
  CHECK(text.find("2.00 ") != std::string::npos);
  std::string csv = render_csv(t);
  CHECK(csv.rfind("variant,metric,value,ratio,flag\n", 0) == 0);
  CHECK(csv.find("a,time,10,1.00,min=true\n") != std::string::npos);
  CHECK(csv.find("b,time,20,2.00,\n") != std::string::npos);
}

TEST_CASE("scaled series") {
  MetricRecord r = fixture("p", 0);
  r.inserts = 100;
  r.deletes = 50;
  r.decreases = 30;
  r.avg_live = 16;
  CHECK(scaled_op_count(r, Scaling::all_ops_logn) == 180 * 4);
  CHECK(scaled_op_count(r, Scaling::delmin_only_logn) == 100 + 30 + 50 * 4);

  SECTION("single size gives one point") {
    r.wallclock_ns = 1440;
    SeriesTable s = scaled_series({r}, Scaling::all_ops_logn);
    REQUIRE(s.points.size() == 1);
    CHECK(s.points[0].value == 2.0);
  }
  SECTION("doubling n at constant time per op shrinks by log n / log 2n") {
    MetricRecord a = r, b = r;
    a.inserts = b.inserts = 1000;
    a.deletes = b.deletes = 0;
    a.decreases = b.decreases = 0;
    a.avg_live = 1024;
    b.avg_live = 2048;
    a.wallclock_ns = 1000 * 7.0;
    b.wallclock_ns = 1000 * 7.0;
    SeriesTable s = scaled_series({b, a}, Scaling::all_ops_logn);
    REQUIRE(s.points.size() == 2);
    CHECK(s.points[0].n == 1024);
    CHECK(s.points[1].value / s.points[0].value == Catch::Approx(10.0 / 11.0));
  }
  SECTION("records without a usable size are skipped with a warning") {
    MetricRecord z = r;
    z.avg_live = 1;
    SeriesTable s = scaled_series({z, r}, Scaling::delmin_only_logn);
    CHECK(s.points.size() == 1);
    CHECK(s.warnings.size() == 1);
  }
  CHECK(parse_scaling("delmin_only_logn") == Scaling::delmin_only_logn);
  CHECK_THROWS_AS(parse_scaling("nope"), contract_error);
}

// Sorting work is Theta(n log n), so time over n log n stays in a band. The
// comparison count is the machine-independent stand-in for time here.
TEST_CASE("sorting series is flat across sizes") {
  std::vector<MetricRecord> rs;
  for (std::uint64_t n : {1u << 14, 1u << 16, 1u << 18}) {
    MetricRecord m = run_driver(parse_variant("implicit_simple_2"), encode_trace(gen_sort(n, 3)), RunOptions{.timed = false});
    m.wallclock_ns = static_cast<double>(m.counters.comparisons);
    rs.push_back(m);
  }
  SeriesTable s = scaled_series(rs, Scaling::all_ops_logn);
  REQUIRE(s.points.size() == 3);
  double lo = s.points[0].value, hi = lo;
  for (const SeriesPoint& p : s.points) {
    lo = std::min(lo, p.value);
    hi = std::max(hi, p.value);
  }
  CHECK(hi / lo < 2.0);
}

TEST_CASE("profiler import") {
  SECTION("instruction count only") {
    std::string report =
        "# produced by the driver with --one-shot\n"
        "desc: I1 cache: 32768 B, 64 B, 8-way associative\n"
        "cmd: pqlab run --one-shot\n"
        "events: Ir\n"
        "fl=driver.cpp\n"
        "summary: 123456\n";
    MetricRecord r = profiler_import(report, fixture("a", 1));
    CHECK(r.external.at("inst") == 123456);
    CHECK(r.external.size() == 1);
  }
  SECTION("full annotated report") {
    std::string report =
        "--------------------------------------------------------------------------------\n"
        "I1 cache:         32768 B, 64 B, 8-way associative\n"
        "Events recorded:  Ir I1mr ILmr Dr D1mr DLmr Dw D1mw DLmw Bc Bcm Bi Bim\n"
        "Events shown:     Ir I1mr ILmr Dr D1mr DLmr Dw D1mw DLmw Bc Bcm Bi Bim\n"
        "--------------------------------------------------------------------------------\n"
        "Ir            I1mr  ILmr  Dr          D1mr      DLmr    Dw          D1mw    DLmw  Bc         Bcm     Bi  Bim\n"
        "--------------------------------------------------------------------------------\n"
        "1,000,000 (100.0%) 10 (100.0%) 5 (100.0%) 300,000 (100.0%) 2,000 (100.0%) 400 (100.0%) 100,000 (100.0%) 500 "
        "(100.0%) 50 (100.0%) 80,000 (100.0%) 6,000 (100.0%) 1,000 (100.0%) 20 (100.0%)  PROGRAM TOTALS\n";
    MetricRecord r = profiler_import(report, fixture("a", 1));
    CHECK(r.external.at("inst") == 1'000'000);
    CHECK(r.external.at("l1_rd") == 300'000);
    CHECK(r.external.at("l1_wr") == 100'000);
    CHECK(r.external.at("l2_rd") == 2'000);
    CHECK(r.external.at("l2_wr") == 500);
    CHECK(r.external.at("br") == 81'000);
    CHECK(r.external.at("l1_m") == 2'500);
    CHECK(r.external.at("l2_m") == 450);
    CHECK(r.external.at("br_m") == 6'020);
    // With time, that is all ten report columns.
    CHECK(r.external.size() + 1 == 10);
  }
  SECTION("unparseable report") {
    CHECK_THROWS_AS(profiler_import("hello\nworld\n", fixture("a", 1)), profile_import_error);
  }
}

TEST_CASE("metrics JSON-lines round trip") {
  MetricRecord r = run_driver(parse_variant("fibonacci"), encode_trace(gen_decrease_key({64, 1, 2, DecreaseMode::min, 1})),
                              RunOptions{.one_shot = true});
  r.external["inst"] = 42;
  std::stringstream io;
  io << "# header comment\n\n";
  write_metrics(io, r);
  write_metrics(io, r);
  std::vector<MetricRecord> back = read_metrics(io);
  REQUIRE(back.size() == 2);
  CHECK(back[0].variant == r.variant);
  CHECK(back[0].counters == r.counters);
  CHECK(back[0].per_op == r.per_op);
  CHECK(back[0].external == r.external);
  CHECK(back[0].wallclock_ns == r.wallclock_ns);
  CHECK(back[0].avg_live == r.avg_live);

  nlohmann::json j = r;
  CHECK(j["l2_m"].is_null());
  CHECK(j["comparisons"] == r.counters.comparisons);

  std::stringstream bad("{not json}\n");
  CHECK_THROWS_AS(read_metrics(bad), pq_error);
}

TEST_CASE("variant names") {
  CHECK(parse_variant("implicit_4").name() == "implicit_4");
  CHECK(parse_variant("implicit_simple_16").family == HeapFamily::implicit_simple);
  CHECK(parse_variant("implicit_simple", 8).d == 8);
  CHECK(parse_variant("rank_pairing_t2").name() == "rank_pairing_t2");
  CHECK_THROWS_AS(parse_variant("implicit_3"), contract_error);
  CHECK_THROWS_AS(parse_variant("splay"), contract_error);
  HeapVariant v = parse_variant("pairing");
  v.pad_factor = 2;
  v.pool = PoolStrategy::doubling;
  CHECK(v.label() == "pairing/pad2/doubling");
  CHECK(all_variants().size() == 21);
}

TEST_CASE("implicit_simple refuses a decrease-key trace") {
  std::string bytes = encode_trace(gen_decrease_key({32, 1, 1, DecreaseMode::middle, 1}));
  CHECK_THROWS_AS(run_driver(parse_variant("implicit_simple_4"), bytes), unsupported_operation_error);
  CHECK_NOTHROW(run_driver(parse_variant("implicit_simple_4"), encode_trace(gen_sort(32, 1)), RunOptions{.one_shot = true}));
}

TEST_CASE("a wrong expected answer aborts with the record index") {
  Trace t = gen_sort(8, 2);
  std::swap(t.records[9], t.records[10]);
  try {
    run_driver(parse_variant("pairing"), encode_trace(t), RunOptions{.timed = false});
    FAIL("no error");
  } catch (const replay_mismatch_error& e) {
    CHECK(e.index() == 9);
  }
}

TEST_CASE("counters are deterministic and split by opcode") {
  std::string bytes = encode_trace(gen_decrease_key({256, 2, 2, DecreaseMode::middle, 4}));
  for (const HeapVariant& v : all_variants()) {
    if (!v.supports_decrease_key()) continue;
    RunOptions opt{.timed = false};
    MetricRecord a = run_driver(v, bytes, opt), b = run_driver(v, bytes, opt);
    INFO(v.label());
    CHECK(a.counters == b.counters);
    HeapCounters sum;
    for (const HeapCounters& c : a.per_op) detail::add_to(sum, c);
    CHECK(sum == a.counters);
    if (v.family == HeapFamily::fibonacci) {
      CHECK(a.per_op[0].links == 0);
      CHECK(a.per_op[2].links == 0);
    }
  }
}

// Sorting 2^20 keys. Any comparison sort needs log2(n!) comparisons. A 4-ary
// sift-down spends up to 4 per level over 10 levels, which puts the array heap
// above the Fibonacci heap's roughly 1.4 log2 n per delete.
TEST_CASE("sorting comparison counts at 2^20") {
  constexpr std::uint64_t n = 1 << 20;
  std::string bytes = encode_trace(gen_sort(n, 1));
  RunOptions opt{.timed = false};
  MetricRecord a = run_driver(parse_variant("implicit_simple_4"), bytes, opt);
  MetricRecord f = run_driver(parse_variant("fibonacci"), bytes, opt);
  double log2_factorial = std::lgamma(static_cast<double>(n) + 1) / std::log(2.0);
  CHECK(static_cast<double>(a.counters.comparisons) >= log2_factorial);
  CHECK(static_cast<double>(f.counters.comparisons) >= log2_factorial);
  CHECK(a.counters.comparisons <= n * (4 * 10 + 10));
  CHECK(a.per_op[1].comparisons >= n * 3 * 9);
  CHECK(f.counters.comparisons < a.counters.comparisons);
}
