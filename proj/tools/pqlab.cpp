// pqlab: trace generation, validation, replay and reporting.
//
//   pqlab gen --workload decrease_key --n 4096 --c 1 --k 1 --mode min --out dk.pqtr
//   pqlab validate --trace dk.pqtr
//   pqlab run --heap pairing --trace dk.pqtr --out m.jsonl
//   pqlab table --metrics m.jsonl --format csv
//   pqlab series --metrics m.jsonl --scaling delmin_only_logn
//   pqlab suite --out results --parallel 2

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "pqlab/metrics_json.hpp"
#include "pqlab/pqlab.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace pqlab;

namespace {

struct VariantFlags {
  std::string heap = "pairing";
  unsigned d = 4;
  unsigned pad = 1;
  std::string pool = "eager";

  std::vector<HeapVariant> resolve() const {
    std::vector<HeapVariant> out;
    if (heap == "all") {
      out = all_variants();
    } else {
      std::stringstream list(heap);
      for (std::string name; std::getline(list, name, ',');) out.push_back(parse_variant(name, d));
    }
    for (HeapVariant& v : out) {
      v.pad_factor = pad;
      v.pool = parse_pool(pool);
      v.check();
    }
    return out;
  }
};

void add_variant_flags(CLI::App* app, VariantFlags& f) {
  app->add_option("--heap", f.heap, "variant name, comma list, or 'all'");
  app->add_option("--d", f.d, "arity for array heaps without an explicit suffix")->check(CLI::IsMember({2u, 4u, 8u, 16u}));
  app->add_option("--pad", f.pad, "node padding factor")->check(CLI::PositiveNumber);
  app->add_option("--pool", f.pool, "allocation strategy")->check(CLI::IsMember({"eager", "doubling", "on_demand"}));
}

struct GenFlags {
  std::string workload = "sort";
  std::uint64_t n = 1024;
  std::uint64_t c = 1;
  std::uint64_t k = 1;
  std::string mode = "middle";
  std::uint64_t seed = 1;
  std::string graph;  // DIMACS .gr file
  std::string grid;   // "RxC"
  std::uint64_t m = 0;
  std::uint32_t source = 0;
  std::uint32_t max_weight = 1000;
  std::string out;
};

Trace generate(const GenFlags& f) {
  if (f.workload == "sort") return gen_sort(f.n, f.seed);
  if (f.workload == "insert_delete") return gen_insert_delete(f.n, f.c, f.seed);
  if (f.workload == "decrease_key") return gen_decrease_key({f.n, f.c, f.k, parse_mode(f.mode), f.seed});
  if (f.workload == "dijkstra") {
    Graph g = [&] {
      if (!f.graph.empty()) return read_dimacs_gr(f.graph);
      if (!f.grid.empty()) {
        auto x = f.grid.find('x');
        if (x == std::string::npos) throw contract_error("--grid wants RxC");
        return gen_grid_graph(static_cast<std::uint32_t>(std::stoul(f.grid.substr(0, x))),
                              static_cast<std::uint32_t>(std::stoul(f.grid.substr(x + 1))), f.max_weight, f.seed);
      }
      return gen_random_graph(static_cast<std::uint32_t>(f.n), f.m ? f.m : 4 * f.n, f.max_weight, f.seed);
    }();
    return gen_dijkstra(g, f.source);
  }
  throw contract_error("unknown workload '" + f.workload + "'");
}

std::vector<MetricRecord> load_metrics(const std::vector<std::string>& paths) {
  std::vector<MetricRecord> all;
  for (const std::string& p : paths) {
    std::ifstream in(p);
    if (!in) throw pq_error("cannot open " + p);
    auto part = read_metrics(in);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

std::vector<std::string> split_columns(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream list(s);
  for (std::string c; std::getline(list, c, ',');) {
    if (!c.empty()) out.push_back(c);
  }
  return out;
}

std::string default_columns() {
  std::string s = "time";
  for (const std::string& c : counter_columns()) s += "," + c;
  for (const std::string& c : external_columns()) s += "," + c;
  return s;
}

struct RunFlags {
  std::string trace;
  bool one_shot = false;
  bool no_baseline = false;
  bool counters_only = false;
  double budget_s = 2.0;
  std::string out;
  std::string profile;
};

// Replays one trace against every requested variant, appending JSON lines.
int do_run(const VariantFlags& vf, const RunFlags& rf) {
  std::string bytes = read_file_bytes(rf.trace);
  if (is_text_trace_path(rf.trace)) bytes = encode_trace(from_text(bytes));
  RunOptions opt;
  opt.one_shot = rf.one_shot;
  opt.timed = !rf.counters_only;
  opt.budget_ns = static_cast<std::uint64_t>(rf.budget_s * 1e9);

  std::optional<MetricRecord> dummy;
  if (opt.timed && !rf.no_baseline && !rf.one_shot) dummy = dummy_replay(bytes, opt);

  std::ofstream file;
  if (!rf.out.empty()) file.open(rf.out, std::ios::app);
  std::ostream& out = rf.out.empty() ? std::cout : file;
  std::vector<std::string> warnings;
  bool has_decreases = decode_trace(bytes).header.decreases > 0;
  for (const HeapVariant& v : vf.resolve()) {
    if (!v.supports_decrease_key() && has_decreases && vf.heap == "all") continue;
    MetricRecord rec = run_driver(v, bytes, opt);
    if (dummy) rec = subtract_baseline(rec, *dummy, &warnings);
    if (!rf.profile.empty()) rec = profiler_import(read_file_bytes(rf.profile), rec);
    write_metrics(out, rec);
  }
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

// Runs child processes with at most `jobs` alive at once.
int run_processes(const std::vector<std::vector<std::string>>& commands, unsigned jobs) {
  int failures = 0;
  std::size_t next = 0, running = 0;
  while (next < commands.size() || running > 0) {
    while (running < jobs && next < commands.size()) {
      std::vector<char*> argv;
      for (const std::string& a : commands[next]) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      pid_t pid;
      if (posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0) {
        ++failures;
      } else {
        ++running;
      }
      ++next;
    }
    if (running == 0) break;
    int status = 0;
    if (wait(&status) > 0) {
      --running;
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failures;
    }
  }
  return failures;
}

struct SuiteFlags {
  std::vector<unsigned> log_sizes = {10, 12};
  std::uint64_t seed = 1;
  double budget_s = 2.0;
  unsigned parallel = 0;
  std::string out = "pqlab_suite";
  std::string format = "text";
};

// The standard batch: every workload at each size, every variant, then one
// ratio table per trace.
int do_suite(const VariantFlags& vf, const SuiteFlags& sf, const std::string& self) {
  fs::create_directories(sf.out);
  std::vector<std::string> traces;
  for (unsigned lg : sf.log_sizes) {
    std::uint64_t n = std::uint64_t{1} << lg;
    std::string tag = "n" + std::to_string(lg);
    auto save = [&](const std::string& name, const Trace& t) {
      std::string path = (fs::path(sf.out) / (name + "_" + tag + ".pqtr")).string();
      write_trace(path, t);
      traces.push_back(path);
    };
    save("sort", gen_sort(n, sf.seed));
    save("insert_delete_c1", gen_insert_delete(n, 1, sf.seed));
    save("insert_delete_c32", gen_insert_delete(n, 32, sf.seed));
    save("decrease_key_middle", gen_decrease_key({n, 1, 32, DecreaseMode::middle, sf.seed}));
    save("decrease_key_min", gen_decrease_key({n, 1, 32, DecreaseMode::min, sf.seed}));
    save("dijkstra", gen_dijkstra(gen_random_graph(static_cast<std::uint32_t>(n), 8 * n, 1000, sf.seed), 0));
  }
  std::string metrics = (fs::path(sf.out) / "metrics.jsonl").string();
  fs::remove(metrics);

  std::vector<HeapVariant> variants = vf.resolve();
  std::vector<std::vector<std::string>> commands;
  for (const std::string& t : traces) {
    for (const HeapVariant& v : variants) {
      if (!v.supports_decrease_key() && read_trace(t).header.decreases > 0) continue;
      std::string part = (fs::path(sf.out) / ("part_" + std::to_string(commands.size()) + ".jsonl")).string();
      fs::remove(part);
      commands.push_back({self, "run", "--heap", v.name(), "--pad", std::to_string(v.pad_factor), "--pool", pool_name(v.pool),
                          "--trace", t, "--budget", std::to_string(sf.budget_s), "--out", part});
    }
  }
  int failures = run_processes(commands, std::max(1u, sf.parallel));

  // Merge parts in command order so the output does not depend on scheduling.
  std::ofstream merged(metrics);
  for (std::size_t i = 0; i < commands.size(); ++i) {
    fs::path part = fs::path(sf.out) / ("part_" + std::to_string(i) + ".jsonl");
    std::ifstream in(part);
    merged << in.rdbuf();
    in.close();
    fs::remove(part);
  }
  merged.close();

  std::map<std::string, std::vector<MetricRecord>> by_trace;
  for (MetricRecord& r : load_metrics({metrics})) by_trace[r.trace_id].push_back(std::move(r));
  std::string ext = sf.format == "csv" ? ".csv" : ".txt";
  std::ofstream tables(fs::path(sf.out) / ("tables" + ext));
  for (const auto& [id, recs] : by_trace) {
    RatioTable t = make_ratio_table(recs, split_columns(default_columns()));
    tables << "## " << id << "\n" << (sf.format == "csv" ? render_csv(t) : render_text(t)) << "\n";
  }
  std::cout << "wrote " << metrics << " (" << commands.size() - failures << " runs) and tables" << ext << "\n";
  if (failures) std::cerr << failures << " runs failed\n";
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"priority queue trace benchmark"};
  app.require_subcommand(1);

  GenFlags gf;
  CLI::App* gen = app.add_subcommand("gen", "generate a workload trace");
  gen->add_option("--workload", gf.workload)->check(CLI::IsMember({"sort", "insert_delete", "decrease_key", "dijkstra"}));
  gen->add_option("--n", gf.n, "items (vertices for random graphs)")->check(CLI::PositiveNumber);
  gen->add_option("--c", gf.c)->check(CLI::PositiveNumber);
  gen->add_option("--k", gf.k)->check(CLI::PositiveNumber);
  gen->add_option("--mode", gf.mode)->check(CLI::IsMember({"middle", "min"}));
  gen->add_option("--seed", gf.seed);
  gen->add_option("--graph", gf.graph, "DIMACS .gr file for dijkstra")->check(CLI::ExistingFile);
  gen->add_option("--grid", gf.grid, "RxC grid graph for dijkstra");
  gen->add_option("--m", gf.m, "arcs for a random graph (default 4n)");
  gen->add_option("--source", gf.source);
  gen->add_option("--max-weight", gf.max_weight);
  gen->add_option("--out", gf.out, "output path (.pqtrt writes text)")->required();

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a trace against the reference heap");
  validate->add_option("--trace", validate_path)->required()->check(CLI::ExistingFile);

  VariantFlags vf;
  RunFlags rf;
  CLI::App* run = app.add_subcommand("run", "replay a trace and print metrics as JSON lines");
  add_variant_flags(run, vf);
  run->add_option("--trace", rf.trace)->required()->check(CLI::ExistingFile);
  run->add_flag("--one-shot", rf.one_shot, "single timed iteration, for profiler runs");
  run->add_flag("--no-baseline", rf.no_baseline, "skip dummy-driver subtraction");
  run->add_flag("--counters-only", rf.counters_only, "skip timing");
  run->add_option("--budget", rf.budget_s, "timing budget in seconds");
  run->add_option("--out", rf.out, "append to this file instead of stdout");
  run->add_option("--profile", rf.profile, "import external columns from a profiler report")->check(CLI::ExistingFile);

  std::vector<std::string> metric_files;
  std::string columns = default_columns();
  std::string format = "text";
  CLI::App* table = app.add_subcommand("table", "ratio table per trace");
  table->add_option("--metrics", metric_files)->required();
  table->add_option("--columns", columns, "comma separated");
  table->add_option("--format", format)->check(CLI::IsMember({"text", "csv"}));

  std::string scaling = "all_ops_logn";
  CLI::App* series = app.add_subcommand("series", "wallclock per log-scaled operation across sizes");
  series->add_option("--metrics", metric_files)->required();
  series->add_option("--scaling", scaling)->check(CLI::IsMember({"all_ops_logn", "delmin_only_logn"}));
  series->add_option("--format", format)->check(CLI::IsMember({"text", "csv"}));

  SuiteFlags sf;
  VariantFlags suite_vf;
  suite_vf.heap = "all";
  CLI::App* suite = app.add_subcommand("suite", "generate, run and tabulate the standard batch");
  add_variant_flags(suite, suite_vf);
  suite->add_option("--sizes", sf.log_sizes, "log2 of n for each size")->delimiter(',');
  suite->add_option("--seed", sf.seed);
  suite->add_option("--budget", sf.budget_s, "timing budget per run in seconds");
  suite->add_option("--parallel", sf.parallel, "concurrent worker processes");
  suite->add_option("--out", sf.out, "output directory");
  suite->add_option("--format", sf.format)->check(CLI::IsMember({"text", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      Trace t = generate(gf);
      write_trace(gf.out, t);
      std::cout << gf.out << ": " << t.header.total << " records\n";
    } else if (*validate) {
      Trace t = read_trace(validate_path);
      auto problems = validate_trace(t);
      for (const TraceViolation& v : problems) {
        if (v.index == ~std::uint64_t{0}) {
          std::cout << "header: " << v.message << "\n";
        } else {
          std::cout << "record " << v.index << ": " << v.message << "\n";
        }
      }
      if (!problems.empty()) return 1;
      std::cout << "ok: " << t.header.total << " records\n";
    } else if (*run) {
      return do_run(vf, rf);
    } else if (*table) {
      std::map<std::string, std::vector<MetricRecord>> by_trace;
      for (MetricRecord& r : load_metrics(metric_files)) by_trace[r.trace_id].push_back(std::move(r));
      for (const auto& [id, recs] : by_trace) {
        RatioTable t = make_ratio_table(recs, split_columns(columns));
        if (by_trace.size() > 1) std::cout << "## " << id << "\n";
        std::cout << (format == "csv" ? render_csv(t) : render_text(t));
      }
    } else if (*series) {
      SeriesTable s = scaled_series(load_metrics(metric_files), parse_scaling(scaling));
      std::cout << render_series(s, format == "csv");
      if (format == "csv") {
        for (const std::string& w : s.warnings) std::cerr << "warning: " << w << "\n";
      }
    } else if (*suite) {
      std::string self = fs::canonical("/proc/self/exe").string();
      return do_suite(suite_vf, sf, self);
    }
  } catch (const std::exception& e) {
    std::cerr << "pqlab: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
