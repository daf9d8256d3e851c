#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gptopt/benchmarks/benchmarks.hpp"
#include "gptopt/bo/runner.hpp"
#include "gptopt/core/errors.hpp"
#include "gptopt/core/parallel.hpp"
#include "gptopt/core/trajectory.hpp"
#include "gptopt/dataset/export.hpp"
#include "gptopt/functions/synthetic.hpp"
#include "gptopt/harness/report.hpp"
#include "gptopt/harness/suite.hpp"
#include "gptopt/policy/loop.hpp"
#include "gptopt/policy/mocks.hpp"

namespace fs = std::filesystem;
using gptopt::ConfigError;
using json = nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int workers = gptopt::default_workers();
  bool force = false;
  bool resume = false;
};

/// Relative outputs land under $GPTOPT_OUTPUT_ROOT when it is set.
fs::path output_path(const std::string& p) {
  fs::path path(p);
  if (path.is_relative())
    if (const char* root = std::getenv("GPTOPT_OUTPUT_ROOT"); root && *root) return fs::path(root) / path;
  return path;
}

/// Refuse to clobber an existing output unless --force or (where supported) --resume.
void guard_output(const fs::path& p, const Globals& g, bool resumable) {
  if (!fs::exists(p)) return;
  if (fs::is_directory(p) && fs::is_empty(p)) return;
  if (g.force) return;
  if (resumable && g.resume) return;
  throw ConfigError(p.string() + " exists; pass --force to overwrite" + std::string(resumable ? " or --resume to continue" : ""));
}

/// Resolved global flags plus the active subcommand's options, as TOML that --config accepts.
void write_snapshot(const CLI::App& app, const Globals& g, const fs::path& where) {
  if (where.has_parent_path()) fs::create_directories(where.parent_path());
  std::ofstream out(where, std::ios::trunc);
  out << "seed=" << g.seed << "\nworkers=" << g.workers << "\nforce=" << (g.force ? "true" : "false")
      << "\nresume=" << (g.resume ? "true" : "false") << '\n';
  for (const auto* sub : app.get_subcommands()) out << "[" << sub->get_name() << "]\n" << sub->config_to_str(true, false);
  if (!out) throw ConfigError("cannot write config snapshot " + where.string());
}

std::vector<gptopt::functions::Family> parse_families(const std::vector<std::string>& names) {
  std::vector<gptopt::functions::Family> out;
  for (const auto& n : names)
    if (!n.empty()) out.push_back(gptopt::functions::family_from_string(n));
  if (out.empty()) return {gptopt::functions::kAllFamilies.begin(), gptopt::functions::kAllFamilies.end()};
  return out;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::vector<int> dims{2};
  int per_family = 2;
  std::vector<std::string> families;
  bool with_augmented = false;
  bool dry_run = false;
  std::string out = "functions.jsonl";
};

int cmd_gen(const GenArgs& a, const Globals& g, const CLI::App& app) {
  using namespace gptopt::functions;
  for (int d : a.dims)
    if (d < kMinDim || d > kMaxDim) throw ConfigError("dims: " + std::to_string(d) + " outside [2, 10]");
  if (a.per_family < 0) throw ConfigError("per-family: must be >= 0");
  const auto fams = parse_families(a.families);

  json census = json::object();
  std::size_t total = 0;
  for (int d : a.dims) {
    json per = json::object();
    std::size_t dim_total = 0;
    for (auto f : fams) {
      const std::size_t n = static_cast<std::size_t>(a.per_family) * (a.with_augmented ? 2 : 1);
      per[std::string(to_string(f))] = n;
      dim_total += n;
    }
    census[std::to_string(d) + "D"] = {{"per_family", per}, {"functions", dim_total}, {"trajectories", dim_total * 10}};
    total += dim_total;
  }
  const json summary{{"census", census}, {"total_functions", total}, {"total_trajectories", total * 10}};
  if (a.dry_run) {
    std::cout << summary.dump(2) << '\n';
    return 0;
  }
  const auto out = output_path(a.out);
  guard_output(out, g, false);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + out.string());
  for (int d : a.dims)
    for (auto fam : fams)
      for (int i = 0; i < a.per_family; ++i) {
        FunctionSpec s;
        s.family = fam;
        s.dim = d;
        s.seed = gptopt::derive_seed(g.seed, {gptopt::fnv1a64(to_string(fam)), static_cast<std::uint64_t>(d),
                                              static_cast<std::uint64_t>(i)});
        f << manifest_line(s) << '\n';
        if (a.with_augmented) {
          s.augment_seed = gptopt::derive_seed(s.seed, "augment-seed");
          f << manifest_line(s) << '\n';
        }
      }
  f.close();
  write_snapshot(app, g, fs::path(out.string() + ".config.toml"));
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- trace

struct TraceArgs {
  std::string manifest;
  std::string out = "traces";
  int n_steps = gptopt::bo::kDefaultSteps;
};

int cmd_trace(const TraceArgs& a, const Globals& g, const CLI::App& app) {
  using namespace gptopt;
  const auto specs = functions::read_manifest(a.manifest);
  if (a.n_steps < 0) throw ConfigError("n-steps: must be >= 0");
  const auto dir = output_path(a.out);
  guard_output(dir, g, true);
  fs::create_directories(dir);
  const auto traj_path = dir / "trajectories.jsonl";
  if (!g.resume) fs::remove(traj_path);

  const std::size_t variants = bo::variant_grid().size();
  std::map<std::string, std::vector<Trajectory>> done;
  if (fs::exists(traj_path)) {
    std::map<std::string, std::vector<Trajectory>> seen;
    try {
      for (auto& t : read_trajectories(traj_path.string())) seen[t.function_id].push_back(std::move(t));
    } catch (const ConfigError& e) {
      std::cerr << "warning: ignoring unreadable tail of " << traj_path << ": " << e.what() << '\n';
    }
    for (auto& [id, ts] : seen)
      if (ts.size() == variants && std::all_of(ts.begin(), ts.end(), [&](const Trajectory& t) {
            return t.steps_completed() == a.n_steps;
          }))
        done[id] = std::move(ts);
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (!done.contains(specs[i].id())) pending.push_back(i);
  std::cerr << "trace: " << specs.size() << " functions, " << done.size() << " already complete, " << pending.size()
            << " to run on " << g.workers << " workers\n";

  std::ofstream sink(traj_path, std::ios::app);
  std::mutex mu;
  std::atomic<std::size_t> finished{0};
  std::vector<std::vector<Trajectory>> results(pending.size());
  bo::BoOptions opt;
  opt.n_steps = a.n_steps;
  parallel_for(pending.size(), g.workers, [&](std::size_t k) {
    const auto& spec = specs[pending[k]];
    std::vector<Trajectory> ts;
    try {
      const auto fn = functions::make_function(spec).as_objective();
      ts = bo::run_variant_grid(fn, derive_seed(g.seed, {fnv1a64(spec.id())}), opt);
    } catch (const std::exception& e) {
      std::lock_guard lock(mu);
      std::cerr << "trace: " << spec.id() << " failed: " << e.what() << '\n';
      return;
    }
    std::lock_guard lock(mu);
    for (const auto& t : ts) sink << json(t).dump() << '\n';
    sink.flush();
    results[k] = std::move(ts);
    const auto n = ++finished;
    if (n % 10 == 0 || n == pending.size()) std::cerr << "trace: " << n << "/" << pending.size() << '\n';
  });
  sink.close();

  for (std::size_t k = 0; k < pending.size(); ++k)
    if (!results[k].empty()) done[specs[pending[k]].id()] = std::move(results[k]);
  // Rewrite in manifest order so the file does not depend on scheduling.
  std::size_t trajectories = 0, errored = 0, fallback = 0, missing = 0;
  {
    std::ofstream out(traj_path, std::ios::trunc);
    for (const auto& s : specs) {
      const auto it = done.find(s.id());
      if (it == done.end()) {
        ++missing;
        continue;
      }
      for (const auto& t : it->second) {
        out << json(t).dump() << '\n';
        ++trajectories;
        if (t.provenance.contains("error")) ++errored;
        if (!t.fallback_steps.empty()) ++fallback;
      }
    }
  }
  const json summary{{"functions", specs.size()},
                     {"trajectories", trajectories},
                     {"failed_functions", missing},
                     {"errored_trajectories", errored},
                     {"trajectories_with_fallback_steps", fallback},
                     {"file", traj_path.string()}};
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
  write_snapshot(app, g, dir / "resolved_config.toml");
  std::cout << summary.dump(2) << '\n';
  return missing ? 1 : 0;
}

// ---------------------------------------------------------------- dataset

struct DatasetArgs {
  std::vector<std::string> traces;
  std::string out = "dataset";
  int k = 5;
  std::vector<int> step_counts = gptopt::dataset::default_step_counts();
  int augmentation_passes = 1;
  int shards = 1;
};

int cmd_dataset(const DatasetArgs& a, const Globals& g, const CLI::App& app) {
  using namespace gptopt::dataset;
  const auto dir = output_path(a.out);
  guard_output(dir, g, false);
  DatasetManifest m;
  m.sources = a.traces;
  m.k = a.k;
  m.step_counts = a.step_counts;
  m.augmentation_seed = g.seed;
  m.augmentation_passes = a.augmentation_passes;
  m.output_dir = dir.string();
  m.shards = a.shards;
  const auto summary = export_dataset(m, g.workers);
  write_snapshot(app, g, dir / "resolved_config.toml");
  std::cout << json(summary).dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- infer / eval shared

struct FunctionArgs {
  std::string manifest;
  std::vector<std::string> benchmarks;
  bool desk = false;
};

/// Functions from a manifest (specs or benchmark lines), NAME:DIM benchmark
/// entries, and/or the built-in ten-function desk suite.
std::vector<gptopt::harness::SuiteFunction> collect_functions(const FunctionArgs& a) {
  using namespace gptopt::harness;
  std::vector<SuiteFunction> out;
  if (!a.manifest.empty())
    for (auto& f : load_suite_functions(a.manifest)) out.push_back(std::move(f));
  for (const auto& b : a.benchmarks) {
    const auto colon = b.rfind(':');
    if (colon == std::string::npos) throw ConfigError("benchmark '" + b + "' must be NAME:DIM");
    out.push_back(benchmark_entry(b.substr(0, colon), std::stoi(b.substr(colon + 1))));
  }
  if (a.desk)
    for (auto& f : desk_suite()) out.push_back(std::move(f));
  if (out.empty()) throw ConfigError("no functions: pass --manifest, --benchmark or --desk-suite");
  return out;
}

void add_function_options(CLI::App* sub, FunctionArgs& a) {
  sub->add_option("--manifest", a.manifest, "JSONL of function specs or {\"benchmark\",\"dim\"} lines");
  sub->add_option("--benchmark", a.benchmarks, "Benchmark as NAME:DIM (repeatable)");
  sub->add_flag("--desk-suite", a.desk, "Include the built-in ten 2-D functions");
}

// ---------------------------------------------------------------- infer

struct InferArgs {
  FunctionArgs functions;
  std::string endpoint;
  std::string out = "inference";
  int budget = 40;
  int k = 4;
  double temperature = 1.5;
  double timeout = 60.0;
  int c_min_start = 500;
  int c_min_end = 100;
  int runs = 1;
};

int cmd_infer(const InferArgs& a, const Globals& g, const CLI::App& app) {
  using namespace gptopt;
  policy::InferenceConfig cfg;
  cfg.k_proposals = a.k;
  cfg.temperature = a.temperature;
  cfg.budget = a.budget;
  cfg.timeout_seconds = a.timeout;
  cfg.c_min_start = a.c_min_start;
  cfg.c_min_end = a.c_min_end;
  cfg.validate();
  if (a.runs < 1) throw ConfigError("runs: must be >= 1");
  const auto fns = collect_functions(a.functions);
  const auto dir = output_path(a.out);
  guard_output(dir, g, false);
  fs::create_directories(dir);
  { auto probe = policy::make_endpoint(a.endpoint, a.timeout); }

  struct Job {
    std::size_t fn;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < fns.size(); ++i)
    for (int r = 0; r < a.runs; ++r) jobs.push_back({i, g.seed + static_cast<std::uint64_t>(r)});
  std::vector<Trajectory> trajs(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), g.workers, [&](std::size_t j) {
    try {
      auto ep = policy::make_endpoint(a.endpoint, a.timeout);
      const auto& f = fns[jobs[j].fn];
      trajs[j] = policy::run_inference_loop(f.objective, *ep, cfg, harness::cell_seed(f.id(), jobs[j].seed));
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  });
  std::size_t evaluations = 0, fallbacks = 0, failed = 0;
  {
    std::ofstream out(dir / "trajectories.jsonl", std::ios::trunc);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (!errors[j].empty()) {
        ++failed;
        std::cerr << "infer: " << fns[jobs[j].fn].id() << " failed: " << errors[j] << '\n';
        continue;
      }
      out << json(trajs[j]).dump() << '\n';
      evaluations += trajs[j].values.size();
      fallbacks += trajs[j].fallback_steps.size();
    }
  }
  const json summary{{"runs", jobs.size()},
                     {"failed_runs", failed},
                     {"evaluations", evaluations},
                     {"fallback_steps", fallbacks},
                     {"endpoint", a.endpoint},
                     {"file", (dir / "trajectories.jsonl").string()}};
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
  write_snapshot(app, g, dir / "resolved_config.toml");
  std::cout << summary.dump(2) << '\n';
  return failed ? 1 : 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  FunctionArgs functions;
  std::vector<std::string> methods{"random", "bo:logei_xi=0"};
  int seeds = 5;
  int budget = 40;
  int oracle_effort = 1;
  int oracle_samples = 100000;
  int splits = 5;
  double timeout = 60.0;
  std::string out = "eval";
};

int cmd_eval(const EvalArgs& a, const Globals& g, const CLI::App& app) {
  using namespace gptopt::harness;
  SuiteConfig cfg;
  for (const auto& m : a.methods) cfg.methods.push_back(MethodSpec::parse(m));
  if (a.seeds < 1) throw ConfigError("seeds: must be >= 1");
  for (int s = 0; s < a.seeds; ++s) cfg.seeds.push_back(g.seed + static_cast<std::uint64_t>(s));
  cfg.budget = a.budget;
  cfg.workers = g.workers;
  cfg.oracle_effort = a.oracle_effort;
  cfg.oracle.samples_per_chunk = a.oracle_samples;
  cfg.inference.timeout_seconds = a.timeout;
  const auto dir = output_path(a.out);
  guard_output(dir, g, true);
  cfg.out_dir = dir.string();
  cfg.resume = g.resume;
  const auto fns = collect_functions(a.functions);
  const auto res = run_suite(fns, cfg);
  std::cerr << "eval: " << res.computed << " cells computed, " << res.resumed << " resumed, " << res.failed << " failed\n";
  const auto rep = aggregate(res.records, a.splits);
  const auto files = write_reports(rep, res.records, (dir / "report").string());
  write_snapshot(app, g, dir / "resolved_config.toml");
  auto summary = report_summary(rep, res.records);
  summary["files"] = files;
  summary["cells_computed"] = res.computed;
  summary["cells_resumed"] = res.resumed;
  summary["cells_failed"] = res.failed;
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> records;
  std::string out = "report";
  int splits = 5;
  int max_step = -1;
};

int cmd_report(const ReportArgs& a, const Globals& g, const CLI::App& app) {
  using namespace gptopt::harness;
  std::vector<RunRecord> records;
  for (const auto& p : a.records) {
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p))
        if (e.path().extension() == ".jsonl")
          for (auto& r : read_records(e.path().string())) records.push_back(std::move(r));
    } else {
      for (auto& r : read_records(p)) records.push_back(std::move(r));
    }
  }
  const auto dir = output_path(a.out);
  guard_output(dir, g, false);
  const auto rep = aggregate(records, a.splits, a.max_step);
  const auto files = write_reports(rep, records, dir.string());
  write_snapshot(app, g, dir / "resolved_config.toml");
  auto summary = report_summary(rep, records);
  summary["files"] = files;
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- list-benchmarks

int cmd_list_benchmarks() {
  using namespace gptopt::benchmarks;
  std::vector<std::string> order;
  std::map<std::string, json> rows;
  for (const auto& e : registry()) {
    if (!rows.contains(e.name)) {
      order.push_back(e.name);
      rows[e.name] = json{{"name", e.name}, {"dims", json::array()}, {"f_star", json::array()}};
    }
    for (int d = e.min_dim; d <= e.max_dim; ++d) {
      const auto b = load_benchmark(e.name, d);
      rows[e.name]["dims"].push_back(d);
      rows[e.name]["f_star"].push_back(b.f_star);
    }
  }
  for (const auto& n : order) std::cout << rows[n].dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic black-box optimization toolkit: function generation, BO traces, prompt datasets, "
               "policy inference loops and evaluation."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML config file; command-line flags override it");
  Globals g;
  app.add_option("--seed", g.seed, "Root seed")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--force", g.force, "Overwrite existing outputs");
  app.add_flag("--resume", g.resume, "Continue into existing outputs, skipping finished work");

  GenArgs gen;
  auto* s_gen = app.add_subcommand("gen", "Write a function manifest");
  s_gen->add_option("--dims", gen.dims, "Dimensions")->capture_default_str()->delimiter(',');
  s_gen->add_option("--per-family", gen.per_family, "Functions per family and dimension")->capture_default_str();
  s_gen->add_option("--families", gen.families, "Families (default all)")->delimiter(',');
  s_gen->add_flag("--with-augmented", gen.with_augmented, "Also emit an augmented copy of every function");
  s_gen->add_flag("--dry-run", gen.dry_run, "Print the census only");
  s_gen->add_option("-o,--out", gen.out, "Manifest path")->capture_default_str();

  TraceArgs trace;
  auto* s_trace = app.add_subcommand("trace", "Run the ten BO variants on every manifest function");
  s_trace->add_option("--manifest", trace.manifest, "Function manifest")->required();
  s_trace->add_option("-o,--out", trace.out, "Output directory")->capture_default_str();
  s_trace->add_option("--n-steps", trace.n_steps, "Optimization steps after the 10 random points")->capture_default_str();

  DatasetArgs ds;
  auto* s_ds = app.add_subcommand("dataset", "Build the top-k prompt dataset from trajectory files");
  s_ds->add_option("--traces", ds.traces, "Trajectory JSONL files")->required();
  s_ds->add_option("-o,--out", ds.out, "Output directory")->capture_default_str();
  s_ds->add_option("--k", ds.k, "Trajectories kept per step count")->capture_default_str();
  s_ds->add_option("--step-counts", ds.step_counts, "Step counts")->capture_default_str()->delimiter(',');
  s_ds->add_option("--augmentation-passes", ds.augmentation_passes, "Copies per selected trajectory (1 = no augmentation)")
      ->capture_default_str();
  s_ds->add_option("--shards", ds.shards, "Output shards")->capture_default_str();

  InferArgs inf;
  auto* s_inf = app.add_subcommand("infer", "Run the policy inference loop");
  add_function_options(s_inf, inf.functions);
  s_inf->add_option("--endpoint", inf.endpoint, "mock:NAME, subprocess:CMD or http://HOST:PORT[/path]")->required();
  s_inf->add_option("-o,--out", inf.out, "Output directory")->capture_default_str();
  s_inf->add_option("--budget", inf.budget, "Optimization steps T")->capture_default_str();
  s_inf->add_option("--k", inf.k, "Proposals per step")->capture_default_str();
  s_inf->add_option("--temperature", inf.temperature, "Sampling temperature sent to the policy")->capture_default_str();
  s_inf->add_option("--timeout", inf.timeout, "Per-request timeout in seconds")->capture_default_str();
  s_inf->add_option("--c-min-start", inf.c_min_start, "Incumbent code at the first decision")->capture_default_str();
  s_inf->add_option("--c-min-end", inf.c_min_end, "Incumbent code at the last decision")->capture_default_str();
  s_inf->add_option("--runs", inf.runs, "Seeds per function")->capture_default_str();

  EvalArgs ev;
  auto* s_ev = app.add_subcommand("eval", "Run methods over a function suite and report metrics");
  add_function_options(s_ev, ev.functions);
  s_ev->add_option("--methods", ev.methods, "random, bo:ACQ (e.g. bo:logei_xi=0) or policy:ENDPOINT")
      ->capture_default_str()
      ->delimiter(',');
  s_ev->add_option("--seeds", ev.seeds, "Seeds per function")->capture_default_str();
  s_ev->add_option("--budget", ev.budget, "Optimization steps")->capture_default_str();
  s_ev->add_option("--oracle-effort", ev.oracle_effort, "Chunks for the f* estimate of synthetic functions")
      ->capture_default_str();
  s_ev->add_option("--oracle-samples", ev.oracle_samples, "Random samples per oracle chunk")->capture_default_str();
  s_ev->add_option("--splits", ev.splits, "Function splits for standard errors")->capture_default_str();
  s_ev->add_option("--timeout", ev.timeout, "Policy request timeout in seconds")->capture_default_str();
  s_ev->add_option("-o,--out", ev.out, "Output directory")->capture_default_str();

  ReportArgs rp;
  auto* s_rp = app.add_subcommand("report", "Aggregate run records into CSV and JSON tables");
  s_rp->add_option("--records", rp.records, "Record files or directories")->required();
  s_rp->add_option("-o,--out", rp.out, "Output directory")->capture_default_str();
  s_rp->add_option("--splits", rp.splits, "Function splits")->capture_default_str();
  s_rp->add_option("--max-step", rp.max_step, "Last step to report (-1 = shortest run)")->capture_default_str();

  auto* s_list = app.add_subcommand("list-benchmarks", "Print the benchmark registry as JSON lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*s_gen) return cmd_gen(gen, g, app);
    if (*s_trace) return cmd_trace(trace, g, app);
    if (*s_ds) return cmd_dataset(ds, g, app);
    if (*s_inf) return cmd_infer(inf, g, app);
    if (*s_ev) return cmd_eval(ev, g, app);
    if (*s_rp) return cmd_report(rp, g, app);
    if (*s_list) return cmd_list_benchmarks();
  } catch (const gptopt::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
