#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "trigopt/driver.hpp"
#include "trigopt/mdppp.hpp"
#include "trigopt/model_json.hpp"

namespace fs = std::filesystem;
using namespace trigopt;

namespace {

struct CommonOpts {
  std::string scheme = "nu2";
  std::string strategy = "kworst";
  double k = 50.0;
  double delta1 = 2.0;
  double delta2 = 2.0;
  std::string principal = "on";
  std::string backend = "builtin";
  std::string solver_cmd;
  std::string dialect = "json";
  double gap = 0.01;
  double time_limit = 3600.0;
  uint64_t seed = 0;
  std::string run_id = "run";
  std::string results_root = "results";
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--scheme", o.scheme, "refinement scheme")
      ->check(CLI::IsMember({"bisection", "direct", "nu2", "nu3"}));
  cmd->add_option("--strategy", o.strategy, "refinement strategy")
      ->check(CLI::IsMember({"complete", "kworst"}));
  cmd->add_option("--k", o.k, "k-worst percentage (or count with --k-count)");
  cmd->add_option("--delta1", o.delta1, "non-uniform contraction toward the left neighbor");
  cmd->add_option("--delta2", o.delta2, "non-uniform contraction toward the right neighbor");
  cmd->add_option("--principal-domain", o.principal, "fold periodic arguments")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--backend", o.backend, "MILP backend")
      ->check(CLI::IsMember({"builtin", "subprocess"}));
  cmd->add_option("--solver-cmd", o.solver_cmd,
                  "subprocess solver executable (default: TRIGOPT_SOLVER_CMD)");
  cmd->add_option("--solver-dialect", o.dialect, "solution file dialect")
      ->check(CLI::IsMember({"json", "lines"}));
  cmd->add_option("--gap", o.gap, "relative gap tolerance");
  cmd->add_option("--time-limit", o.time_limit, "seconds per solve");
  cmd->add_option("--seed", o.seed, "seed for generated instances");
  cmd->add_option("--run-id", o.run_id, "results subdirectory name");
  cmd->add_option("--results-root", o.results_root, "results root directory");
}

SolveConfig to_config(const CommonOpts& o, bool k_is_count) {
  SolveConfig cfg;
  cfg.gap_tolerance = o.gap;
  cfg.time_limit_seconds = o.time_limit;
  cfg.refinement.scheme = o.scheme == "bisection" ? Scheme::Bisection
                          : o.scheme == "direct"  ? Scheme::Direct
                          : o.scheme == "nu3"     ? Scheme::NU3
                                                  : Scheme::NU2;
  cfg.refinement.delta1 = o.delta1;
  cfg.refinement.delta2 = o.delta2;
  cfg.strategy.kind = o.strategy == "complete" ? StrategyConfig::Kind::Complete
                                               : StrategyConfig::Kind::KWorst;
  cfg.strategy.k = o.k;
  cfg.strategy.k_is_percent = !k_is_count;
  cfg.principal_domain = o.principal == "on";
  cfg.backend.backend = o.backend == "subprocess" ? Backend::Subprocess : Backend::Builtin;
  cfg.backend.solver_cmd = o.solver_cmd;
  cfg.backend.dialect = o.dialect;
  cfg.backend.time_limit_seconds = o.time_limit;
  return cfg;
}

fs::path out_dir(const CommonOpts& o) { return fs::path(o.results_root) / o.run_id; }

struct InstanceRun {
  std::string id;
  GlobalResult result;
  MdpppSolution best_path;
  bool has_path = false;
};

InstanceRun run_instance(const std::string& id, const MdpppInstance& inst,
                         const SolveConfig& cfg) {
  InstanceRun run;
  run.id = id;
  auto mm = build_mdppp_model(inst);
  apply_optimality_cuts(mm);
  run.result = solve_global(mm.model, cfg, make_mdppp_heuristic(mm));
  if (run.result.upper_bound < kInf && !run.result.best_values.empty()) {
    const auto headings = heuristic_headings(mm, run.result.best_values);
    run.best_path = mdppp_path_from_headings(inst, headings);
    run.has_path = true;
  }
  return run;
}

nlohmann::json result_to_json(const InstanceRun& run) {
  nlohmann::json j;
  j["instance"] = run.id;
  j["status"] = to_string(run.result.status);
  j["lower_bound"] = run.result.lower_bound;
  j["upper_bound"] = run.result.upper_bound;
  j["gap"] = run.result.upper_bound < kInf
                 ? relative_gap(std::min(run.result.lower_bound, run.result.upper_bound),
                                run.result.upper_bound)
                 : -1.0;
  j["iterations"] = run.result.iterations;
  j["binaries_added"] = run.result.binaries_added;
  j["t"] = static_cast<long>(run.result.wall_seconds);
  j["log"] = nlohmann::json::array();
  for (const auto& rec : run.result.log) {
    j["log"].push_back({{"iter", rec.iteration},
                        {"lb", rec.lower_bound},
                        {"ub", rec.upper_bound < kInf ? rec.upper_bound : -1.0},
                        {"gap", rec.rel_gap < kInf ? rec.rel_gap : -1.0},
                        {"bin", rec.binaries_added}});
  }
  if (run.has_path) {
    j["headings"] = run.best_path.headings;
    j["stages"] = nlohmann::json::array();
    for (const auto& p : run.best_path.stage_paths) {
      j["stages"].push_back({{"word", to_string(p.word)},
                             {"lengths", {p.segment_lengths[0], p.segment_lengths[1],
                                          p.segment_lengths[2]}},
                             {"length", p.total_length}});
    }
  }
  return j;
}

void write_path_csv(const InstanceRun& run, const MdpppInstance& inst, const fs::path& path) {
  std::ofstream out(path);
  out << "x,y\n";
  if (!run.has_path) return;
  char buf[64];
  for (size_t i = 0; i < run.best_path.stage_paths.size(); ++i) {
    const Configuration q0{inst.points[i][0], inst.points[i][1], run.best_path.headings[i]};
    for (const auto& c : sample_path(q0, run.best_path.stage_paths[i], 0.05)) {
      std::snprintf(buf, sizeof buf, "%.9f,%.9f\n", c.x, c.y);
      out << buf;
    }
  }
}

RunSummary to_summary(const InstanceRun& run) {
  RunSummary s;
  s.instance = run.id;
  s.status = run.result.status;
  s.wall_seconds = run.result.wall_seconds;
  s.iterations = run.result.iterations;
  s.binaries = run.result.binaries_added;
  s.lower_bound = run.result.lower_bound;
  s.upper_bound = run.result.upper_bound;
  return s;
}

std::string instance_id_from_path(const std::string& p) {
  std::string stem = fs::path(p).stem().string();
  return stem;
}

int cmd_gen(int n, int count, const CommonOpts& o) {
  const auto dir = out_dir(o) / "instances";
  fs::create_directories(dir);
  for (int k = 1; k <= count; ++k) {
    const auto inst = generate_instance(n, o.seed + static_cast<uint64_t>(k));
    const std::string id = std::to_string(n) + "-" + std::to_string(k);
    write_instance(inst, (dir / (id + ".json")).string());
    std::cout << "wrote " << (dir / (id + ".json")).string() << "\n";
  }
  return 0;
}

int cmd_solve(const std::string& path, const CommonOpts& o, bool k_is_count) {
  const auto cfg = to_config(o, k_is_count);
  nlohmann::json doc;
  {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "cannot read " << path << "\n";
      return 2;
    }
    in >> doc;
  }
  const auto dir = out_dir(o);
  fs::create_directories(dir / "paths");
  const std::string id = instance_id_from_path(path);

  if (doc.contains("points")) {
    const auto inst = instance_from_json(doc);
    const auto run = run_instance(id, inst, cfg);
    std::ofstream(dir / (id + "_result.json")) << result_to_json(run).dump(2) << "\n";
    write_path_csv(run, inst, dir / "paths" / (id + ".csv"));
    std::cout << id << ": " << to_string(run.result.status) << " lb=" << run.result.lower_bound
              << " ub=" << run.result.upper_bound << " iter=" << run.result.iterations << "\n";
    return run.result.status == SolveStatus::Error ? 1 : 0;
  }

  // generic factored model document
  const auto model = model_from_json(doc);
  const auto rep = validate_model(model);
  if (!rep.ok()) {
    std::cerr << "invalid model:\n" << rep.to_string();
    return 2;
  }
  const auto res = solve_global(model, cfg);
  nlohmann::json j;
  j["instance"] = id;
  j["status"] = to_string(res.status);
  j["lower_bound"] = res.lower_bound;
  j["upper_bound"] = res.upper_bound < kInf ? res.upper_bound : -1.0;
  j["iterations"] = res.iterations;
  j["binaries_added"] = res.binaries_added;
  j["t"] = static_cast<long>(res.wall_seconds);
  std::ofstream(dir / (id + "_result.json")) << j.dump(2) << "\n";
  std::cout << id << ": " << to_string(res.status) << " lb=" << res.lower_bound
            << " ub=" << res.upper_bound << "\n";
  return res.status == SolveStatus::Error ? 1 : 0;
}

int cmd_oracle(const std::string& path, int grid, const CommonOpts& o) {
  const auto inst = read_instance(path);
  const double opt = mdppp_oracle(inst, grid);
  const auto dir = out_dir(o);
  fs::create_directories(dir);
  const std::string id = instance_id_from_path(path);
  nlohmann::json j;
  j["instance"] = id;
  j["grid"] = grid;
  j["oracle_length"] = opt;
  std::ofstream(dir / (id + "_oracle.json")) << j.dump(2) << "\n";
  std::cout << id << ": oracle length " << opt << " (grid " << grid << ")\n";
  return 0;
}

int cmd_bench(const std::vector<std::string>& paths, const std::vector<std::string>& schemes,
              const std::vector<std::string>& strategies, int jobs, const CommonOpts& base,
              bool k_is_count) {
  const auto dir = out_dir(base);
  fs::create_directories(dir / "paths");
  std::vector<MdpppInstance> instances;
  std::vector<std::string> ids;
  for (const auto& p : paths) {
    instances.push_back(read_instance(p));
    ids.push_back(instance_id_from_path(p));
  }

  struct Cell {
    RunSummary summary;
  };
  // results[strategy][instance][scheme]
  std::vector<std::vector<std::vector<Cell>>> results(
      strategies.size(),
      std::vector<std::vector<Cell>>(instances.size(), std::vector<Cell>(schemes.size())));

  std::vector<std::pair<size_t, size_t>> work;  // (strategy, instance)
  for (size_t s = 0; s < strategies.size(); ++s)
    for (size_t i = 0; i < instances.size(); ++i) work.emplace_back(s, i);

  std::mutex mtx;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t w;
      {
        std::lock_guard<std::mutex> lock(mtx);
        if (next >= work.size()) return;
        w = next++;
      }
      const auto [si, ii] = work[w];
      for (size_t ci = 0; ci < schemes.size(); ++ci) {
        CommonOpts o = base;
        o.scheme = schemes[ci];
        o.strategy = strategies[si];
        const auto run = run_instance(ids[ii], instances[ii], to_config(o, k_is_count));
        {
          std::lock_guard<std::mutex> lock(mtx);
          results[si][ii][ci].summary = to_summary(run);
          std::cout << ids[ii] << " " << schemes[ci] << "/" << strategies[si] << ": "
                    << to_string(run.result.status) << " t=" << static_cast<long>(
                           run.result.wall_seconds)
                    << "s iter=" << run.result.iterations << "\n";
        }
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::max(1, jobs);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (size_t si = 0; si < strategies.size(); ++si) {
    nlohmann::json jsum = nlohmann::json::object();
    for (size_t ci = 0; ci < schemes.size(); ++ci) {
      std::vector<RunSummary> rows;
      for (size_t ii = 0; ii < instances.size(); ++ii)
        rows.push_back(results[si][ii][ci].summary);
      jsum[schemes[ci]] = export_results_json(rows);
    }
    std::ofstream(dir / ("summary_" + strategies[si] + ".json")) << jsum.dump(2) << "\n";
    std::ofstream csv(dir / ("summary_" + strategies[si] + ".csv"));
    csv << "instance";
    for (const auto& s : schemes) csv << "," << s << "_t," << s << "_iter," << s << "_bin";
    csv << "\n";
    for (size_t ii = 0; ii < instances.size(); ++ii) {
      csv << ids[ii];
      for (size_t ci = 0; ci < schemes.size(); ++ci) {
        const auto& s = results[si][ii][ci].summary;
        csv << ",";
        if (s.status == SolveStatus::TimeLimit)
          csv << "**";
        else
          csv << static_cast<long>(s.wall_seconds);
        csv << "," << s.iterations << "," << s.binaries;
      }
      csv << "\n";
    }
  }
  std::cout << "summaries written to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"global optimization for MINLPs with trigonometric and bilinear terms"};
  app.require_subcommand(1);
  CommonOpts opts;
  bool k_is_count = false;

  auto* gen = app.add_subcommand("gen", "generate waypoint instances");
  int gen_n = 4, gen_count = 10;
  gen->add_option("--n", gen_n, "points per instance")->check(CLI::Range(2, 64));
  gen->add_option("--count", gen_count, "number of instances");
  add_common_flags(gen, opts);

  auto* solve = app.add_subcommand("solve", "solve one instance or model file");
  std::string solve_path;
  solve->add_option("instance", solve_path, "instance or model json")->required();
  solve->add_flag("--k-count", k_is_count, "treat --k as a count instead of a percentage");
  add_common_flags(solve, opts);

  auto* bench = app.add_subcommand("bench", "sweep schemes x strategies over instances");
  std::vector<std::string> bench_paths, bench_schemes{"bisection", "direct", "nu2", "nu3"},
      bench_strategies{"kworst"};
  int jobs = 1;
  bench->add_option("instances", bench_paths, "instance json files")->required();
  bench->add_option("--schemes", bench_schemes, "schemes to sweep")->delimiter(',');
  bench->add_option("--strategies", bench_strategies, "strategies to sweep")->delimiter(',');
  bench->add_option("--jobs", jobs, "parallel instances");
  bench->add_flag("--k-count", k_is_count, "treat --k as a count instead of a percentage");
  add_common_flags(bench, opts);

  auto* oracle = app.add_subcommand("oracle", "discretized heading DP oracle");
  std::string oracle_path;
  int grid = 256;
  oracle->add_option("instance", oracle_path, "instance json")->required();
  oracle->add_option("--grid", grid, "heading grid size");
  add_common_flags(oracle, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_n, gen_count, opts);
    if (solve->parsed()) return cmd_solve(solve_path, opts, k_is_count);
    if (bench->parsed())
      return cmd_bench(bench_paths, bench_schemes, bench_strategies, jobs, opts, k_is_count);
    if (oracle->parsed()) return cmd_oracle(oracle_path, grid, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
