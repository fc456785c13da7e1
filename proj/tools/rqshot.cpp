// rqshot: instance generation, screening, cap calibration, training,
// evaluation and reporting for adaptive shot allocation in depth-1 RQAOA.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "rqshot/benchmark.hpp"
#include "rqshot/config.hpp"
#include "rqshot/errors.hpp"
#include "rqshot/instance_io.hpp"
#include "rqshot/learner.hpp"
#include "rqshot/oracle_check.hpp"

namespace fs = std::filesystem;
using namespace rqshot;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kUpstream = 3 };

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string &path) {
  if (!fs::is_regular_file(path)) throw MissingInput("missing input: " + path);
}

void require_dir(const std::string &path) {
  if (!fs::is_directory(path)) throw MissingInput("missing directory: " + path);
}

void write_json(const fs::path &path, const nlohmann::json &j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

nlohmann::json read_json(const std::string &path) {
  require_file(path);
  std::ifstream in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Instance files named on the command line; directories expand to their
/// *.json files that parse as instances, sorted by name.
std::vector<std::string> instance_paths(const std::vector<std::string> &args) {
  std::vector<std::string> out;
  for (const auto &a : args) {
    if (fs::is_directory(a)) {
      std::vector<std::string> found;
      for (const auto &e : fs::directory_iterator(a)) {
        const auto p = e.path();
        if (p.extension() != ".json" || p.stem().extension() == ".cap") continue;
        found.push_back(p.string());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      require_file(a);
      out.push_back(a);
    }
  }
  return out;
}

RunContext context(const RunConfig &c) { return {c.episode, c.master_seed, c.jobs}; }

nlohmann::json calibration_json(const std::string &id, const CalibrationResult &r) {
  auto probes = nlohmann::json::array();
  for (const auto &[cap, sr] : r.probes) probes.push_back({{"cap", cap}, {"success_rate", sr}});
  return {{"instance_id", id}, {"cap", r.cap}, {"budget_limited", r.budget_limited},
          {"probes", probes}};
}

long cap_for(const InstanceRecord &inst, long fixed, const std::string &cap_dir) {
  if (fixed > 0) return fixed;
  if (cap_dir.empty()) throw ConfigError("give --cap or --caps");
  const auto path = (fs::path(cap_dir) / (inst.id + ".cap.json")).string();
  return read_json(path).at("cap").get<long>();
}

// ---- Subcommands -----------------------------------------------------------

int cmd_gen(const RunConfig &, int n, int d, int count, std::uint64_t seed,
            const std::string &out_dir) {
  fs::create_directories(out_dir);
  std::uint64_t next = seed;
  for (int i = 0; i < count; ++i) {
    const auto inst = make_instance(n, d, next);
    next = inst.seed + 1;
    const auto path = fs::path(out_dir) / (inst.id + ".json");
    save_instance(inst, path.string());
    std::printf("%s  edges=%zu  e_opt=%.6f\n", path.c_str(), inst.graph.edge_count(), inst.e_opt);
  }
  return kOk;
}

int cmd_screen(const RunConfig &cfg, const std::vector<std::string> &inputs) {
  for (const auto &path : instance_paths(inputs)) {
    auto inst = load_instance(path);
    const auto s =
        hard_screen(inst, context(cfg), cfg.bench.screen_trials, cfg.bench.screen_cap);
    inst.category = s.hard ? "hard" : "easy";
    inst.screen_mean_ratio = s.mean_ratio;
    inst.screen_cap = s.cap;
    save_instance(inst, path);
    std::printf("%s  %s  ratio=%.4f  SR=%.3f  cap=%ld\n", inst.id.c_str(), inst.category.c_str(),
                s.mean_ratio, s.success_rate, s.cap);
  }
  return kOk;
}

int cmd_calibrate(const RunConfig &cfg, const std::vector<std::string> &inputs,
                  const std::string &out_dir) {
  for (const auto &path : instance_paths(inputs)) {
    const auto inst = load_instance(path);
    const auto r = calibrate_cap(inst, context(cfg), cfg.bench.calibration_trials,
                                 cfg.bench.calibration_target);
    const auto dir = out_dir.empty() ? fs::path(path).parent_path() : fs::path(out_dir);
    write_json(dir / (inst.id + ".cap.json"), calibration_json(inst.id, r));
    std::printf("%s  cap=%ld%s  probes=%zu\n", inst.id.c_str(), r.cap,
                r.budget_limited ? " (budget-limited)" : "", r.probes.size());
  }
  return kOk;
}

int cmd_train(const RunConfig &cfg, const std::string &path, long cap, const std::string &cap_dir,
              const std::string &out) {
  const auto inst = load_instance(path);
  cap = cap_for(inst, cap, cap_dir);
  const TrainInputs in{inst.graph, inst.e_opt, inst.id, cap, cfg.master_seed, cfg.jobs};
  const auto cp = train(in, cfg.train, cfg.episode, [](const ValidationPoint &v) {
    std::printf("episode %5d  SR=%.3f  median=%.0f  lambda=%.3f  eps=%.3f\n", v.episode,
                v.success_rate, v.median_shots, v.lambda, v.epsilon);
    std::fflush(stdout);
  });
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  save_checkpoint(cp, out);
  std::printf("selected episode %d  SR=%.3f  median=%.0f -> %s\n", cp.selected.episode,
              cp.selected.success_rate, cp.selected.median_shots, out.c_str());
  return kOk;
}

int cmd_eval(const RunConfig &cfg, const std::vector<std::string> &inputs,
             const std::vector<std::string> &policy_names, const std::string &checkpoint,
             long cap, const std::string &cap_dir, const std::string &out_dir) {
  std::vector<Policy> policies;
  for (const auto &name : policy_names) {
    if (name == "uniform") continue; // always run first
    if (name == "heuristic") {
      policies.push_back(Policy::heuristic());
    } else if (name == "rl") {
      if (checkpoint.empty()) throw ConfigError("policy rl needs --checkpoint");
      require_file(checkpoint);
      const auto cp = load_checkpoint(checkpoint);
      cp.check_compatible(cfg.episode);
      policies.push_back(cp.policy("rl"));
    } else {
      throw ConfigError("unknown policy '" + name + "' (uniform, heuristic, rl)");
    }
  }
  fs::create_directories(out_dir);
  std::vector<EvaluationRecord> records;
  std::ofstream trials(fs::path(out_dir) / "trials.jsonl");
  for (const auto &path : instance_paths(inputs)) {
    const auto inst = load_instance(path);
    const long c = cap_for(inst, cap, cap_dir);
    const auto pe = evaluate_pair(inst, policies, c, cfg.bench.eval_trials, context(cfg));
    for (std::size_t i = 0; i < pe.records.size(); ++i) {
      const auto &r = pe.records[i];
      write_trials_jsonl(trials, inst.id, r.policy, c, pe.trials[i]);
      std::printf("%s  %-9s  cap=%ld  SR=%.3f  median=%.0f  reduction=%.3f\n", inst.id.c_str(),
                  r.policy.c_str(), c, r.stats.success_rate, r.stats.median_shots,
                  r.reduction_median);
      records.push_back(r);
    }
  }
  std::ofstream csv(fs::path(out_dir) / "results.csv");
  write_records_csv(csv, records);
  return kOk;
}

void print_rows(std::ostream &out, const std::string &title, const std::vector<AggregateRow> &rows) {
  out << title << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "  %-14s %-10s %5s %7s %9s %9s\n", "group", "policy", "pairs",
                "SR", "reduction", "ESP ratio");
  out << line;
  for (const auto &r : rows) {
    char esp[32] = "n/a";
    if (r.mean_esp_ratio) std::snprintf(esp, sizeof esp, "%.3f", *r.mean_esp_ratio);
    std::snprintf(line, sizeof line, "  %-14s %-10s %5d %7.3f %9.3f %9s\n", r.group.c_str(),
                  r.policy.c_str(), r.pairs, r.mean_success_rate, r.mean_reduction, esp);
    out << line;
  }
  out << '\n';
}

int cmd_report(const RunConfig &cfg, const std::string &results_dir, const std::string &out_dir) {
  require_dir(results_dir);
  std::vector<EvaluationRecord> records;
  std::vector<fs::path> files;
  for (const auto &e : fs::recursive_directory_iterator(results_dir))
    if (e.path().filename() == "results.csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto &f : files) {
    std::ifstream in(f);
    const auto rs = read_records_csv(in);
    records.insert(records.end(), rs.begin(), rs.end());
  }
  const auto filtered = operational_filter(records, cfg.bench.operational_floor);
  const auto &op = filtered.operational;

  fs::create_directories(out_dir);
  const auto emit = [&](const std::string &name, const std::vector<AggregateRow> &rows) {
    std::ofstream out(fs::path(out_dir) / name);
    write_aggregate_csv(out, rows);
  };
  const auto all_complete = aggregate(records, group_all());
  const auto all_op = aggregate(op, group_all());
  const auto by_cat = aggregate(op, group_by_category());
  const auto by_size = aggregate(op, group_by_size());
  emit("aggregate_complete.csv", all_complete);
  emit("aggregate_operational.csv", all_op);
  emit("aggregate_category.csv", by_cat);
  emit("aggregate_size.csv", by_size);

  std::set<std::string> names;
  for (const auto &r : op) names.insert(r.policy);
  std::ofstream cov(fs::path(out_dir) / "coverage.csv");
  cov << "first,second,tau,pairs,first_count,second_count,delta\n";
  const std::vector<double> taus{0.90, 0.92, 0.94, 0.95};
  for (const auto &a : names)
    for (const auto &b : names) {
      if (a >= b) continue;
      for (const auto &c : sr_floor_coverage(op, a, b, taus))
        cov << a << ',' << b << ',' << c.tau << ',' << c.pairs << ',' << c.first << ','
            << c.second << ',' << c.delta << '\n';
    }

  std::ofstream summary(fs::path(out_dir) / "summary.txt");
  auto &out = summary;
  out << "records: " << records.size() << " (operational " << op.size() << ", excluded "
      << filtered.excluded.size() << ")\n\n";
  print_rows(out, "Operational subset", all_op);
  print_rows(out, "Complete benchmark", all_complete);
  print_rows(out, "By category (operational)", by_cat);
  print_rows(out, "By size (operational)", by_size);
  summary.close();
  std::ifstream again(fs::path(out_dir) / "summary.txt");
  std::cout << again.rdbuf();
  return kOk;
}

int cmd_oracle_check(int n_max, int cases, std::uint64_t seed, const std::string &mutate) {
  OracleCheckOptions o;
  o.n_max = n_max;
  o.cases = cases;
  o.seed = seed;
  o.mutate = oracle_mutation_from_string(mutate);
  const auto r = run_oracle_check(o);
  std::printf("closed form vs statevector: %d cases, n <= %d, max |diff| = %.3e\n", r.cases,
              n_max, r.max_abs_error);
  std::printf("two-qubit worked state: max |diff| = %.3e\n", r.two_qubit_error);
  for (const auto &l : r.estimator)
    std::printf("estimator %-19s k=%-5ld mean-M=%+.5f  var/pred=%.3f  %s\n", l.mode.c_str(), l.k,
                l.mean - l.truth, l.variance / l.predicted_variance, l.ok ? "ok" : "FAIL");
  std::printf("%s\n", r.passed ? "PASS" : "FAIL");
  return r.passed ? kOk : kValidation;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Adaptive shot allocation for depth-1 recursive QAOA on weighted Max-Cut"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (overrides [run] master_seed)");
  app.add_option("--jobs", jobs, "worker threads for trials")->check(CLI::PositiveNumber);

  int n = 14, d = 8, count = 1;
  std::uint64_t gen_seed = 0;
  std::string out;
  auto *gen = app.add_subcommand("gen", "generate d-regular Gaussian instances");
  gen->add_option("-n", n, "nodes")->required();
  gen->add_option("-d", d, "degree")->required();
  gen->add_option("--count", count, "instances")->check(CLI::PositiveNumber);
  gen->add_option("--first-seed", gen_seed, "generator seed of the first instance");
  gen->add_option("--out", out, "output directory")->required();

  std::vector<std::string> inputs;
  auto *screen = app.add_subcommand("screen", "mark instances hard or easy (in place)");
  screen->add_option("inputs", inputs, "instance files or directories")->required();

  std::string cap_out;
  auto *calib = app.add_subcommand("calibrate", "find the smallest cap with uniform SR >= target");
  calib->add_option("inputs", inputs, "instance files or directories")->required();
  calib->add_option("--out", cap_out, "directory for <id>.cap.json (default: next to input)");

  std::string instance, cap_dir, preset;
  long cap = 0;
  auto *tr = app.add_subcommand("train", "train the residual controller on one instance");
  tr->add_option("instance", instance, "instance file")->required();
  tr->add_option("--cap", cap, "per-step cap")->check(CLI::PositiveNumber);
  tr->add_option("--caps", cap_dir, "directory holding <id>.cap.json");
  tr->add_option("--preset", preset, "standard or aggressive (overrides [train] preset)");
  tr->add_option("--out", out, "checkpoint file")->required();

  std::vector<std::string> policies{"uniform", "heuristic"};
  std::string checkpoint;
  auto *ev = app.add_subcommand("eval", "evaluate policies against uniform at the same cap");
  ev->add_option("inputs", inputs, "instance files or directories")->required();
  ev->add_option("--policies", policies, "uniform, heuristic, rl")->delimiter(',');
  ev->add_option("--checkpoint", checkpoint, "trained policy for rl");
  ev->add_option("--cap", cap, "one cap for every instance")->check(CLI::PositiveNumber);
  ev->add_option("--caps", cap_dir, "directory holding <id>.cap.json");
  ev->add_option("--out", out, "output directory")->required();

  std::string results;
  auto *rep = app.add_subcommand("report", "aggregate tables from eval results");
  rep->add_option("results", results, "directory searched for results.csv")->required();
  rep->add_option("--out", out, "output directory")->required();

  int n_max = 12, cases = 200;
  std::uint64_t oracle_seed = 1;
  std::string mutate = "none";
  auto *oc = app.add_subcommand("oracle-check", "closed form vs statevector, estimator stats");
  oc->add_option("--n-max", n_max, "largest graph size")->check(CLI::Range(2, 22));
  oc->add_option("--cases", cases, "random (graph, angle) cases");
  oc->add_option("--oracle-seed", oracle_seed, "case generator seed");
  oc->add_option("--mutate", mutate, "none, beta-sign or offset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) cfg.master_seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (!preset.empty()) cfg.train = TrainConfig::from_preset(preset);

    if (*gen) return cmd_gen(cfg, n, d, count, gen_seed, out);
    if (*screen) return cmd_screen(cfg, inputs);
    if (*calib) return cmd_calibrate(cfg, inputs, cap_out);
    if (*tr) return cmd_train(cfg, instance, cap, cap_dir, out);
    if (*ev) return cmd_eval(cfg, inputs, policies, checkpoint, cap, cap_dir, out);
    if (*rep) return cmd_report(cfg, results, out);
    if (*oc) return cmd_oracle_check(n_max, cases, oracle_seed, mutate);
  } catch (const MissingInput &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUpstream;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
