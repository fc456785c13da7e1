#include "rqshot/benchmark.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>
#include <set>

#include <boost/tokenizer.hpp>

#include "rqshot/errors.hpp"
#include "rqshot/parallel.hpp"
#include "rqshot/seeding.hpp"
#include "rqshot/stats.hpp"

namespace rqshot {

namespace {

// Guards >= comparisons of rates such as 57/60 against a literal 0.95.
constexpr double kRateSlack = 1e-12;

bool at_least(double rate, double floor) { return rate + kRateSlack >= floor; }

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string opt_num(const std::optional<double> &x) { return x ? num(*x) : std::string(); }

std::optional<double> parse_opt(const std::string &s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

std::optional<double> mean_of_defined(const std::vector<std::optional<double>> &xs, int &missing) {
  std::vector<double> v;
  missing = 0;
  for (const auto &x : xs) {
    if (x) v.push_back(*x);
    else ++missing;
  }
  if (v.empty()) return std::nullopt;
  return mean(v);
}

} // namespace

std::vector<TrialRecord> run_trials(const InstanceRecord &inst, const Policy &policy, long cap,
                                    int trials, const std::string &label, const RunContext &ctx) {
  check_binning(policy, ctx.episode.bins);
  const auto alloc = policy_allocator(policy);
  return parallel_map(trials, ctx.jobs, [&](int t) {
    auto rng = make_rng(ctx.master_seed, inst.id, label, static_cast<std::uint64_t>(t));
    const auto r = run_episode(inst.graph, inst.e_opt, alloc, cap, ctx.episode, rng);
    return TrialRecord{t, r.sigma, r.total_shots, r.approx_ratio};
  });
}

bool is_hard(double mean_ratio) { return mean_ratio <= kHardRatio; }

ScreenResult hard_screen(const InstanceRecord &inst, const RunContext &ctx, int trials, long cap) {
  if (cap == 0) cap = probe_shot_count(inst.n);
  const auto runs = run_trials(inst, Policy::uniform(), cap, trials, "screen", ctx);
  std::vector<double> ratios;
  int wins = 0;
  for (const auto &t : runs) {
    ratios.push_back(t.approx_ratio);
    wins += t.sigma;
  }
  ScreenResult s;
  s.mean_ratio = mean(ratios);
  s.success_rate = static_cast<double>(wins) / trials;
  s.hard = is_hard(s.mean_ratio);
  s.cap = cap;
  s.trials = trials;
  return s;
}

CalibrationResult calibrate_cap(const InstanceRecord &inst, const RunContext &ctx, int trials,
                                double target, const std::string &label) {
  CalibrationResult res;
  auto passes = [&](long cap) {
    const auto runs =
        run_trials(inst, Policy::uniform(), cap, trials, label + "/" + std::to_string(cap), ctx);
    int wins = 0;
    for (const auto &t : runs) wins += t.sigma;
    const double sr = static_cast<double>(wins) / trials;
    res.probes.emplace_back(cap, sr);
    return at_least(sr, target);
  };

  long hi = 0;
  for (long cap : kCapGrid)
    if (passes(cap)) {
      hi = cap;
      break;
    }
  if (hi == 0) {
    res.cap = kCapGrid.back();
    res.budget_limited = true;
    return res;
  }
  if (hi == kCapGrid.front()) {
    res.cap = hi;
    return res;
  }
  long lo = hi / 2; // failed
  while (hi - lo > kCapResolution) {
    const long mid = lo + kCapResolution * ((hi - lo) / (2 * kCapResolution));
    if (passes(mid)) hi = mid;
    else lo = mid;
  }
  res.cap = hi;
  return res;
}

MethodStats method_stats(const std::vector<TrialRecord> &trials) {
  if (trials.empty()) throw ConfigError("no trials to summarize");
  MethodStats m;
  m.trials = static_cast<int>(trials.size());
  std::vector<double> shots, success_shots;
  int wins = 0;
  for (const auto &t : trials) {
    shots.push_back(static_cast<double>(t.total_shots));
    if (t.sigma) success_shots.push_back(static_cast<double>(t.total_shots));
    wins += t.sigma;
  }
  m.success_rate = static_cast<double>(wins) / m.trials;
  m.median_shots = median(shots);
  m.mean_shots = mean(shots);
  m.p90_shots = quantile(shots, 0.9);
  if (wins > 0) {
    m.median_success_shots = median(success_shots);
    m.esp = *m.median_success_shots / m.success_rate;
    m.restart_cost = m.mean_shots / m.success_rate;
  }
  return m;
}

double reduction(double method, double uniform) {
  if (!(uniform > 0.0)) throw ConfigError("uniform reference must be positive");
  return 1.0 - method / uniform;
}

EvaluationRecord compare_to_uniform(EvaluationRecord r, const MethodStats &u) {
  r.reduction_median = reduction(r.stats.median_shots, u.median_shots);
  r.reduction_mean = reduction(r.stats.mean_shots, u.mean_shots);
  r.reduction_p90 = reduction(r.stats.p90_shots, u.p90_shots);
  r.esp_ratio.reset();
  r.reduction_restart.reset();
  if (r.stats.esp && u.esp) r.esp_ratio = *r.stats.esp / *u.esp;
  if (r.stats.restart_cost && u.restart_cost)
    r.reduction_restart = reduction(*r.stats.restart_cost, *u.restart_cost);
  return r;
}

PairEvaluation evaluate_pair(const InstanceRecord &inst, const std::vector<Policy> &policies,
                             long cap, int trials, const RunContext &ctx) {
  std::vector<Policy> order{Policy::uniform()};
  for (const auto &p : policies)
    if (p.kind != PolicyKind::uniform) order.push_back(p);
  std::set<std::string> names;
  for (const auto &p : order)
    if (!names.insert(p.name()).second)
      throw ConfigError("duplicate policy name '" + p.name() + "'");

  PairEvaluation out;
  MethodStats uniform;
  for (const auto &p : order) {
    auto runs = run_trials(inst, p, cap, trials, "eval/" + p.name(), ctx);
    EvaluationRecord r;
    r.instance_id = inst.id;
    r.category = inst.category;
    r.n = inst.n;
    r.d = inst.d;
    r.policy = p.name();
    r.cap = cap;
    r.stats = method_stats(runs);
    if (p.kind == PolicyKind::uniform) uniform = r.stats;
    out.records.push_back(compare_to_uniform(r, uniform));
    out.trials.push_back(std::move(runs));
  }
  return out;
}

FilterResult operational_filter(const std::vector<EvaluationRecord> &records, double floor) {
  std::map<std::string, double> uniform_sr;
  for (const auto &r : records)
    if (r.policy == "uniform") uniform_sr[r.instance_id] = r.stats.success_rate;
  FilterResult f;
  for (const auto &r : records) {
    const auto it = uniform_sr.find(r.instance_id);
    if (it != uniform_sr.end() && at_least(it->second, floor)) f.operational.push_back(r);
    else f.excluded.push_back(r);
  }
  return f;
}

std::vector<Coverage> sr_floor_coverage(const std::vector<EvaluationRecord> &records,
                                        const std::string &first, const std::string &second,
                                        const std::vector<double> &thresholds) {
  std::map<std::string, double> a, b;
  for (const auto &r : records) {
    if (r.policy == first) a[r.instance_id] = r.stats.success_rate;
    if (r.policy == second) b[r.instance_id] = r.stats.success_rate;
  }
  std::vector<Coverage> out;
  for (double tau : thresholds) {
    Coverage c;
    c.tau = tau;
    for (const auto &[id, sr] : a) {
      const auto it = b.find(id);
      if (it == b.end()) continue;
      ++c.pairs;
      c.first += at_least(sr, tau);
      c.second += at_least(it->second, tau);
    }
    c.delta = c.first - c.second;
    out.push_back(c);
  }
  return out;
}

GroupKey group_all() {
  return [](const EvaluationRecord &) { return std::string("all"); };
}
GroupKey group_by_category() {
  return [](const EvaluationRecord &r) { return r.category; };
}
GroupKey group_by_size() {
  return [](const EvaluationRecord &r) { return "n=" + std::to_string(r.n); };
}

std::vector<AggregateRow> aggregate(const std::vector<EvaluationRecord> &records,
                                    const GroupKey &key) {
  std::map<std::pair<std::string, std::string>, std::vector<const EvaluationRecord *>> groups;
  for (const auto &r : records) groups[{key(r), r.policy}].push_back(&r);
  std::vector<AggregateRow> rows;
  for (const auto &[k, rs] : groups) {
    AggregateRow row;
    row.group = k.first;
    row.policy = k.second;
    row.pairs = static_cast<int>(rs.size());
    std::vector<double> sr, red, red_mean, red_p90;
    std::vector<std::optional<double>> esp, restart;
    for (const auto *r : rs) {
      sr.push_back(r->stats.success_rate);
      red.push_back(r->reduction_median);
      red_mean.push_back(r->reduction_mean);
      red_p90.push_back(r->reduction_p90);
      esp.push_back(r->esp_ratio);
      restart.push_back(r->reduction_restart);
    }
    row.mean_success_rate = mean(sr);
    row.mean_reduction = mean(red);
    row.mean_reduction_mean = mean(red_mean);
    row.mean_reduction_p90 = mean(red_p90);
    int unused = 0;
    row.mean_reduction_restart = mean_of_defined(restart, unused);
    row.mean_esp_ratio = mean_of_defined(esp, row.undefined_esp);
    rows.push_back(row);
  }
  return rows;
}

namespace {
const char *kRecordHeader = "instance_id,category,n,d,policy,cap,SR,median_shots,mean_shots,"
                            "p90_shots,esp,esp_ratio,reduction,restart_cost";
}

void write_records_csv(std::ostream &out, const std::vector<EvaluationRecord> &records) {
  out << kRecordHeader << '\n';
  for (const auto &r : records)
    out << r.instance_id << ',' << r.category << ',' << r.n << ',' << r.d << ',' << r.policy << ','
        << r.cap << ',' << num(r.stats.success_rate) << ',' << num(r.stats.median_shots) << ','
        << num(r.stats.mean_shots) << ',' << num(r.stats.p90_shots) << ',' << opt_num(r.stats.esp)
        << ',' << opt_num(r.esp_ratio) << ',' << num(r.reduction_median) << ','
        << opt_num(r.stats.restart_cost) << '\n';
}

std::vector<EvaluationRecord> read_records_csv(std::istream &in) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<EvaluationRecord> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (line != kRecordHeader) throw ConfigError("unexpected results header: " + line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Tokenizer tok(line);
    const std::vector<std::string> f(tok.begin(), tok.end());
    if (f.size() != 14) throw ConfigError("results row has " + std::to_string(f.size()) + " fields");
    EvaluationRecord r;
    r.instance_id = f[0];
    r.category = f[1];
    r.n = std::stoi(f[2]);
    r.d = std::stoi(f[3]);
    r.policy = f[4];
    r.cap = std::stol(f[5]);
    r.stats.success_rate = std::stod(f[6]);
    r.stats.median_shots = std::stod(f[7]);
    r.stats.mean_shots = std::stod(f[8]);
    r.stats.p90_shots = std::stod(f[9]);
    r.stats.esp = parse_opt(f[10]);
    r.esp_ratio = parse_opt(f[11]);
    r.reduction_median = std::stod(f[12]);
    r.stats.restart_cost = parse_opt(f[13]);
    out.push_back(r);
  }
  // Secondary reductions are derived again from the uniform row of each instance.
  std::map<std::string, MethodStats> uniform;
  for (const auto &r : out)
    if (r.policy == "uniform") uniform[r.instance_id] = r.stats;
  for (auto &r : out) {
    const auto it = uniform.find(r.instance_id);
    if (it != uniform.end()) r = compare_to_uniform(r, it->second);
  }
  return out;
}

void write_aggregate_csv(std::ostream &out, const std::vector<AggregateRow> &rows) {
  out << "group,policy,pairs,mean_SR,mean_reduction,mean_reduction_mean,mean_reduction_p90,"
         "mean_reduction_restart,mean_esp_ratio,undefined_esp\n";
  for (const auto &r : rows)
    out << r.group << ',' << r.policy << ',' << r.pairs << ',' << num(r.mean_success_rate) << ','
        << num(r.mean_reduction) << ',' << num(r.mean_reduction_mean) << ','
        << num(r.mean_reduction_p90) << ',' << opt_num(r.mean_reduction_restart) << ','
        << opt_num(r.mean_esp_ratio) << ',' << r.undefined_esp << '\n';
}

void write_trials_jsonl(std::ostream &out, const std::string &instance_id,
                        const std::string &policy, long cap,
                        const std::vector<TrialRecord> &trials) {
  for (const auto &t : trials) {
    const nlohmann::json j = {{"instance_id", instance_id}, {"policy", policy},
                              {"cap", cap},                 {"trial", t.trial},
                              {"sigma", t.sigma},           {"total_shots", t.total_shots},
                              {"approx_ratio", t.approx_ratio}};
    out << j.dump() << '\n';
  }
}

} // namespace rqshot
