#include "rqshot/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rqshot/errors.hpp"
#include "rqshot/parallel.hpp"
#include "rqshot/seeding.hpp"
#include "rqshot/stats.hpp"

namespace rqshot {

TrainConfig TrainConfig::standard() { return {}; }

TrainConfig TrainConfig::aggressive() {
  TrainConfig c;
  c.preset = "aggressive";
  c.lambda0 = 8.0;
  c.lambda_max = 150.0;
  c.mu_lambda = 2.0;
  c.warmup = 50;
  c.extra_fail_penalty = 5.0;
  c.episodes = 2400;
  c.evaluation_trials = 100;
  return c;
}

TrainConfig TrainConfig::from_preset(const std::string &name) {
  if (name == "standard") return standard();
  if (name == "aggressive") return aggressive();
  throw ConfigError("unknown training preset '" + name + "'");
}

void to_json(nlohmann::json &j, const TrainConfig &c) {
  j = {{"preset", c.preset},
       {"alpha", c.alpha},
       {"discount", c.discount},
       {"eps_start", c.eps_start},
       {"eps_min", c.eps_min},
       {"eps_decay", c.eps_decay},
       {"episodes", c.episodes},
       {"lambda0", c.lambda0},
       {"mu_lambda", c.mu_lambda},
       {"lambda_max", c.lambda_max},
       {"ema_beta", c.ema_beta},
       {"warmup", c.warmup},
       {"p_star", c.p_star},
       {"eta", c.eta},
       {"extra_fail_penalty", c.extra_fail_penalty},
       {"validation_every", c.validation_every},
       {"validation_trials", c.validation_trials},
       {"evaluation_trials", c.evaluation_trials}};
}

void from_json(const nlohmann::json &j, TrainConfig &c) {
  j.at("preset").get_to(c.preset);
  j.at("alpha").get_to(c.alpha);
  j.at("discount").get_to(c.discount);
  j.at("eps_start").get_to(c.eps_start);
  j.at("eps_min").get_to(c.eps_min);
  j.at("eps_decay").get_to(c.eps_decay);
  j.at("episodes").get_to(c.episodes);
  j.at("lambda0").get_to(c.lambda0);
  j.at("mu_lambda").get_to(c.mu_lambda);
  j.at("lambda_max").get_to(c.lambda_max);
  j.at("ema_beta").get_to(c.ema_beta);
  j.at("warmup").get_to(c.warmup);
  j.at("p_star").get_to(c.p_star);
  j.at("eta").get_to(c.eta);
  j.at("extra_fail_penalty").get_to(c.extra_fail_penalty);
  j.at("validation_every").get_to(c.validation_every);
  j.at("validation_trials").get_to(c.validation_trials);
  j.at("evaluation_trials").get_to(c.evaluation_trials);
}

void lambda_update(LagrangianController &ctrl, int sigma, const TrainConfig &c) {
  ++ctrl.episodes;
  if (ctrl.episodes <= c.warmup) return;
  ctrl.p_hat = (1.0 - c.ema_beta) * ctrl.p_hat + c.ema_beta * sigma;
  ctrl.lambda = std::clamp(ctrl.lambda + c.mu_lambda * (c.p_star - ctrl.p_hat), 0.0, c.lambda_max);
}

int select_action(const QTables &tables, const DiscreteState &s, double epsilon, Rng &rng) {
  if (std::bernoulli_distribution(epsilon)(rng)) {
    std::uniform_int_distribution<int> pick(0, kNumActions - 1);
    return kResidualActions[static_cast<std::size_t>(pick(rng))];
  }
  return tables.greedy_action(s);
}

void double_q_update(QTables &tables, const DiscreteState &s, int action, double reward,
                     const std::optional<DiscreteState> &next, double alpha, double discount,
                     Rng &rng) {
  const int i = std::bernoulli_distribution(0.5)(rng) ? 1 : 2;
  const int j = 3 - i;
  double target = reward;
  if (next) {
    const auto a_star = static_cast<std::size_t>(greedy_index(tables.row(i, *next)));
    target += discount * tables.row(j, *next)[a_star];
  }
  auto &q = tables.row_mut(i, s)[static_cast<std::size_t>(action_index(action))];
  q = (1.0 - alpha) * q + alpha * target;
}

double step_reward(long shots, long cap, double eta) {
  if (cap < 1) throw ConfigError("step reward needs cap >= 1");
  return -eta * static_cast<double>(shots) / static_cast<double>(cap);
}

double terminal_penalty(int sigma, double lambda, double extra_fail_penalty) {
  return sigma ? 0.0 : -(lambda + extra_fail_penalty);
}

double epsilon_after(int episodes, const TrainConfig &c) {
  double eps = c.eps_start;
  for (int e = 0; e < episodes; ++e) eps = std::max(c.eps_min, eps * c.eps_decay);
  return eps;
}

bool better_checkpoint(const ValidationPoint &a, const ValidationPoint &b) {
  if (a.success_rate != b.success_rate) return a.success_rate > b.success_rate;
  if (a.median_shots != b.median_shots) return a.median_shots < b.median_shots;
  return a.mean_shots < b.mean_shots;
}

// ---- Checkpoints -----------------------------------------------------------

namespace {

nlohmann::json bins_json(const BinBoundaries &b) {
  return {{"zeta", b.zeta}, {"kappa", b.kappa}, {"dist", b.dist}};
}

BinBoundaries bins_from(const nlohmann::json &j) {
  BinBoundaries b;
  j.at("zeta").get_to(b.zeta);
  j.at("kappa").get_to(b.kappa);
  j.at("dist").get_to(b.dist);
  return b;
}

nlohmann::json table_json(const std::map<DiscreteState, ActionValues> &q) {
  auto j = nlohmann::json::object();
  for (const auto &[s, v] : q) j[s.key()] = v;
  return j;
}

std::map<DiscreteState, ActionValues> table_from(const nlohmann::json &j) {
  std::map<DiscreteState, ActionValues> q;
  for (const auto &[k, v] : j.items()) {
    if (!v.is_array() || v.size() != kNumActions)
      throw CheckpointError("state '" + k + "' does not hold 6 action values");
    q[DiscreteState::from_key(k)] = v.get<ActionValues>();
  }
  return q;
}

nlohmann::json point_json(const ValidationPoint &p) {
  return {{"episode", p.episode},         {"success_rate", p.success_rate},
          {"median_shots", p.median_shots}, {"mean_shots", p.mean_shots},
          {"lambda", p.lambda},           {"epsilon", p.epsilon}};
}

ValidationPoint point_from(const nlohmann::json &j) {
  ValidationPoint p;
  j.at("episode").get_to(p.episode);
  j.at("success_rate").get_to(p.success_rate);
  j.at("median_shots").get_to(p.median_shots);
  j.at("mean_shots").get_to(p.mean_shots);
  j.at("lambda").get_to(p.lambda);
  j.at("epsilon").get_to(p.epsilon);
  return p;
}

} // namespace

Policy PolicyCheckpoint::policy(std::string label) const {
  return Policy::rl(std::make_shared<QTables>(tables), bins, std::move(label));
}

void PolicyCheckpoint::check_compatible(const EpisodeConfig &cfg) const {
  if (!(bins == cfg.bins)) throw CheckpointError("checkpoint bin boundaries differ from config");
  if (zgap_variant != cfg.zgap_variant)
    throw CheckpointError("checkpoint z-gap variant differs from config");
  if (n_c != cfg.n_c) throw CheckpointError("checkpoint n_c differs from config");
  if (k_top != cfg.k_top) throw CheckpointError("checkpoint k_top differs from config");
}

nlohmann::json to_json(const PolicyCheckpoint &c) {
  nlohmann::json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["qtables"] = {{"q1", table_json(c.tables.q1)}, {"q2", table_json(c.tables.q2)}};
  j["config"] = c.config;
  j["bin_boundaries"] = bins_json(c.bins);
  j["encoding"] = {{"zgap_variant", to_string(c.zgap_variant)}, {"n_c", c.n_c}, {"k_top", c.k_top}};
  j["instance_id"] = c.instance_id;
  j["cap"] = c.cap;
  j["selected"] = point_json(c.selected);
  j["lambda_trace"] = c.lambda_trace;
  j["success_trace"] = c.success_trace;
  j["shots_trace"] = c.shots_trace;
  auto hist = nlohmann::json::array();
  for (const auto &p : c.validation_history) hist.push_back(point_json(p));
  j["validation_history"] = hist;
  return j;
}

PolicyCheckpoint checkpoint_from_json(const nlohmann::json &j) {
  try {
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion)
      throw CheckpointError("unsupported checkpoint format_version");
    PolicyCheckpoint c;
    c.tables.q1 = table_from(j.at("qtables").at("q1"));
    c.tables.q2 = table_from(j.at("qtables").at("q2"));
    j.at("config").get_to(c.config);
    c.bins = bins_from(j.at("bin_boundaries"));
    const auto &enc = j.at("encoding");
    c.zgap_variant = zgap_variant_from_string(enc.at("zgap_variant").get<std::string>());
    enc.at("n_c").get_to(c.n_c);
    enc.at("k_top").get_to(c.k_top);
    j.at("instance_id").get_to(c.instance_id);
    j.at("cap").get_to(c.cap);
    c.selected = point_from(j.at("selected"));
    j.at("lambda_trace").get_to(c.lambda_trace);
    j.at("success_trace").get_to(c.success_trace);
    j.at("shots_trace").get_to(c.shots_trace);
    for (const auto &p : j.at("validation_history")) c.validation_history.push_back(point_from(p));
    return c;
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const PolicyCheckpoint &c, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint " + path);
  out << to_json(c).dump(1) << '\n';
}

PolicyCheckpoint load_checkpoint(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot read checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError("checkpoint " + path + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

// ---- Training --------------------------------------------------------------

ValidationPoint evaluate_greedy(const WeightedGraph &g, double e_opt, const Policy &policy,
                                long cap, const EpisodeConfig &ec, std::uint64_t master_seed,
                                const std::string &instance_id, const std::string &label,
                                int trials, int jobs) {
  check_binning(policy, ec.bins);
  const auto runs = parallel_map(trials, jobs, [&](int t) {
    auto rng = make_rng(master_seed, instance_id, label, static_cast<std::uint64_t>(t));
    const auto r = run_episode(g, e_opt, policy_allocator(policy), cap, ec, rng);
    return std::pair<int, double>(r.sigma, static_cast<double>(r.total_shots));
  });
  ValidationPoint p;
  std::vector<double> shots;
  int wins = 0;
  for (const auto &[sigma, s] : runs) {
    wins += sigma;
    shots.push_back(s);
  }
  p.success_rate = static_cast<double>(wins) / trials;
  p.median_shots = median(shots);
  p.mean_shots = mean(shots);
  return p;
}

PolicyCheckpoint train(const TrainInputs &in, const TrainConfig &tc, const EpisodeConfig &ec,
                       const TrainObserver &observer) {
  const int n = in.graph.node_count();
  if (in.cap < probe_shot_count(n)) throw ConfigError("cap below probe shot count");
  if (tc.validation_every < 1 || tc.validation_trials < 1)
    throw ConfigError("validation cadence and trial count must be positive");

  PolicyCheckpoint best;
  best.config = tc;
  best.bins = ec.bins;
  best.zgap_variant = ec.zgap_variant;
  best.n_c = ec.n_c;
  best.k_top = ec.k_top;
  best.instance_id = in.instance_id;
  best.cap = in.cap;

  QTables tables;
  auto ctrl = LagrangianController::from(tc);
  double eps = tc.eps_start;
  auto rng = make_rng(in.master_seed, in.instance_id, "train", 0);

  bool have_best = false;
  auto validate = [&](int episode) {
    auto v = evaluate_greedy(in.graph, in.e_opt,
                             Policy::rl(std::make_shared<QTables>(tables), ec.bins), in.cap, ec,
                             in.master_seed, in.instance_id, "validate", tc.validation_trials,
                             in.jobs);
    v.episode = episode;
    v.lambda = ctrl.lambda;
    v.epsilon = eps;
    best.validation_history.push_back(v);
    if (!have_best || better_checkpoint(v, best.selected)) {
      best.selected = v;
      best.tables = tables;
      have_best = true;
    }
    if (observer) observer(v);
  };

  validate(0);
  for (int episode = 1; episode <= tc.episodes; ++episode) {
    struct Pending {
      DiscreteState s;
      int action;
      double reward;
    };
    std::optional<Pending> pending;
    const Allocator act = [&](const StepContext &ctx) {
      if (pending)
        double_q_update(tables, pending->s, pending->action, pending->reward, ctx.discrete,
                        tc.alpha, tc.discount, rng);
      const int a = select_action(tables, ctx.discrete, eps, rng);
      const auto d = compose(ctx.baseline_index, a, ctx.cap, ctx.k_probe);
      pending = Pending{ctx.discrete, a, step_reward(d.shots, ctx.cap, tc.eta)};
      return d;
    };
    const auto r = run_episode(in.graph, in.e_opt, act, in.cap, ec, rng);
    if (pending)
      double_q_update(tables, pending->s, pending->action,
                      pending->reward + terminal_penalty(r.sigma, ctrl.lambda, tc.extra_fail_penalty),
                      std::nullopt, tc.alpha, tc.discount, rng);
    lambda_update(ctrl, r.sigma, tc);
    eps = std::max(tc.eps_min, eps * tc.eps_decay);
    best.lambda_trace.push_back(ctrl.lambda);
    best.success_trace.push_back(r.sigma);
    best.shots_trace.push_back(r.total_shots);
    if (episode % tc.validation_every == 0) validate(episode);
  }
  return best;
}

} // namespace rqshot
