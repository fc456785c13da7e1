#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rqshot/driver.hpp"
#include "rqshot/qtable.hpp"

namespace rqshot {

struct TrainConfig {
  std::string preset = "standard";
  double alpha = 0.15;
  double discount = 0.97;
  double eps_start = 1.0;
  double eps_min = 0.02;
  double eps_decay = 0.995;
  int episodes = 1200;
  double lambda0 = 2.0;
  double mu_lambda = 1.0;
  double lambda_max = 80.0;
  double ema_beta = 0.10;
  int warmup = 100;
  double p_star = 0.95;
  double eta = 1.0;
  double extra_fail_penalty = 0.0;
  int validation_every = 50;
  int validation_trials = 20;
  int evaluation_trials = 60;

  static TrainConfig standard();
  /// lambda0 8, lambda_max 150, mu 2, warm-up 50, extra fail penalty 5,
  /// 2400 episodes, 100 evaluation trials.
  static TrainConfig aggressive();
  static TrainConfig from_preset(const std::string &name);

  friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

void to_json(nlohmann::json &j, const TrainConfig &c);
void from_json(const nlohmann::json &j, TrainConfig &c);

/// Success-rate multiplier: held at lambda0 for the warm-up episodes, then
/// moved by mu * (p* - p_hat) with p_hat an EMA of episode success.
struct LagrangianController {
  double lambda = 2.0;
  double p_hat = 0.95;
  int episodes = 0;

  static LagrangianController from(const TrainConfig &c) { return {c.lambda0, c.p_star, 0}; }
};

/// Records one finished episode.
void lambda_update(LagrangianController &ctrl, int sigma, const TrainConfig &c);

/// Epsilon-greedy over Q1 + Q2 with the greedy tie-break.
int select_action(const QTables &tables, const DiscreteState &s, double epsilon, Rng &rng);

/// Double Q-learning update of one randomly chosen table. `next` is empty for
/// a terminal transition (bootstrap value 0).
void double_q_update(QTables &tables, const DiscreteState &s, int action, double reward,
                     const std::optional<DiscreteState> &next, double alpha, double discount,
                     Rng &rng);

/// -eta * k / C.
double step_reward(long shots, long cap, double eta = 1.0);
/// -(lambda + extra) * (1 - sigma).
double terminal_penalty(int sigma, double lambda, double extra_fail_penalty = 0.0);

double epsilon_after(int episodes, const TrainConfig &c);

struct ValidationPoint {
  int episode = 0;
  double success_rate = 0.0;
  double median_shots = 0.0;
  double mean_shots = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
};

/// True when `a` beats `b`: higher SR, then lower median, then lower mean.
bool better_checkpoint(const ValidationPoint &a, const ValidationPoint &b);

inline constexpr int kCheckpointFormatVersion = 1;

struct PolicyCheckpoint {
  QTables tables;
  TrainConfig config;
  BinBoundaries bins;
  ZgapVariant zgap_variant = ZgapVariant::literal;
  int n_c = 8;
  int k_top = 3;
  std::string instance_id;
  long cap = 0;
  ValidationPoint selected;
  std::vector<double> lambda_trace; // lambda after each episode
  std::vector<int> success_trace;
  std::vector<long> shots_trace;
  std::vector<ValidationPoint> validation_history;

  Policy policy(std::string label = "rl") const;
  /// Throws CheckpointError if the state encoding differs from `cfg`.
  void check_compatible(const EpisodeConfig &cfg) const;
};

nlohmann::json to_json(const PolicyCheckpoint &c);
PolicyCheckpoint checkpoint_from_json(const nlohmann::json &j);
void save_checkpoint(const PolicyCheckpoint &c, const std::string &path);
PolicyCheckpoint load_checkpoint(const std::string &path);

struct TrainInputs {
  const WeightedGraph &graph;
  double e_opt = 0.0;
  std::string instance_id;
  long cap = 0;
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

/// Progress callback, called after every validation.
using TrainObserver = std::function<void(const ValidationPoint &)>;

/// Online residual Double Q-learning under the Lagrangian success constraint.
/// The greedy policy is validated at episode 0 and every validation_every
/// episodes on fixed trial seeds; the best validated snapshot is returned.
PolicyCheckpoint train(const TrainInputs &in, const TrainConfig &tc, const EpisodeConfig &ec,
                       const TrainObserver &observer = {});

/// SR / median / mean total shots of the greedy policy over `trials` seeded
/// episodes (label selects the seed stream).
ValidationPoint evaluate_greedy(const WeightedGraph &g, double e_opt, const Policy &policy,
                                long cap, const EpisodeConfig &ec, std::uint64_t master_seed,
                                const std::string &instance_id, const std::string &label,
                                int trials, int jobs);

} // namespace rqshot
