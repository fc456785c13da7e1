#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rqshot/driver.hpp"
#include "rqshot/instance_io.hpp"

namespace rqshot {

inline constexpr double kHardRatio = 0.95;
inline constexpr std::array<long, 7> kCapGrid{64, 128, 256, 512, 1024, 2048, 4096};
inline constexpr long kCapResolution = 16;

/// What a benchmark run needs besides the instance: episode settings, the
/// master seed and the thread count.
struct RunContext {
  EpisodeConfig episode;
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

struct TrialRecord {
  int trial = 0;
  int sigma = 0;
  long total_shots = 0;
  double approx_ratio = 0.0;
};

/// Runs `trials` seeded episodes; trial t uses stream (instance id, label, t).
std::vector<TrialRecord> run_trials(const InstanceRecord &inst, const Policy &policy, long cap,
                                    int trials, const std::string &label, const RunContext &ctx);

// ---- Screening and calibration ---------------------------------------------

struct ScreenResult {
  bool hard = false;
  double mean_ratio = 0.0;
  double success_rate = 0.0;
  long cap = 0;
  int trials = 0;
};

/// Hard iff mean approximation ratio <= 0.95 (inclusive).
bool is_hard(double mean_ratio);

/// Uniform allocation over N trials at a reference cap; cap 0 means the probe
/// shot count, so every step runs on its probe sample alone.
ScreenResult hard_screen(const InstanceRecord &inst, const RunContext &ctx, int trials = 60,
                         long cap = 0);

struct CalibrationResult {
  long cap = 0;
  bool budget_limited = false;
  std::vector<std::pair<long, double>> probes; // (cap, uniform SR) in probe order
};

/// Smallest cap with uniform SR >= target: ascending power-of-two scan over
/// 64..4096, then binary search at 16-shot resolution inside the bracket, every
/// probe on fresh trials. `label` keys the seed streams, so repeated
/// calibrations use different labels.
CalibrationResult calibrate_cap(const InstanceRecord &inst, const RunContext &ctx,
                                int trials = 60, double target = 0.95,
                                const std::string &label = "calibrate");

// ---- Metrics ---------------------------------------------------------------

/// Per-method statistics over one batch of trials.
struct MethodStats {
  int trials = 0;
  double success_rate = 0.0;
  double median_shots = 0.0;
  double mean_shots = 0.0;
  double p90_shots = 0.0;
  std::optional<double> median_success_shots;
  std::optional<double> esp;          // median success shots / SR
  std::optional<double> restart_cost; // mean shots / SR
};

MethodStats method_stats(const std::vector<TrialRecord> &trials);

/// 1 - method / uniform.
double reduction(double method, double uniform);

struct EvaluationRecord {
  std::string instance_id;
  std::string category;
  int n = 0;
  int d = 0;
  std::string policy;
  long cap = 0;
  MethodStats stats;
  std::optional<double> esp_ratio;
  double reduction_median = 0.0;
  double reduction_mean = 0.0;
  double reduction_p90 = 0.0;
  std::optional<double> reduction_restart;
};

/// Fills the uniform-relative fields of `method` from `uniform`.
EvaluationRecord compare_to_uniform(EvaluationRecord method, const MethodStats &uniform);

struct PairEvaluation {
  std::vector<EvaluationRecord> records; // one per policy, uniform first
  std::vector<std::vector<TrialRecord>> trials;
};

/// Every policy at the same cap on N trials; uniform is always run and
/// reported first. Seed streams are keyed by policy name.
PairEvaluation evaluate_pair(const InstanceRecord &inst, const std::vector<Policy> &policies,
                             long cap, int trials, const RunContext &ctx);

struct FilterResult {
  std::vector<EvaluationRecord> operational;
  std::vector<EvaluationRecord> excluded;
};

/// Keeps records of instances whose uniform SR >= floor (inclusive).
FilterResult operational_filter(const std::vector<EvaluationRecord> &records, double floor = 0.90);

struct Coverage {
  double tau = 0.0;
  int pairs = 0;
  int first = 0;
  int second = 0;
  int delta = 0; // first - second
};

/// For each threshold, the number of instances where each policy reaches
/// SR >= tau; only instances evaluated under both policies count.
std::vector<Coverage> sr_floor_coverage(const std::vector<EvaluationRecord> &records,
                                        const std::string &first, const std::string &second,
                                        const std::vector<double> &thresholds);

struct AggregateRow {
  std::string group;
  std::string policy;
  int pairs = 0;
  double mean_success_rate = 0.0;
  double mean_reduction = 0.0;
  double mean_reduction_mean = 0.0;
  double mean_reduction_p90 = 0.0;
  std::optional<double> mean_reduction_restart;
  std::optional<double> mean_esp_ratio;
  int undefined_esp = 0;
};

using GroupKey = std::function<std::string(const EvaluationRecord &)>;

GroupKey group_all();
GroupKey group_by_category();
GroupKey group_by_size();

/// Means per (group, policy), rows sorted by group then policy. Pairs with an
/// undefined ESP ratio are left out of the ESP mean and counted instead.
std::vector<AggregateRow> aggregate(const std::vector<EvaluationRecord> &records,
                                    const GroupKey &key);

// ---- Files -----------------------------------------------------------------

void write_records_csv(std::ostream &out, const std::vector<EvaluationRecord> &records);
std::vector<EvaluationRecord> read_records_csv(std::istream &in);
void write_aggregate_csv(std::ostream &out, const std::vector<AggregateRow> &rows);
void write_trials_jsonl(std::ostream &out, const std::string &instance_id,
                        const std::string &policy, long cap,
                        const std::vector<TrialRecord> &trials);

} // namespace rqshot
