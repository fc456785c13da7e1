#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "rqshot/allocation.hpp"
#include "rqshot/features.hpp"
#include "rqshot/instance.hpp"
#include "rqshot/qaoa.hpp"

namespace rqshot {

inline constexpr double kDefaultRhoStar = 0.99;

/// Settings shared by every episode of a run.
struct EpisodeConfig {
  int n_c = 8;
  SamplingMode mode = SamplingMode::statevector_sampled;
  int statevector_threshold = 20;
  BinBoundaries bins;
  ZgapVariant zgap_variant = ZgapVariant::literal;
  int k_top = 3;
  double rho_star = kDefaultRhoStar;
  AngleSearchOptions angle_search;
};

struct StepLog {
  int t = 0; // 1-based
  int m = 0;
  StepState raw;
  DiscreteState discrete;
  AllocationDecision allocation;
  ContractionRecord contraction;
  Angles angles;
  double top1 = 0.0; // largest |M| of the main estimate
  double top2 = 0.0;
  bool trivial = false; // padding after the graph ran out of edges
};

struct EpisodeResult {
  std::vector<StepLog> steps;
  long total_shots = 0;
  double e_out = 0.0;
  double e_opt = 0.0;
  int sigma = 0;
  double approx_ratio = 0.0;
  bool edges_exhausted = false;
  bool binomial_fallback = false;
  Spins assignment;
};

/// What an allocator sees before deciding the shot budget of a step.
struct StepContext {
  int t = 0;
  const StepState &raw;
  const DiscreteState &discrete;
  int baseline_index = 0;
  long cap = 0;
  int k_probe = 0;
};

using Allocator = std::function<AllocationDecision(const StepContext &)>;

Allocator policy_allocator(const Policy &policy);

/// Edge with the largest |M| (ties lexicographic); eliminates the larger id.
ContractionRecord select_edge(const CorrelationEstimate &est);

/// 1 iff e_out / e_opt >= rho_star. Throws InvalidInstanceError for e_opt <= 0.
int success(double e_out, double e_opt, double rho_star = kDefaultRhoStar);

/// One full RQAOA run: per step optimize angles, probe, allocate, estimate
/// from the pooled shots, contract; then solve the residual exactly.
EpisodeResult run_episode(const WeightedGraph &g, double e_opt, const Allocator &allocate,
                          long cap, const EpisodeConfig &cfg, Rng &rng);

EpisodeResult run_episode(const WeightedGraph &g, double e_opt, const Policy &policy, long cap,
                          const EpisodeConfig &cfg, Rng &rng);

nlohmann::json to_json(const StepLog &s);
/// Summary record (no per-step logs).
nlohmann::json summary_json(const EpisodeResult &r);

/// One StepLog per line followed by a summary line tagged "type": "summary".
void write_episode_jsonl(std::ostream &out, const EpisodeResult &r);

} // namespace rqshot
