#pragma once

#include <array>
#include <memory>
#include <string>

#include "rqshot/features.hpp"
#include "rqshot/qtable.hpp"

namespace rqshot {

/// Fractions of the cap, in percent so that rounding stays exact.
inline constexpr std::array<int, 6> kLadderPercent{20, 35, 50, 65, 80, 100};
inline constexpr int kLadderTop = static_cast<int>(kLadderPercent.size()) - 1;

inline double ladder_fraction(int index) {
  return kLadderPercent.at(static_cast<std::size_t>(index)) / 100.0;
}

struct AllocationDecision {
  int baseline_index = 0;
  int residual = 0;
  int final_index = 0;
  long shots = 0;
};

/// Hand-crafted ladder index from (zeta, kappa, d), cases checked top-down.
/// An unreachable distance counts as infinitely far.
int heuristic_index(const StepState &s);

/// f = clip(b + a, 0, 5), shots = max(k_probe, round(F[f] * C)) with halves
/// rounded away from zero.
AllocationDecision compose(int baseline_index, int residual, long cap, int k_probe);

long uniform_allocation(long cap);

enum class PolicyKind { uniform, heuristic, rl };

std::string to_string(PolicyKind k);

/// Immutable allocation policy. The rl kind carries the twin Q-tables and the
/// binning they were trained under.
struct Policy {
  PolicyKind kind = PolicyKind::uniform;
  std::shared_ptr<const QTables> tables;
  BinBoundaries bins;
  std::string label;

  static Policy uniform();
  static Policy heuristic();
  static Policy rl(std::shared_ptr<const QTables> tables, BinBoundaries trained_bins,
                   std::string label = "rl");

  std::string name() const { return label.empty() ? to_string(kind) : label; }
};

/// Throws CheckpointError when an rl policy was trained under other bins.
void check_binning(const Policy &p, const BinBoundaries &current);

/// Greedy allocation for one step. `ds` must be discretized under the bins the
/// rl policy was trained with.
AllocationDecision policy_allocate(const Policy &p, const StepState &s, const DiscreteState &ds,
                                   long cap, int k_probe);

} // namespace rqshot
