#include "rqshot/allocation.hpp"

#include <algorithm>
#include <cstdlib>

#include "rqshot/errors.hpp"

namespace rqshot {

// ---- Q-tables --------------------------------------------------------------

int action_index(int residual) {
  const auto it = std::find(kResidualActions.begin(), kResidualActions.end(), residual);
  if (it == kResidualActions.end())
    throw EncodingError("residual action " + std::to_string(residual) + " outside [-3, 2]");
  return static_cast<int>(it - kResidualActions.begin());
}

int greedy_index(const ActionValues &values) {
  int best = action_index(0);
  for (int i = 0; i < kNumActions; ++i) {
    const auto ui = static_cast<std::size_t>(i), ub = static_cast<std::size_t>(best);
    if (values[ui] > values[ub]) {
      best = i;
    } else if (values[ui] == values[ub]) {
      const int ai = kResidualActions[ui], ab = kResidualActions[ub];
      if (std::abs(ai) < std::abs(ab) || (std::abs(ai) == std::abs(ab) && ai < ab)) best = i;
    }
  }
  return best;
}

ActionValues QTables::row(int table, const DiscreteState &s) const {
  const auto &q = table == 1 ? q1 : q2;
  const auto it = q.find(s);
  return it == q.end() ? ActionValues{} : it->second;
}

ActionValues &QTables::row_mut(int table, const DiscreteState &s) {
  auto &q = table == 1 ? q1 : q2;
  return q.try_emplace(s, ActionValues{}).first->second;
}

ActionValues QTables::combined(const DiscreteState &s) const {
  auto a = row(1, s);
  const auto b = row(2, s);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

int QTables::greedy_action(const DiscreteState &s) const {
  return kResidualActions[static_cast<std::size_t>(greedy_index(combined(s)))];
}

// ---- Allocation ------------------------------------------------------------

int heuristic_index(const StepState &s) {
  constexpr int kFar = 1 << 20;
  const int d = s.dist.value_or(kFar);
  if (s.zeta >= 4.0 && s.kappa < 0.10 && d >= 3) return 0;
  if (s.zeta >= 2.0 && s.kappa < 0.20 && d >= 2) return 1;
  if (s.zeta < 0.9 && (s.kappa >= 0.30 || d <= 1)) return 4;
  return 2;
}

AllocationDecision compose(int baseline_index, int residual, long cap, int k_probe) {
  if (k_probe < 1 || cap < k_probe) throw ConfigError("compose needs cap >= k_probe >= 1");
  action_index(residual);
  AllocationDecision d;
  d.baseline_index = baseline_index;
  d.residual = residual;
  d.final_index = std::clamp(baseline_index + residual, 0, kLadderTop);
  const long pct = kLadderPercent[static_cast<std::size_t>(d.final_index)];
  d.shots = std::max<long>(k_probe, (pct * cap + 50) / 100);
  return d;
}

long uniform_allocation(long cap) {
  if (cap < 1) throw ConfigError("cap must be >= 1");
  return cap;
}

std::string to_string(PolicyKind k) {
  switch (k) {
  case PolicyKind::uniform: return "uniform";
  case PolicyKind::heuristic: return "heuristic";
  case PolicyKind::rl: return "rl";
  }
  return "unknown";
}

Policy Policy::uniform() { return {PolicyKind::uniform, nullptr, {}, "uniform"}; }
Policy Policy::heuristic() { return {PolicyKind::heuristic, nullptr, {}, "heuristic"}; }
Policy Policy::rl(std::shared_ptr<const QTables> tables, BinBoundaries trained_bins,
                  std::string label) {
  if (!tables) throw CheckpointError("rl policy without Q-tables");
  return {PolicyKind::rl, std::move(tables), std::move(trained_bins), std::move(label)};
}

void check_binning(const Policy &p, const BinBoundaries &current) {
  if (p.kind == PolicyKind::rl && !(p.bins == current))
    throw CheckpointError("policy '" + p.name() +
                          "' was trained under different bin boundaries");
}

AllocationDecision policy_allocate(const Policy &p, const StepState &s, const DiscreteState &ds,
                                   long cap, int k_probe) {
  switch (p.kind) {
  case PolicyKind::uniform: {
    AllocationDecision d;
    d.baseline_index = d.final_index = kLadderTop;
    d.shots = uniform_allocation(cap);
    return d;
  }
  case PolicyKind::heuristic:
    return compose(heuristic_index(s), 0, cap, k_probe);
  case PolicyKind::rl:
    return compose(heuristic_index(s), p.tables->greedy_action(ds), cap, k_probe);
  }
  throw ConfigError("unknown policy kind");
}

} // namespace rqshot
