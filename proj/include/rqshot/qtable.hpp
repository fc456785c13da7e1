#pragma once

#include <array>
#include <map>

#include "rqshot/features.hpp"

namespace rqshot {

/// Residual offsets applied to the heuristic ladder index.
inline constexpr std::array<int, 6> kResidualActions{-3, -2, -1, 0, 1, 2};
inline constexpr int kNumActions = static_cast<int>(kResidualActions.size());

using ActionValues = std::array<double, kNumActions>;

int action_index(int residual);

/// Index of the largest value; ties go to the action closest to 0, then to the
/// smaller action.
int greedy_index(const ActionValues &values);

/// Twin sparse Q-tables. Missing states read as all-zero rows.
struct QTables {
  std::map<DiscreteState, ActionValues> q1;
  std::map<DiscreteState, ActionValues> q2;

  ActionValues row(int table, const DiscreteState &s) const;
  ActionValues &row_mut(int table, const DiscreteState &s);
  ActionValues combined(const DiscreteState &s) const;
  /// Greedy residual action under Q1 + Q2.
  int greedy_action(const DiscreteState &s) const;

  friend bool operator==(const QTables &, const QTables &) = default;
};

} // namespace rqshot
