#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rqshot {

/// Deliberate corruptions of the closed form, used to prove the check can fail.
enum class OracleMutation { none, beta_sign, offset };

OracleMutation oracle_mutation_from_string(const std::string &s);

struct OracleCheckOptions {
  int n_max = 12;
  int cases = 200;
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
  OracleMutation mutate = OracleMutation::none;
  bool estimator = true;
  int estimator_repeats = 2000;
};

struct EstimatorLine {
  std::string mode;
  long k = 0;
  double truth = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double predicted_variance = 0.0;
  bool ok = false;
};

struct OracleCheckReport {
  int cases = 0;
  double max_abs_error = 0.0;
  double two_qubit_error = 0.0; // closed form and statevector vs hand amplitudes
  std::vector<EstimatorLine> estimator;
  bool passed = false;
};

/// Closed form against the statevector on random (graph, angle) cases with
/// 2 <= n <= n_max, the worked two-qubit state, and (optionally) mean and
/// variance of the sampled estimator for k in {16, 64, 256, 1024} in both
/// sampling modes.
OracleCheckReport run_oracle_check(const OracleCheckOptions &opts);

} // namespace rqshot
