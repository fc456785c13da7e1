#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rqshot/instance.hpp"

namespace rqshot {

using Rng = std::mt19937_64;

struct Angles {
  double gamma = 0.0;
  double beta = 0.0;
};

/// Wraps gamma into [0, 2pi) and beta into [0, pi).
Angles canonical(Angles a);

enum class SamplingMode { exact, statevector_sampled, binomial };

std::string to_string(SamplingMode mode);
SamplingMode sampling_mode_from_string(const std::string &s);

/// Estimated <Z_u Z_v> for every edge of a graph, aligned with graph.edges().
struct CorrelationEstimate {
  std::vector<Edge> edges;
  std::vector<double> values;
  long shots_used = 0;
  SamplingMode mode = SamplingMode::exact;
  bool fell_back_to_binomial = false;

  std::size_t size() const { return values.size(); }
};

/// Depth-1 closed form for a fixed graph. Neighborhood structure of every
/// edge is precomputed once so that many angle evaluations stay cheap.
///
/// For edge (u, v) with coupling J, exclusive neighbors F (of u) and G (of v)
/// and common neighbors T:
///   <ZZ> = sin(4b)/2 * sin(2gJ) * (prod_{N(u)\v} cos(2gJ_uw) + prod_{N(v)\u} cos(2gJ_vw))
///        + sin^2(2b)/2 * prod_F cos * prod_G cos
///          * (prod_T cos(2g(J_uw - J_vw)) - prod_T cos(2g(J_uw + J_vw)))
class Depth1Evaluator {
public:
  explicit Depth1Evaluator(const WeightedGraph &g);

  const std::vector<Edge> &edges() const { return edges_; }

  /// <Z_u Z_v> for the edge at position i of edges().
  double zz(std::size_t i, Angles a) const;
  /// <Z_u Z_v> for every edge.
  std::vector<double> all_zz(Angles a) const;
  /// sum J_uv <Z_u Z_v>.
  double energy(Angles a) const;

  /// Splits energy into the beta-independent sums so that
  /// energy = sin(4b)/2 * first + sin^2(2b)/2 * second.
  std::pair<double, double> energy_components(double gamma) const;

private:
  // Neighborhood of one edge, as indices into edges_.
  struct Term {
    std::vector<int> u_only, v_only;
    std::vector<std::pair<int, int>> common; // (index of (u,w), index of (v,w))
  };
  std::pair<double, double> edge_components(std::size_t i, std::span<const double> c,
                                            std::span<const double> s) const;
  void trig_tables(double gamma, std::vector<double> &c, std::vector<double> &s) const;

  std::vector<Edge> edges_;
  std::vector<Term> terms_;
};

/// <Z_u Z_v> of the depth-1 state, exact.
double zz_expectation_closed_form(const WeightedGraph &g, Angles a, NodeId u, NodeId v);

/// sum J_uv <Z_u Z_v> of the depth-1 state, exact.
double energy_expectation(const WeightedGraph &g, Angles a);

struct AngleSearchOptions {
  int gamma_points = 48;
  int beta_points = 24;
  double tolerance = 1e-8;
  int max_evaluations = 500;
};

/// Grid seeding over gamma in [0, 2pi) x beta in [0, pi) followed by
/// Nelder-Mead refinement from the best grid point. Deterministic.
Angles optimize_angles(const WeightedGraph &g, const AngleSearchOptions &opts = {});

inline constexpr int kDefaultStatevectorLimit = 22;

/// Amplitudes of exp(-i b H_M) exp(-i g H_C) |+>^n. Qubit k corresponds to the
/// k-th smallest active node id; bit value 1 means spin -1.
std::vector<std::complex<double>> statevector_depth1(const WeightedGraph &g, Angles a,
                                                     int max_qubits = kDefaultStatevectorLimit);

/// k i.i.d. basis-state indices drawn from |amplitude|^2.
std::vector<std::uint64_t> sample_bitstrings(std::span<const std::complex<double>> state, long k,
                                             Rng &rng);

/// Incremental sampler over one prepared depth-1 state, so a probe sample
/// can be extended to the full step budget without re-preparing the state.
class ShotPool {
public:
  ShotPool(const WeightedGraph &g, Angles a, SamplingMode mode, int statevector_threshold);

  /// Draws k more shots into the pool.
  void draw(long k, Rng &rng);
  /// Estimate over every shot drawn so far (closed form in exact mode).
  CorrelationEstimate estimate() const;

  long shots() const { return shots_; }
  SamplingMode mode() const { return mode_; }
  const std::vector<double> &exact_values() const { return exact_; }

private:
  std::vector<Edge> edges_;
  std::vector<double> exact_;
  SamplingMode mode_;
  bool fell_back_ = false;
  long shots_ = 0;
  // statevector mode
  std::vector<double> cdf_;
  std::vector<std::pair<int, int>> edge_bits_;
  std::vector<long> agree_; // per edge: count of shots with z_u z_v = +1
};

/// One-shot convenience wrapper: prepares a ShotPool and draws k shots.
CorrelationEstimate estimate_correlations(const WeightedGraph &g, Angles a, long k, Rng &rng,
                                          SamplingMode mode,
                                          int statevector_threshold = 20);

} // namespace rqshot
