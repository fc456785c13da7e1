#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rqshot {

using NodeId = int;

// Spin vector indexed by original variable id. Entries are +1, -1, or 0 for
// "not assigned".
using Spins = std::vector<std::int8_t>;

inline constexpr double kDefaultPruneThreshold = 1e-12;

struct Edge {
  NodeId u = 0; // u < v
  NodeId v = 0;
  double coupling = 0.0;

  friend bool operator==(const Edge &, const Edge &) = default;
};

/// Ising coupling graph H = sum_{(u,v)} J_uv Z_u Z_v over a subset of the
/// variable ids [0, capacity). Couplings are stored once per unordered pair;
/// edges whose magnitude falls below the prune threshold are dropped.
class WeightedGraph {
public:
  WeightedGraph() = default;
  explicit WeightedGraph(int capacity);

  /// Builds a graph on nodes 0..capacity-1 from an edge list. Duplicate pairs
  /// and self-loops are rejected.
  static WeightedGraph from_edges(int capacity, const std::vector<Edge> &edges,
                                  double prune_threshold = kDefaultPruneThreshold);

  int capacity() const { return static_cast<int>(active_.size()); }
  int node_count() const { return node_count_; }
  std::size_t edge_count() const;
  bool is_active(NodeId u) const;
  bool has_edge(NodeId u, NodeId v) const;

  /// Coupling of (u, v); throws LookupError if the edge is absent.
  double coupling(NodeId u, NodeId v) const;

  /// Active node ids, ascending.
  std::vector<NodeId> nodes() const;
  /// All edges sorted by (u, v) with u < v.
  std::vector<Edge> edges() const;
  /// Neighbors of u with their couplings, ascending by id.
  const std::map<NodeId, double> &neighbors(NodeId u) const;
  int degree(NodeId u) const { return static_cast<int>(neighbors(u).size()); }

  double prune_threshold() const { return prune_threshold_; }

  /// Adds delta to J_uv, creating or deleting the edge as needed.
  void add_coupling(NodeId u, NodeId v, double delta);
  /// Removes u and all incident edges.
  void remove_node(NodeId u);

  /// Ising energy sum J_uv z_u z_v for spins indexed by node id.
  double ising_energy(const Spins &z) const;
  /// Cut value sum w_uv (1 - z_u z_v) / 2 with w = J.
  double cut_value(const Spins &z) const;

  friend bool operator==(const WeightedGraph &, const WeightedGraph &) = default;

private:
  void check_node(NodeId u) const;

  std::vector<bool> active_;
  std::vector<std::map<NodeId, double>> adjacency_;
  int node_count_ = 0;
  double prune_threshold_ = kDefaultPruneThreshold;
};

struct ContractionRecord {
  NodeId eliminated = 0;
  NodeId kept = 0;
  int sign = 1;

  friend bool operator==(const ContractionRecord &, const ContractionRecord &) = default;
};

/// Graph after a sequence of substitutions Z_eliminated = sign * Z_kept.
/// offset accumulates the constant energy produced by contracted edges, so
/// that H_original(z) == offset + H_reduced(z) for any z consistent with stack.
struct ReducedInstance {
  WeightedGraph graph;
  double offset = 0.0;
  std::vector<ContractionRecord> stack;

  static ReducedInstance from_graph(WeightedGraph g);
  int original_node_count() const { return graph.capacity(); }
};

/// Uniform random d-regular topology (pairing model with restarts) and
/// i.i.d. standard normal couplings.
WeightedGraph generate_regular_gaussian(int n, int d, std::uint64_t seed,
                                        double weight_mean = 0.0,
                                        double weight_stddev = 1.0);

/// Substitutes Z_{rec.eliminated} = rec.sign * Z_{rec.kept}.
ReducedInstance contract(const ReducedInstance &inst, const ContractionRecord &rec);

inline constexpr int kMaxBruteForceNodes = 26;

struct CutSolution {
  double cut_value = 0.0;
  Spins spins; // indexed by node id, 0 for inactive ids
};

/// Exhaustive maximum cut with the smallest active id pinned to +1. Ties are
/// resolved toward the lexicographically smallest bit pattern (node order,
/// bit = 1 for spin -1).
CutSolution brute_force_optimum(const WeightedGraph &g);

/// Replays the contraction stack backwards to extend residual spins to every
/// original variable.
Spins reconstruct_assignment(const std::vector<ContractionRecord> &stack,
                             const Spins &residual);

/// Unweighted BFS hop count; std::nullopt when v is unreachable from u.
std::optional<int> graph_distance(const WeightedGraph &g, NodeId u, NodeId v);

} // namespace rqshot
