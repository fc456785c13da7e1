#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rqshot/instance.hpp"
#include "rqshot/qaoa.hpp"

namespace rqshot {

inline constexpr double kZgapEpsilon = 1e-12;
/// Stand-in z-gap for estimates with fewer than two edges: any value above
/// the top bin edge.
inline constexpr double kZgapSentinel = 1e12;

enum class ZgapVariant { literal, relative_gap };

std::string to_string(ZgapVariant v);
ZgapVariant zgap_variant_from_string(const std::string &s);

/// Raw four-feature step state.
struct StepState {
  int m = 0;
  double zeta = 1.0;
  double kappa = 0.0;
  std::optional<int> dist; // nullopt: unreachable or fewer than two edges
};

struct DiscreteState {
  int m_bin = 0;
  int zeta_bin = 0;
  int kappa_bin = 0;
  int dist_bin = 0;

  /// "m:z:k:d"
  std::string key() const;
  static DiscreteState from_key(const std::string &key);

  friend auto operator<=>(const DiscreteState &, const DiscreteState &) = default;
};

/// Interior cut points for the three binned features. A value x lands in the
/// bin counting the cut points <= x, so k cut points give k + 1 bins.
struct BinBoundaries {
  std::vector<double> zeta{1.0, 1.2, 1.6, 2.0, 3.0, 4.0};
  std::vector<double> kappa{0.10, 0.20, 0.30, 0.40};
  std::vector<double> dist{1, 2, 3, 4};

  int zeta_bins() const { return static_cast<int>(zeta.size()) + 1; }
  int kappa_bins() const { return static_cast<int>(kappa.size()) + 1; }
  int dist_bins() const { return static_cast<int>(dist.size()) + 1; }

  friend bool operator==(const BinBoundaries &, const BinBoundaries &) = default;
};

/// 16 for n <= 16, otherwise 32.
int probe_shot_count(int n);

/// |M_(1)| / (|M_(2)| + eps) (literal) or (|M_(1)| - |M_(2)|) / (|M_(1)| + eps).
double zgap(const CorrelationEstimate &est, ZgapVariant variant = ZgapVariant::literal);

/// Edge positions ranked by |M| descending, ties by (u, v) ascending.
std::vector<std::size_t> rank_edges(const CorrelationEstimate &est);

/// 1 - |unique endpoints of top-k edges| / (2k), k = min(k_top, edge count).
double conflict_ratio(const CorrelationEstimate &est, int k_top = 3);

/// Minimum hop distance between endpoints of the two top-ranked edges.
std::optional<int> edge_distance(const WeightedGraph &g, const CorrelationEstimate &est);

StepState extract_state(const WeightedGraph &g, const CorrelationEstimate &est,
                        ZgapVariant variant = ZgapVariant::literal, int k_top = 3);

DiscreteState discretize(const StepState &s, int n, int n_c, const BinBoundaries &bins = {});

} // namespace rqshot
