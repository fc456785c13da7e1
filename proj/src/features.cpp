#include "rqshot/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "rqshot/errors.hpp"

namespace rqshot {

std::string to_string(ZgapVariant v) {
  return v == ZgapVariant::literal ? "literal" : "relative_gap";
}

ZgapVariant zgap_variant_from_string(const std::string &s) {
  if (s == "literal") return ZgapVariant::literal;
  if (s == "relative_gap") return ZgapVariant::relative_gap;
  throw ConfigError("unknown zgap variant '" + s + "'");
}

std::string DiscreteState::key() const {
  return std::to_string(m_bin) + ":" + std::to_string(zeta_bin) + ":" +
         std::to_string(kappa_bin) + ":" + std::to_string(dist_bin);
}

DiscreteState DiscreteState::from_key(const std::string &key) {
  DiscreteState s;
  char c1 = 0, c2 = 0, c3 = 0;
  std::istringstream in(key);
  in >> s.m_bin >> c1 >> s.zeta_bin >> c2 >> s.kappa_bin >> c3 >> s.dist_bin;
  if (!in || c1 != ':' || c2 != ':' || c3 != ':' || in.peek() != EOF)
    throw EncodingError("malformed state key '" + key + "'");
  return s;
}

int probe_shot_count(int n) {
  if (n < 1) throw SizeError("probe_shot_count needs n >= 1");
  return n <= 16 ? 16 : 32;
}

std::vector<std::size_t> rank_edges(const CorrelationEstimate &est) {
  std::vector<std::size_t> order(est.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(est.values[a]), mb = std::abs(est.values[b]);
    if (ma != mb) return ma > mb;
    const auto &ea = est.edges[a], &eb = est.edges[b];
    return std::pair(ea.u, ea.v) < std::pair(eb.u, eb.v);
  });
  return order;
}

double zgap(const CorrelationEstimate &est, ZgapVariant variant) {
  if (est.size() < 2) return kZgapSentinel;
  const auto order = rank_edges(est);
  const double m1 = std::abs(est.values[order[0]]);
  const double m2 = std::abs(est.values[order[1]]);
  if (variant == ZgapVariant::literal) return m1 / (m2 + kZgapEpsilon);
  return (m1 - m2) / (m1 + kZgapEpsilon);
}

double conflict_ratio(const CorrelationEstimate &est, int k_top) {
  if (est.size() == 0) throw SelectionError("conflict ratio needs at least one edge");
  const auto order = rank_edges(est);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(k_top), order.size());
  std::set<NodeId> endpoints;
  for (std::size_t i = 0; i < k; ++i) {
    endpoints.insert(est.edges[order[i]].u);
    endpoints.insert(est.edges[order[i]].v);
  }
  return 1.0 - static_cast<double>(endpoints.size()) / (2.0 * static_cast<double>(k));
}

std::optional<int> edge_distance(const WeightedGraph &g, const CorrelationEstimate &est) {
  if (est.size() < 2) return std::nullopt;
  const auto order = rank_edges(est);
  const auto &e1 = est.edges[order[0]], &e2 = est.edges[order[1]];
  std::optional<int> best;
  for (NodeId a : {e1.u, e1.v})
    for (NodeId b : {e2.u, e2.v}) {
      const auto d = graph_distance(g, a, b);
      if (d && (!best || *d < *best)) best = d;
    }
  return best;
}

StepState extract_state(const WeightedGraph &g, const CorrelationEstimate &est,
                        ZgapVariant variant, int k_top) {
  StepState s;
  s.m = g.node_count();
  s.zeta = zgap(est, variant);
  s.kappa = est.size() > 0 ? conflict_ratio(est, k_top) : 0.0;
  s.dist = edge_distance(g, est);
  return s;
}

namespace {
int bin_of(double x, const std::vector<double> &cuts) {
  return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
}
} // namespace

DiscreteState discretize(const StepState &s, int n, int n_c, const BinBoundaries &bins) {
  if (s.m < n_c + 1 || s.m > n)
    throw EncodingError("m = " + std::to_string(s.m) + " outside [" + std::to_string(n_c + 1) +
                        ", " + std::to_string(n) + "]");
  DiscreteState d;
  d.m_bin = s.m - n_c - 1;
  d.zeta_bin = bin_of(s.zeta, bins.zeta);
  d.kappa_bin = bin_of(s.kappa, bins.kappa);
  d.dist_bin = s.dist ? bin_of(*s.dist, bins.dist) : bins.dist_bins() - 1;
  return d;
}

} // namespace rqshot
