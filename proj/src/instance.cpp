#include "rqshot/instance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <utility>

#include "rqshot/errors.hpp"

namespace rqshot {

WeightedGraph::WeightedGraph(int capacity)
    : active_(static_cast<std::size_t>(capacity), true),
      adjacency_(static_cast<std::size_t>(capacity)), node_count_(capacity) {
  if (capacity < 0) throw SizeError("negative node count");
}

WeightedGraph WeightedGraph::from_edges(int capacity, const std::vector<Edge> &edges,
                                        double prune_threshold) {
  WeightedGraph g(capacity);
  g.prune_threshold_ = prune_threshold;
  for (const auto &e : edges) {
    if (e.u == e.v) throw ContractionError("self-loop on node " + std::to_string(e.u));
    g.check_node(e.u);
    g.check_node(e.v);
    if (g.has_edge(e.u, e.v))
      throw ContractionError("duplicate edge (" + std::to_string(e.u) + ", " +
                             std::to_string(e.v) + ")");
    if (!std::isfinite(e.coupling)) throw ContractionError("non-finite coupling");
    g.add_coupling(e.u, e.v, e.coupling);
  }
  return g;
}

void WeightedGraph::check_node(NodeId u) const {
  if (u < 0 || u >= capacity() || !active_[static_cast<std::size_t>(u)])
    throw LookupError("node " + std::to_string(u) + " is not active");
}

bool WeightedGraph::is_active(NodeId u) const {
  return u >= 0 && u < capacity() && active_[static_cast<std::size_t>(u)];
}

std::size_t WeightedGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto &nb : adjacency_) twice += nb.size();
  return twice / 2;
}

bool WeightedGraph::has_edge(NodeId u, NodeId v) const {
  if (!is_active(u) || !is_active(v)) return false;
  return adjacency_[static_cast<std::size_t>(u)].contains(v);
}

double WeightedGraph::coupling(NodeId u, NodeId v) const {
  if (!has_edge(u, v))
    throw LookupError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") not in graph");
  return adjacency_[static_cast<std::size_t>(u)].at(v);
}

std::vector<NodeId> WeightedGraph::nodes() const {
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(node_count_));
  for (int u = 0; u < capacity(); ++u)
    if (active_[static_cast<std::size_t>(u)]) out.push_back(u);
  return out;
}

std::vector<Edge> WeightedGraph::edges() const {
  std::vector<Edge> out;
  for (int u = 0; u < capacity(); ++u)
    for (const auto &[v, j] : adjacency_[static_cast<std::size_t>(u)])
      if (u < v) out.push_back({u, v, j});
  return out;
}

const std::map<NodeId, double> &WeightedGraph::neighbors(NodeId u) const {
  check_node(u);
  return adjacency_[static_cast<std::size_t>(u)];
}

void WeightedGraph::add_coupling(NodeId u, NodeId v, double delta) {
  check_node(u);
  check_node(v);
  if (u == v) throw ContractionError("self-loop on node " + std::to_string(u));
  auto &au = adjacency_[static_cast<std::size_t>(u)];
  auto &av = adjacency_[static_cast<std::size_t>(v)];
  const double merged = (au.contains(v) ? au[v] : 0.0) + delta;
  if (std::abs(merged) < prune_threshold_) {
    au.erase(v);
    av.erase(u);
  } else {
    au[v] = merged;
    av[u] = merged;
  }
}

void WeightedGraph::remove_node(NodeId u) {
  check_node(u);
  auto &au = adjacency_[static_cast<std::size_t>(u)];
  for (const auto &[w, j] : au) adjacency_[static_cast<std::size_t>(w)].erase(u);
  au.clear();
  active_[static_cast<std::size_t>(u)] = false;
  --node_count_;
}

double WeightedGraph::ising_energy(const Spins &z) const {
  double h = 0.0;
  for (const auto &e : edges())
    h += e.coupling * z.at(static_cast<std::size_t>(e.u)) * z.at(static_cast<std::size_t>(e.v));
  return h;
}

double WeightedGraph::cut_value(const Spins &z) const {
  double c = 0.0;
  for (const auto &e : edges())
    c += e.coupling * (1 - z.at(static_cast<std::size_t>(e.u)) *
                               z.at(static_cast<std::size_t>(e.v))) / 2.0;
  return c;
}

ReducedInstance ReducedInstance::from_graph(WeightedGraph g) {
  ReducedInstance r;
  r.graph = std::move(g);
  return r;
}

namespace {

// Steger-Wormald pairing: repeatedly pair random stubs, keeping only pairs
// that form new simple edges, and restart when the leftover stubs admit no
// valid pair.
std::optional<std::set<std::pair<int, int>>> try_regular(int n, int d, std::mt19937_64 &rng) {
  std::set<std::pair<int, int>> edges;
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n * d));
  for (int k = 0; k < d; ++k)
    for (int u = 0; u < n; ++u) stubs.push_back(u);

  while (!stubs.empty()) {
    std::map<int, int> leftover;
    std::shuffle(stubs.begin(), stubs.end(), rng);
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      int a = stubs[i], b = stubs[i + 1];
      if (a > b) std::swap(a, b);
      if (a != b && !edges.contains({a, b})) {
        edges.insert({a, b});
      } else {
        ++leftover[a];
        ++leftover[b];
      }
    }
    bool suitable = leftover.empty();
    for (auto i = leftover.begin(); i != leftover.end() && !suitable; ++i)
      for (auto j = std::next(i); j != leftover.end(); ++j)
        if (!edges.contains({i->first, j->first})) {
          suitable = true;
          break;
        }
    if (!suitable) return std::nullopt;
    stubs.clear();
    for (const auto &[u, cnt] : leftover)
      for (int k = 0; k < cnt; ++k) stubs.push_back(u);
  }
  return edges;
}

} // namespace

WeightedGraph generate_regular_gaussian(int n, int d, std::uint64_t seed, double weight_mean,
                                        double weight_stddev) {
  if (!(d > 0 && d < n)) throw DegreeParityError("degree must satisfy 0 < d < n");
  if ((n * d) % 2 != 0) throw DegreeParityError("n * d must be even");

  std::mt19937_64 rng(seed);
  // Dense graphs are drawn as the complement of a sparse regular graph.
  const int sparse_d = std::min(d, n - 1 - d);
  std::set<std::pair<int, int>> sparse;
  if (sparse_d > 0) {
    std::optional<std::set<std::pair<int, int>>> attempt;
    while (!(attempt = try_regular(n, sparse_d, rng))) {
    }
    sparse = std::move(*attempt);
  }
  std::vector<std::pair<int, int>> topology;
  if (sparse_d == d) {
    topology.assign(sparse.begin(), sparse.end());
  } else {
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (!sparse.contains({u, v})) topology.emplace_back(u, v);
  }

  std::normal_distribution<double> weight(weight_mean, weight_stddev);
  std::vector<Edge> edges;
  edges.reserve(topology.size());
  for (const auto &[u, v] : topology) {
    double w = weight(rng);
    // A draw below the prune threshold would silently break regularity.
    while (std::abs(w) < kDefaultPruneThreshold) w = weight(rng);
    edges.push_back({u, v, w});
  }
  return WeightedGraph::from_edges(n, edges);
}

ReducedInstance contract(const ReducedInstance &inst, const ContractionRecord &rec) {
  const auto &g = inst.graph;
  if (rec.sign != 1 && rec.sign != -1) throw ContractionError("sign must be +1 or -1");
  if (rec.eliminated == rec.kept) throw ContractionError("eliminated == kept");
  if (!g.is_active(rec.eliminated) || !g.is_active(rec.kept))
    throw ContractionError("contraction endpoint is not active");
  if (!g.has_edge(rec.eliminated, rec.kept))
    throw ContractionError("contraction edge (" + std::to_string(rec.eliminated) + ", " +
                           std::to_string(rec.kept) + ") is absent");

  ReducedInstance out = inst;
  out.offset += rec.sign * g.coupling(rec.eliminated, rec.kept);
  const auto incident = g.neighbors(rec.eliminated); // copy before mutation
  out.graph.remove_node(rec.eliminated);
  for (const auto &[w, j] : incident)
    if (w != rec.kept) out.graph.add_coupling(rec.kept, w, rec.sign * j);
  out.stack.push_back(rec);
  return out;
}

CutSolution brute_force_optimum(const WeightedGraph &g) {
  const auto ids = g.nodes();
  const int n = static_cast<int>(ids.size());
  if (n > kMaxBruteForceNodes)
    throw SizeError("brute force limited to " + std::to_string(kMaxBruteForceNodes) +
                    " nodes, got " + std::to_string(n));

  CutSolution best;
  best.spins.assign(static_cast<std::size_t>(g.capacity()), 0);
  if (n == 0) return best;

  // Position-indexed couplings for the Gray-code walk.
  std::vector<int> pos(static_cast<std::size_t>(g.capacity()), -1);
  for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(ids[i])] = i;
  std::vector<std::vector<std::pair<int, double>>> nb(static_cast<std::size_t>(n));
  for (const auto &e : g.edges()) {
    const int a = pos[static_cast<std::size_t>(e.u)], b = pos[static_cast<std::size_t>(e.v)];
    nb[static_cast<std::size_t>(a)].emplace_back(b, e.coupling);
    nb[static_cast<std::size_t>(b)].emplace_back(a, e.coupling);
  }

  // Bit i of mask <=> position i+1 has spin -1; position 0 stays +1.
  std::vector<int> z(static_cast<std::size_t>(n), 1);
  double cut = 0.0;
  std::uint64_t mask = 0;
  double best_cut = 0.0;
  std::uint64_t best_mask = 0;

  // Lexicographic order on (b_0, b_1, ...) equals comparing the bit-reversed
  // masks; position 1 is the most significant after the pinned position 0.
  auto lex_less = [n](std::uint64_t a, std::uint64_t b) {
    for (int i = 0; i < n - 1; ++i) {
      const auto ba = (a >> i) & 1u, bb = (b >> i) & 1u;
      if (ba != bb) return ba < bb;
    }
    return false;
  };

  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  for (std::uint64_t k = 1; k < total; ++k) {
    const int flip = std::countr_zero(k); // Gray code: flip bit index
    const int p = flip + 1;
    double delta = 0.0;
    for (const auto &[q, j] : nb[static_cast<std::size_t>(p)])
      delta += j * z[static_cast<std::size_t>(p)] * z[static_cast<std::size_t>(q)];
    // Cut changes by sum_q J (z_p z_q) when z_p flips.
    cut += delta;
    z[static_cast<std::size_t>(p)] = -z[static_cast<std::size_t>(p)];
    mask ^= std::uint64_t{1} << flip;
    const double tol = 1e-12 * (1.0 + std::abs(best_cut));
    if (cut > best_cut + tol || (cut >= best_cut - tol && lex_less(mask, best_mask))) {
      best_cut = cut;
      best_mask = mask;
    }
  }

  for (int i = 0; i < n; ++i) {
    const bool neg = i > 0 && ((best_mask >> (i - 1)) & 1u);
    best.spins[static_cast<std::size_t>(ids[i])] = neg ? -1 : 1;
  }
  best.cut_value = g.cut_value(best.spins);
  return best;
}

Spins reconstruct_assignment(const std::vector<ContractionRecord> &stack, const Spins &residual) {
  Spins full = residual;
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
    const auto kept = static_cast<std::size_t>(it->kept);
    const auto elim = static_cast<std::size_t>(it->eliminated);
    if (kept >= full.size() || full[kept] == 0)
      throw ReconstructionError("variable " + std::to_string(it->kept) + " has no assignment");
    if (elim >= full.size()) full.resize(elim + 1, 0);
    full[elim] = static_cast<std::int8_t>(it->sign * full[kept]);
  }
  return full;
}

std::optional<int> graph_distance(const WeightedGraph &g, NodeId u, NodeId v) {
  if (!g.is_active(u) || !g.is_active(v)) throw LookupError("distance endpoint is not active");
  if (u == v) return 0;
  std::vector<int> dist(static_cast<std::size_t>(g.capacity()), -1);
  std::deque<NodeId> queue{u};
  dist[static_cast<std::size_t>(u)] = 0;
  while (!queue.empty()) {
    const NodeId x = queue.front();
    queue.pop_front();
    for (const auto &[w, j] : g.neighbors(x)) {
      if (dist[static_cast<std::size_t>(w)] >= 0) continue;
      dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(x)] + 1;
      if (w == v) return dist[static_cast<std::size_t>(w)];
      queue.push_back(w);
    }
  }
  return std::nullopt;
}

} // namespace rqshot
