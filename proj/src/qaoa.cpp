#include "rqshot/qaoa.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "rqshot/errors.hpp"

namespace rqshot {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Angles canonical(Angles a) {
  auto wrap = [](double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0) r += period;
    return r >= period ? 0.0 : r;
  };
  return {wrap(a.gamma, kTwoPi), wrap(a.beta, std::numbers::pi)};
}

std::string to_string(SamplingMode mode) {
  switch (mode) {
  case SamplingMode::exact: return "exact";
  case SamplingMode::statevector_sampled: return "statevector_sampled";
  case SamplingMode::binomial: return "binomial";
  }
  return "unknown";
}

SamplingMode sampling_mode_from_string(const std::string &s) {
  if (s == "exact") return SamplingMode::exact;
  if (s == "statevector_sampled" || s == "statevector") return SamplingMode::statevector_sampled;
  if (s == "binomial") return SamplingMode::binomial;
  throw ConfigError("unknown sampling mode '" + s + "'");
}

// ---------------------------------------------------------------------------
// Closed form

Depth1Evaluator::Depth1Evaluator(const WeightedGraph &g) : edges_(g.edges()) {
  std::map<std::pair<NodeId, NodeId>, int> index;
  for (std::size_t i = 0; i < edges_.size(); ++i)
    index[{edges_[i].u, edges_[i].v}] = static_cast<int>(i);
  auto idx = [&](NodeId a, NodeId b) { return index.at({std::min(a, b), std::max(a, b)}); };

  terms_.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto [u, v, j] = edges_[i];
    const auto &nu = g.neighbors(u);
    const auto &nv = g.neighbors(v);
    auto &t = terms_[i];
    for (const auto &[w, jw] : nu) {
      if (w == v) continue;
      if (nv.contains(w))
        t.common.emplace_back(idx(u, w), idx(v, w));
      else
        t.u_only.push_back(idx(u, w));
    }
    for (const auto &[w, jw] : nv)
      if (w != u && !nu.contains(w)) t.v_only.push_back(idx(v, w));
  }
}

void Depth1Evaluator::trig_tables(double gamma, std::vector<double> &c,
                                  std::vector<double> &s) const {
  c.resize(edges_.size());
  s.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const double x = 2.0 * gamma * edges_[i].coupling;
    c[i] = std::cos(x);
    s[i] = std::sin(x);
  }
}

std::pair<double, double> Depth1Evaluator::edge_components(std::size_t i,
                                                           std::span<const double> c,
                                                           std::span<const double> s) const {
  const auto &t = terms_[i];
  double prod_u = 1.0, prod_v = 1.0;
  for (int k : t.u_only) prod_u *= c[static_cast<std::size_t>(k)];
  for (int k : t.v_only) prod_v *= c[static_cast<std::size_t>(k)];
  double tri_u = 1.0, tri_v = 1.0, tri_minus = 1.0, tri_plus = 1.0;
  for (const auto &[a, b] : t.common) {
    const double ca = c[static_cast<std::size_t>(a)], cb = c[static_cast<std::size_t>(b)];
    const double sa = s[static_cast<std::size_t>(a)], sb = s[static_cast<std::size_t>(b)];
    tri_u *= ca;
    tri_v *= cb;
    tri_minus *= ca * cb + sa * sb; // cos(x_a - x_b)
    tri_plus *= ca * cb - sa * sb;  // cos(x_a + x_b)
  }
  const double first = s[i] * (prod_u * tri_u + prod_v * tri_v);
  const double second = prod_u * prod_v * (tri_minus - tri_plus);
  return {first, second};
}

double Depth1Evaluator::zz(std::size_t i, Angles a) const {
  if (i >= edges_.size()) throw LookupError("edge index out of range");
  std::vector<double> c, s;
  trig_tables(a.gamma, c, s);
  const auto [first, second] = edge_components(i, c, s);
  const double s2b = std::sin(2.0 * a.beta);
  return 0.5 * std::sin(4.0 * a.beta) * first + 0.5 * s2b * s2b * second;
}

std::vector<double> Depth1Evaluator::all_zz(Angles a) const {
  std::vector<double> c, s;
  trig_tables(a.gamma, c, s);
  const double s2b = std::sin(2.0 * a.beta);
  const double wa = 0.5 * std::sin(4.0 * a.beta), wb = 0.5 * s2b * s2b;
  std::vector<double> out(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto [first, second] = edge_components(i, c, s);
    out[i] = std::clamp(wa * first + wb * second, -1.0, 1.0);
  }
  return out;
}

std::pair<double, double> Depth1Evaluator::energy_components(double gamma) const {
  std::vector<double> c, s;
  trig_tables(gamma, c, s);
  double first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto [f, sec] = edge_components(i, c, s);
    first += edges_[i].coupling * f;
    second += edges_[i].coupling * sec;
  }
  return {first, second};
}

double Depth1Evaluator::energy(Angles a) const {
  const auto [first, second] = energy_components(a.gamma);
  const double s2b = std::sin(2.0 * a.beta);
  return 0.5 * std::sin(4.0 * a.beta) * first + 0.5 * s2b * s2b * second;
}

double zz_expectation_closed_form(const WeightedGraph &g, Angles a, NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  if (!g.has_edge(u, v))
    throw LookupError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") not in graph");
  Depth1Evaluator eval(g);
  const auto &edges = eval.edges();
  const auto it = std::find_if(edges.begin(), edges.end(),
                               [&](const Edge &e) { return e.u == u && e.v == v; });
  return eval.zz(static_cast<std::size_t>(it - edges.begin()), a);
}

double energy_expectation(const WeightedGraph &g, Angles a) {
  return Depth1Evaluator(g).energy(a);
}

// ---------------------------------------------------------------------------
// Angle search

namespace {

struct Vertex {
  double x[2];
  double f;
};

Angles nelder_mead(const Depth1Evaluator &eval, Angles start, std::array<double, 2> step,
                   double tolerance, int max_evaluations) {
  int evals = 0;
  auto f = [&](const double *x) {
    ++evals;
    return eval.energy({x[0], x[1]});
  };
  std::array<Vertex, 3> simplex{};
  simplex[0] = {{start.gamma, start.beta}, 0.0};
  simplex[1] = {{start.gamma + step[0], start.beta}, 0.0};
  simplex[2] = {{start.gamma, start.beta + step[1]}, 0.0};
  for (auto &v : simplex) v.f = f(v.x);

  auto blend = [](const double *a, const double *b, double t, double *out) {
    for (int k = 0; k < 2; ++k) out[k] = a[k] + t * (b[k] - a[k]);
  };

  while (evals < max_evaluations) {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex &a, const Vertex &b) { return a.f < b.f; });
    if (simplex[2].f - simplex[0].f <= tolerance) break;

    double centroid[2];
    for (int k = 0; k < 2; ++k) centroid[k] = 0.5 * (simplex[0].x[k] + simplex[1].x[k]);

    Vertex reflected{};
    blend(centroid, simplex[2].x, -1.0, reflected.x);
    reflected.f = f(reflected.x);
    if (reflected.f < simplex[0].f) {
      Vertex expanded{};
      blend(centroid, simplex[2].x, -2.0, expanded.x);
      expanded.f = f(expanded.x);
      simplex[2] = expanded.f < reflected.f ? expanded : reflected;
    } else if (reflected.f < simplex[1].f) {
      simplex[2] = reflected;
    } else {
      const bool outside = reflected.f < simplex[2].f;
      Vertex contracted{};
      blend(centroid, outside ? reflected.x : simplex[2].x, 0.5, contracted.x);
      contracted.f = f(contracted.x);
      if (contracted.f < std::min(reflected.f, simplex[2].f)) {
        simplex[2] = contracted;
      } else {
        for (int i = 1; i < 3; ++i) {
          blend(simplex[0].x, simplex[i].x, 0.5, simplex[i].x);
          simplex[i].f = f(simplex[i].x);
        }
      }
    }
  }
  const auto best = std::min_element(simplex.begin(), simplex.end(),
                                     [](const Vertex &a, const Vertex &b) { return a.f < b.f; });
  return {best->x[0], best->x[1]};
}

} // namespace

Angles optimize_angles(const WeightedGraph &g, const AngleSearchOptions &opts) {
  const Depth1Evaluator eval(g);
  if (eval.edges().empty()) return {};

  const double dg = kTwoPi / opts.gamma_points;
  const double db = std::numbers::pi / opts.beta_points;
  Angles best{};
  double best_energy = std::numeric_limits<double>::infinity();
  for (int i = 0; i < opts.gamma_points; ++i) {
    const double gamma = i * dg;
    const auto [first, second] = eval.energy_components(gamma);
    for (int j = 0; j < opts.beta_points; ++j) {
      const double beta = j * db;
      const double s2b = std::sin(2.0 * beta);
      const double e = 0.5 * std::sin(4.0 * beta) * first + 0.5 * s2b * s2b * second;
      if (e < best_energy) {
        best_energy = e;
        best = {gamma, beta};
      }
    }
  }
  const Angles refined =
      nelder_mead(eval, best, {0.5 * dg, 0.5 * db}, opts.tolerance, opts.max_evaluations);
  // Keep the grid point if refinement wandered to something worse.
  if (eval.energy(refined) > eval.energy(best)) return best;
  return canonical(refined);
}

// ---------------------------------------------------------------------------
// Statevector

std::vector<std::complex<double>> statevector_depth1(const WeightedGraph &g, Angles a,
                                                     int max_qubits) {
  const auto ids = g.nodes();
  const int n = static_cast<int>(ids.size());
  if (n > max_qubits)
    throw SizeError("statevector limited to " + std::to_string(max_qubits) + " qubits, got " +
                    std::to_string(n));
  std::vector<int> pos(static_cast<std::size_t>(g.capacity()), -1);
  for (int k = 0; k < n; ++k) pos[static_cast<std::size_t>(ids[k])] = k;

  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> cost(dim, 0.0);
  for (const auto &e : g.edges()) {
    const int bu = pos[static_cast<std::size_t>(e.u)], bv = pos[static_cast<std::size_t>(e.v)];
    for (std::size_t x = 0; x < dim; ++x) {
      const bool differ = ((x >> bu) ^ (x >> bv)) & 1u;
      cost[x] += differ ? -e.coupling : e.coupling;
    }
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<std::complex<double>> psi(dim);
  for (std::size_t x = 0; x < dim; ++x) psi[x] = std::polar(norm, -a.gamma * cost[x]);

  const double cb = std::cos(a.beta), sb = std::sin(a.beta);
  const std::complex<double> off(0.0, -sb);
  for (int k = 0; k < n; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t x = 0; x < dim; ++x) {
      if (x & bit) continue;
      const auto a0 = psi[x], a1 = psi[x | bit];
      psi[x] = cb * a0 + off * a1;
      psi[x | bit] = off * a0 + cb * a1;
    }
  }
  return psi;
}

namespace {

std::vector<double> cumulative(std::span<const std::complex<double>> state) {
  std::vector<double> cdf(state.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < state.size(); ++x) {
    acc += std::norm(state[x]);
    cdf[x] = acc;
  }
  return cdf;
}

std::uint64_t draw_index(const std::vector<double> &cdf, Rng &rng) {
  std::uniform_real_distribution<double> unif(0.0, cdf.back());
  const double r = unif(rng);
  auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
  if (it == cdf.end()) --it;
  return static_cast<std::uint64_t>(it - cdf.begin());
}

} // namespace

std::vector<std::uint64_t> sample_bitstrings(std::span<const std::complex<double>> state, long k,
                                             Rng &rng) {
  const auto cdf = cumulative(state);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(std::max(0L, k)));
  for (auto &x : out) x = draw_index(cdf, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Shot pools

ShotPool::ShotPool(const WeightedGraph &g, Angles a, SamplingMode mode, int statevector_threshold)
    : mode_(mode) {
  const Depth1Evaluator eval(g);
  edges_ = eval.edges();
  exact_ = eval.all_zz(a);
  agree_.assign(edges_.size(), 0);

  if (mode_ == SamplingMode::statevector_sampled && g.node_count() > std::min(statevector_threshold, kDefaultStatevectorLimit)) {
    mode_ = SamplingMode::binomial;
    fell_back_ = true;
  }
  if (mode_ == SamplingMode::statevector_sampled) {
    const auto ids = g.nodes();
    std::vector<int> pos(static_cast<std::size_t>(g.capacity()), -1);
    for (std::size_t k = 0; k < ids.size(); ++k) pos[static_cast<std::size_t>(ids[k])] = static_cast<int>(k);
    for (const auto &e : edges_)
      edge_bits_.emplace_back(pos[static_cast<std::size_t>(e.u)], pos[static_cast<std::size_t>(e.v)]);
    cdf_ = cumulative(statevector_depth1(g, a, kDefaultStatevectorLimit));
  }
}

void ShotPool::draw(long k, Rng &rng) {
  if (k <= 0 || mode_ == SamplingMode::exact) return;
  if (mode_ == SamplingMode::statevector_sampled) {
    for (long s = 0; s < k; ++s) {
      const auto x = draw_index(cdf_, rng);
      for (std::size_t i = 0; i < edge_bits_.size(); ++i) {
        const auto [bu, bv] = edge_bits_[i];
        agree_[i] += static_cast<long>((((x >> bu) ^ (x >> bv)) & 1u) ^ 1u);
      }
    }
  } else {
    for (std::size_t i = 0; i < exact_.size(); ++i) {
      const double p = std::clamp((1.0 + exact_[i]) / 2.0, 0.0, 1.0);
      std::binomial_distribution<long> bin(k, p);
      agree_[i] += bin(rng);
    }
  }
  shots_ += k;
}

CorrelationEstimate ShotPool::estimate() const {
  CorrelationEstimate est;
  est.edges = edges_;
  est.mode = mode_;
  est.fell_back_to_binomial = fell_back_;
  if (mode_ == SamplingMode::exact) {
    est.values = exact_;
    return est;
  }
  if (shots_ == 0) throw ConfigError("sampled estimate requested before any shots were drawn");
  est.shots_used = shots_;
  est.values.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i)
    est.values[i] = 2.0 * static_cast<double>(agree_[i]) / static_cast<double>(shots_) - 1.0;
  return est;
}

CorrelationEstimate estimate_correlations(const WeightedGraph &g, Angles a, long k, Rng &rng,
                                          SamplingMode mode, int statevector_threshold) {
  if (mode != SamplingMode::exact && k < 1)
    throw ConfigError("sampled correlation estimates need k >= 1");
  ShotPool pool(g, a, mode, statevector_threshold);
  pool.draw(k, rng);
  return pool.estimate();
}

} // namespace rqshot
