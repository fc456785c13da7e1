#include "rqshot/oracle_check.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "rqshot/errors.hpp"
#include "rqshot/qaoa.hpp"

namespace rqshot {

namespace {

WeightedGraph random_graph(int n, Rng &rng) {
  std::uniform_real_distribution<double> density(0.2, 1.0);
  std::normal_distribution<double> w(0.0, 1.0);
  while (true) {
    std::bernoulli_distribution keep(density(rng));
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (keep(rng)) edges.push_back({u, v, w(rng)});
    if (!edges.empty()) return WeightedGraph::from_edges(n, edges);
  }
}

double zz_from_state(const std::vector<std::complex<double>> &psi, int bu, int bv) {
  double acc = 0.0;
  for (std::size_t x = 0; x < psi.size(); ++x) {
    const bool differ = ((x >> bu) ^ (x >> bv)) & 1u;
    acc += std::norm(psi[x]) * (differ ? -1.0 : 1.0);
  }
  return acc;
}

double mutated(const Depth1Evaluator &ev, std::size_t i, Angles a, OracleMutation m) {
  switch (m) {
  case OracleMutation::none: return ev.zz(i, a);
  case OracleMutation::beta_sign: return ev.zz(i, {a.gamma, -a.beta});
  case OracleMutation::offset: return ev.zz(i, a) + 1e-8;
  }
  return ev.zz(i, a);
}

double two_qubit_error(OracleMutation m) {
  using std::numbers::pi;
  const std::complex<double> I(0.0, 1.0);
  double worst = 0.0;
  for (const double j : {0.8, -1.3})
    for (const Angles a : {Angles{0.37, 1.21}, Angles{pi / 4, 3 * pi / 8}, Angles{2.0, 0.1}}) {
      const auto g = WeightedGraph::from_edges(2, {{0, 1, j}});
      const double th = a.gamma * j, c2 = std::cos(2 * a.beta), s2 = std::sin(2 * a.beta);
      const auto same = (c2 * std::exp(-I * th) - I * s2 * std::exp(I * th)) / 2.0;
      const auto diff = (c2 * std::exp(I * th) - I * s2 * std::exp(-I * th)) / 2.0;
      const std::vector<std::complex<double>> hand{same, diff, diff, same};
      const auto psi = statevector_depth1(g, a);
      for (std::size_t x = 0; x < 4; ++x) worst = std::max(worst, std::abs(psi[x] - hand[x]));
      const Depth1Evaluator ev(g);
      worst = std::max(worst, std::abs(mutated(ev, 0, a, m) - zz_from_state(hand, 0, 1)));
    }
  return worst;
}

} // namespace

OracleMutation oracle_mutation_from_string(const std::string &s) {
  if (s == "none") return OracleMutation::none;
  if (s == "beta-sign") return OracleMutation::beta_sign;
  if (s == "offset") return OracleMutation::offset;
  throw ConfigError("unknown mutation '" + s + "' (none, beta-sign, offset)");
}

OracleCheckReport run_oracle_check(const OracleCheckOptions &opts) {
  if (opts.n_max < 2 || opts.n_max > kDefaultStatevectorLimit)
    throw ConfigError("n_max must be in [2, " + std::to_string(kDefaultStatevectorLimit) + "]");
  if (opts.cases < 0) throw ConfigError("cases must be non-negative");

  OracleCheckReport rep;
  Rng rng(opts.seed);
  std::uniform_int_distribution<int> size(2, opts.n_max);
  std::uniform_real_distribution<double> gamma(0.0, 2 * std::numbers::pi);
  std::uniform_real_distribution<double> beta(0.0, std::numbers::pi);
  for (int c = 0; c < opts.cases; ++c) {
    const auto g = random_graph(size(rng), rng);
    const Angles a{gamma(rng), beta(rng)};
    const Depth1Evaluator ev(g);
    const auto psi = statevector_depth1(g, a);
    // Node ids 0..n-1 are all active, so qubit k is node k.
    for (std::size_t i = 0; i < ev.edges().size(); ++i) {
      const auto &e = ev.edges()[i];
      const double err = std::abs(mutated(ev, i, a, opts.mutate) - zz_from_state(psi, e.u, e.v));
      rep.max_abs_error = std::max(rep.max_abs_error, err);
    }
    ++rep.cases;
  }
  rep.two_qubit_error = two_qubit_error(opts.mutate);
  rep.passed = rep.max_abs_error <= opts.tolerance && rep.two_qubit_error <= opts.tolerance;

  if (opts.estimator) {
    const auto g = random_graph(8, rng);
    const Angles a{0.6, 0.35};
    const double truth = Depth1Evaluator(g).zz(0, a);
    for (const auto mode : {SamplingMode::statevector_sampled, SamplingMode::binomial})
      for (const long k : {16L, 64L, 256L, 1024L}) {
        EstimatorLine line;
        line.mode = to_string(mode);
        line.k = k;
        line.truth = truth;
        double s1 = 0.0, s2 = 0.0;
        for (int r = 0; r < opts.estimator_repeats; ++r) {
          const auto est = estimate_correlations(g, a, k, rng, mode, 20);
          s1 += est.values[0];
          s2 += est.values[0] * est.values[0];
        }
        const double R = opts.estimator_repeats;
        line.mean = s1 / R;
        line.variance = (s2 - s1 * s1 / R) / (R - 1);
        line.predicted_variance = (1.0 - line.truth * line.truth) / static_cast<double>(k);
        const bool unbiased =
            std::abs(line.mean - line.truth) <= 4.0 * std::sqrt(line.predicted_variance / R);
        const bool spread = std::abs(line.variance / line.predicted_variance - 1.0) <= 0.20;
        line.ok = unbiased && spread;
        rep.passed = rep.passed && line.ok;
        rep.estimator.push_back(line);
      }
  }
  return rep;
}

} // namespace rqshot
