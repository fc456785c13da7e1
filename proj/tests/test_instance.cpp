#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "rqshot/errors.hpp"
#include "rqshot/instance.hpp"
#include "test_util.hpp"

using namespace rqshot;

namespace {

WeightedGraph triangle(double ab, double bc, double ac) {
  // a = 0, b = 1, c = 2
  return WeightedGraph::from_edges(3, {{0, 1, ab}, {1, 2, bc}, {0, 2, ac}});
}

} // namespace

TEST_CASE("generate_regular_gaussian produces d-regular graphs") {
  SUBCASE("only 3-regular graph on 4 nodes is K4") {
    const auto g = generate_regular_gaussian(4, 3, 7);
    CHECK(g.edge_count() == 6);
    for (int u = 0; u < 4; ++u)
      for (int v = u + 1; v < 4; ++v) CHECK(g.has_edge(u, v));
  }
  SUBCASE("n = 14, d = 8 has 56 edges") {
    const auto g = generate_regular_gaussian(14, 8, 123);
    CHECK(g.edge_count() == 56);
    for (NodeId u : g.nodes()) CHECK(g.degree(u) == 8);
  }
  SUBCASE("n = 20, d = 17 has 170 edges") {
    const auto g = generate_regular_gaussian(20, 17, 5);
    CHECK(g.edge_count() == 170);
    for (NodeId u : g.nodes()) CHECK(g.degree(u) == 17);
  }
  SUBCASE("odd n * d is rejected") {
    CHECK_THROWS_AS(generate_regular_gaussian(5, 3, 1), DegreeParityError);
    CHECK_THROWS_AS(generate_regular_gaussian(5, 5, 1), DegreeParityError);
    CHECK_THROWS_AS(generate_regular_gaussian(5, 0, 1), DegreeParityError);
  }
  SUBCASE("deterministic for a fixed seed") {
    CHECK(generate_regular_gaussian(16, 6, 99) == generate_regular_gaussian(16, 6, 99));
    CHECK_FALSE(generate_regular_gaussian(16, 6, 99) == generate_regular_gaussian(16, 6, 100));
  }
}

TEST_CASE("regular generator degrees and weight moments") {
  std::vector<double> w;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const int n = 10 + static_cast<int>(seed % 7);
    const int d = (n % 2 == 0) ? 3 + static_cast<int>(seed % 5) : 4;
    const auto g = generate_regular_gaussian(n, d, seed);
    for (NodeId u : g.nodes()) REQUIRE(g.degree(u) == d);
    for (const auto &e : g.edges()) w.push_back(e.coupling);
  }
  const double n = static_cast<double>(w.size());
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
  double var = 0.0;
  for (double x : w) var += (x - mean) * (x - mean);
  var /= n - 1;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(n));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("contract substitutes Z_u = sign Z_v") {
  SUBCASE("triangle merges into a doubled edge") {
    const auto r = contract(ReducedInstance::from_graph(triangle(1, 1, 1)), {0, 1, +1});
    CHECK(r.graph.node_count() == 2);
    CHECK(r.graph.edge_count() == 1);
    CHECK(r.graph.coupling(1, 2) == doctest::Approx(2.0));
    CHECK(r.offset == doctest::Approx(1.0));
    CHECK(r.stack.size() == 1);
  }
  SUBCASE("cancelling couplings delete the edge") {
    const auto r = contract(ReducedInstance::from_graph(triangle(1, 1, -1)), {0, 1, +1});
    CHECK(r.graph.edge_count() == 0);
    CHECK_FALSE(r.graph.has_edge(1, 2));
    CHECK(r.offset == doctest::Approx(1.0));
  }
  SUBCASE("leaf elimination leaves the rest untouched") {
    const auto path = WeightedGraph::from_edges(3, {{0, 1, 0.5}, {1, 2, 0.3}});
    const auto r = contract(ReducedInstance::from_graph(path), {0, 1, -1});
    CHECK(r.graph.coupling(1, 2) == doctest::Approx(0.3));
    CHECK(r.offset == doctest::Approx(-0.5));
  }
  SUBCASE("invalid contractions throw") {
    const auto path = ReducedInstance::from_graph(
        WeightedGraph::from_edges(3, {{0, 1, 0.5}, {1, 2, 0.3}}));
    CHECK_THROWS_AS(contract(path, {0, 2, 1}), ContractionError);
    const auto r = contract(path, {0, 1, 1});
    CHECK_THROWS_AS(contract(r, {0, 1, 1}), ContractionError);
    CHECK_THROWS_AS(contract(path, {0, 1, 0}), ContractionError);
  }
}

TEST_CASE("contraction energy identity on random sequences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + trial % 9;
    auto inst = ReducedInstance::from_graph(testing::random_graph(n, 0.6, rng, 2));
    const auto original = inst.graph;
    while (inst.graph.edge_count() > 0 && inst.graph.node_count() > 2) {
      const auto edges = inst.graph.edges();
      const auto &e = edges[std::uniform_int_distribution<std::size_t>(0, edges.size() - 1)(rng)];
      const bool flip = std::bernoulli_distribution(0.5)(rng);
      const int sign = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
      const int before = inst.graph.node_count();
      inst = contract(inst, {flip ? e.u : e.v, flip ? e.v : e.u, sign});
      CHECK(inst.graph.node_count() == before - 1);
      CHECK(static_cast<int>(inst.stack.size()) + inst.graph.node_count() == n);
      for (const auto &x : inst.graph.edges()) CHECK(x.u != x.v);
    }
    const auto ids = inst.graph.nodes();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << ids.size()); ++mask) {
      Spins res(static_cast<std::size_t>(n), 0);
      for (std::size_t k = 0; k < ids.size(); ++k)
        res[static_cast<std::size_t>(ids[k])] = ((mask >> k) & 1u) ? -1 : 1;
      const auto full = reconstruct_assignment(inst.stack, res);
      CHECK(original.ising_energy(full) ==
            doctest::Approx(inst.offset + inst.graph.ising_energy(res)).epsilon(1e-12));
    }
  }
}

TEST_CASE("brute_force_optimum") {
  SUBCASE("single edge") {
    const auto g = WeightedGraph::from_edges(2, {{0, 1, 1.0}});
    const auto s = brute_force_optimum(g);
    CHECK(s.cut_value == 1.0);
    CHECK(s.spins[0] == -s.spins[1]);
  }
  SUBCASE("unit triangle") {
    CHECK(brute_force_optimum(triangle(1, 1, 1)).cut_value == 2.0);
  }
  SUBCASE("tie resolves to the lexicographically smallest pattern") {
    // Unit triangle maximizers with z_0 = +1: 011, 001, 010 -> smallest is 001.
    const auto s = brute_force_optimum(triangle(1, 1, 1));
    CHECK(s.spins == Spins{1, 1, -1});
  }
  SUBCASE("matches the exhaustive reference on random graphs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = testing::random_graph(10, 0.5, rng);
      const auto s = brute_force_optimum(g);
      CHECK(s.cut_value == doctest::Approx(testing::reference_max_cut(g)).epsilon(1e-12));
      CHECK(s.cut_value == doctest::Approx(g.cut_value(s.spins)).epsilon(1e-12));
    }
  }
  SUBCASE("invariant under relabeling and global flip") {
    std::mt19937_64 rng(12);
    const auto g = testing::random_graph(9, 0.6, rng);
    std::vector<int> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Edge> relabeled;
    for (const auto &e : g.edges()) {
      const int a = perm[static_cast<std::size_t>(e.u)], b = perm[static_cast<std::size_t>(e.v)];
      relabeled.push_back({std::min(a, b), std::max(a, b), e.coupling});
    }
    const auto s = brute_force_optimum(g);
    CHECK(brute_force_optimum(WeightedGraph::from_edges(9, relabeled)).cut_value ==
          doctest::Approx(s.cut_value).epsilon(1e-12));
    Spins flipped = s.spins;
    for (auto &z : flipped) z = static_cast<std::int8_t>(-z);
    CHECK(g.cut_value(flipped) == doctest::Approx(s.cut_value).epsilon(1e-12));
  }
  SUBCASE("size bound") {
    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(brute_force_optimum(testing::random_graph(27, 0.1, rng)), SizeError);
  }
}

TEST_CASE("reconstruct_assignment") {
  SUBCASE("empty stack returns the residual") {
    const Spins r{1, -1, 1};
    CHECK(reconstruct_assignment({}, r) == r);
  }
  SUBCASE("single record") {
    CHECK(reconstruct_assignment({{0, 1, +1}}, Spins{0, 1}) == Spins{1, 1});
  }
  SUBCASE("chained records replay in reverse") {
    // a=0, b=1, c=2: (a->b, -1), (b->c, +1), residual c = -1
    CHECK(reconstruct_assignment({{0, 1, -1}, {1, 2, +1}}, Spins{0, 0, -1}) == Spins{1, -1, -1});
  }
  SUBCASE("missing residual variable") {
    CHECK_THROWS_AS(reconstruct_assignment({{0, 1, +1}}, Spins{0, 0}), ReconstructionError);
  }
}

TEST_CASE("graph_distance") {
  const auto path = WeightedGraph::from_edges(5, {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}});
  CHECK(graph_distance(path, 1, 1) == 0);
  CHECK(graph_distance(path, 0, 2) == 2);
  CHECK_FALSE(graph_distance(path, 0, 4).has_value());
}
