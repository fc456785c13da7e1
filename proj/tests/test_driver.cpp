#include <random>
#include <sstream>

#include "doctest.h"
#include "rqshot/driver.hpp"
#include "rqshot/errors.hpp"
#include "test_util.hpp"

using namespace rqshot;

namespace {

CorrelationEstimate make_est(std::vector<Edge> edges, std::vector<double> values) {
  CorrelationEstimate e;
  e.edges = std::move(edges);
  e.values = std::move(values);
  return e;
}

} // namespace

TEST_CASE("select_edge") {
  auto r = select_edge(make_est({{0, 1, 1}, {1, 2, 1}}, {0.9, -0.95}));
  CHECK(r.eliminated == 2);
  CHECK(r.kept == 1);
  CHECK(r.sign == -1);
  r = select_edge(make_est({{0, 1, 1}, {0, 2, 1}}, {0.5, 0.5}));
  CHECK(r.eliminated == 1);
  CHECK(r.kept == 0);
  CHECK(select_edge(make_est({{0, 1, 1}}, {0.0})).sign == 1);
  CHECK_THROWS_AS(select_edge(make_est({}, {})), SelectionError);
}

TEST_CASE("success") {
  CHECK(success(3.2, 3.2) == 1);
  CHECK(success(0.989, 1.0) == 0);
  CHECK(success(0.99, 1.0) == 1);
  CHECK_THROWS_AS(success(1.0, 0.0), InvalidInstanceError);
  CHECK_THROWS_AS(success(1.0, -1.0), InvalidInstanceError);
}

TEST_CASE("run_episode") {
  const auto g = generate_regular_gaussian(12, 6, 41);
  const double e_opt = brute_force_optimum(g).cut_value;
  REQUIRE(e_opt > 0);
  EpisodeConfig cfg;

  SUBCASE("T = n - n_c steps and shot accounting") {
    Rng rng(1);
    const auto r = run_episode(g, e_opt, Policy::heuristic(), 512, cfg, rng);
    CHECK(r.steps.size() == 4);
    long sum = 0;
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      const auto &s = r.steps[i];
      CHECK(s.t == static_cast<int>(i) + 1);
      CHECK(s.m == 12 - static_cast<int>(i));
      CHECK(s.allocation.shots >= 16);
      CHECK(s.allocation.shots <= 512);
      sum += s.allocation.shots;
    }
    CHECK(r.total_shots == sum);
    CHECK(r.e_out <= e_opt + 1e-9);
    CHECK(r.approx_ratio == doctest::Approx(r.e_out / e_opt));
    CHECK(r.sigma == (r.approx_ratio >= 0.99 ? 1 : 0));
    CHECK(g.cut_value(r.assignment) == doctest::Approx(r.e_out));
  }
  SUBCASE("n = 10, n_c = 8 gives two steps") {
    const auto h = generate_regular_gaussian(10, 4, 3);
    Rng rng(2);
    CHECK(run_episode(h, brute_force_optimum(h).cut_value, Policy::uniform(), 64, cfg, rng)
              .steps.size() == 2);
  }
  SUBCASE("uniform spends T * C") {
    Rng rng(3);
    CHECK(run_episode(g, e_opt, Policy::uniform(), 300, cfg, rng).total_shots == 4 * 300);
  }
  SUBCASE("exact mode ignores the seed") {
    cfg.mode = SamplingMode::exact;
    Rng r0(0);
    const auto ref = run_episode(g, e_opt, Policy::heuristic(), 256, cfg, r0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed);
      const auto r = run_episode(g, e_opt, Policy::heuristic(), 256, cfg, rng);
      CHECK(r.e_out == ref.e_out);
      CHECK(r.assignment == ref.assignment);
      CHECK(r.total_shots == ref.total_shots);
    }
  }
  SUBCASE("same seed reproduces a sampled episode") {
    Rng a(9), b(9);
    const auto x = run_episode(g, e_opt, Policy::heuristic(), 256, cfg, a);
    const auto y = run_episode(g, e_opt, Policy::heuristic(), 256, cfg, b);
    CHECK(x.assignment == y.assignment);
    CHECK(x.total_shots == y.total_shots);
  }
  SUBCASE("binomial fallback is flagged") {
    cfg.statevector_threshold = 10;
    Rng rng(4);
    CHECK(run_episode(g, e_opt, Policy::heuristic(), 256, cfg, rng).binomial_fallback);
  }
  SUBCASE("allocator sees the heuristic baseline and must respect the bounds") {
    Rng rng(5);
    int calls = 0;
    const Allocator spy = [&](const StepContext &ctx) {
      ++calls;
      CHECK(ctx.t == calls);
      CHECK(ctx.k_probe == 16);
      CHECK(ctx.baseline_index == heuristic_index(ctx.raw));
      return compose(ctx.baseline_index, 2, ctx.cap, ctx.k_probe);
    };
    run_episode(g, e_opt, spy, 400, cfg, rng);
    CHECK(calls == 4);
    const Allocator bad = [](const StepContext &) { return AllocationDecision{0, 0, 0, 5}; };
    CHECK_THROWS_AS(run_episode(g, e_opt, bad, 400, cfg, rng), ConfigError);
  }
  SUBCASE("precondition errors") {
    Rng rng(6);
    CHECK_THROWS_AS(run_episode(g, e_opt, Policy::uniform(), 8, cfg, rng), ConfigError);
    CHECK_THROWS_AS(run_episode(g, 0.0, Policy::uniform(), 64, cfg, rng), InvalidInstanceError);
    cfg.n_c = 12;
    CHECK_THROWS_AS(run_episode(g, e_opt, Policy::uniform(), 64, cfg, rng), ConfigError);
  }
  SUBCASE("rl policy trained under other bins is rejected") {
    BinBoundaries other;
    other.dist = {1, 2, 3};
    Rng rng(7);
    CHECK_THROWS_AS(run_episode(g, e_opt, Policy::rl(std::make_shared<QTables>(), other), 64, cfg,
                                rng),
                    CheckpointError);
  }
}

TEST_CASE("early edge exhaustion pads trivial steps") {
  const auto g = WeightedGraph::from_edges(10, {{0, 1, 1.0}});
  EpisodeConfig cfg;
  Rng rng(1);
  const auto r = run_episode(g, 1.0, Policy::uniform(), 64, cfg, rng);
  CHECK(r.edges_exhausted);
  REQUIRE(r.steps.size() == 2);
  CHECK_FALSE(r.steps[0].trivial);
  CHECK(r.steps[1].trivial);
  CHECK(r.steps[1].allocation.shots == 0);
  CHECK(r.total_shots == 64);
  CHECK(r.e_out == doctest::Approx(1.0));
}

TEST_CASE("episode JSON lines") {
  const auto g = generate_regular_gaussian(10, 4, 8);
  Rng rng(3);
  const auto r = run_episode(g, brute_force_optimum(g).cut_value, Policy::heuristic(), 128, {}, rng);
  std::ostringstream out;
  write_episode_jsonl(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["type"] == "step");
  CHECK(rows[0]["state"].get<std::string>() == r.steps[0].discrete.key());
  CHECK(rows[2]["type"] == "summary");
  CHECK(rows[2]["total_shots"] == r.total_shots);
}
