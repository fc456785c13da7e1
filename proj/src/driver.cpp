#include "rqshot/driver.hpp"

#include <cmath>
#include <ostream>

#include "rqshot/errors.hpp"

namespace rqshot {

Allocator policy_allocator(const Policy &policy) {
  return [policy](const StepContext &ctx) {
    return policy_allocate(policy, ctx.raw, ctx.discrete, ctx.cap, ctx.k_probe);
  };
}

ContractionRecord select_edge(const CorrelationEstimate &est) {
  if (est.size() == 0) throw SelectionError("cannot select an edge from an empty estimate");
  const auto order = rank_edges(est);
  const auto &e = est.edges[order.front()];
  const double m = est.values[order.front()];
  return {std::max(e.u, e.v), std::min(e.u, e.v), m < 0.0 ? -1 : 1};
}

int success(double e_out, double e_opt, double rho_star) {
  if (!(e_opt > 0.0)) throw InvalidInstanceError("success ratio needs E_opt > 0");
  return e_out / e_opt >= rho_star ? 1 : 0;
}

EpisodeResult run_episode(const WeightedGraph &g, double e_opt, const Allocator &allocate,
                          long cap, const EpisodeConfig &cfg, Rng &rng) {
  const int n = g.node_count();
  if (n <= cfg.n_c) throw ConfigError("episode needs n > n_c");
  if (!(e_opt > 0.0)) throw InvalidInstanceError("instance has no positive E_opt");
  const int k_probe = probe_shot_count(n);
  if (cap < k_probe) throw ConfigError("cap below probe shot count");

  EpisodeResult res;
  res.e_opt = e_opt;
  auto inst = ReducedInstance::from_graph(g);
  while (inst.graph.node_count() > cfg.n_c) {
    const int t = static_cast<int>(res.steps.size()) + 1;
    if (inst.graph.edge_count() == 0) {
      // Every remaining variable is free; pad the schedule with zero-shot steps.
      res.edges_exhausted = true;
      for (int m = inst.graph.node_count(); m > cfg.n_c; --m) {
        StepLog pad;
        pad.t = static_cast<int>(res.steps.size()) + 1;
        pad.m = m;
        pad.trivial = true;
        res.steps.push_back(pad);
      }
      break;
    }

    StepLog log;
    log.t = t;
    log.m = inst.graph.node_count();
    log.angles = optimize_angles(inst.graph, cfg.angle_search);

    ShotPool pool(inst.graph, log.angles, cfg.mode, cfg.statevector_threshold);
    res.binomial_fallback = res.binomial_fallback || pool.mode() != cfg.mode;
    pool.draw(k_probe, rng);
    log.raw = extract_state(inst.graph, pool.estimate(), cfg.zgap_variant, cfg.k_top);
    log.discrete = discretize(log.raw, n, cfg.n_c, cfg.bins);

    const StepContext ctx{t, log.raw, log.discrete, heuristic_index(log.raw), cap, k_probe};
    log.allocation = allocate(ctx);
    if (log.allocation.shots < k_probe || log.allocation.shots > cap)
      throw ConfigError("allocator returned " + std::to_string(log.allocation.shots) +
                        " shots outside [k_probe, cap]");
    pool.draw(log.allocation.shots - k_probe, rng);

    const auto est = pool.estimate();
    const auto order = rank_edges(est);
    log.top1 = std::abs(est.values[order[0]]);
    log.top2 = order.size() > 1 ? std::abs(est.values[order[1]]) : 0.0;
    log.contraction = select_edge(est);
    inst = contract(inst, log.contraction);
    res.total_shots += log.allocation.shots;
    res.steps.push_back(log);
  }

  Spins residual(static_cast<std::size_t>(g.capacity()), 0);
  if (res.edges_exhausted) {
    for (NodeId u : inst.graph.nodes()) residual[static_cast<std::size_t>(u)] = 1;
  } else {
    residual = brute_force_optimum(inst.graph).spins;
  }
  res.assignment = reconstruct_assignment(inst.stack, residual);
  res.e_out = g.cut_value(res.assignment);
  res.approx_ratio = res.e_out / e_opt;
  res.sigma = success(res.e_out, e_opt, cfg.rho_star);
  return res;
}

EpisodeResult run_episode(const WeightedGraph &g, double e_opt, const Policy &policy, long cap,
                          const EpisodeConfig &cfg, Rng &rng) {
  check_binning(policy, cfg.bins);
  return run_episode(g, e_opt, policy_allocator(policy), cap, cfg, rng);
}

nlohmann::json to_json(const StepLog &s) {
  nlohmann::json j;
  j["type"] = "step";
  j["t"] = s.t;
  j["m"] = s.m;
  j["trivial"] = s.trivial;
  j["shots"] = s.allocation.shots;
  if (s.trivial) return j;
  j["zeta"] = s.raw.zeta;
  j["kappa"] = s.raw.kappa;
  j["dist"] = s.raw.dist ? nlohmann::json(*s.raw.dist) : nlohmann::json(nullptr);
  j["state"] = s.discrete.key();
  j["baseline_index"] = s.allocation.baseline_index;
  j["residual"] = s.allocation.residual;
  j["final_index"] = s.allocation.final_index;
  j["eliminated"] = s.contraction.eliminated;
  j["kept"] = s.contraction.kept;
  j["sign"] = s.contraction.sign;
  j["top1"] = s.top1;
  j["top2"] = s.top2;
  j["gamma"] = s.angles.gamma;
  j["beta"] = s.angles.beta;
  return j;
}

nlohmann::json summary_json(const EpisodeResult &r) {
  nlohmann::json j;
  j["type"] = "summary";
  j["total_shots"] = r.total_shots;
  j["e_out"] = r.e_out;
  j["e_opt"] = r.e_opt;
  j["sigma"] = r.sigma;
  j["approx_ratio"] = r.approx_ratio;
  j["edges_exhausted"] = r.edges_exhausted;
  j["binomial_fallback"] = r.binomial_fallback;
  j["steps"] = r.steps.size();
  return j;
}

void write_episode_jsonl(std::ostream &out, const EpisodeResult &r) {
  for (const auto &s : r.steps) out << to_json(s).dump() << '\n';
  out << summary_json(r).dump() << '\n';
}

} // namespace rqshot
