#include "rqshot/instance_io.hpp"

#include <fstream>
#include <random>

#include "rqshot/errors.hpp"

namespace rqshot {

std::string default_instance_id(int n, int d, std::uint64_t seed) {
  return "n" + std::to_string(n) + "_d" + std::to_string(d) + "_s" + std::to_string(seed);
}

InstanceRecord make_instance(int n, int d, std::uint64_t seed, std::string id) {
  for (std::uint64_t s = seed;; ++s) {
    auto g = generate_regular_gaussian(n, d, s);
    const double e_opt = brute_force_optimum(g).cut_value;
    if (!(e_opt > 0.0)) continue;
    InstanceRecord r;
    r.id = id.empty() ? default_instance_id(n, d, s) : std::move(id);
    r.n = n;
    r.d = d;
    r.seed = s;
    r.graph = std::move(g);
    r.e_opt = e_opt;
    return r;
  }
}

WeightedGraph reweight(const WeightedGraph &g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> w(0.0, 1.0);
  auto edges = g.edges();
  for (auto &e : edges) e.coupling = w(rng);
  return WeightedGraph::from_edges(g.capacity(), edges);
}

InstanceRecord make_reweighted(const InstanceRecord &base, std::uint64_t seed, std::string id) {
  for (std::uint64_t s = seed;; ++s) {
    auto g = reweight(base.graph, s);
    const double e_opt = brute_force_optimum(g).cut_value;
    if (!(e_opt > 0.0)) continue;
    InstanceRecord r;
    r.id = std::move(id);
    r.n = base.n;
    r.d = base.d;
    r.seed = s;
    r.graph = std::move(g);
    r.e_opt = e_opt;
    r.category = "reweighted";
    r.base_id = base.id;
    return r;
  }
}

nlohmann::json to_json(const InstanceRecord &r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["n"] = r.n;
  j["d"] = r.d;
  j["seed"] = r.seed;
  j["weight_dist"] = r.weight_dist;
  auto edges = nlohmann::json::array();
  for (const auto &e : r.graph.edges()) edges.push_back({e.u, e.v, e.coupling});
  j["edges"] = edges;
  j["e_opt"] = r.e_opt;
  j["category"] = r.category;
  if (r.base_id) j["base_id"] = *r.base_id;
  if (r.screen_mean_ratio) j["screen_mean_ratio"] = *r.screen_mean_ratio;
  if (r.screen_cap) j["screen_cap"] = *r.screen_cap;
  return j;
}

InstanceRecord instance_from_json(const nlohmann::json &j) {
  try {
    InstanceRecord r;
    j.at("n").get_to(r.n);
    j.at("d").get_to(r.d);
    j.at("seed").get_to(r.seed);
    r.id = j.value("id", default_instance_id(r.n, r.d, r.seed));
    r.weight_dist = j.value("weight_dist", std::string("normal(0,1)"));
    std::vector<Edge> edges;
    for (const auto &e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw InvalidInstanceError("edge must be [u, v, J]");
      edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    r.graph = WeightedGraph::from_edges(r.n, edges);
    j.at("e_opt").get_to(r.e_opt);
    if (!(r.e_opt > 0.0)) throw InvalidInstanceError("e_opt must be positive");
    r.category = j.value("category", std::string("unscreened"));
    if (j.contains("base_id")) r.base_id = j["base_id"].get<std::string>();
    if (j.contains("screen_mean_ratio")) r.screen_mean_ratio = j["screen_mean_ratio"].get<double>();
    if (j.contains("screen_cap")) r.screen_cap = j["screen_cap"].get<long>();
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw InvalidInstanceError(std::string("malformed instance: ") + e.what());
  }
}

void save_instance(const InstanceRecord &r, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw InvalidInstanceError("cannot write " + path);
  out << to_json(r).dump(1) << '\n';
}

InstanceRecord load_instance(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InvalidInstanceError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw InvalidInstanceError(path + " is not valid JSON: " + e.what());
  }
  return instance_from_json(j);
}

} // namespace rqshot
