#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rqshot/instance.hpp"

namespace rqshot {

/// One benchmark instance as stored on disk.
struct InstanceRecord {
  std::string id;
  int n = 0;
  int d = 0;
  std::uint64_t seed = 0;
  std::string weight_dist = "normal(0,1)";
  WeightedGraph graph;
  double e_opt = 0.0;
  std::string category = "unscreened";
  std::optional<std::string> base_id; // reweighted variants
  std::optional<double> screen_mean_ratio;
  std::optional<long> screen_cap;
};

/// Regular instance with E_opt solved exactly. Seeds whose optimum is not
/// positive are skipped (seed + 1, seed + 2, ...); the seed used is recorded.
InstanceRecord make_instance(int n, int d, std::uint64_t seed, std::string id = {});

/// Same topology with fresh N(0, 1) weights drawn in sorted edge order.
WeightedGraph reweight(const WeightedGraph &g, std::uint64_t seed);
InstanceRecord make_reweighted(const InstanceRecord &base, std::uint64_t seed, std::string id);

std::string default_instance_id(int n, int d, std::uint64_t seed);

nlohmann::json to_json(const InstanceRecord &r);
InstanceRecord instance_from_json(const nlohmann::json &j);
void save_instance(const InstanceRecord &r, const std::string &path);
InstanceRecord load_instance(const std::string &path);

} // namespace rqshot
