#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "rqshot/driver.hpp"
#include "rqshot/learner.hpp"

namespace rqshot {

struct BenchmarkSettings {
  int screen_trials = 60;
  long screen_cap = 0; // 0: probe shot count
  int calibration_trials = 60;
  double calibration_target = 0.95;
  int eval_trials = 60;
  double operational_floor = 0.90;
};

/// Everything a CLI run reads from its config file.
struct RunConfig {
  std::uint64_t master_seed = 0;
  int jobs = 1;
  EpisodeConfig episode;
  TrainConfig train;
  BenchmarkSettings bench;
};

/// INI file with sections [run], [episode], [angles], [train], [benchmark].
/// [train] preset = standard | aggressive is applied first, then the other
/// [train] keys override it. Unknown sections or keys are a ConfigError.
RunConfig parse_config(std::istream &in);
RunConfig load_config(const std::string &path);
/// Writes every key with its current value; parse_config reads it back.
void write_config(std::ostream &out, const RunConfig &c);

} // namespace rqshot
