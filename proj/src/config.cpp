#include "rqshot/config.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rqshot/errors.hpp"

namespace rqshot {

namespace {

namespace pt = boost::property_tree;

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string list(const std::vector<double> &xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + num(xs[i]);
  return s;
}

// Reads typed values out of one section and remembers which keys were used.
class Section {
public:
  Section(const pt::ptree *tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  template <class T> void get(const std::string &key, T &out) {
    const auto raw = raw_value(key);
    if (!raw) return;
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, std::string>) {
        out = *raw;
        used = raw->size();
      } else if constexpr (std::is_same_v<T, double>) {
        out = std::stod(*raw, &used);
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!raw->empty() && (*raw)[0] == '-') throw std::invalid_argument("negative");
        out = std::stoull(*raw, &used);
      } else if constexpr (std::is_same_v<T, long>) {
        out = std::stol(*raw, &used);
      } else {
        out = std::stoi(*raw, &used);
      }
      if (used != raw->size()) throw std::invalid_argument("trailing characters");
    } catch (const std::logic_error &) {
      throw ConfigError("[" + name_ + "] " + key + ": cannot parse '" + *raw + "'");
    }
  }

  void get_list(const std::string &key, std::vector<double> &out) {
    const auto raw = raw_value(key);
    if (!raw) return;
    std::vector<std::string> parts;
    boost::split(parts, *raw, boost::is_any_of(","));
    std::vector<double> xs;
    for (auto &p : parts) {
      boost::trim(p);
      if (p.empty()) continue;
      double x = 0.0;
      try {
        std::size_t used = 0;
        x = std::stod(p, &used);
        if (used != p.size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error &) {
        throw ConfigError("[" + name_ + "] " + key + ": cannot parse '" + p + "'");
      }
      xs.push_back(x);
    }
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (!(xs[i] > xs[i - 1]))
        throw ConfigError("[" + name_ + "] " + key + ": cut points must increase");
    out = xs;
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto &[key, _] : *tree_)
      if (!used_.count(key)) throw ConfigError("unknown key [" + name_ + "] " + key);
  }

private:
  std::optional<std::string> raw_value(const std::string &key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return boost::trim_copy(*v);
  }

  const pt::ptree *tree_;
  std::string name_;
  std::set<std::string> used_;
};

void check(bool ok, const std::string &what) {
  if (!ok) throw ConfigError(what);
}

} // namespace

RunConfig parse_config(std::istream &in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const std::set<std::string> known{"run", "episode", "angles", "train", "benchmark"};
  for (const auto &[name, sec] : tree) {
    check(known.count(name) > 0, "unknown config section [" + name + "]");
    check(sec.data().empty() || !sec.empty(), "config key '" + name + "' outside any section");
  }
  auto section = [&](const std::string &name) {
    const auto it = tree.find(name);
    return Section(it == tree.not_found() ? nullptr : &it->second, name);
  };

  RunConfig c;
  auto run = section("run");
  run.get("master_seed", c.master_seed);
  run.get("jobs", c.jobs);
  run.reject_unknown();

  auto ep = section("episode");
  auto &e = c.episode;
  ep.get("n_c", e.n_c);
  std::string mode = to_string(e.mode), zgap = to_string(e.zgap_variant);
  ep.get("mode", mode);
  e.mode = sampling_mode_from_string(mode);
  ep.get("statevector_threshold", e.statevector_threshold);
  ep.get("zgap_variant", zgap);
  e.zgap_variant = zgap_variant_from_string(zgap);
  ep.get("k_top", e.k_top);
  ep.get("rho_star", e.rho_star);
  ep.get_list("zeta_bins", e.bins.zeta);
  ep.get_list("kappa_bins", e.bins.kappa);
  ep.get_list("dist_bins", e.bins.dist);
  ep.reject_unknown();

  auto ang = section("angles");
  ang.get("gamma_points", e.angle_search.gamma_points);
  ang.get("beta_points", e.angle_search.beta_points);
  ang.get("tolerance", e.angle_search.tolerance);
  ang.get("max_evaluations", e.angle_search.max_evaluations);
  ang.reject_unknown();

  auto tr = section("train");
  std::string preset = "standard";
  tr.get("preset", preset);
  auto &t = c.train;
  t = TrainConfig::from_preset(preset);
  tr.get("alpha", t.alpha);
  tr.get("discount", t.discount);
  tr.get("eps_start", t.eps_start);
  tr.get("eps_min", t.eps_min);
  tr.get("eps_decay", t.eps_decay);
  tr.get("episodes", t.episodes);
  tr.get("lambda0", t.lambda0);
  tr.get("mu_lambda", t.mu_lambda);
  tr.get("lambda_max", t.lambda_max);
  tr.get("ema_beta", t.ema_beta);
  tr.get("warmup", t.warmup);
  tr.get("p_star", t.p_star);
  tr.get("eta", t.eta);
  tr.get("extra_fail_penalty", t.extra_fail_penalty);
  tr.get("validation_every", t.validation_every);
  tr.get("validation_trials", t.validation_trials);
  tr.get("evaluation_trials", t.evaluation_trials);
  tr.reject_unknown();

  auto bm = section("benchmark");
  auto &b = c.bench;
  bm.get("screen_trials", b.screen_trials);
  bm.get("screen_cap", b.screen_cap);
  bm.get("calibration_trials", b.calibration_trials);
  bm.get("calibration_target", b.calibration_target);
  bm.get("eval_trials", b.eval_trials);
  bm.get("operational_floor", b.operational_floor);
  bm.reject_unknown();

  check(c.jobs >= 1, "jobs must be >= 1");
  check(e.n_c >= 1, "n_c must be >= 1");
  check(e.k_top >= 2, "k_top must be >= 2");
  check(e.rho_star > 0.0 && e.rho_star <= 1.0, "rho_star must be in (0, 1]");
  check(e.statevector_threshold >= 1, "statevector_threshold must be >= 1");
  check(t.alpha >= 0.0 && t.alpha <= 1.0, "alpha must be in [0, 1]");
  check(t.discount >= 0.0 && t.discount <= 1.0, "discount must be in [0, 1]");
  check(t.eps_min >= 0.0 && t.eps_start <= 1.0 && t.eps_min <= t.eps_start,
        "need 0 <= eps_min <= eps_start <= 1");
  check(t.episodes >= 0 && t.warmup >= 0, "episodes and warmup must be >= 0");
  check(t.lambda0 >= 0.0 && t.lambda0 <= t.lambda_max, "need 0 <= lambda0 <= lambda_max");
  check(t.validation_every >= 1 && t.validation_trials >= 1 && t.evaluation_trials >= 1,
        "validation and evaluation counts must be >= 1");
  check(b.screen_trials >= 1 && b.calibration_trials >= 1 && b.eval_trials >= 1,
        "trial counts must be >= 1");
  check(b.screen_cap >= 0, "screen_cap must be >= 0");
  return c;
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  return parse_config(in);
}

void write_config(std::ostream &out, const RunConfig &c) {
  const auto &e = c.episode;
  const auto &t = c.train;
  const auto &b = c.bench;
  out << "[run]\n"
      << "master_seed = " << c.master_seed << '\n'
      << "jobs = " << c.jobs << "\n\n"
      << "[episode]\n"
      << "n_c = " << e.n_c << '\n'
      << "mode = " << to_string(e.mode) << '\n'
      << "statevector_threshold = " << e.statevector_threshold << '\n'
      << "zgap_variant = " << to_string(e.zgap_variant) << '\n'
      << "k_top = " << e.k_top << '\n'
      << "rho_star = " << num(e.rho_star) << '\n'
      << "zeta_bins = " << list(e.bins.zeta) << '\n'
      << "kappa_bins = " << list(e.bins.kappa) << '\n'
      << "dist_bins = " << list(e.bins.dist) << "\n\n"
      << "[angles]\n"
      << "gamma_points = " << e.angle_search.gamma_points << '\n'
      << "beta_points = " << e.angle_search.beta_points << '\n'
      << "tolerance = " << num(e.angle_search.tolerance) << '\n'
      << "max_evaluations = " << e.angle_search.max_evaluations << "\n\n"
      << "[train]\n"
      << "preset = " << t.preset << '\n'
      << "alpha = " << num(t.alpha) << '\n'
      << "discount = " << num(t.discount) << '\n'
      << "eps_start = " << num(t.eps_start) << '\n'
      << "eps_min = " << num(t.eps_min) << '\n'
      << "eps_decay = " << num(t.eps_decay) << '\n'
      << "episodes = " << t.episodes << '\n'
      << "lambda0 = " << num(t.lambda0) << '\n'
      << "mu_lambda = " << num(t.mu_lambda) << '\n'
      << "lambda_max = " << num(t.lambda_max) << '\n'
      << "ema_beta = " << num(t.ema_beta) << '\n'
      << "warmup = " << t.warmup << '\n'
      << "p_star = " << num(t.p_star) << '\n'
      << "eta = " << num(t.eta) << '\n'
      << "extra_fail_penalty = " << num(t.extra_fail_penalty) << '\n'
      << "validation_every = " << t.validation_every << '\n'
      << "validation_trials = " << t.validation_trials << '\n'
      << "evaluation_trials = " << t.evaluation_trials << "\n\n"
      << "[benchmark]\n"
      << "screen_trials = " << b.screen_trials << '\n'
      << "screen_cap = " << b.screen_cap << '\n'
      << "calibration_trials = " << b.calibration_trials << '\n'
      << "calibration_target = " << num(b.calibration_target) << '\n'
      << "eval_trials = " << b.eval_trials << '\n'
      << "operational_floor = " << num(b.operational_floor) << '\n';
}

} // namespace rqshot
