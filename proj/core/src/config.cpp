#include "footcast/config.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "footcast/errors.hpp"
#include "footcast/io.hpp"

namespace footcast {

TerrainSpec TestTerrainConfig::spec(TerrainKind kind) const {
  TerrainSpec s;
  s.kind = TerrainKind::mixed;
  s.seed = seed + static_cast<std::uint64_t>(kind);
  s.amplitude = amplitude;
  s.feature_scale = feature_scale;
  s.resolution = resolution;
  s.tile_size = tile_size;
  s.extent_x = tile_size * static_cast<double>(pattern.size());
  s.extent_y = extent_y;
  std::string row;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (i > 0) row += ",";
    row += pattern[i] == "X" ? std::string(to_string(kind)) : pattern[i];
  }
  const int tiles_y = std::max(1, static_cast<int>(std::ceil(extent_y / tile_size - 1e-9)));
  for (int r = 0; r < tiles_y; ++r) s.tile_layout += (r > 0 ? ";" : "") + row;
  return s;
}

int TestTerrainConfig::transitions() const {
  return static_cast<int>(std::count(pattern.begin(), pattern.end(), "X"));
}

ExperimentConfig::ExperimentConfig() {
  id_terrain.kind = TerrainKind::flat;
  id_terrain.extent_x = 6.0;
  id_terrain.extent_y = 8.0;

  plan_terrain.kind = TerrainKind::mixed;
  plan_terrain.seed = 11;
  plan_terrain.extent_x = 12.0;
  plan_terrain.extent_y = 6.0;
  plan_terrain.tile_layout =
      "flat,flat,flat,flat,flat,flat;"
      "flat,stepped,wavy,spiked,stepped,flat;"
      "flat,flat,flat,flat,flat,flat";
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw ConfigError("experiment seeds must be distinct");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  id_terrain.validate();
  plan_terrain.validate();
  for (auto kind : test_terrain.kinds) test_terrain.spec(kind).validate();
  if (test_terrain.transitions() < 1) throw ConfigError("test_terrain pattern needs at least one X tile");
  gait.validate();
  if (collect.id_rollouts < 1 || collect.id_steps < 1 || collect.ood_runs < 1 || collect.ood_steps < 1)
    throw ConfigError("collect counts must be >= 1");
  if (!(collect.dt > 0.0)) throw ConfigError("collect dt must be > 0");
  if (!(collect.ood_commands.hold_time > 0.0)) throw ConfigError("collect hold_time must be > 0");
  if (collect.ood_commands.vx_max < collect.ood_commands.vx_min ||
      collect.ood_commands.yaw_rate_max < collect.ood_commands.yaw_rate_min)
    throw ConfigError("collect command ranges are inverted");
  loss.validate();
  train.validate();
  if (eval_samples < 1 || eval_samples * train.members < 2)
    throw ConfigError("predictor eval_samples * members must be >= 2");
  mppi.validate();
  costmap.validate();
  if (!(costmap_resolution > 0.0)) throw ConfigError("costmap resolution must be > 0");
  feasibility.validate();
  if (plan.runs_table < 1 || plan.runs_progress < 1) throw ConfigError("plan run counts must be >= 1");
  if (plan.episode.max_steps < 1) throw ConfigError("plan max_steps must be >= 1");
  if (!(plan.episode.goal_radius > 0.0)) throw ConfigError("plan goal_radius must be > 0");
  if (plan.episode.history < 1) throw ConfigError("plan history must be >= 1");
  if (plan.episode.lattice_samples < 1 || plan.episode.lattice_samples * train.members < 2)
    throw ConfigError("plan lattice_samples * members must be >= 2");
  for (std::size_t i = 1; i < plan.episode.speed_levels.size(); ++i)
    if (!(plan.episode.speed_levels[i] > plan.episode.speed_levels[i - 1]))
      throw ConfigError("plan speed_levels must be strictly increasing");
  if (plan.lambda_sweep.empty()) throw ConfigError("plan lambda_sweep must not be empty");
  for (double l : plan.lambda_sweep)
    if (!(l > 0.0)) throw ConfigError("plan lambda_sweep values must be > 0");
}

namespace {

namespace pt = boost::property_tree;

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty())
        throw ConfigError("key '" + section + "' appears outside any section");
      for (const auto& [key, value] : body) unread_.insert(section + "." + key);
    }
  }

  template <typename T>
  void get(const std::string& section, const std::string& key, T& out) {
    const auto raw = find(section, key);
    if (!raw) return;
    if constexpr (std::is_same_v<T, std::string>) {
      out = *raw;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (*raw == "true" || *raw == "1") out = true;
      else if (*raw == "false" || *raw == "0") out = false;
      else throw ConfigError(section + "." + key + ": expected true/false, got '" + *raw + "'");
    } else if constexpr (std::is_integral_v<T>) {
      T v{};
      const auto* end = raw->data() + raw->size();
      const auto [ptr, ec] = std::from_chars(raw->data(), end, v);
      if (ec != std::errc{} || ptr != end) throw ConfigError(section + "." + key + ": expected an integer, got '" + *raw + "'");
      out = v;
    } else {
      out = number(section, key, *raw);
    }
  }

  void get_list(const std::string& section, const std::string& key, std::vector<double>& out) {
    const auto raw = find(section, key);
    if (!raw) return;
    out.clear();
    if (trim(*raw).empty()) return;
    for (auto tok : io::split(*raw, ',')) out.push_back(number(section, key, trim(tok)));
  }

  void get_list(const std::string& section, const std::string& key, std::vector<std::string>& out) {
    const auto raw = find(section, key);
    if (!raw) return;
    out.clear();
    for (auto tok : io::split(*raw, ',')) out.emplace_back(trim(tok));
  }

  void get_seeds(const std::string& section, const std::string& key, std::vector<std::uint64_t>& out) {
    std::vector<std::string> toks;
    get_list(section, key, toks);
    if (toks.empty()) return;
    out.clear();
    for (const auto& t : toks) {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ConfigError(section + "." + key + ": bad seed '" + t + "'");
      out.push_back(v);
    }
  }

  void finish() const {
    if (!unread_.empty()) throw ConfigError("unknown config key '" + *unread_.begin() + "'");
  }

 private:
  static std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return std::string(s);
  }

  static double number(const std::string& section, const std::string& key, const std::string& raw) {
    try {
      return io::parse_double(raw, section + "." + key);
    } catch (const LoadError&) {
      throw ConfigError(section + "." + key + ": expected a number, got '" + raw + "'");
    }
  }

  std::optional<std::string> find(const std::string& section, const std::string& key) {
    const auto s = tree_.get_child_optional(pt::ptree::path_type(section, '\0'));
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    unread_.erase(section + "." + key);
    return trim(*v);
  }

  const pt::ptree& tree_;
  std::set<std::string> unread_;
};

void read_terrain(Reader& r, const std::string& section, TerrainSpec& spec) {
  std::string kind(to_string(spec.kind));
  r.get(section, "kind", kind);
  spec.kind = parse_terrain_kind(kind);
  r.get(section, "seed", spec.seed);
  r.get(section, "amplitude", spec.amplitude);
  r.get(section, "feature_scale", spec.feature_scale);
  r.get(section, "extent_x", spec.extent_x);
  r.get(section, "extent_y", spec.extent_y);
  r.get(section, "resolution", spec.resolution);
  r.get(section, "origin_x", spec.origin_x);
  r.get(section, "origin_y", spec.origin_y);
  r.get(section, "tile_size", spec.tile_size);
  r.get(section, "tile_layout", spec.tile_layout);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  Reader r(tree);
  ExperimentConfig c;

  std::string out_dir = c.out_dir.string();
  r.get("experiment", "out_dir", out_dir);
  c.out_dir = out_dir;
  r.get_seeds("experiment", "seeds", c.seeds);
  r.get("experiment", "threads", c.threads);

  read_terrain(r, "id_terrain", c.id_terrain);
  read_terrain(r, "plan_terrain", c.plan_terrain);

  auto& tt = c.test_terrain;
  std::vector<std::string> kinds;
  r.get_list("test_terrain", "kinds", kinds);
  if (!kinds.empty()) {
    tt.kinds.clear();
    for (const auto& k : kinds) tt.kinds.push_back(parse_terrain_kind(k));
  }
  r.get_list("test_terrain", "pattern", tt.pattern);
  r.get("test_terrain", "extent_y", tt.extent_y);
  r.get("test_terrain", "tile_size", tt.tile_size);
  r.get("test_terrain", "amplitude", tt.amplitude);
  r.get("test_terrain", "feature_scale", tt.feature_scale);
  r.get("test_terrain", "resolution", tt.resolution);
  r.get("test_terrain", "seed", tt.seed);

  r.get("gait", "cycle_period", c.gait.cycle_period);
  r.get("gait", "duty_factor", c.gait.duty_factor);
  r.get("gait", "step_noise_flat", c.gait.step_noise_flat);
  r.get("gait", "step_noise_slope_gain", c.gait.step_noise_slope_gain);
  r.get("gait", "seed", c.gait.seed);

  auto& col = c.collect;
  r.get("collect", "id_rollouts", col.id_rollouts);
  r.get("collect", "id_steps", col.id_steps);
  r.get("collect", "id_vx", col.id_vx);
  r.get("collect", "dt", col.dt);
  r.get("collect", "ood_runs", col.ood_runs);
  r.get("collect", "ood_steps", col.ood_steps);
  r.get("collect", "vx_min", col.ood_commands.vx_min);
  r.get("collect", "vx_max", col.ood_commands.vx_max);
  r.get("collect", "yaw_rate_min", col.ood_commands.yaw_rate_min);
  r.get("collect", "yaw_rate_max", col.ood_commands.yaw_rate_max);
  r.get("collect", "hold_time", col.ood_commands.hold_time);

  r.get("loss", "w_pose", c.loss.w_pose);
  r.get("loss", "w_epi", c.loss.w_epi);
  r.get("loss", "w_cal", c.loss.w_cal);
  r.get("loss", "lambda", c.loss.lambda);
  r.get("loss", "s_min", c.loss.s_min);
  r.get("loss", "s_max", c.loss.s_max);

  r.get("train", "epochs", c.train.epochs);
  r.get("train", "batch_size", c.train.batch_size);
  r.get("train", "learning_rate", c.train.learning_rate);
  r.get("train", "samples_per_member", c.train.samples_per_member);
  r.get("train", "members", c.train.members);
  r.get("train", "dropout", c.train.architecture.u_dropout);
  std::string opt = c.train.optimizer == OptimizerKind::adam ? "adam" : "sgd";
  r.get("train", "optimizer", opt);
  if (opt == "adam") c.train.optimizer = OptimizerKind::adam;
  else if (opt == "sgd") c.train.optimizer = OptimizerKind::sgd_momentum;
  else throw ConfigError("train.optimizer: expected adam or sgd, got '" + opt + "'");

  r.get("predictor", "eval_samples", c.eval_samples);
  r.get("ood", "k_transitions", c.k_transitions);

  auto& m = c.mppi;
  r.get("mppi", "samples", m.samples);
  r.get("mppi", "horizon", m.horizon);
  r.get("mppi", "dt", m.dt);
  r.get("mppi", "sigma_v", m.sigma_v);
  r.get("mppi", "sigma_omega", m.sigma_omega);
  r.get("mppi", "beta", m.beta);
  r.get("mppi", "lambda_goal", m.lambda_goal);
  r.get("mppi", "lambda_obs", m.lambda_obs);
  r.get("mppi", "lambda_rough", m.lambda_rough);
  r.get("mppi", "lambda_unc", m.lambda_unc);
  r.get("mppi", "lambda_ctrl", m.lambda_ctrl);
  r.get("mppi", "v_min", m.v_min);
  r.get("mppi", "v_max", m.v_max);
  r.get("mppi", "omega_max", m.omega_max);
  r.get("mppi", "seed", m.seed);

  r.get("costmap", "alpha", c.costmap.alpha);
  r.get("costmap", "blob_radius", c.costmap.blob_radius);
  r.get("costmap", "obstacle_height_threshold", c.costmap.obstacle_height_threshold);
  r.get("costmap", "obstacle_neighborhood", c.costmap.obstacle_neighborhood);
  r.get("costmap", "roughness_scale", c.costmap.roughness_scale);
  r.get("costmap", "resolution", c.costmap_resolution);

  r.get("feasibility", "eps", c.feasibility.eps);

  auto& p = c.plan;
  r.get("plan", "runs_table", p.runs_table);
  r.get("plan", "runs_progress", p.runs_progress);
  r.get("plan", "start_x", p.start.x);
  r.get("plan", "start_y", p.start.y);
  r.get("plan", "start_yaw", p.start.yaw);
  r.get("plan", "goal_x", p.goal_x);
  r.get("plan", "goal_y", p.goal_y);
  r.get("plan", "start_jitter", p.start_jitter);
  r.get_list("plan", "lambda_sweep", p.lambda_sweep);
  r.get("plan", "max_steps", p.episode.max_steps);
  r.get("plan", "goal_radius", p.episode.goal_radius);
  r.get("plan", "history", p.episode.history);
  r.get_list("plan", "lattice_x", p.episode.lattice_x);
  r.get_list("plan", "lattice_y", p.episode.lattice_y);
  r.get("plan", "lattice_samples", p.episode.lattice_samples);
  r.get_list("plan", "speed_levels", p.episode.speed_levels);

  r.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_config(text);
}

}  // namespace footcast
