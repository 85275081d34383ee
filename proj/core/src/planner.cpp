#include "footcast/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <limits>

#include "footcast/errors.hpp"
#include "footcast/io.hpp"
#include "footcast/ood.hpp"
#include "footcast/rng.hpp"

namespace footcast {

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::obstacle: return "obstacle";
    case Formulation::roughness: return "roughness";
    case Formulation::uncertainty: return "uncertainty";
  }
  return "unknown";
}

Formulation parse_formulation(std::string_view name) {
  if (name == "obstacle") return Formulation::obstacle;
  if (name == "roughness") return Formulation::roughness;
  if (name == "uncertainty") return Formulation::uncertainty;
  throw ConfigError("unknown formulation '" + std::string(name) + "'");
}

void MppiConfig::validate() const {
  if (samples < 1) throw ConfigError("mppi samples must be >= 1");
  if (horizon < 1) throw ConfigError("mppi horizon must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("mppi dt must be > 0");
  if (!(beta > 0.0)) throw ConfigError("mppi beta must be > 0");
  if (!(sigma_v >= 0.0 && sigma_omega >= 0.0)) throw ConfigError("mppi noise std devs must be >= 0");
  if (lambda_goal < 0 || lambda_obs < 0 || lambda_rough < 0 || lambda_unc < 0 || lambda_ctrl < 0)
    throw ConfigError("mppi weights must be >= 0");
  const int active_terms = (lambda_obs != 0.0) + (lambda_rough != 0.0) + (lambda_unc != 0.0);
  if (active_terms != 1)
    throw ConfigError("exactly one of lambda_obs, lambda_rough, lambda_unc must be nonzero (got " +
                      std::to_string(active_terms) + ")");
  if (!(v_max >= v_min)) throw ConfigError("mppi v_max must be >= v_min");
  if (!(omega_max >= 0.0)) throw ConfigError("mppi omega_max must be >= 0");
}

Formulation MppiConfig::active() const {
  if (lambda_obs != 0.0) return Formulation::obstacle;
  if (lambda_rough != 0.0) return Formulation::roughness;
  return Formulation::uncertainty;
}

double MppiConfig::active_weight() const {
  switch (active()) {
    case Formulation::obstacle: return lambda_obs;
    case Formulation::roughness: return lambda_rough;
    case Formulation::uncertainty: return lambda_unc;
  }
  return 0.0;
}

Control MppiConfig::clamp(Control c) const {
  return {std::clamp(c.v, v_min, v_max), std::clamp(c.omega, -omega_max, omega_max)};
}

std::vector<RobotState> rollout(const RobotState& start, std::span<const Control> controls, double dt) {
  std::vector<RobotState> traj;
  traj.reserve(controls.size() + 1);
  traj.push_back(start);
  for (const auto& c : controls) {
    const auto& s = traj.back();
    RobotState n = s;
    n.x = s.x + c.v * std::cos(s.yaw) * dt;
    n.y = s.y + c.v * std::sin(s.yaw) * dt;
    n.yaw = wrap_angle(s.yaw + c.omega * dt);
    traj.push_back(n);
  }
  return traj;
}

CostField::CostField(const Costmap& map) : maps_{map} {}

CostField::CostField(std::vector<double> speed_levels, std::vector<Costmap> maps)
    : levels_(std::move(speed_levels)), maps_(std::move(maps)) {
  if (maps_.empty() || levels_.size() != maps_.size())
    throw StructuralError("cost field needs one speed level per costmap");
  if (!std::is_sorted(levels_.begin(), levels_.end()) ||
      std::adjacent_find(levels_.begin(), levels_.end()) != levels_.end())
    throw StructuralError("cost field speed levels must be strictly increasing");
}

double CostField::sample(double x, double y, double speed) const noexcept {
  if (maps_.size() == 1) return maps_.front().sample(x, y);
  if (speed <= levels_.front()) return maps_.front().sample(x, y);
  if (speed >= levels_.back()) return maps_.back().sample(x, y);
  const auto hi = static_cast<std::size_t>(std::upper_bound(levels_.begin(), levels_.end(), speed) - levels_.begin());
  const std::size_t lo = hi - 1;
  const double w = (speed - levels_[lo]) / (levels_[hi] - levels_[lo]);
  return (1.0 - w) * maps_[lo].sample(x, y) + w * maps_[hi].sample(x, y);
}

const Costmap& CostField::nearest(double speed) const noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < levels_.size(); ++i)
    if (std::abs(levels_[i] - speed) < std::abs(levels_[best] - speed)) best = i;
  return maps_[best];
}

ScoreTerms score_terms(std::span<const RobotState> trajectory, std::span<const Control> controls,
                       const Eigen::Vector2d& goal, const Costmap& active, const MppiConfig& cfg) {
  return score_terms(trajectory, controls, goal, CostField(active), cfg);
}

ScoreTerms score_terms(std::span<const RobotState> trajectory, std::span<const Control> controls,
                       const Eigen::Vector2d& goal, const CostField& active, const MppiConfig& cfg) {
  if (trajectory.size() != controls.size() + 1) throw StructuralError("trajectory must have H + 1 states");
  const double w = cfg.active_weight();
  ScoreTerms s;
  for (std::size_t t = 1; t < trajectory.size(); ++t) {
    const auto& p = trajectory[t];
    const auto& u = controls[t - 1];
    s.goal += cfg.lambda_goal * std::hypot(p.x - goal.x(), p.y - goal.y());
    s.middle += w * active.sample(p.x, p.y, u.v);
    s.control += cfg.lambda_ctrl * (u.v * u.v + u.omega * u.omega);
  }
  return s;
}

double score(std::span<const RobotState> trajectory, std::span<const Control> controls, const Eigen::Vector2d& goal,
             const Costmap& active, const MppiConfig& cfg) {
  return score_terms(trajectory, controls, goal, active, cfg).total();
}

double score(std::span<const RobotState> trajectory, std::span<const Control> controls, const Eigen::Vector2d& goal,
             const CostField& active, const MppiConfig& cfg) {
  return score_terms(trajectory, controls, goal, active, cfg).total();
}

std::vector<double> softmin_weights(std::span<const double> costs, double beta) {
  double j_min = std::numeric_limits<double>::infinity();
  for (double j : costs)
    if (std::isfinite(j)) j_min = std::min(j_min, j);
  if (!std::isfinite(j_min)) throw PlanningError("all rollout costs are non-finite");
  std::vector<double> w(costs.size(), 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    if (!std::isfinite(costs[k])) continue;
    w[k] = std::exp(-(costs[k] - j_min) / beta);
    sum += w[k];
  }
  for (double& x : w) x /= sum;
  return w;
}

PlanResult mppi_step(const RobotState& state, const Eigen::Vector2d& goal, const Costmap& active,
                     const ControlSequence& nominal, const MppiConfig& cfg, std::uint64_t step) {
  return mppi_step(state, goal, CostField(active), nominal, cfg, step);
}

PlanResult mppi_step(const RobotState& state, const Eigen::Vector2d& goal, const CostField& active,
                     const ControlSequence& nominal, const MppiConfig& cfg, std::uint64_t step) {
  cfg.validate();
  const auto H = static_cast<std::size_t>(cfg.horizon);
  ControlSequence base = nominal;
  base.resize(H, base.empty() ? Control{} : base.back());

  const auto K = static_cast<std::size_t>(cfg.samples);
  std::vector<ControlSequence> seqs(K, ControlSequence(H));
  PlanResult out;
  out.costs.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < H; ++t) {
      const Control eps{cfg.sigma_v * rng::normal(rng::key(cfg.seed, step, k, t, 0)),
                        cfg.sigma_omega * rng::normal(rng::key(cfg.seed, step, k, t, 1))};
      seqs[k][t] = cfg.clamp({base[t].v + eps.v, base[t].omega + eps.omega});
    }
    const auto traj = rollout(state, seqs[k], cfg.dt);
    out.costs[k] = score(traj, seqs[k], goal, active, cfg);
  }
  out.weights = softmin_weights(out.costs, cfg.beta);
  out.nominal.assign(H, Control{});
  for (std::size_t k = 0; k < K; ++k) {
    if (out.weights[k] == 0.0) continue;
    for (std::size_t t = 0; t < H; ++t) {
      out.nominal[t].v += out.weights[k] * seqs[k][t].v;
      out.nominal[t].omega += out.weights[k] * seqs[k][t].omega;
    }
  }
  for (auto& c : out.nominal) c = cfg.clamp(c);  // guards rounding at the bounds
  out.executed = out.nominal.front();
  out.next_nominal.assign(out.nominal.begin() + 1, out.nominal.end());
  out.next_nominal.push_back(out.nominal.back());
  out.predicted = rollout(state, out.nominal, cfg.dt);
  out.samples = std::move(seqs);
  return out;
}

StaticCostmaps build_static_costmaps(const HeightField& world, const CostmapConfig& cfg, const GridSpec& grid) {
  return {obstacle_costmap(world, cfg, grid), roughness_costmap(world, cfg, grid)};
}

double goal_progress(double initial_distance, double final_distance) {
  if (!(initial_distance > 0.0)) return 1.0;
  return std::clamp((initial_distance - final_distance) / initial_distance, 0.0, 1.0);
}

namespace {

constexpr std::uint64_t kPredictTag = 0x50726564;
constexpr std::uint64_t kLatticeTag = 0x4c617474;

std::vector<FootPrediction> lattice_snapshot(const RobotState& state, const Command& cmd, const HeightField& world,
                                             const Ensemble& ensemble, const EpisodeConfig& cfg,
                                             std::uint64_t step, std::uint64_t layer) {
  std::vector<FootPrediction> out;
  const double c = std::cos(state.yaw), s = std::sin(state.yaw);
  std::uint64_t idx = 0;
  for (double dx : cfg.lattice_x) {
    for (double dy : cfg.lattice_y) {
      ++idx;
      RobotState probe = state;
      probe.x = state.x + c * dx - s * dy;
      probe.y = state.y + s * dx + c * dy;
      HeightScan scan;
      try {
        scan = extract_height_scan(world, probe.pose());
      } catch (const OutOfBoundsError&) {
        continue;
      }
      const auto pred = predict(ensemble, make_main_input(scan, cmd, probe.gait_phase),
                                make_uncertainty_input(cmd, pool_grid(scan)), cfg.lattice_samples,
                                rng::key(cfg.seed, kLatticeTag, step, layer, idx));
      FootPrediction fp;
      fp.feet = to_world(FootholdSet::from_stacked(pred.mean, Frame::base), probe, world);
      fp.leg_variance = per_leg_uncertainty(pred);
      out.push_back(fp);
    }
  }
  return out;
}

}  // namespace

EpisodeLog run_episode(const RobotState& start, const Eigen::Vector2d& goal, const HeightField& world,
                       const Ensemble& ensemble, const StaticCostmaps& static_maps, const EpisodeConfig& cfg) {
  cfg.mppi.validate();
  cfg.costmap.validate();
  cfg.feasibility.validate();
  cfg.gait.validate();
  if (!world.contains(start.x, start.y) || !world.contains(goal.x(), goal.y()))
    throw OutOfBoundsError("episode start or goal outside the terrain");
  if (ensemble.empty()) throw StructuralError("episode needs a trained ensemble");

  const auto formulation = cfg.mppi.active();
  const GridSpec grid = static_maps.obstacle.grid();
  const std::uint64_t noise_seed = rng::key(cfg.seed, cfg.gait.seed);
  MppiConfig mppi = cfg.mppi;
  mppi.seed = rng::key(cfg.seed, cfg.mppi.seed);

  EpisodeLog log;
  log.termination = "max_steps";
  log.initial_distance = std::hypot(start.x - goal.x(), start.y - goal.y());
  RobotState state = start;
  ControlSequence nominal(static_cast<std::size_t>(mppi.horizon), Control{});
  const bool by_speed = !cfg.speed_levels.empty();
  const std::size_t n_layers = by_speed ? cfg.speed_levels.size() : 1;
  std::vector<std::deque<std::vector<FootPrediction>>> history(n_layers);
  std::vector<Costmap> unc(n_layers, Costmap(grid));

  for (int step = 0; step < cfg.max_steps; ++step) {
    if (std::hypot(state.x - goal.x(), state.y - goal.y()) <= cfg.goal_radius) {
      log.reached_goal = true;
      log.termination = "goal";
      break;
    }
    std::optional<CostField> field;
    if (formulation == Formulation::uncertainty) {
      for (std::size_t l = 0; l < n_layers; ++l) {
        const double v = by_speed ? cfg.speed_levels[l] : nominal.front().v;
        const Command look{v, 0.0, nominal.front().omega};
        history[l].push_back(lattice_snapshot(state, look, world, ensemble, cfg, static_cast<std::uint64_t>(step), l));
        while (static_cast<int>(history[l].size()) > cfg.history) history[l].pop_front();
        std::vector<FootPrediction> all;
        for (const auto& snap : history[l]) all.insert(all.end(), snap.begin(), snap.end());
        unc[l] = uncertainty_costmap(all, cfg.costmap, grid);
      }
      field = by_speed ? CostField(cfg.speed_levels, unc) : CostField(unc.front());
    } else {
      field.emplace(formulation == Formulation::roughness ? static_maps.roughness : static_maps.obstacle);
    }

    PlanResult plan;
    try {
      plan = mppi_step(state, goal, *field, nominal, mppi, static_cast<std::uint64_t>(step));
    } catch (const PlanningError& e) {
      throw PlanningError("step " + std::to_string(step) + ": " + e.what());
    }
    const Command cmd{plan.executed.v, 0.0, plan.executed.omega};

    HeightScan scan;
    FootholdSet nominal_feet;
    try {
      scan = extract_height_scan(world, state.pose());
      nominal_feet = nominal_footholds(state, cmd, world, cfg.gait);
    } catch (const OutOfBoundsError&) {
      log.termination = "left_terrain";
      break;
    }
    const auto pred = predict(ensemble, make_main_input(scan, cmd, state.gait_phase),
                              make_uncertainty_input(cmd, pool_grid(scan)), cfg.samples_per_member,
                              rng::key(cfg.seed, kPredictTag, step));
    const FootholdSet predicted = to_world(FootholdSet::from_stacked(pred.mean, Frame::base), state, world);
    const FootholdSet actual = actual_footholds(to_world(nominal_feet, state, world), world, cfg.gait,
                                                foothold_stream(noise_seed, static_cast<std::uint64_t>(step)));

    EpisodeStep rec;
    rec.t = step * mppi.dt;
    rec.state = state;
    rec.cmd = plan.executed;
    rec.s_bar = pred.scalar_summary;
    rec.active_cost = field->sample(state.x, state.y, plan.executed.v);
    double err = 0.0;
    for (std::size_t i = 0; i < 4; ++i) err += (predicted.feet[i] - actual.feet[i]).norm();
    rec.foothold_error = err / 4.0;
    rec.feasibility = feasibility_record(rec.t, predicted, actual, {state.x, state.y}, cfg.feasibility);
    log.steps.push_back(rec);

    state = advance_state(state, cmd, mppi.dt, cfg.gait.cycle_period);
    nominal = plan.next_nominal;
  }
  if (log.termination == "max_steps" && std::hypot(state.x - goal.x(), state.y - goal.y()) <= cfg.goal_radius) {
    log.reached_goal = true;
    log.termination = "goal";
  }
  log.final_state = state;
  log.final_distance = std::hypot(state.x - goal.x(), state.y - goal.y());
  log.progress = goal_progress(log.initial_distance, log.final_distance);
  log.last_costmap = formulation == Formulation::uncertainty ? unc[by_speed ? n_layers / 2 : 0]
                     : formulation == Formulation::roughness ? static_maps.roughness
                                                             : static_maps.obstacle;
  return log;
}

std::string episode_to_csv(const EpisodeLog& log) {
  std::string out = "t,x,y,yaw,v_cmd,omega_cmd,s_bar,active_cost,foothold_error\n";
  for (const auto& s : log.steps) {
    out += io::format_double(s.t) + "," + io::format_double(s.state.x) + "," + io::format_double(s.state.y) + "," +
           io::format_double(s.state.yaw) + "," + io::format_double(s.cmd.v) + "," + io::format_double(s.cmd.omega) +
           "," + io::format_double(s.s_bar) + "," + io::format_double(s.active_cost) + "," +
           io::format_double(s.foothold_error) + "\n";
  }
  return out;
}

}  // namespace footcast
