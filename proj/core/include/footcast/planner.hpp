#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "footcast/costmap.hpp"
#include "footcast/feasibility.hpp"
#include "footcast/gait.hpp"
#include "footcast/predictor.hpp"
#include "footcast/terrain.hpp"

namespace footcast {

struct Control {
  double v = 0.0;
  double omega = 0.0;
};

using ControlSequence = std::vector<Control>;

enum class Formulation { obstacle, roughness, uncertainty };

std::string_view to_string(Formulation f);
Formulation parse_formulation(std::string_view name);

struct MppiConfig {
  int samples = 64;
  int horizon = 30;
  double dt = 0.1;
  double sigma_v = 0.2;      // std dev, m/s
  double sigma_omega = 0.4;  // std dev, rad/s
  double beta = 1.0;
  double lambda_goal = 1.0;
  double lambda_obs = 0.0;
  double lambda_rough = 0.0;
  double lambda_unc = 0.05;
  double lambda_ctrl = 0.01;
  double v_min = 0.0;
  double v_max = 1.0;
  double omega_max = 1.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless exactly one middle weight is nonzero.
  void validate() const;
  Formulation active() const;
  double active_weight() const;
  Control clamp(Control c) const;
};

/// Unicycle rollout; H + 1 states including the start.
std::vector<RobotState> rollout(const RobotState& start, std::span<const Control> controls, double dt);

struct ScoreTerms {
  double goal = 0.0;
  double middle = 0.0;  // weighted
  double control = 0.0; // weighted
  double total() const { return goal + middle + control; }
};

/// Cost lookup used by the planner: one costmap, or a stack of costmaps built
/// at increasing commanded speeds and interpolated linearly in speed.
class CostField {
 public:
  explicit CostField(const Costmap& map);
  CostField(std::vector<double> speed_levels, std::vector<Costmap> maps);

  double sample(double x, double y, double speed) const noexcept;
  const Costmap& layer(std::size_t i) const { return maps_.at(i); }
  std::size_t layers() const noexcept { return maps_.size(); }
  /// Layer nearest to `speed`.
  const Costmap& nearest(double speed) const noexcept;

 private:
  std::vector<double> levels_;
  std::vector<Costmap> maps_;
};

/// Sum over t = 1..H of the goal distance, the active costmap sampled at p_t
/// and the squared magnitude of the control that led to p_t.
ScoreTerms score_terms(std::span<const RobotState> trajectory, std::span<const Control> controls,
                       const Eigen::Vector2d& goal, const CostField& active, const MppiConfig& cfg);
ScoreTerms score_terms(std::span<const RobotState> trajectory, std::span<const Control> controls,
                       const Eigen::Vector2d& goal, const Costmap& active, const MppiConfig& cfg);
double score(std::span<const RobotState> trajectory, std::span<const Control> controls,
             const Eigen::Vector2d& goal, const Costmap& active, const MppiConfig& cfg);
double score(std::span<const RobotState> trajectory, std::span<const Control> controls,
             const Eigen::Vector2d& goal, const CostField& active, const MppiConfig& cfg);

/// exp(-(J - J_min) / beta) normalized; non-finite costs get weight 0.
std::vector<double> softmin_weights(std::span<const double> costs, double beta);

struct PlanResult {
  Control executed;
  ControlSequence nominal;       // updated sequence
  ControlSequence next_nominal;  // shifted by one, last control repeated
  std::vector<ControlSequence> samples;  // perturbed and clamped
  std::vector<double> costs;
  std::vector<double> weights;
  std::vector<RobotState> predicted;
};

/// `step` selects the noise stream so that every planning cycle is reproducible.
PlanResult mppi_step(const RobotState& state, const Eigen::Vector2d& goal, const CostField& active,
                     const ControlSequence& nominal, const MppiConfig& cfg, std::uint64_t step);
PlanResult mppi_step(const RobotState& state, const Eigen::Vector2d& goal, const Costmap& active,
                     const ControlSequence& nominal, const MppiConfig& cfg, std::uint64_t step);

struct EpisodeConfig {
  MppiConfig mppi;
  CostmapConfig costmap;
  FeasibilityConfig feasibility;
  GaitConfig gait;
  int max_steps = 300;
  double goal_radius = 0.3;
  int samples_per_member = 20;
  int history = 10;                                  // snapshots kept in the uncertainty costmap
  std::vector<double> lattice_x{0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.1, 2.4, 2.7};
  std::vector<double> lattice_y{-0.6, -0.3, 0.0, 0.3, 0.6};
  int lattice_samples = 5;  // MC samples per member for lattice predictions
  // Commanded speeds at which uncertainty layers are built; empty builds a
  // single layer at the nominal command.
  std::vector<double> speed_levels{0.2, 0.4, 0.6, 0.8, 1.0};
  std::uint64_t seed = 0;
};

struct EpisodeStep {
  double t = 0.0;
  RobotState state;
  Control cmd;
  double s_bar = 0.0;
  double active_cost = 0.0;
  double foothold_error = 0.0;
  FeasibilityRecord feasibility;
};

struct EpisodeLog {
  std::vector<EpisodeStep> steps;
  RobotState final_state;
  bool reached_goal = false;
  std::string termination;  // goal | max_steps | left_terrain
  double initial_distance = 0.0;
  double final_distance = 0.0;
  double progress = 0.0;  // (d0 - d_final) / d0 clamped to [0, 1]
  Costmap last_costmap{GridSpec{2, 2, 0.1, 0.0, 0.0}};
};

/// Static baseline costmaps for one world, shared by episodes.
struct StaticCostmaps {
  Costmap obstacle;
  Costmap roughness;
};

StaticCostmaps build_static_costmaps(const HeightField& world, const CostmapConfig& cfg, const GridSpec& grid);

/// Closed-loop run. Planning failures are rethrown with the step index.
EpisodeLog run_episode(const RobotState& start, const Eigen::Vector2d& goal, const HeightField& world,
                       const Ensemble& ensemble, const StaticCostmaps& static_maps, const EpisodeConfig& cfg);

std::string episode_to_csv(const EpisodeLog& log);

double goal_progress(double initial_distance, double final_distance);

}  // namespace footcast
