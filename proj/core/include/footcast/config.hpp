#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "footcast/costmap.hpp"
#include "footcast/feasibility.hpp"
#include "footcast/gait.hpp"
#include "footcast/planner.hpp"
#include "footcast/terrain.hpp"
#include "footcast/training.hpp"

namespace footcast {

/// Banded evaluation terrain: tiles along x follow `pattern`, where the token
/// "X" stands for the terrain kind under test; every tile row repeats it.
struct TestTerrainConfig {
  std::vector<TerrainKind> kinds{TerrainKind::wavy, TerrainKind::stepped, TerrainKind::spiked};
  std::vector<std::string> pattern{"flat", "X", "flat", "X", "flat", "X", "flat", "flat"};
  double extent_y = 10.0;
  double tile_size = 2.0;
  double amplitude = 0.1;
  double feature_scale = 0.5;
  double resolution = 0.05;
  std::uint64_t seed = 7;

  TerrainSpec spec(TerrainKind kind) const;
  int transitions() const;  // number of X tiles
};

struct CollectConfig {
  int id_rollouts = 12;
  int id_steps = 100;
  double id_vx = 0.4;
  double dt = 0.1;
  int ood_runs = 3;
  int ood_steps = 140;
  CommandDistribution ood_commands{{0.4, 0.0, 0.0}, true, 0.1, 1.0, -0.5, 0.5, 2.0};
};

struct PlanConfig {
  int runs_table = 10;
  int runs_progress = 20;
  RobotState start{1.0, 3.0, 0.0, 0.0};
  double goal_x = 11.0;
  double goal_y = 3.0;
  double start_jitter = 0.4;  // m, uniform in y per run
  std::vector<double> lambda_sweep{0.01, 0.05, 0.2, 1.0};
  EpisodeConfig episode;
};

struct ExperimentConfig {
  std::filesystem::path out_dir = "out";
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int threads = 1;

  TerrainSpec id_terrain;
  TestTerrainConfig test_terrain;
  TerrainSpec plan_terrain;
  GaitConfig gait;
  CollectConfig collect;
  LossWeights loss;
  TrainConfig train;
  int eval_samples = 20;  // M at evaluation
  int k_transitions = -1; // < 0: count of tested tiles in the pattern
  MppiConfig mppi;
  CostmapConfig costmap;
  double costmap_resolution = 0.1;
  FeasibilityConfig feasibility;
  PlanConfig plan;

  ExperimentConfig();
  void validate() const;
};

/// INI file with "[section]" headers and "key = value" lines. Unknown sections
/// or keys are rejected so that typos do not silently fall back to defaults.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

}  // namespace footcast
