#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "footcast/gait.hpp"
#include "footcast/predictor.hpp"
#include "footcast/terrain.hpp"

namespace footcast {

struct TrainingSample {
  MainInput x;
  UncertaintyInput u;
  Output12 y = Output12::Zero();  // leg-major (LF, RF, LH, RH) x (x, y, z), base frame
};

struct Dataset {
  std::vector<TrainingSample> samples;
  int truncated_steps = 0;  // steps dropped because the robot left the terrain
};

struct CommandDistribution {
  Command fixed{0.4, 0.0, 0.0};
  bool randomize = false;
  double vx_min = 0.1;
  double vx_max = 1.0;
  double yaw_rate_min = -0.5;
  double yaw_rate_max = 0.5;
  double hold_time = 2.0;  // s between redraws when randomized
};

/// One time step of an oracle rollout.
struct RolloutStep {
  double t = 0.0;
  RobotState state;
  Command cmd;
  HeightScan scan;
  FootholdSet actual_world;
};

struct Rollout {
  std::vector<RolloutStep> steps;
  Dataset dataset;
};

struct RolloutOptions {
  RobotState start;
  double dt = 0.1;
  bool include_command_in_u = true;
};

Rollout collect_rollout(const HeightField& field, const GaitConfig& gait, const CommandDistribution& commands,
                        int n_steps, std::uint64_t seed, const RolloutOptions& options);

/// Emits one (x_t, u_t, y_t) sample per step; y_t is the oracle's realized
/// touchdown in the base frame at t.
Dataset collect_dataset(const HeightField& field, const GaitConfig& gait, const CommandDistribution& commands,
                        int n_steps, std::uint64_t seed, const RolloutOptions& options = {});

/// Dataset with the command entries of every u_t zeroed (terrain-only ablation).
Dataset without_command_in_u(Dataset data);

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Loss

struct LossWeights {
  double w_pose = 1.0;
  double w_epi = 0.5;
  double w_cal = 0.2;
  double lambda = 0.5;
  double s_min = 1e-4;  // m^2
  double s_max = 1e-2;  // m^2
  double eps_band = 1e-8;

  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double pose = 0.0;
  double epi = 0.0;
  double cal = 0.0;
  double rho = 0.0;  // Pearson correlation of per-sample error and uncertainty summary
};

using BatchMatrix = Eigen::Matrix<double, kOutputSize, Eigen::Dynamic>;

/// Per-sample mean foothold position error (1/4) sum_i ||mean_i - y_i||.
Eigen::VectorXd foothold_errors(const BatchMatrix& mean, const BatchMatrix& labels);

/// Pearson correlation; 0 when either side has zero spread.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Loss over a batch given per-sample predictive means and clamped variances
/// (one column per sample).
LossBreakdown compute_loss(const BatchMatrix& mean, const BatchMatrix& variance, const BatchMatrix& labels,
                           const LossWeights& weights);

struct LossGradient {
  LossBreakdown loss;
  BatchMatrix d_mean;
  BatchMatrix d_variance;
};

LossGradient loss_gradient(const BatchMatrix& mean, const BatchMatrix& variance, const BatchMatrix& labels,
                           const LossWeights& weights);

struct BackwardResult {
  LossBreakdown loss;
  std::vector<detail::NetworkGradient> gradients;  // one per member
};

/// Loss of the whole ensemble on a batch with dropout masks fixed by (seed, k, m).
LossBreakdown batch_loss(std::span<const TrainingSample> batch, const Ensemble& ensemble,
                         const LossWeights& weights, int samples_per_member, std::uint64_t seed);

/// Exact gradients of batch_loss with respect to every weight and bias.
BackwardResult backward(std::span<const TrainingSample> batch, const Ensemble& ensemble,
                        const LossWeights& weights, int samples_per_member, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Optimization

enum class OptimizerKind { sgd_momentum, adam };

struct TrainConfig {
  int epochs = 40;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int samples_per_member = 5;  // M_train
  int members = 3;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::adam;
  Architecture architecture;

  void validate() const;
};

struct EpochLoss {
  int epoch = 0;
  double pose = 0.0;
  double epi = 0.0;
  double cal = 0.0;
  double total = 0.0;
};

struct TrainingReport {
  std::vector<EpochLoss> epochs;
};

struct TrainResult {
  Ensemble ensemble;
  TrainingReport report;
};

TrainResult train(const Dataset& data, const TrainConfig& config, const LossWeights& weights);

std::string report_to_csv(const TrainingReport& report);

}  // namespace footcast
